#include "anosov/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "anosov/errors.hpp"
#include "anosov/util.hpp"

namespace anosov {

namespace {

constexpr int kMaxRow = 20;  // row sums stay within signed 64-bit

const std::vector<std::vector<std::int64_t>>& descent_table() {
  static const std::vector<std::vector<std::int64_t>> table = [] {
    std::vector<std::vector<std::int64_t>> t(kMaxRow + 1);
    t[0] = {1};
    for (int r = 1; r <= kMaxRow; ++r) {
      const auto& prev = t[r - 1];
      auto at = [&](int k) -> std::int64_t {
        return k >= 0 && k < static_cast<int>(prev.size()) ? prev[k] : 0;
      };
      t[r].assign(r, 0);
      for (int k = 0; k < r; ++k) {
        t[r][k] = (k + 1) * at(k) + (r - k) * at(k - 1);
      }
    }
    return t;
  }();
  return table;
}

void check_lambda(double lambda_plus) {
  if (!(lambda_plus > 1.0)) {
    throw ValidationError("expanding eigenvalue must exceed one");
  }
}

// P_r(x) = sum_k eulerian(r, k) x^k
double descent_poly(int r, double x) {
  KahanSum poly;
  for (int j = 0; j < std::max(r, 1); ++j) {
    poly.add(static_cast<double>(eulerian(r, j)) * ipow(x, j));
  }
  return poly.value();
}

// log of order_bound(k, ...)
double log_order_bound(int k, int N, double F, double lambda_plus) {
  if (k < 1) throw ValidationError("coefficient bound needs order >= 1");
  if (N < 1) throw ValidationError("frequency bound must be positive");
  if (F < 0.0) throw ValidationError("sup-norm must be non-negative");
  check_lambda(lambda_plus);

  double x = 1.0 / (lambda_plus * lambda_plus);
  double log_sc =
      k * std::log(descent_poly(k, x)) - k * (k + 1.0) * std::log1p(-x);
  return k * (std::log(2.0 * N) + std::log(F) + std::log(2.0 * N + 1.0) +
              3.0 * std::log(2.0)) +
         std::log(static_cast<double>(k)) + log_sc;
}

}  // namespace

std::int64_t eulerian(int r, int k) {
  if (r < 0) throw ValidationError("descent counts need r >= 0");
  if (r > kMaxRow) throw TooLarge("descent counts overflow past row 20");
  const auto& row = descent_table()[r];
  if (k < 0 || k >= static_cast<int>(row.size())) return 0;
  return row[k];
}

double sc_majorant(int r, double lambda_plus, double M) {
  if (r < 0) throw ValidationError("stem length must be non-negative");
  if (M < 0.0) throw ValidationError("sup bound must be non-negative");
  check_lambda(lambda_plus);
  if (r == 0 || M == 0.0) return M;

  double x = 1.0 / (lambda_plus * lambda_plus);
  return M * ipow(descent_poly(r, x), r) / ipow(1.0 - x, r * (r + 1));
}

double order_bound(int k, int N, double F, double lambda_plus) {
  if (F == 0.0) {
    // avoid log(0); the product of factors is exactly zero
    if (k < 1) throw ValidationError("coefficient bound needs order >= 1");
    check_lambda(lambda_plus);
    return 0.0;
  }
  return std::exp(log_order_bound(k, N, F, lambda_plus));
}

RadiusEstimate radius_estimate(int N, double F, double lambda_plus,
                               int k_max) {
  if (k_max < 1) throw ValidationError("radius estimate needs k_max >= 1");
  if (k_max > kMaxRow) throw TooLarge("radius estimate capped at order 20");

  RadiusEstimate est;
  est.N = N;
  est.F = F;
  est.lambda_plus = lambda_plus;

  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    if (F == 0.0) {
      est.per_order.push_back(order_bound(k, N, F, lambda_plus));
      continue;
    }
    double lg = log_order_bound(k, N, F, lambda_plus);
    est.per_order.push_back(std::exp(lg));
    best = std::min(best, std::exp(-lg / k));
  }
  est.radius = best;  // stays +infinity when F == 0
  return est;
}

double forcing_sup(const TrigPoly& f, const HyperbolicAuto& a, int n) {
  return std::max(f.grid_sup(a.v_plus, n), f.grid_sup(a.v_minus, n));
}

}  // namespace anosov
