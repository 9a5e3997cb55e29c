#include "anosov/series.hpp"

#include <algorithm>
#include <cstddef>

#include "anosov/errors.hpp"
#include "anosov/trees.hpp"

namespace anosov {

namespace {

void check_ratio_inputs(const std::vector<double>& a,
                        const std::vector<double>& b) {
  if (a.empty() || b.empty()) {
    throw ValidationError("series ratio needs nonempty inputs");
  }
  if (a.size() != b.size()) {
    throw ValidationError("series ratio needs equal-length inputs");
  }
  if (a[0] != 0.0) {
    throw BadNormalization("numerator series must start at order one");
  }
  if (b[0] != 1.0) {
    throw BadNormalization("denominator series must have unit constant term");
  }
}

}  // namespace

std::vector<double> convolve(const std::vector<double>& x,
                             const std::vector<double>& y) {
  std::size_t n = std::max(x.size(), y.size());
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; i + j < n && j < y.size(); ++j) {
      out[i + j] += x[i] * y[j];
    }
  }
  return out;
}

std::vector<double> series_ratio_recursive(const std::vector<double>& a,
                                           const std::vector<double>& b) {
  check_ratio_inputs(a, b);
  std::vector<double> q(a.size(), 0.0);
  for (std::size_t n = 1; n < a.size(); ++n) {
    double acc = a[n];
    for (std::size_t d = 1; d < n; ++d) acc -= q[d] * b[n - d];
    q[n] = acc;
  }
  return q;
}

std::vector<double> series_ratio_explicit(const std::vector<double>& a,
                                          const std::vector<double>& b) {
  check_ratio_inputs(a, b);
  std::vector<double> q(a.size(), 0.0);
  for (std::size_t n = 1; n < a.size(); ++n) {
    double acc = 0.0;
    for (const auto& parts : compositions(static_cast<int>(n))) {
      double term = a[static_cast<std::size_t>(parts[0])];
      for (std::size_t i = 1; i < parts.size(); ++i) {
        term *= b[static_cast<std::size_t>(parts[i])];
      }
      if (parts.size() % 2 == 0) term = -term;
      acc += term;
    }
    q[n] = acc;
  }
  return q;
}

ChordSeries chord_slope_series(const Evaluator& ev, TorusPoint psi, double t,
                               int K) {
  if (t == 0.0) throw ZeroStep("chord slope needs a nonzero step");
  if (K < 1) throw ValidationError("chord slope needs at least order one");

  TorusPoint moved = shifted(psi, t * ev.automorphism().v_minus);

  ChordSeries out;
  out.a.assign(K + 1, 0.0);
  out.b.assign(K + 1, 0.0);
  out.b[0] = 1.0;
  for (int k = 1; k <= K; ++k) {
    // Differences of displacement vectors: periodic functions of the base
    // point, so wrapping the shifted point is harmless.
    out.a[k] = (ev.order_term(k, +1, moved).value -
                ev.order_term(k, +1, psi).value) /
               t;
    out.b[k] = (ev.order_term(k, -1, moved).value -
                ev.order_term(k, -1, psi).value) /
               t;
  }
  out.q = series_ratio_recursive(out.a, out.b);
  return out;
}

}  // namespace anosov
