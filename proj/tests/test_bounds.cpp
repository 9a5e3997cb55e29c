#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "anosov/bounds.hpp"
#include "anosov/conjugacy.hpp"
#include "anosov/errors.hpp"
#include "anosov/slope.hpp"
#include "anosov/torus.hpp"
#include "anosov/util.hpp"

using namespace anosov;

namespace {

HyperbolicAuto fib_auto() { return eigen_decompose({1, 1, 1, 0}); }

TrigPoly one_wave() {
  std::vector<TrigPoly::Harmonic> h;
  h.push_back({{1, 0}, {0.35, -0.1}, {0.25, 0.15}});
  h.push_back({{-1, 0}, {0.35, 0.1}, {0.25, -0.15}});
  return TrigPoly::checked(h, 2);
}

std::int64_t factorial(int n) {
  std::int64_t r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// count descents over all permutations of {1..r}
std::vector<std::int64_t> descent_census(int r) {
  std::vector<int> perm(r);
  std::iota(perm.begin(), perm.end(), 1);
  std::vector<std::int64_t> counts(r == 0 ? 1 : r, 0);
  do {
    int d = 0;
    for (int i = 0; i + 1 < r; ++i) {
      if (perm[i] > perm[i + 1]) ++d;
    }
    ++counts[d];
  } while (std::next_permutation(perm.begin(), perm.end()));
  return counts;
}

}  // namespace

TEST_CASE("descent counts") {
  CHECK(eulerian(0, 0) == 1);
  for (int r = 1; r <= 8; ++r) CHECK(eulerian(r, 0) == 1);
  CHECK(eulerian(3, 1) == 4);
  CHECK(eulerian(4, 1) == 11);
  CHECK(eulerian(4, 2) == 11);

  SUBCASE("permutation census up to six elements") {
    for (int r = 1; r <= 6; ++r) {
      auto census = descent_census(r);
      for (int k = 0; k < r; ++k) CHECK(eulerian(r, k) == census[k]);
    }
  }

  SUBCASE("row sums are factorials") {
    for (int r = 0; r <= 8; ++r) {
      std::int64_t sum = 0;
      for (int k = 0; k <= r; ++k) sum += eulerian(r, k);
      CHECK(sum == factorial(r));
    }
  }

  SUBCASE("row symmetry and zero padding") {
    for (int r = 1; r <= 10; ++r) {
      for (int k = 0; k < r; ++k) {
        CHECK(eulerian(r, k) == eulerian(r, r - 1 - k));
      }
      CHECK(eulerian(r, r) == 0);
      CHECK(eulerian(r, -1) == 0);
    }
  }

  SUBCASE("largest exact row stays in 64-bit") {
    std::int64_t sum = 0;
    for (int k = 0; k < 20; ++k) {
      CHECK(eulerian(20, k) > 0);
      sum += eulerian(20, k);
    }
    CHECK(sum == factorial(20));
  }

  SUBCASE("guards") {
    CHECK_THROWS_AS(eulerian(21, 0), TooLarge);
    CHECK_THROWS_AS(eulerian(-1, 0), ValidationError);
  }
}

TEST_CASE("polylog-style majorant") {
  double lam = fib_auto().lambda_plus;
  double x = 1.0 / (lam * lam);

  CHECK(sc_majorant(3, lam, 0.0) == 0.0);
  CHECK(sc_majorant(0, lam, 2.5) == 2.5);

  SUBCASE("r = 1 equals the direct series") {
    KahanSum direct;
    for (int n = 0; n < 200; ++n) direct.add((n + 1.0) * ipow(x, n));
    double closed = sc_majorant(1, lam, 1.0);
    CHECK(std::abs(closed - direct.value()) / closed < 1e-10);
  }

  SUBCASE("dominates truncated multi-sums for small r") {
    for (int r = 1; r <= 3; ++r) {
      // product structure: the r-fold sum over n_i <= 50 factorizes
      KahanSum axis;
      for (int n = 0; n <= 50; ++n) {
        axis.add(std::pow(n + 1.0, r) * ipow(x, n));
      }
      double partial = ipow(axis.value(), r);
      CHECK(partial <= sc_majorant(r, lam, 1.0) * (1.0 + 1e-12));
    }
  }

  SUBCASE("scales linearly in M") {
    double one = sc_majorant(2, lam, 1.0);
    CHECK(sc_majorant(2, lam, 3.0) == doctest::Approx(3.0 * one));
  }

  SUBCASE("guards") {
    CHECK_THROWS_AS(sc_majorant(1, 1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(sc_majorant(1, 0.5, 1.0), ValidationError);
    CHECK_THROWS_AS(sc_majorant(-1, 2.0, 1.0), ValidationError);
    CHECK_THROWS_AS(sc_majorant(1, 2.0, -1.0), ValidationError);
  }
}

TEST_CASE("per-order coefficient bound") {
  double lam = fib_auto().lambda_plus;

  CHECK(order_bound(3, 2, 0.0, lam) == 0.0);

  SUBCASE("k = 1 factor by factor") {
    double want = 4.0 * 1.0 * 5.0 * 2.0 * 4.0 * 1.0 * sc_majorant(1, lam, 1.0);
    CHECK(order_bound(1, 2, 1.0, lam) == doctest::Approx(want).epsilon(1e-13));
  }

  SUBCASE("consecutive ratios stay finite and positive") {
    for (int k = 1; k <= 8; ++k) {
      double r = order_bound(k + 1, 2, 1.0, lam) / order_bound(k, 2, 1.0, lam);
      CHECK(r > 0.0);
      CHECK(std::isfinite(r));
    }
  }

  SUBCASE("guards") {
    CHECK_THROWS_AS(order_bound(0, 2, 1.0, lam), ValidationError);
    CHECK_THROWS_AS(order_bound(1, 0, 1.0, lam), ValidationError);
    CHECK_THROWS_AS(order_bound(1, 2, -1.0, lam), ValidationError);
    CHECK_THROWS_AS(order_bound(21, 2, 1.0, lam), TooLarge);
  }
}

TEST_CASE("radius estimate") {
  double lam = fib_auto().lambda_plus;

  SUBCASE("zero forcing is unbounded") {
    RadiusEstimate est = radius_estimate(2, 0.0, lam, 6);
    CHECK(std::isinf(est.radius));
    for (double b : est.per_order) CHECK(b == 0.0);
  }

  SUBCASE("positive and matching the direct min") {
    RadiusEstimate est = radius_estimate(2, 1.0, lam, 8);
    CHECK(est.radius > 0.0);
    CHECK(est.per_order.size() == 8);
    double direct = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 8; ++k) {
      direct = std::min(direct,
                        std::pow(order_bound(k, 2, 1.0, lam), -1.0 / k));
    }
    CHECK(est.radius == doctest::Approx(direct).epsilon(1e-12));
  }

  SUBCASE("doubling the sup-norm halves the radius") {
    double d1 = radius_estimate(2, 1.0, lam, 8).radius;
    double d2 = radius_estimate(2, 2.0, lam, 8).radius;
    CHECK(d2 == doctest::Approx(d1 / 2.0).epsilon(1e-12));
  }

  SUBCASE("survives the full exact range despite overflowing per-order") {
    RadiusEstimate est = radius_estimate(2, 1.0, lam, 20);
    CHECK(est.radius > 0.0);
    CHECK(std::isfinite(est.radius));
  }

  SUBCASE("guards") {
    CHECK_THROWS_AS(radius_estimate(2, 1.0, lam, 0), ValidationError);
    CHECK_THROWS_AS(radius_estimate(2, 1.0, lam, 21), TooLarge);
  }
}

TEST_CASE("grid sup-norm of the forcing") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = one_wave();
  double F = forcing_sup(f, a);
  CHECK(F > 0.0);

  AngleRng rng(91);
  for (int i = 0; i < 200; ++i) {
    TorusPoint psi = random_point(rng);
    Vec2 v = f.eval(psi);
    CHECK(std::abs(dot(v, a.v_plus)) <= F * (1.0 + 1e-9));
    CHECK(std::abs(dot(v, a.v_minus)) <= F * (1.0 + 1e-9));
  }
}

TEST_CASE("computed slope coefficients respect the majorant") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = one_wave();
  SeriesParams prm;
  prm.pmax = 40;
  Evaluator ev(a, f, prm);
  double F = forcing_sup(f, a);
  AngleRng rng(101);

  for (int i = 0; i < 5; ++i) {
    TorusPoint psi = random_point(rng);
    for (int k = 1; k <= 3; ++k) {
      double bound = order_bound(k, f.degree_bound, F, a.lambda_plus);
      for (auto mode :
           {RestrictMode::all_minus, RestrictMode::stem_minus_only}) {
        OrderValue v = slope_coefficient(ev, k, psi, mode);
        CHECK(std::abs(v.value) <= bound);
      }
    }
  }
}
