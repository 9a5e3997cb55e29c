#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "anosov/conjugacy.hpp"
#include "anosov/errors.hpp"
#include "anosov/series.hpp"
#include "anosov/slope.hpp"
#include "anosov/torus.hpp"
#include "anosov/trees.hpp"
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

TrigPoly two_wave() {
  std::vector<TrigPoly::Harmonic> h;
  h.push_back({{1, 0}, {0.35, -0.1}, {0.25, 0.15}});
  h.push_back({{-1, 0}, {0.35, 0.1}, {0.25, -0.15}});
  h.push_back({{0, 1}, {-0.15, 0.2}, {0.1, 0.1}});
  h.push_back({{0, -1}, {-0.15, -0.2}, {0.1, -0.1}});
  return TrigPoly::checked(h, 2);
}

TrigPoly negated(const TrigPoly& f) {
  std::vector<TrigPoly::Harmonic> h = f.terms;
  for (auto& t : h) {
    t.c1 = -t.c1;
    t.c2 = -t.c2;
  }
  return TrigPoly::checked(h, f.degree_bound);
}

double dminus_f(const HyperbolicAuto& a, const TrigPoly& f, int alpha,
                TorusPoint at) {
  return f.projected_derivative(a.eigvec(alpha), {a.v_minus}, at);
}

}  // namespace

TEST_CASE("derivative classes partition the ordered marked trees") {
  for (int n = 1; n <= 5; ++n) {
    for (int alpha : {+1, -1}) {
      const auto& classes = derivative_classes(n, alpha);
      int total = 0;
      std::string prev;
      for (const auto& cls : classes) {
        CHECK(cls.multiplicity >= 1);
        CHECK(node_count(cls.representative) == n);
        CHECK(tree_key(cls.representative, false) == cls.key);
        CHECK(tree_key(canonical(cls.representative, false), false) ==
              cls.key);
        if (!prev.empty()) CHECK(prev < cls.key);
        prev = cls.key;
        total += cls.multiplicity;
      }
      CHECK(total ==
            static_cast<int>(marked_trees(n, alpha).size()));
    }
  }

  CHECK(derivative_classes(1, +1).size() == 1);
  CHECK(derivative_classes(1, +1)[0].key == "+D()");

  // mixed-sign star children collapse into one class of two orderings
  bool found = false;
  for (const auto& cls : derivative_classes(3, +1)) {
    if (cls.key == "+D(+()-())") {
      CHECK(cls.multiplicity == 2);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("class grouping reproduces the plain sum over ordered trees") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = two_wave();
  SeriesParams prm;
  prm.pmax = 20;
  Evaluator ev(a, f, prm);
  TorusPoint psi{1.8, 0.6};

  for (int n = 1; n <= 4; ++n) {
    for (auto mode :
         {RestrictMode::all_minus, RestrictMode::stem_minus_only}) {
      KahanSum plain;
      for (const auto& t : marked_trees(n, +1)) {
        plain.add(ev.tree_sum(t, psi, mode).value);
      }
      OrderValue grouped = slope_coefficient(ev, n, psi, mode);
      CHECK(grouped.value ==
            doctest::Approx(plain.value()).epsilon(1e-11));
      CHECK(grouped.classes.size() == derivative_classes(n, +1).size());
    }
  }
}

TEST_CASE("first slope coefficient equals the single geometric sum") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = one_wave();
  SeriesParams prm;
  prm.pmax = 35;
  Evaluator ev(a, f, prm);
  AngleRng rng(81);

  for (int i = 0; i < 5; ++i) {
    TorusPoint psi = random_point(rng);
    KahanSum hand;
    for (int p = 0; p <= prm.pmax; ++p) {
      hand.add(ipow(a.lambda_plus, -(p + 1)) * ipow(a.lambda_minus, p) *
               dminus_f(a, f, +1, a.power_apply(psi, p)));
    }
    OrderValue got = slope_coefficient(ev, 1, psi, RestrictMode::all_minus);
    CHECK(got.value == doctest::Approx(hand.value()).epsilon(1e-13));

    // single plus node: both restricted modes coincide
    CHECK(slope_coefficient(ev, 1, psi, RestrictMode::stem_minus_only).value ==
          got.value);
  }
}

TEST_CASE("two-node class with marked minus child matches a double loop") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = one_wave();
  SeriesParams prm;
  prm.pmax = 30;
  Evaluator ev(a, f, prm);
  TorusPoint psi{2.4, 4.9};

  const DerivClass* cls = nullptr;
  for (const auto& c : derivative_classes(2, +1)) {
    if (c.key == "+(-D())") cls = &c;
  }
  REQUIRE(cls != nullptr);
  CHECK(cls->multiplicity == 1);

  // restricted child range keeps the accumulated shift non-negative
  KahanSum hand;
  for (int p = 0; p <= prm.pmax; ++p) {
    double outer = ipow(a.lambda_plus, -(p + 1)) *
                   dminus_f(a, f, +1, a.power_apply(psi, p));
    for (int b = -p; b <= -1; ++b) {
      double inner = -ipow(a.lambda_minus, -b - 1) *
                     ipow(a.lambda_minus, p + b) *
                     dminus_f(a, f, -1, a.power_apply(psi, p + b));
      hand.add(outer * inner);
    }
  }

  for (auto mode : {RestrictMode::all_minus, RestrictMode::stem_minus_only}) {
    SeriesTerm got = class_value(ev, *cls, psi, mode);
    CHECK(std::abs(got.value - hand.value()) <= 1e-13);
  }
}

TEST_CASE("order-2 rearrangement: both summation routes agree") {
  HyperbolicAuto a = fib_auto();
  TorusPoint psi{0.7, 3.1};

  SUBCASE("one-harmonic forcing") {
    Order2Cancellation r = order2_cancellation_check(a, one_wave(), psi, 30);
    CHECK(std::abs(r.lhs) > 1e-6);  // the series is genuinely nonzero
    CHECK(r.abs_diff < 1e-12);
  }

  SUBCASE("two-harmonic forcing") {
    Order2Cancellation r = order2_cancellation_check(a, two_wave(), psi, 30);
    CHECK(r.abs_diff < 1e-12);
  }

  SUBCASE("zero forcing") {
    TrigPoly zero = TrigPoly::checked({}, 2);
    Order2Cancellation r = order2_cancellation_check(a, zero, psi, 30);
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == 0.0);
    CHECK(r.abs_diff == 0.0);
  }

  SUBCASE("pmax guard") {
    CHECK_THROWS_AS(order2_cancellation_check(a, one_wave(), psi, 0),
                    ValidationError);
    CHECK_THROWS_AS(order2_cancellation_check(a, one_wave(), psi, 65),
                    ValidationError);
  }
}

TEST_CASE("assembled slope report") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = one_wave();
  Evaluator ev(a, f, SeriesParams{});
  TorusPoint psi{1.0, 2.5};

  SUBCASE("eps = 0 gives the unperturbed direction") {
    SlopeReport rep = stable_slope(ev, psi, 0.0, 3, RestrictMode::all_minus);
    CHECK(rep.slope == 0.0);
    CHECK(rep.tangent.x == doctest::Approx(a.v_minus.x).epsilon(1e-15));
    CHECK(rep.tangent.y == doctest::Approx(a.v_minus.y).epsilon(1e-15));
  }

  SUBCASE("K = 1 is the single first-order term") {
    double eps = 0.02;
    SlopeReport rep = stable_slope(ev, psi, eps, 1, RestrictMode::all_minus);
    OrderValue c1 = slope_coefficient(ev, 1, psi, RestrictMode::all_minus);
    CHECK(rep.slope == doctest::Approx(eps * c1.value).epsilon(1e-15));
  }

  SUBCASE("per-order assembly and unit tangent") {
    double eps = 0.03;
    SlopeReport rep = stable_slope(ev, psi, eps, 3, RestrictMode::all_minus);
    REQUIRE(rep.per_order.size() == 3);
    KahanSum s;
    for (int k = 1; k <= 3; ++k) {
      s.add(ipow(eps, k) * rep.per_order[k - 1].value);
    }
    CHECK(rep.slope == doctest::Approx(s.value()).epsilon(1e-15));
    CHECK(norm(rep.tangent) == doctest::Approx(1.0).epsilon(1e-14));
    // tangent parallel to slope * v_plus + v_minus
    Vec2 dir = rep.slope * a.v_plus + a.v_minus;
    CHECK(cross(rep.tangent, dir) == doctest::Approx(0.0).epsilon(1e-14));
  }

  SUBCASE("radius enforcement") {
    SlopeOptions opts;
    opts.radius = 0.01;
    CHECK_THROWS_AS(
        stable_slope(ev, psi, 0.02, 2, RestrictMode::all_minus, opts),
        RadiusExceeded);
    opts.force = true;
    SlopeReport rep =
        stable_slope(ev, psi, 0.02, 2, RestrictMode::all_minus, opts);
    CHECK(std::isfinite(rep.slope));
  }

  SUBCASE("guards") {
    CHECK_THROWS_AS(stable_slope(ev, psi, 0.01, 0, RestrictMode::all_minus),
                    ValidationError);
  }
}

TEST_CASE("slope depends only on the product of eps and the forcing") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = two_wave();
  Evaluator pos(a, f, SeriesParams{});
  Evaluator neg(a, negated(f), SeriesParams{});
  TorusPoint psi{3.9, 1.2};

  for (auto mode : {RestrictMode::all_minus, RestrictMode::stem_minus_only}) {
    SlopeReport rp = stable_slope(pos, psi, 0.03, 4, mode);
    SlopeReport rn = stable_slope(neg, psi, -0.03, 4, mode);
    CHECK(std::abs(rp.slope - rn.slope) <= 1e-12);
  }
}

TEST_CASE("stem shifts stay non-negative in every contributing labeling") {
  for (const auto& cls : derivative_classes(3, +1)) {
    for (auto mode :
         {RestrictMode::all_minus, RestrictMode::stem_minus_only}) {
      for_each_labeling(cls.representative, 4, mode, [&](const TreeNode& lt) {
        NodePath stem_end = marked_path(lt);
        NodePath prefix;
        long long q = node_at(lt, prefix)->p;
        CHECK(q >= 0);  // plus root
        for (int step : stem_end) {
          prefix.push_back(step);
          q += node_at(lt, prefix)->p;
          CHECK(q >= 0);
        }
      });
    }
  }
}

TEST_CASE("chord slopes approach the tangent coefficient linearly") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = one_wave();
  SeriesParams prm;
  prm.pmax = 40;
  Evaluator ev(a, f, prm);
  TorusPoint psi{2.0, 0.8};

  double v1 = slope_coefficient(ev, 1, psi, RestrictMode::all_minus).value;
  double g1 = std::abs(chord_slope_series(ev, psi, 1e-2, 1).q[1] - v1);
  double g2 = std::abs(chord_slope_series(ev, psi, 5e-3, 1).q[1] - v1);
  CHECK(g1 > 0.0);
  double ratio = g1 / g2;
  CHECK(ratio >= 1.5);
  CHECK(ratio <= 2.5);
}

TEST_CASE("doubling the label cutoff stays inside the reported tail") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = two_wave();
  Evaluator e30(a, f, SeriesParams{30, 5, 64});
  Evaluator e60(a, f, SeriesParams{60, 5, 64});
  TorusPoint psi{5.5, 2.2};

  for (int n = 1; n <= 3; ++n) {
    OrderValue c30 = slope_coefficient(e30, n, psi, RestrictMode::all_minus);
    OrderValue c60 = slope_coefficient(e60, n, psi, RestrictMode::all_minus);
    CHECK(std::abs(c30.value - c60.value) <= c30.tail_bound + 1e-15);
  }
}
