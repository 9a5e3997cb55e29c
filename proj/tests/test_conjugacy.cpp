#include "doctest.h"

#include <cmath>
#include <vector>

#include "anosov/conjugacy.hpp"
#include "anosov/errors.hpp"
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

TreeNode leaf(int alpha, int p = 0, bool deriv = false) {
  TreeNode n;
  n.alpha = alpha;
  n.p = p;
  n.deriv = deriv;
  return n;
}

double f_proj(const HyperbolicAuto& a, const TrigPoly& f, int alpha,
              TorusPoint at) {
  return dot(f.eval(at), a.eigvec(alpha));
}

}  // namespace

TEST_CASE("labeled node values match the closed formulas") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = one_wave();
  TorusPoint psi{1.3, 0.4};

  SUBCASE("minus leaf at p = -1") {
    // contributes -lambda_minus^0 * f_-(S^-1 psi)
    double got = labeled_tree_value(a, f, leaf(-1, -1), psi);
    double want = -f_proj(a, f, -1, a.power_apply(psi, -1));
    CHECK(got == doctest::Approx(want).epsilon(1e-14));
  }

  SUBCASE("plus leaf at p = 2") {
    double got = labeled_tree_value(a, f, leaf(+1, 2), psi);
    double want = std::pow(a.lambda_plus, -3.0) *
                  f_proj(a, f, +1, a.power_apply(psi, 2));
    CHECK(got == doctest::Approx(want).epsilon(1e-14));
  }

  SUBCASE("marked plus leaf gains lambda_minus^q and one derivative") {
    int p = 3;
    double got = labeled_tree_value(a, f, leaf(+1, p, true), psi);
    double want = std::pow(a.lambda_plus, -(p + 1.0)) *
                  std::pow(a.lambda_minus, static_cast<double>(p)) *
                  f.projected_derivative(a.v_plus, {a.v_minus},
                                         a.power_apply(psi, p));
    CHECK(got == doctest::Approx(want).epsilon(1e-13));
  }

  SUBCASE("two-node chain multiplies parent derivative by child value") {
    int pa = 2, pb = -2;
    TreeNode chain = leaf(+1, pa);
    chain.children.push_back(leaf(-1, pb));
    double got = labeled_tree_value(a, f, chain, psi);
    double parent = std::pow(a.lambda_plus, -(pa + 1.0)) *
                    f.projected_derivative(a.v_plus, {a.v_minus},
                                           a.power_apply(psi, pa));
    double child = -std::pow(a.lambda_minus, std::abs(pb + 1.0)) *
                   f_proj(a, f, -1, a.power_apply(psi, pa + pb));
    CHECK(got == doctest::Approx(parent * child).epsilon(1e-13));
  }

  SUBCASE("star node divides by the factorial of the child count") {
    TreeNode star = leaf(+1, 0);
    star.children = {leaf(-1, -1), leaf(-1, -1)};
    double got = labeled_tree_value(a, f, star, psi);
    double parent = 0.5 * std::pow(a.lambda_plus, -1.0) *
                    f.projected_derivative(a.v_plus, {a.v_minus, a.v_minus},
                                           psi);
    double child = -f_proj(a, f, -1, a.power_apply(psi, -1));
    CHECK(got == doctest::Approx(parent * child * child).epsilon(1e-13));
  }
}

TEST_CASE("label-sum recursion agrees with brute-force label enumeration") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = two_wave();
  SeriesParams prm;
  prm.pmax = 5;  // small: the brute-force stream stays cheap and nothing clips
  Evaluator ev(a, f, prm);
  TorusPoint psi{2.7, 5.1};

  auto brute = [&](const TreeNode& t, RestrictMode mode) {
    KahanSum s;
    for_each_labeling(t, prm.pmax, mode, [&](const TreeNode& lt) {
      s.add(labeled_tree_value(a, f, lt, psi));
    });
    return s.value();
  };

  SUBCASE("unmarked trees, unrestricted ranges") {
    for (int k = 1; k <= 3; ++k) {
      for (int alpha : {+1, -1}) {
        for (const auto& t : signed_trees(k, alpha)) {
          double direct = brute(t, RestrictMode::none);
          double dp = ev.tree_sum(t, psi, RestrictMode::none).value;
          CHECK(dp == doctest::Approx(direct).epsilon(1e-11));
        }
      }
    }
  }

  SUBCASE("marked trees under both restricted modes") {
    for (int k = 1; k <= 3; ++k) {
      for (const auto& t : marked_trees(k, +1)) {
        for (auto mode :
             {RestrictMode::all_minus, RestrictMode::stem_minus_only}) {
          double direct = brute(t, mode);
          double dp = ev.tree_sum(t, psi, mode).value;
          CHECK(dp == doctest::Approx(direct).epsilon(1e-11));
        }
      }
    }
  }
}

TEST_CASE("first-order displacement equals the direct geometric series") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = one_wave();
  SeriesParams prm;
  prm.pmax = 30;
  Evaluator ev(a, f, prm);
  AngleRng rng(21);

  for (int i = 0; i < 10; ++i) {
    TorusPoint psi = random_point(rng);

    // minus component: sum over p <= -1 of -lambda_minus^{|p+1|} f_-(S^p psi)
    KahanSum minus;
    for (int p = -1; p >= -prm.pmax; --p) {
      minus.add(-std::pow(a.lambda_minus, std::abs(p + 1.0)) *
                f_proj(a, f, -1, a.power_apply(psi, p)));
    }
    CHECK(ev.order_term(1, -1, psi).value ==
          doctest::Approx(minus.value()).epsilon(1e-12));

    // plus component: sum over p >= 0 of lambda_plus^{-(p+1)} f_+(S^p psi)
    KahanSum plus;
    for (int p = 0; p <= prm.pmax; ++p) {
      plus.add(std::pow(a.lambda_plus, -(p + 1.0)) *
               f_proj(a, f, +1, a.power_apply(psi, p)));
    }
    CHECK(ev.order_term(1, +1, psi).value ==
          doctest::Approx(plus.value()).epsilon(1e-12));
  }
}

TEST_CASE("second-order plus term equals the explicit double series") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = one_wave();
  SeriesParams prm;
  prm.pmax = 25;
  Evaluator ev(a, f, prm);
  TorusPoint psi{0.9, 4.2};

  // Two 2-node trees with plus root: child sign + and child sign -.
  KahanSum total;
  for (int pa = 0; pa <= prm.pmax; ++pa) {
    TorusPoint at = a.power_apply(psi, pa);
    double lam_a = std::pow(a.lambda_plus, -(pa + 1.0));
    for (int pb = 0; pb <= prm.pmax; ++pb) {
      double child = std::pow(a.lambda_plus, -(pb + 1.0)) *
                     f_proj(a, f, +1, a.power_apply(psi, pa + pb));
      total.add(lam_a * f.projected_derivative(a.v_plus, {a.v_plus}, at) *
                child);
    }
    for (int pb = -1; pb >= -prm.pmax; --pb) {
      double child = -std::pow(a.lambda_minus, std::abs(pb + 1.0)) *
                     f_proj(a, f, -1, a.power_apply(psi, pa + pb));
      total.add(lam_a * f.projected_derivative(a.v_plus, {a.v_minus}, at) *
                child);
    }
  }
  CHECK(ev.order_term(2, +1, psi).value ==
        doctest::Approx(total.value()).epsilon(1e-12));
}

TEST_CASE("order-1 conjugacy identity holds within the reported tails") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = one_wave();
  SeriesParams prm;
  prm.pmax = 40;
  Evaluator ev(a, f, prm);
  AngleRng rng(31);

  for (int i = 0; i < 100; ++i) {
    TorusPoint psi = random_point(rng);
    TorusPoint spsi = a.apply(psi);
    for (int alpha : {+1, -1}) {
      SeriesTerm at_s = ev.order_term(1, alpha, spsi);
      SeriesTerm at_p = ev.order_term(1, alpha, psi);
      double f_here = f_proj(a, f, alpha, psi);
      double residual = at_s.value - a.lambda(alpha) * at_p.value + f_here;
      double allowed = 2.0 * (at_s.tail_bound +
                              std::abs(a.lambda(alpha)) * at_p.tail_bound) +
                       1e-13;
      CHECK(std::abs(residual) <= allowed);
    }
  }
}

TEST_CASE("doubling pmax moves orders by less than the reported tail") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = two_wave();
  SeriesParams prm40{40, 5, 64};
  SeriesParams prm80{80, 5, 64};
  Evaluator e40(a, f, prm40);
  Evaluator e80(a, f, prm80);
  AngleRng rng(41);

  for (int i = 0; i < 3; ++i) {
    TorusPoint psi = random_point(rng);
    for (int k = 1; k <= 3; ++k) {
      for (int alpha : {+1, -1}) {
        SeriesTerm c40 = e40.order_term(k, alpha, psi);
        SeriesTerm c80 = e80.order_term(k, alpha, psi);
        CHECK(std::abs(c40.value - c80.value) <= c40.tail_bound + 1e-15);
      }
    }
  }
}

TEST_CASE("conjugacy defect shrinks like eps^(K+1)") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = one_wave();
  SeriesParams prm;
  prm.pmax = 40;
  Evaluator ev(a, f, prm);
  const int K = 2;

  std::vector<double> eps_list{0.01, 0.02, 0.04};
  std::vector<double> defect;
  AngleRng rng(51);
  std::vector<TorusPoint> pts;
  for (int i = 0; i < 8; ++i) pts.push_back(random_point(rng));

  for (double eps : eps_list) {
    PerturbedMap map{a, f, eps};
    KahanSum acc;
    for (const auto& psi : pts) {
      TorusPoint lhs = map.apply(ev.conjugate_point(psi, eps, K));
      TorusPoint rhs = ev.conjugate_point(a.apply(psi), eps, K);
      acc.add(toroidal_distance(lhs, rhs));
    }
    defect.push_back(acc.value() / static_cast<double>(pts.size()));
  }
  CHECK(loglog_slope(eps_list, defect) >= K + 0.7);
}

TEST_CASE("displacement vanishes at eps = 0 and scales at first order") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = one_wave();
  Evaluator ev(a, f, SeriesParams{});
  TorusPoint psi{1.0, 2.0};

  Vec2 zero = ev.displacement(psi, 0.0, 3);
  CHECK(zero.x == 0.0);
  CHECK(zero.y == 0.0);

  // at tiny eps the first order dominates
  double eps = 1e-6;
  Vec2 d = ev.displacement(psi, eps, 3);
  CHECK(d.x == doctest::Approx(eps * ev.order_term(1, +1, psi).value)
                   .epsilon(1e-5));
  CHECK(d.y == doctest::Approx(eps * ev.order_term(1, -1, psi).value)
                   .epsilon(1e-5));
}

TEST_CASE("order cache returns identical values") {
  HyperbolicAuto a = fib_auto();
  Evaluator ev(a, one_wave(), SeriesParams{});
  TorusPoint psi{0.123, 4.56};
  SeriesTerm first = ev.order_term(2, +1, psi);
  SeriesTerm second = ev.order_term(2, +1, psi);
  CHECK(first.value == second.value);
  CHECK(first.tail_bound == second.tail_bound);
}

TEST_CASE("evaluator guards") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = one_wave();
  Evaluator ev(a, f, SeriesParams{});
  TorusPoint psi{1.0, 1.0};

  CHECK_THROWS_AS(ev.order_term(0, +1, psi), TooLarge);
  CHECK_THROWS_AS(ev.order_term(6, +1, psi), TooLarge);  // default k_max = 5
  CHECK_THROWS_AS(ev.order_term(2, 0, psi), ValidationError);

  TreeNode unmarked = leaf(+1);
  CHECK_THROWS_AS(ev.tree_sum(unmarked, psi, RestrictMode::stem_minus_only),
                  ValidationError);

  TreeNode double_marked = leaf(+1, 0, true);
  double_marked.children.push_back(leaf(-1, 0, true));
  CHECK_THROWS_AS(ev.tree_sum(double_marked, psi, RestrictMode::all_minus),
                  ValidationError);

  CHECK_THROWS_AS(Evaluator(a, f, SeriesParams{0, 5, 64}), ValidationError);
  CHECK_THROWS_AS(Evaluator(a, f, SeriesParams{40, 0, 64}), ValidationError);
  CHECK_THROWS_AS(Evaluator(a, f, SeriesParams{40, 5, 65}), ValidationError);
}

TEST_CASE("batch evaluation equals one-at-a-time evaluation") {
  HyperbolicAuto a = fib_auto();
  TrigPoly f = two_wave();
  SeriesParams prm;
  prm.pmax = 15;
  Evaluator ev(a, f, prm);
  TorusPoint psi{3.3, 0.2};

  auto trees = signed_trees(3, +1);
  auto batch = ev.tree_sums(trees, psi, RestrictMode::none);
  for (std::size_t i = 0; i < trees.size(); ++i) {
    SeriesTerm single = ev.tree_sum(trees[i], psi, RestrictMode::none);
    CHECK(batch[i].value == single.value);
    CHECK(batch[i].tail_bound == single.tail_bound);
  }
}
