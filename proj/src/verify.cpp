#include "anosov/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "anosov/bounds.hpp"
#include "anosov/conjugacy.hpp"
#include "anosov/errors.hpp"
#include "anosov/oracle.hpp"
#include "anosov/series.hpp"
#include "anosov/slope.hpp"
#include "anosov/trees.hpp"
#include "anosov/util.hpp"

namespace anosov {

namespace {

// Values smaller than this are treated as exactly zero when judging decay
// fits: a zero forcing makes every residual vanish and a log-log fit
// meaningless, so the criterion passes trivially instead.
constexpr double kZeroFloor = 1e-13;

std::string g3(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

AngleRng criterion_rng(const RunConfig& cfg, int id) {
  return AngleRng(cfg.seed + 1000003ULL * static_cast<std::uint64_t>(id));
}

std::vector<TorusPoint> random_points(const RunConfig& cfg, int id, int n) {
  AngleRng rng = criterion_rng(cfg, id);
  std::vector<TorusPoint> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) pts.push_back(random_point(rng));
  return pts;
}

SeriesParams params_for(const RunConfig& cfg, int k_max) {
  SeriesParams prm;
  prm.pmax = cfg.pmax;
  prm.k_max = k_max;
  return prm;
}

bool all_below(const std::vector<double>& v, double floor) {
  return std::all_of(v.begin(), v.end(),
                     [floor](double x) { return std::abs(x) < floor; });
}

// ---- criterion 1: eigen structure ----------------------------------------

CriterionResult check_eigen(const HyperbolicAuto& a, const RunConfig& cfg) {
  Mat2 m = a.real_matrix();
  double worst = 0.0;
  for (int alpha : {+1, -1}) {
    Vec2 v = a.eigvec(alpha);
    Vec2 r = m * v - a.lambda(alpha) * v;
    worst = std::max(worst, norm(r));
    worst = std::max(worst, std::abs(norm(v) - 1.0));
  }
  worst = std::max(worst, std::abs(dot(a.v_plus, a.v_minus)));
  worst = std::max(worst,
                   std::abs(a.lambda_plus * a.lambda_minus - a.det));
  bool fib = cfg.matrix[0][0] == 1 && cfg.matrix[0][1] == 1 &&
             cfg.matrix[1][0] == 1 && cfg.matrix[1][1] == 0;
  if (fib) {
    double s5 = std::sqrt(5.0);
    worst = std::max(worst, std::abs(a.lambda_plus - (1.0 + s5) / 2.0));
    worst = std::max(worst, std::abs(a.lambda_minus - (1.0 - s5) / 2.0));
  }
  return {1, "eigen-structure", worst < 1e-12,
          "max defect " + g3(worst) + " (tol 1e-12)" +
              (fib ? ", closed-form eigenvalues included" : "")};
}

// ---- criterion 2: tree combinatorics --------------------------------------

CriterionResult check_combinatorics() {
  bool ok = true;
  std::string fail;

  // Shape counts against the Catalan numbers.
  for (int k = 1; k <= 7 && ok; ++k) {
    if (static_cast<long long>(tree_shapes(k).size()) != catalan(k - 1)) {
      ok = false;
      fail = "shape count mismatch at k=" + std::to_string(k);
    }
  }
  if (ok && tree_shapes(4).size() != 5) {
    ok = false;
    fail = "k=4 shape count is not 5";
  }

  // Cut counts: 2^(minus-labeled stem nodes below the top).
  for (int k = 1; k <= 5 && ok; ++k) {
    for (int root_alpha : {+1, -1}) {
      for (const auto& t : marked_trees(k, root_alpha)) {
        auto stem = main_stem(t);
        int s = 0;
        for (std::size_t i = 1; i < stem.size(); ++i) {
          if (node_at(t, stem[i])->alpha < 0) ++s;
        }
        if (static_cast<long long>(cuts_of(t).size()) != (1LL << s)) {
          ok = false;
          fail = "cut count != 2^s at k=" + std::to_string(k);
          break;
        }
      }
      if (!ok) break;
    }
  }

  // Reordering counts: product of child-count factorials, via an
  // independent walk over the node paths.
  for (int k = 1; k <= 6 && ok; ++k) {
    for (const auto& t : tree_shapes(k)) {
      long long expect = 1;
      for (const auto& path : preorder_paths(t)) {
        long long c = static_cast<long long>(node_at(t, path)->children.size());
        for (long long i = 2; i <= c; ++i) expect *= i;
      }
      if (sibling_orderings(t) != expect) {
        ok = false;
        fail = "reordering count mismatch at k=" + std::to_string(k);
        break;
      }
    }
  }

  // Breaking-class partition, exhaustively at small order and label bound:
  // every labeled product tuple is produced by exactly one (tree, cut) pair,
  // and the class of the source tree is well defined per product.
  const int bound = 3;
  for (int n = 2; n <= 4 && ok; ++n) {
    std::set<std::string> reference;
    for (const auto& p : product_tuples(n, bound)) {
      reference.insert(product_key(p, true));
    }
    std::map<std::string, std::string> owner;
    std::set<std::string> produced;
    for (const auto& t : labeled_marked_trees(n, +1, bound)) {
      std::string cls = tree_key(canonical(t, false), false);
      for (const auto& cut : cuts_of(t)) {
        std::string pk = product_key(break_at(t, cut), true);
        produced.insert(pk);
        auto it = owner.find(pk);
        if (it == owner.end()) {
          owner.emplace(pk, cls);
        } else if (it->second != cls) {
          ok = false;
          fail = "product tuple claimed by two classes at n=" +
                 std::to_string(n);
        }
      }
    }
    if (ok && produced != reference) {
      ok = false;
      fail = "breakings do not cover the tuples at n=" + std::to_string(n);
    }
  }

  return {2, "tree-combinatorics", ok,
          ok ? "Catalan k<=7, cuts=2^s k<=5, reorder counts k<=6, "
               "partition n<=4 bound 3"
             : fail};
}

// ---- criterion 3: series inversion kernel ---------------------------------

CriterionResult check_kernel(const RunConfig& cfg) {
  AngleRng rng = criterion_rng(cfg, 3);
  double worst_ratio = 0.0, worst_conv = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(8), b(8);
    a[0] = 0.0;  // ratio kernel contract: numerator starts at order one
    b[0] = 1.0;
    for (int i = 1; i < 8; ++i) {
      a[i] = 2.0 * rng.unit() - 1.0;
      b[i] = 2.0 * rng.unit() - 1.0;
    }
    auto qr = series_ratio_recursive(a, b);
    auto qe = series_ratio_explicit(a, b);
    for (int i = 0; i < 8; ++i) {
      worst_ratio = std::max(worst_ratio, std::abs(qr[i] - qe[i]));
    }
    auto back = convolve(qr, b);
    for (int i = 0; i < 8; ++i) {
      worst_conv = std::max(worst_conv, std::abs(back[i] - a[i]));
    }
  }
  bool ok = worst_ratio < 1e-12 && worst_conv < 1e-13;
  return {3, "series-inversion-kernel", ok,
          "explicit vs recursive " + g3(worst_ratio) +
              " (tol 1e-12), reconvolution " + g3(worst_conv) +
              " (tol 1e-13), 100 length-8 series"};
}

// ---- criterion 4: order-1 identity ----------------------------------------

CriterionResult check_order1(const HyperbolicAuto& a, const TrigPoly& f,
                             const RunConfig& cfg) {
  Evaluator ev(a, f, params_for(cfg, 1));
  double worst = 0.0;
  bool ok = true;
  for (const auto& psi : random_points(cfg, 4, 100)) {
    TorusPoint spsi = a.apply(psi);
    for (int alpha : {+1, -1}) {
      SeriesTerm at_s = ev.order_term(1, alpha, spsi);
      SeriesTerm at_p = ev.order_term(1, alpha, psi);
      double f_alpha = dot(f.eval(psi), a.eigvec(alpha));
      double defect =
          std::abs(at_s.value - a.lambda(alpha) * at_p.value + f_alpha);
      double allowed = 2.0 * (at_s.tail_bound + at_p.tail_bound) + 1e-13;
      worst = std::max(worst, defect - allowed);
      if (defect > allowed) ok = false;
    }
  }
  return {4, "order-1-identity", ok,
          "max excess over 2x tail allowance " + g3(worst) +
              " at 100 points"};
}

// ---- criterion 5: conjugacy residual order ---------------------------------

CriterionResult check_conjugacy_order(const HyperbolicAuto& a,
                                      const TrigPoly& f,
                                      const RunConfig& cfg) {
  const int K = 3;
  const std::vector<double> eps_list = {0.005, 0.01, 0.02, 0.04};
  Evaluator ev(a, f, params_for(cfg, K));
  auto pts = random_points(cfg, 5, 5);

  std::vector<double> residuals;
  for (double eps : eps_list) {
    PerturbedMap map{a, f, eps};
    double worst = 0.0;
    for (const auto& psi : pts) {
      TorusPoint lhs = map.apply(ev.conjugate_point(psi, eps, K));
      TorusPoint rhs = ev.conjugate_point(a.apply(psi), eps, K);
      worst = std::max(worst, toroidal_distance(lhs, rhs));
    }
    residuals.push_back(worst);
  }
  if (all_below(residuals, kZeroFloor)) {
    return {5, "conjugacy-residual-order", true,
            "all residuals below " + g3(kZeroFloor) + "; vacuous fit"};
  }
  double slope = loglog_slope(eps_list, residuals);
  bool ok = slope >= K + 0.7;
  return {5, "conjugacy-residual-order", ok,
          "log-log slope " + g3(slope) + " (need >= " + g3(K + 0.7) +
              "), residuals " + g3(residuals.front()) + ".." +
              g3(residuals.back())};
}

// ---- criterion 6: order-2 cancellation -------------------------------------

CriterionResult check_cancellation(const HyperbolicAuto& a, const TrigPoly& f,
                                   const RunConfig& cfg) {
  double worst = 0.0;
  for (const auto& psi : random_points(cfg, 6, 20)) {
    worst = std::max(worst, order2_cancellation_check(a, f, psi, 30).abs_diff);
  }
  bool ok = worst < 1e-12;
  return {6, "order-2-cancellation", ok,
          "max |lhs-rhs| " + g3(worst) + " (tol 1e-12) at pmax 30"};
}

// ---- criteria 7 + 8: finite-step limit and the slope-vs-oracle fit ---------

struct ModeVerdict {
  bool pass = false;
  std::string detail;
  double fit = 0.0;
};

ModeVerdict finite_step_for_mode(const Evaluator& ev,
                                 const std::vector<TorusPoint>& pts,
                                 RestrictMode mode) {
  // Judged on the worst gap over the sample: pointwise halving ratios
  // fluctuate (each halving of t resolves new orbit points along the
  // contracting line), while the peak gap scales cleanly with t.
  const double t1 = 1e-2, t2 = 5e-3;
  double max_g1[3] = {0.0, 0.0, 0.0};
  double max_g2[3] = {0.0, 0.0, 0.0};
  double lo = 1e300, hi = 0.0;
  for (const auto& psi : pts) {
    ChordSeries c1 = chord_slope_series(ev, psi, t1, 2);
    ChordSeries c2 = chord_slope_series(ev, psi, t2, 2);
    for (int n = 1; n <= 2; ++n) {
      double limit = slope_coefficient(ev, n, psi, mode).value;
      double g1 = std::abs(c1.q[n] - limit);
      double g2 = std::abs(c2.q[n] - limit);
      max_g1[n] = std::max(max_g1[n], g1);
      max_g2[n] = std::max(max_g2[n], g2);
      if (g1 < 1e-14 && g2 < 1e-14) continue;  // exact limit already
      double ratio = g1 / std::max(g2, 1e-300);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  ModeVerdict v;
  v.pass = true;
  bool any = false;
  std::string ratios;
  for (int n = 1; n <= 2; ++n) {
    if (max_g1[n] < 1e-14 && max_g2[n] < 1e-14) continue;  // identically exact
    any = true;
    double ratio = max_g1[n] / std::max(max_g2[n], 1e-300);
    if (ratio < 1.6 || ratio > 2.4) v.pass = false;
    if (!ratios.empty()) ratios += ", ";
    ratios += "n=" + std::to_string(n) + ": " + g3(ratio);
  }
  v.detail = any ? "peak-gap halving ratios " + ratios +
                       " (need within [1.6, 2.4]; pointwise spread [" +
                       g3(lo) + ", " + g3(hi) + "])"
                 : "all gaps vanish; vacuous";
  return v;
}

ModeVerdict oracle_fit_for_mode(const Evaluator& ev, const HyperbolicAuto& a,
                                const TrigPoly& f,
                                const std::vector<TorusPoint>& pts,
                                const std::vector<double>& eps_list,
                                RestrictMode mode) {
  const int K = 2;
  std::vector<double> errs;
  for (double eps : eps_list) {
    PerturbedMap map{a, f, eps};
    double worst = 0.0;
    for (const auto& psi : pts) {
      double series = stable_slope(ev, psi, eps, K, mode).slope;
      TorusPoint image = ev.conjugate_point(psi, eps, K + 2);
      double truth = stable_direction(map, image, 40).slope;
      worst = std::max(worst, std::abs(series - truth));
    }
    errs.push_back(worst);
  }
  ModeVerdict v;
  if (all_below(errs, kZeroFloor)) {
    v.pass = true;
    v.fit = 1e300;  // exact agreement
    v.detail = "errors all below " + g3(kZeroFloor) + "; vacuous fit";
    return v;
  }
  v.fit = loglog_slope(eps_list, errs);
  v.pass = v.fit >= K + 0.6;
  v.detail = "fit " + g3(v.fit) + " (need >= " + g3(K + 0.6) + "), errors " +
             g3(errs.front()) + ".." + g3(errs.back());
  return v;
}

// ---- criterion 9: majorant bounds ------------------------------------------

CriterionResult check_bounds(const HyperbolicAuto& a, const TrigPoly& f,
                             const RunConfig& cfg, RestrictMode mode) {
  bool ok = true;
  std::string fail;

  Evaluator ev(a, f, params_for(cfg, 4));
  double F = forcing_sup(f, a);
  auto pts = random_points(cfg, 9, 20);
  double worst_ratio = 0.0;
  for (int k = 1; k <= 4 && ok; ++k) {
    double bound = order_bound(k, f.degree_bound, F, a.lambda_plus);
    for (const auto& psi : pts) {
      double val = std::abs(slope_coefficient(ev, k, psi, mode).value);
      if (bound > 0.0) worst_ratio = std::max(worst_ratio, val / bound);
      if (val > bound) {
        ok = false;
        fail = "coefficient exceeds its majorant at k=" + std::to_string(k);
        break;
      }
    }
  }

  if (ok) {
    for (int r = 0; r <= 8; ++r) {
      long long sum = 0, fact = 1;
      for (int k = 0; k < std::max(r, 1); ++k) sum += eulerian(r, k);
      for (int i = 2; i <= r; ++i) fact *= i;
      if (sum != fact) {
        ok = false;
        fail = "descent-count row sum != r! at r=" + std::to_string(r);
        break;
      }
    }
  }

  if (ok) {
    double direct = 0.0;
    double x = 1.0 / (a.lambda_plus * a.lambda_plus);
    for (int n = 199; n >= 0; --n) direct += (n + 1) * std::pow(x, n);
    double closed = sc_majorant(1, a.lambda_plus, 1.0);
    double rel = std::abs(closed - direct) / direct;
    if (rel > 1e-10 || closed + 1e-15 < direct) {
      ok = false;
      fail = "closed-form majorant vs 200-term direct sum, rel " + g3(rel);
    }
  }

  return {9, "majorant-bounds", ok,
          ok ? "coefficient/majorant ratio <= " + g3(worst_ratio) +
                   " (k<=4, 20 points), row sums r<=8 exact, r=1 closed form "
                   "matches direct sum"
             : fail};
}

// ---- criterion 10: oracle self-consistency ---------------------------------

CriterionResult check_oracle(const HyperbolicAuto& a, const TrigPoly& f,
                             const RunConfig& cfg) {
  const double eps = 0.02;
  const int K = 4;
  PerturbedMap map{a, f, eps};
  bool ok = true;
  std::string fail;

  double worst_residual = 0.0;
  for (const auto& psi : random_points(cfg, 10, 50)) {
    OracleResult orc = stable_direction(map, psi, 40);
    worst_residual = std::max(worst_residual, orc.residual);
    if (orc.residual >= 1e-8) {
      ok = false;
      fail = "invariance residual " + g3(orc.residual) + " (tol 1e-8)";
      break;
    }
    if (std::abs(orc.multiplier) >= 1.0) {
      ok = false;
      fail = "contraction multiplier " + g3(orc.multiplier) + " not < 1";
      break;
    }
  }

  double worst_fd = 0.0;
  if (ok) {
    Evaluator ev(a, f, params_for(cfg, K + 2));
    double tol = std::max(1e-6, 10.0 * std::pow(eps, K + 1));
    for (const auto& psi : random_points(cfg, 11, 5)) {
      FdSlope fd = fd_manifold_slope(ev, psi, eps, {4e-3, 2e-3, 1e-3}, K);
      TorusPoint image = ev.conjugate_point(psi, eps, K + 2);
      double truth = stable_direction(map, image, 40).slope;
      worst_fd = std::max(worst_fd, std::abs(fd.value - truth));
      if (std::abs(fd.value - truth) > tol) {
        ok = false;
        fail = "finite-step slope vs pulled-back direction " +
               g3(std::abs(fd.value - truth)) + " (tol " + g3(tol) + ")";
        break;
      }
    }
  }

  double worst_rate = 0.0;
  if (ok) {
    Evaluator ev(a, f, params_for(cfg, K));
    for (const auto& psi : random_points(cfg, 12, 3)) {
      MembershipReport mem = manifold_membership_check(map, ev, psi, 1e-3,
                                                       25, K);
      double gap = std::abs(mem.rate - std::abs(a.lambda_minus));
      worst_rate = std::max(worst_rate, gap);
      if (gap > 0.05) {
        ok = false;
        fail = "decay rate off by " + g3(gap) + " (tol 0.05)";
        break;
      }
    }
  }

  return {10, "oracle-self-consistency", ok,
          ok ? "residual <= " + g3(worst_residual) +
                   ", slope agreement <= " + g3(worst_fd) +
                   ", decay-rate gap <= " + g3(worst_rate)
             : fail};
}

}  // namespace

AcceptanceReport run_acceptance(const RunConfig& cfg, std::ostream& progress) {
  HyperbolicAuto a = make_automorphism(cfg);
  TrigPoly f = make_forcing(cfg);

  AcceptanceReport rep;
  auto push = [&](CriterionResult c) {
    progress << (c.pass ? "[PASS] " : "[FAIL] ") << "criterion " << c.id
             << " " << c.name << ": " << c.detail << "\n";
    progress.flush();
    rep.criteria.push_back(std::move(c));
  };

  push(check_eigen(a, cfg));
  push(check_combinatorics());
  push(check_kernel(cfg));
  push(check_order1(a, f, cfg));
  push(check_conjugacy_order(a, f, cfg));
  push(check_cancellation(a, f, cfg));

  // Criteria 7 and 8 are judged per restricted-label mode; the end-to-end
  // oracle fit (8) picks the mode, and the finite-step check (7) is then
  // judged against that same mode.
  const RestrictMode modes[2] = {RestrictMode::all_minus,
                                 RestrictMode::stem_minus_only};
  Evaluator ev78(a, f, params_for(cfg, 4));
  auto pts7 = random_points(cfg, 7, 20);
  auto pts8 = random_points(cfg, 8, 20);
  const std::vector<double> eps8 = {0.005, 0.01, 0.02};

  ModeVerdict finite[2], fit[2];
  for (int i = 0; i < 2; ++i) {
    finite[i] = finite_step_for_mode(ev78, pts7, modes[i]);
    fit[i] = oracle_fit_for_mode(ev78, a, f, pts8, eps8, modes[i]);
  }

  int winner = -1;
  if (fit[0].pass && fit[1].pass) {
    winner = fit[0].fit >= fit[1].fit ? 0 : 1;
  } else if (fit[0].pass) {
    winner = 0;
  } else if (fit[1].pass) {
    winner = 1;
  }
  int judged = winner == -1 ? 0 : winner;  // fall back to the first mode
  rep.arbitrated_mode = winner == -1 ? "none" : mode_name(modes[winner]);

  CriterionResult c7{7, "finite-step-limit", finite[judged].pass,
                     std::string(mode_name(modes[judged])) + ": " +
                         finite[judged].detail};
  push(std::move(c7));

  std::string detail8;
  for (int i = 0; i < 2; ++i) {
    if (i) detail8 += "; ";
    detail8 += std::string(mode_name(modes[i])) + ": " + fit[i].detail;
  }
  detail8 += "; arbitrated " + rep.arbitrated_mode;
  push({8, "slope-vs-oracle", winner != -1, detail8});

  push(check_bounds(a, f, cfg, modes[judged]));
  push(check_oracle(a, f, cfg));

  rep.all_pass = std::all_of(rep.criteria.begin(), rep.criteria.end(),
                             [](const CriterionResult& c) { return c.pass; });
  return rep;
}

}  // namespace anosov
