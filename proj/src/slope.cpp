#include "anosov/slope.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "anosov/errors.hpp"
#include "anosov/util.hpp"

namespace anosov {

const std::vector<DerivClass>& derivative_classes(int n, int root_alpha) {
  static std::map<std::pair<int, int>, std::vector<DerivClass>> memo;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = memo.find({n, root_alpha});
  if (it != memo.end()) return it->second;

  std::map<std::string, DerivClass> grouped;
  for (const TreeNode& t : marked_trees(n, root_alpha)) {
    TreeNode canon = canonical(t, /*with_labels=*/false);
    std::string key = tree_key(canon, /*with_labels=*/false);
    auto& cls = grouped[key];
    if (cls.multiplicity == 0) {
      cls.key = key;
      cls.representative = std::move(canon);
    }
    ++cls.multiplicity;
  }

  std::vector<DerivClass> out;
  out.reserve(grouped.size());
  for (auto& [key, cls] : grouped) out.push_back(std::move(cls));
  return memo.emplace(std::make_pair(n, root_alpha), std::move(out))
      .first->second;
}

SeriesTerm class_value(const Evaluator& ev, const DerivClass& cls,
                       TorusPoint psi, RestrictMode mode) {
  SeriesTerm rep = ev.tree_sum(cls.representative, psi, mode);
  return {cls.multiplicity * rep.value, cls.multiplicity * rep.tail_bound};
}

OrderValue slope_coefficient(const Evaluator& ev, int n, TorusPoint psi,
                             RestrictMode mode) {
  const auto& classes = derivative_classes(n, +1);

  // One batched pass so the per-point tables are built once and the trees
  // can be evaluated in parallel; the merge below is ordered by class key.
  std::vector<TreeNode> reps;
  reps.reserve(classes.size());
  for (const auto& cls : classes) reps.push_back(cls.representative);
  std::vector<SeriesTerm> terms = ev.tree_sums(reps, psi, mode);

  OrderValue out;
  KahanSum value, tail;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    double v = classes[i].multiplicity * terms[i].value;
    value.add(v);
    tail.add(classes[i].multiplicity * terms[i].tail_bound);
    out.classes.emplace_back(classes[i].key, v);
  }
  out.value = value.value();
  out.tail_bound = tail.value();
  return out;
}

Order2Cancellation order2_cancellation_check(const HyperbolicAuto& a,
                                             const TrigPoly& f, TorusPoint psi,
                                             int pmax) {
  if (pmax < 1 || pmax > 64) {
    throw ValidationError("cancellation check needs pmax in [1, 64]");
  }

  // Tables over the truncated orbit: outer index a >= 0, inner image c < 0.
  std::vector<double> da(pmax + 1), db(pmax + 1), lam_a(pmax + 1);
  std::vector<Vec2> dm{a.v_minus};
  for (int p = 0; p <= pmax; ++p) {
    da[p] = f.projected_derivative(a.v_plus, dm, a.power_apply(psi, p));
    lam_a[p] = ipow(a.lambda_plus, -(p + 1));
  }
  for (int c = 1; c <= pmax; ++c) {
    db[c] = f.projected_derivative(a.v_minus, dm, a.power_apply(psi, -c));
  }

  // Route one: the product of the two first-order derivative series, with
  // the lambda exponents already combined into a single power of the outer
  // index.  Route two: the same term set reached from the second-order
  // double series, keeping the two lambda powers separate and recovering
  // the inner index as image-minus-outer.  Term-by-term these are equal in
  // exact arithmetic; summing both ways checks the rearrangement.
  KahanSum lhs, rhs;
  for (int p = 0; p <= pmax; ++p) {
    double combined = lam_a[p] * ipow(a.lambda_minus, p - 1);
    for (int c = 1; c <= pmax; ++c) {
      lhs.add(-combined * da[p] * db[c]);
      long long b = -static_cast<long long>(c) - p;  // original inner index
      rhs.add(-lam_a[p] * ipow(a.lambda_minus, -b - 1) *
              ipow(a.lambda_minus, -c) * da[p] * db[c]);
    }
  }

  Order2Cancellation out;
  out.lhs = lhs.value();
  out.rhs = rhs.value();
  out.abs_diff = std::abs(out.lhs - out.rhs);
  return out;
}

SlopeReport stable_slope(const Evaluator& ev, TorusPoint psi, double eps,
                         int K, RestrictMode mode, const SlopeOptions& opts) {
  if (K < 1) throw ValidationError("slope needs at least order one");
  if (!opts.force && std::abs(eps) >= opts.radius) {
    throw RadiusExceeded("|eps| is outside the convergence-radius estimate");
  }

  SlopeReport rep;
  rep.psi = psi;
  rep.eps = eps;
  rep.K = K;
  rep.mode = mode;

  KahanSum slope, tail;
  for (int k = 1; k <= K; ++k) {
    rep.per_order.push_back(slope_coefficient(ev, k, psi, mode));
    slope.add(ipow(eps, k) * rep.per_order.back().value);
    tail.add(ipow(std::abs(eps), k) * rep.per_order.back().tail_bound);
  }
  rep.slope = slope.value();
  rep.tail_bound = tail.value();

  const HyperbolicAuto& a = ev.automorphism();
  rep.tangent = normalized(rep.slope * a.v_plus + a.v_minus);
  return rep;
}

}  // namespace anosov
