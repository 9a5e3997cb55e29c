#include "anosov/conjugacy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <tuple>
#include <vector>

#include "anosov/errors.hpp"
#include "anosov/util.hpp"

namespace anosov {
namespace {

double factorial_inv(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r /= i;
  return r;
}

// Signature of a node's function table: the projection sign and the number
// of derivatives along each eigendirection.
struct Sig {
  int alpha = +1;
  int d_plus = 0;
  int d_minus = 0;

  bool operator<(const Sig& o) const {
    return std::tie(alpha, d_plus, d_minus) <
           std::tie(o.alpha, o.d_plus, o.d_minus);
  }
};

Sig node_sig(const TreeNode& v) {
  Sig s;
  s.alpha = v.alpha;
  for (const auto& c : v.children) {
    (c.alpha > 0 ? s.d_plus : s.d_minus) += 1;
  }
  if (v.deriv) s.d_minus += 1;  // the mark adds one minus-direction derivative
  return s;
}

std::vector<Vec2> sig_dirs(const HyperbolicAuto& a, const Sig& s) {
  std::vector<Vec2> dirs;
  dirs.reserve(s.d_plus + s.d_minus);
  for (int i = 0; i < s.d_plus; ++i) dirs.push_back(a.v_plus);
  for (int i = 0; i < s.d_minus; ++i) dirs.push_back(a.v_minus);
  return dirs;
}

int count_marks(const TreeNode& t) {
  int n = t.deriv ? 1 : 0;
  for (const auto& c : t.children) n += count_marks(c);
  return n;
}

using PsiKey = std::pair<std::uint64_t, std::uint64_t>;

PsiKey psi_key(TorusPoint psi) {
  return {std::bit_cast<std::uint64_t>(psi.t1),
          std::bit_cast<std::uint64_t>(psi.t2)};
}

}  // namespace

double labeled_tree_value(const HyperbolicAuto& a, const TrigPoly& f,
                          const TreeNode& t, TorusPoint psi) {
  std::function<double(const TreeNode&, long long)> rec =
      [&](const TreeNode& v, long long q_parent) -> double {
    long long q = q_parent + v.p;
    double lam = v.alpha > 0 ? ipow(a.lambda_plus, -(v.p + 1))
                             : ipow(a.lambda_minus, -v.p - 1);
    Sig sig = node_sig(v);
    double g = f.projected_derivative(a.eigvec(sig.alpha), sig_dirs(a, sig),
                                      a.power_apply(psi, q));
    double w = factorial_inv(static_cast<int>(v.children.size())) * v.alpha *
               lam * g;
    if (v.deriv) w *= ipow(a.lambda_minus, q);
    for (const auto& c : v.children) w *= rec(c, q);
    return w;
  };
  return rec(t, 0);
}

struct Evaluator::Impl {
  // ---- point-independent precomputation ----
  std::vector<double> lp_pow;  // |lambda_plus|^-m with the sign of lambda_plus^-m
  std::vector<double> lm_pow;  // lambda_minus^m, m in [0, pmax + 1]
  std::vector<double> lm_q;    // lambda_minus^q, q in [-q_cap, q_cap]
  double full_plus = 0.0, tail_plus = 0.0;    // sum / tail of |Lambda| on plus nodes
  double full_minus = 0.0, tail_minus = 0.0;  // same for minus nodes

  // ---- per-point tables ----
  struct Tables {
    std::vector<TorusPoint> orbit;         // index q + q_cap
    std::map<Sig, std::vector<double>> g;  // node function values per q
    std::map<Sig, double> gmax;            // sup-norm majorant per signature
  };
  std::map<PsiKey, std::shared_ptr<Tables>> tables;
  std::mutex tables_mu;

  std::map<std::tuple<std::uint64_t, std::uint64_t, int, int>, SeriesTerm>
      order_cache;
  std::mutex order_mu;
};

Evaluator::Evaluator(HyperbolicAuto a, TrigPoly f, SeriesParams prm)
    : a_(a), f_(std::move(f)), prm_(prm), impl_(new Impl) {
  if (prm_.pmax < 1 || prm_.pmax > 2000) {
    throw ValidationError("pmax must lie in [1, 2000]");
  }
  if (prm_.k_max < 1 || prm_.k_max > 12) {
    throw ValidationError("k_max must lie in [1, 12]");
  }
  if (prm_.q_cap < 1 || prm_.q_cap > 64) {
    throw ValidationError("q_cap must lie in [1, 64] (exact power range)");
  }

  double L = std::abs(a_.lambda_plus);
  double l = std::abs(a_.lambda_minus);
  impl_->lp_pow.resize(prm_.pmax + 2);
  impl_->lm_pow.resize(prm_.pmax + 2);
  for (int m = 0; m <= prm_.pmax + 1; ++m) {
    impl_->lp_pow[m] = ipow(a_.lambda_plus, -m);
    impl_->lm_pow[m] = ipow(a_.lambda_minus, m);
  }
  impl_->lm_q.resize(2 * prm_.q_cap + 1);
  for (int q = -prm_.q_cap; q <= prm_.q_cap; ++q) {
    impl_->lm_q[q + prm_.q_cap] = ipow(a_.lambda_minus, q);
  }
  impl_->full_plus = 1.0 / (L - 1.0);
  impl_->tail_plus = ipow(L, -(prm_.pmax + 1)) / (L - 1.0);
  impl_->full_minus = 1.0 / (1.0 - l);
  impl_->tail_minus = ipow(l, prm_.pmax) / (1.0 - l);
}

Evaluator::~Evaluator() = default;

namespace {

// Tree flattened for the label-sum recursion.
struct FlatNode {
  int alpha = +1;
  bool deriv = false;
  bool restricted = false;
  double c = 1.0;  // alpha / s!
  Sig sig;
  std::vector<int> children;
  const std::vector<double>* gtab = nullptr;
  double gmax = 0.0;
  double wbound = 0.0;  // |C| * gmax * full-Lambda * prod child wbounds
  double ab = 1.0;      // same product over everything outside the subtree
  double full_lambda = 0.0, tail_lambda = 0.0;
};

struct EvalCtx {
  const std::vector<double>* lp_pow = nullptr;
  const std::vector<double>* lm_pow = nullptr;
  const std::vector<double>* lm_q = nullptr;
  int pmax = 0, q_cap = 0;
  std::vector<FlatNode> nodes;
  std::vector<double> memo;
  std::vector<char> done;
  double clip_acc = 0.0;

  double eval(int vi, long long Q) {
    std::size_t idx =
        static_cast<std::size_t>(vi) * (2 * q_cap + 1) + (Q + q_cap);
    if (done[idx]) return memo[idx];
    const FlatNode& v = nodes[vi];

    long long lo, hi;
    if (v.alpha > 0) {
      lo = 0;
      hi = pmax;
    } else {
      lo = -pmax;
      hi = -1;
      if (v.restricted && -Q > lo) lo = -Q;
    }

    KahanSum acc;
    for (long long p = lo; p <= hi; ++p) {
      long long q = Q + p;
      double lam = v.alpha > 0 ? (*lp_pow)[p + 1] : (*lm_pow)[-p - 1];
      double cw = v.c * lam;
      if (q < -q_cap || q > q_cap) {
        double childwb = 1.0;
        for (int ch : v.children) childwb *= nodes[ch].wbound;
        clip_acc += std::abs(cw) * v.gmax * childwb * v.ab;
        continue;
      }
      double w = cw * (*v.gtab)[q + q_cap];
      if (v.deriv) w *= (*lm_q)[q + q_cap];
      for (int ch : v.children) w *= eval(ch, q);
      acc.add(w);
    }
    memo[idx] = acc.value();
    done[idx] = 1;
    return memo[idx];
  }
};

}  // namespace

SeriesTerm Evaluator::tree_sum(const TreeNode& tree, TorusPoint psi,
                               RestrictMode mode) const {
  return tree_sums({tree}, psi, mode)[0];
}

std::vector<SeriesTerm> Evaluator::tree_sums(const std::vector<TreeNode>& trees,
                                             TorusPoint psi,
                                             RestrictMode mode) const {
  for (const auto& t : trees) {
    if (node_count(t) > prm_.k_max) {
      throw TooLarge("tree order exceeds k_max");
    }
    int marks = count_marks(t);
    if (marks > 1) {
      throw ValidationError("tree carries more than one derivative mark");
    }
    if (mode == RestrictMode::stem_minus_only && marks == 0) {
      throw ValidationError(
          "stem-restricted label ranges need a derivative mark");
    }
  }

  // Collect the node signatures, then build (or reuse) the per-point tables
  // before the parallel section so workers only read.
  std::set<Sig> sigs;
  std::function<void(const TreeNode&)> collect = [&](const TreeNode& v) {
    sigs.insert(node_sig(v));
    for (const auto& c : v.children) collect(c);
  };
  for (const auto& t : trees) collect(t);

  std::shared_ptr<Impl::Tables> tb;
  {
    std::lock_guard<std::mutex> lock(impl_->tables_mu);
    auto& slot = impl_->tables[psi_key(psi)];
    if (!slot) {
      slot = std::make_shared<Impl::Tables>();
      slot->orbit.reserve(2 * prm_.q_cap + 1);
      for (int q = -prm_.q_cap; q <= prm_.q_cap; ++q) {
        slot->orbit.push_back(a_.power_apply(psi, q));
      }
    }
    for (const Sig& s : sigs) {
      if (slot->g.count(s)) continue;
      std::vector<Vec2> dirs = sig_dirs(a_, s);
      Vec2 proj = a_.eigvec(s.alpha);
      std::vector<double> vals(slot->orbit.size());
      for (std::size_t i = 0; i < slot->orbit.size(); ++i) {
        vals[i] = f_.projected_derivative(proj, dirs, slot->orbit[i]);
      }
      slot->g.emplace(s, std::move(vals));
      slot->gmax.emplace(s, f_.projected_derivative_bound(proj, dirs));
    }
    tb = slot;
  }

  std::vector<SeriesTerm> out(trees.size());
  parallel_for(trees.size(), [&](std::size_t ti) {
    const TreeNode& tree = trees[ti];

    // Stem membership decides which minus nodes get restricted ranges.
    std::set<std::string> stem_ids;
    if (mode != RestrictMode::none && count_marks(tree) == 1) {
      for (const auto& path : main_stem(tree)) {
        std::ostringstream os;
        for (int i : path) os << i << ',';
        stem_ids.insert(os.str());
      }
    }

    EvalCtx ctx;
    ctx.lp_pow = &impl_->lp_pow;
    ctx.lm_pow = &impl_->lm_pow;
    ctx.lm_q = &impl_->lm_q;
    ctx.pmax = prm_.pmax;
    ctx.q_cap = prm_.q_cap;

    std::function<int(const TreeNode&, const NodePath&)> flatten =
        [&](const TreeNode& v, const NodePath& path) -> int {
      int vi = static_cast<int>(ctx.nodes.size());
      ctx.nodes.emplace_back();
      FlatNode& fn = ctx.nodes[vi];
      fn.alpha = v.alpha;
      fn.deriv = v.deriv;
      fn.c = v.alpha * factorial_inv(static_cast<int>(v.children.size()));
      fn.sig = node_sig(v);
      if (v.alpha < 0) {
        if (mode == RestrictMode::all_minus) {
          fn.restricted = true;
        } else if (mode == RestrictMode::stem_minus_only) {
          std::ostringstream os;
          for (int i : path) os << i << ',';
          fn.restricted = stem_ids.count(os.str()) > 0;
        }
      }
      for (std::size_t c = 0; c < v.children.size(); ++c) {
        NodePath cp = path;
        cp.push_back(static_cast<int>(c));
        int ci = flatten(v.children[c], cp);
        ctx.nodes[vi].children.push_back(ci);
      }
      return vi;
    };
    flatten(tree, {});

    // Attach tables and per-node Lambda sums, then the subtree/ancestor
    // weight bounds used for tail accounting.
    for (auto& fn : ctx.nodes) {
      fn.gtab = &tb->g.at(fn.sig);
      fn.gmax = tb->gmax.at(fn.sig);
      fn.full_lambda = fn.alpha > 0 ? impl_->full_plus : impl_->full_minus;
      fn.tail_lambda = fn.alpha > 0 ? impl_->tail_plus : impl_->tail_minus;
    }
    std::function<double(int)> wbound = [&](int vi) -> double {
      FlatNode& fn = ctx.nodes[vi];
      double w = std::abs(fn.c) * fn.gmax * fn.full_lambda;
      for (int ch : fn.children) w *= wbound(ch);
      fn.wbound = w;
      return w;
    };
    wbound(0);
    std::function<void(int, double)> set_ab = [&](int vi, double ab) {
      FlatNode& fn = ctx.nodes[vi];
      fn.ab = ab;
      double self = std::abs(fn.c) * fn.gmax * fn.full_lambda;
      for (std::size_t i = 0; i < fn.children.size(); ++i) {
        double sibs = 1.0;
        for (std::size_t j = 0; j < fn.children.size(); ++j) {
          if (j != i) sibs *= ctx.nodes[fn.children[j]].wbound;
        }
        set_ab(fn.children[i], ab * self * sibs);
      }
    };
    set_ab(0, 1.0);

    ctx.memo.assign(ctx.nodes.size() * (2 * prm_.q_cap + 1), 0.0);
    ctx.done.assign(ctx.memo.size(), 0);

    SeriesTerm term;
    term.value = ctx.eval(0, 0);

    // Label-truncation tail: one node's tail at a time, everything else at
    // its full weight.
    double trunc = 0.0;
    for (const auto& fn : ctx.nodes) {
      if (fn.full_lambda > 0.0) {
        trunc += ctx.nodes[0].wbound * fn.tail_lambda / fn.full_lambda;
      }
    }
    term.tail_bound = trunc + ctx.clip_acc;
    out[ti] = term;
  });

  return out;
}

SeriesTerm Evaluator::order_term(int k, int alpha, TorusPoint psi) const {
  if (alpha != 1 && alpha != -1) {
    throw ValidationError("sign must be +1 or -1");
  }
  if (k < 1 || k > prm_.k_max) {
    std::ostringstream msg;
    msg << "order " << k << " outside [1, " << prm_.k_max << "]";
    throw TooLarge(msg.str());
  }

  auto key = std::make_tuple(psi_key(psi).first, psi_key(psi).second, k, alpha);
  {
    std::lock_guard<std::mutex> lock(impl_->order_mu);
    auto it = impl_->order_cache.find(key);
    if (it != impl_->order_cache.end()) return it->second;
  }

  const std::vector<TreeNode>& trees = [&]() -> const std::vector<TreeNode>& {
    static std::map<std::pair<int, int>, std::vector<TreeNode>> memo;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = memo.find({k, alpha});
    if (it == memo.end()) {
      it = memo.emplace(std::make_pair(k, alpha), signed_trees(k, alpha)).first;
    }
    return it->second;
  }();

  std::vector<SeriesTerm> terms = tree_sums(trees, psi, RestrictMode::none);
  SeriesTerm total;
  KahanSum val, tail;
  for (const auto& t : terms) {
    val.add(t.value);
    tail.add(t.tail_bound);
  }
  total.value = val.value();
  total.tail_bound = tail.value();

  std::lock_guard<std::mutex> lock(impl_->order_mu);
  impl_->order_cache.emplace(key, total);
  return total;
}

Vec2 Evaluator::displacement(TorusPoint psi, double eps, int K,
                             double* tail) const {
  if (K < 0 || K > prm_.k_max) {
    throw TooLarge("displacement order outside [0, k_max]");
  }
  KahanSum cp, cm, tl;
  double ek = 1.0;
  for (int k = 1; k <= K; ++k) {
    ek *= eps;
    if (ek == 0.0) break;
    SeriesTerm tp = order_term(k, +1, psi);
    SeriesTerm tm = order_term(k, -1, psi);
    cp.add(ek * tp.value);
    cm.add(ek * tm.value);
    tl.add(std::abs(ek) * (tp.tail_bound + tm.tail_bound));
  }
  if (tail != nullptr) *tail = tl.value();
  return {cp.value(), cm.value()};
}

TorusPoint Evaluator::conjugate_point(TorusPoint psi, double eps, int K) const {
  Vec2 c = displacement(psi, eps, K, nullptr);
  return shifted(psi, a_.from_eigen_basis(c.x, c.y));
}

}  // namespace anosov
