#pragma once

#include <memory>

#include "anosov/torus.hpp"
#include "anosov/trees.hpp"

namespace anosov {

// Truncation knobs shared by every series evaluation.
struct SeriesParams {
  // Integer labels are summed over [0, pmax] (plus nodes) and [-pmax, -1]
  // (minus nodes); restricted ranges clip further.
  int pmax = 40;
  // Highest displacement order the evaluator will compute.
  int k_max = 5;
  // Orbit shifts |q| beyond this are dropped (their weight is folded into
  // the tail bound). Capped by the exact matrix-power range.
  int q_cap = 64;
};

struct SeriesTerm {
  double value = 0.0;
  // Honest majorant of everything the truncations dropped: geometric tails
  // of the label sums plus the weight of clipped orbit shifts.
  double tail_bound = 0.0;
};

// Value of a single fully labeled tree: each node contributes
//   (alpha_v / s_v!) * Lambda_v(p_v) * [lambda_minus^{q(v)} if marked]
//     * (prod over children of d_{alpha_child}) f_{alpha_v} (S^{q(v)} psi),
// where q(v) accumulates labels from the root and Lambda is
// lambda_plus^{-(p+1)} on plus nodes and lambda_minus^{|p+1|} on minus
// nodes. Slow reference path, used to cross-check the table-driven sums.
double labeled_tree_value(const HyperbolicAuto& a, const TrigPoly& f,
                          const TreeNode& t, TorusPoint psi);

// Evaluates the displacement series of the conjugacy that straightens the
// perturbed map: the order-k displacement along each eigendirection is a sum
// over signed k-node trees of label sums, organized as a per-node recursion
// over accumulated shifts so the cost is polynomial, not exponential, in k.
class Evaluator {
 public:
  Evaluator(HyperbolicAuto a, TrigPoly f, SeriesParams prm);

  const HyperbolicAuto& automorphism() const { return a_; }
  const TrigPoly& perturbation() const { return f_; }
  const SeriesParams& params() const { return prm_; }

  // Order-k displacement component along the alpha eigendirection: the sum
  // over all signed k-node trees with root sign alpha. Cached per
  // (psi, k, alpha). Throws TooLarge for k outside [1, k_max].
  SeriesTerm order_term(int k, int alpha, TorusPoint psi) const;

  // Truncated displacement sum_{k<=K} eps^k h_k(psi), returned in eigen
  // coordinates (c_plus, c_minus). Optional combined tail estimate
  // sum eps^k (tail_plus + tail_minus).
  Vec2 displacement(TorusPoint psi, double eps, int K,
                    double* tail = nullptr) const;

  // psi + displacement, wrapped: the image of psi under the conjugacy.
  TorusPoint conjugate_point(TorusPoint psi, double eps, int K) const;

  // Label sum of one signed tree (optionally carrying the derivative mark,
  // which multiplies that node by lambda_minus^{q} and adds one minus-
  // direction derivative). The mode selects restricted label ranges; trees
  // evaluated for the displacement series use RestrictMode::none. The tail
  // bound is meaningful for unmarked trees and for marked trees under a
  // restricted mode (where q stays nonnegative along the stem).
  SeriesTerm tree_sum(const TreeNode& tree, TorusPoint psi,
                      RestrictMode mode) const;

  // Shared-table batch variant: evaluates several trees at one point,
  // distributing the per-tree sums over worker threads and merging in
  // enumeration order (results are identical to the serial loop).
  std::vector<SeriesTerm> tree_sums(const std::vector<TreeNode>& trees,
                                    TorusPoint psi, RestrictMode mode) const;

  ~Evaluator();
  Evaluator(const Evaluator&) = delete;
  Evaluator& operator=(const Evaluator&) = delete;

 private:
  struct Impl;
  HyperbolicAuto a_;
  TrigPoly f_;
  SeriesParams prm_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace anosov
