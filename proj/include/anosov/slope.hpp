#pragma once

#include <limits>
#include <string>
#include <vector>

#include "anosov/conjugacy.hpp"
#include "anosov/torus.hpp"
#include "anosov/trees.hpp"

namespace anosov {

// One equivalence class of single-derivative trees: ordered trees that agree
// up to sibling reordering (labels not included in the key).
struct DerivClass {
  std::string key;          // canonical shape/sign/mark key
  TreeNode representative;  // canonical form, unlabeled
  int multiplicity = 0;     // distinct ordered trees sharing the key
};

// All classes at the given order and root sign, sorted by key.  Memoized.
const std::vector<DerivClass>& derivative_classes(int n, int root_alpha);

// Label sum of one whole class: multiplicity times the representative's sum
// (the per-tree sum does not depend on sibling order).
SeriesTerm class_value(const Evaluator& ev, const DerivClass& cls,
                       TorusPoint psi, RestrictMode mode);

// Order-n coefficient of the tangent-slope series at the conjugacy image,
// with the restricted label ranges that make the series convergent: the sum
// of class_value over every plus-rooted class of order n.
struct OrderValue {
  double value = 0.0;
  double tail_bound = 0.0;
  std::vector<std::pair<std::string, double>> classes;  // per-class values
};
OrderValue slope_coefficient(const Evaluator& ev, int n, TorusPoint psi,
                             RestrictMode mode);

// Numeric witness for the order-2 rearrangement: the product of the two
// first-order derivative series equals, term set by term set, the divergent
// half of the order-2 double series once the inner index is shifted by the
// outer one.  Both routes are summed over the same truncated index ranges;
// they agree to rounding error.
struct Order2Cancellation {
  double lhs = 0.0;  // product series, exponents combined analytically
  double rhs = 0.0;  // shifted-index route, exponents kept separate
  double abs_diff = 0.0;
};
Order2Cancellation order2_cancellation_check(const HyperbolicAuto& a,
                                             const TrigPoly& f, TorusPoint psi,
                                             int pmax);

// Assembled tangent slope at the conjugacy image of psi.
struct SlopeReport {
  TorusPoint psi{};
  double eps = 0.0;
  int K = 0;
  RestrictMode mode = RestrictMode::all_minus;
  std::vector<OrderValue> per_order;  // index k - 1 holds order k
  double slope = 0.0;                 // sum of eps^k * per_order[k]
  double tail_bound = 0.0;            // sum of |eps|^k * per-order tails
  Vec2 tangent{};                     // unit vector slope * v_plus + v_minus
};

struct SlopeOptions {
  // Largest |eps| accepted; pass the convergence-radius estimate to enforce
  // it, or leave infinite to skip the check.
  double radius = std::numeric_limits<double>::infinity();
  bool force = false;  // compute anyway when |eps| >= radius
};

// Throws RadiusExceeded when |eps| >= opts.radius and force is off.
SlopeReport stable_slope(const Evaluator& ev, TorusPoint psi, double eps,
                         int K, RestrictMode mode,
                         const SlopeOptions& opts = {});

}  // namespace anosov
