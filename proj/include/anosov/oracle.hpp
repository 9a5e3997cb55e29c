#pragma once

#include <vector>

#include "anosov/conjugacy.hpp"
#include "anosov/torus.hpp"

namespace anosov {

// Ground truth for the contracting direction, independent of the series
// machinery: only forward orbits and inverse Jacobians are trusted.
struct OracleResult {
  Vec2 direction{};        // unit vector spanning the contracting line
  double slope = 0.0;      // plus-projection over minus-projection
  double multiplier = 0.0; // induced one-step factor along the direction
  double residual = 0.0;   // invariance defect of the mapped direction
  int iterations = 0;
};

// Pull a generic vector backwards along the orbit of psi: each application
// of an inverse Jacobian contracts everything toward the stable line.  The
// direction is sign-fixed to a positive minus-projection.  Throws
// SingularJacobian if a Jacobian degenerates and NoConvergence when one
// fewer iteration gives a visibly different direction.
OracleResult stable_direction(const PerturbedMap& map, TorusPoint psi,
                              int n_iters);

// Chord slopes of the conjugacy image at a decreasing list of steps,
// extrapolated to step zero.  The error estimate is the difference between
// the two-point and three-point extrapolants.
struct FdSlope {
  double value = 0.0;
  double error = 0.0;
  std::vector<std::pair<double, double>> per_step;  // (t, chord slope)
};

// K is the expansion order used for the conjugacy displacements.  Throws
// ZeroDenominator when a chord's minus-component vanishes (parameters far
// outside the perturbative regime) and ValidationError on a bad step list
// (need >= 3 strictly decreasing positive steps).
FdSlope fd_manifold_slope(const Evaluator& ev, TorusPoint psi, double eps,
                          const std::vector<double>& t_list, int K);

// Distance decay between the orbits of two nearby conjugacy images: points
// on the same stable curve approach each other like the contracting
// eigenvalue.  rate is the fitted per-step factor (0 when fewer than two
// distances clear the noise floor).
struct MembershipReport {
  std::vector<double> distances;  // index = step
  double rate = 0.0;
  int used_steps = 0;
};

MembershipReport manifold_membership_check(const PerturbedMap& map,
                                           const Evaluator& ev,
                                           TorusPoint psi, double t,
                                           int n_steps, int K);

}  // namespace anosov
