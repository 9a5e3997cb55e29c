#include "anosov/oracle.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

#include "anosov/errors.hpp"
#include "anosov/util.hpp"

namespace anosov {

namespace {

// Start vector for the pull-back: generic, but never close to the expanding
// direction at the far end of the orbit (the pull-back would then need many
// extra steps to wash the expanding component out).
Vec2 generic_start(const HyperbolicAuto& a) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Vec2 candidates[3] = {{inv_sqrt2, inv_sqrt2}, {inv_sqrt2, -inv_sqrt2},
                        {0.0, 1.0}};
  for (const Vec2& c : candidates) {
    if (std::abs(cross(c, a.v_plus)) >= 0.2) return c;
  }
  return candidates[0];  // unreachable: candidates span the plane
}

// Pull the start vector back from the end of the orbit prefix to its first
// point, renormalizing at every step.
Vec2 pull_back(const PerturbedMap& map, const std::vector<TorusPoint>& orbit,
               std::size_t first, std::size_t last, Vec2 u) {
  for (std::size_t k = last; k > first; --k) {
    u = normalized(inverse(map.jacobian(orbit[k - 1])) * u);
  }
  return u;
}

Vec2 fix_sign(const HyperbolicAuto& a, Vec2 u) {
  return dot(u, a.v_minus) < 0.0 ? Vec2{-u.x, -u.y} : u;
}

}  // namespace

OracleResult stable_direction(const PerturbedMap& map, TorusPoint psi,
                              int n_iters) {
  if (n_iters < 10) {
    throw ValidationError("direction pull-back needs at least 10 iterations");
  }
  const HyperbolicAuto& a = map.base;
  std::size_t n = static_cast<std::size_t>(n_iters);

  std::vector<TorusPoint> orbit(n + 2);
  orbit[0] = psi;
  for (std::size_t k = 0; k + 1 < orbit.size(); ++k) {
    orbit[k + 1] = map.apply(orbit[k]);
  }

  Vec2 start = generic_start(a);
  Vec2 dir = fix_sign(a, pull_back(map, orbit, 0, n, start));
  Vec2 dir_short = fix_sign(a, pull_back(map, orbit, 0, n - 1, start));
  if (norm(dir - dir_short) > 1e-8) {
    throw NoConvergence("pull-back direction still moving between iterates");
  }

  // Invariance defect: map the direction forward one step and compare with
  // the direction computed at the image point (orbit shifted by one).
  Vec2 at_image = fix_sign(a, pull_back(map, orbit, 1, n + 1, start));
  Vec2 mapped = map.jacobian(psi) * dir;
  double mu = dot(mapped, at_image);

  OracleResult out;
  out.direction = dir;
  double minus_part = dot(dir, a.v_minus);
  if (std::abs(minus_part) < 1e-12) {
    throw ZeroDenominator("contracting direction lost its minus-projection");
  }
  out.slope = dot(dir, a.v_plus) / minus_part;
  out.multiplier = mu;
  out.residual = norm(mapped - mu * at_image);
  out.iterations = n_iters;
  return out;
}

FdSlope fd_manifold_slope(const Evaluator& ev, TorusPoint psi, double eps,
                          const std::vector<double>& t_list, int K) {
  if (t_list.size() < 3) {
    throw ValidationError("slope extrapolation needs at least 3 steps");
  }
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    if (!(t_list[i] > 0.0)) {
      throw ValidationError("extrapolation steps must be positive");
    }
    if (i > 0 && !(t_list[i] < t_list[i - 1])) {
      throw ValidationError("extrapolation steps must strictly decrease");
    }
  }

  const HyperbolicAuto& a = ev.automorphism();
  FdSlope out;
  Vec2 d0 = ev.displacement(psi, eps, K);
  for (double t : t_list) {
    Vec2 d1 = ev.displacement(shifted(psi, t * a.v_minus), eps, K);
    double plus = (d1.x - d0.x) / t;
    double minus = 1.0 + (d1.y - d0.y) / t;
    if (std::abs(minus) < 1e-12) {
      throw ZeroDenominator("chord lost its minus-component");
    }
    out.per_step.emplace_back(t, plus / minus);
  }

  // two-point linear extrapolation through the smallest steps, and the
  // three-point quadratic as the error reference
  std::size_t m = out.per_step.size();
  auto [t1, s1] = out.per_step[m - 2];
  auto [t2, s2] = out.per_step[m - 1];
  double two_pt = (s2 * t1 - s1 * t2) / (t1 - t2);

  auto [t0, s0] = out.per_step[m - 3];
  double three_pt = s0 * (t1 * t2) / ((t1 - t0) * (t2 - t0)) +
                    s1 * (t0 * t2) / ((t0 - t1) * (t2 - t1)) +
                    s2 * (t0 * t1) / ((t0 - t2) * (t1 - t2));

  out.value = two_pt;
  out.error = std::abs(two_pt - three_pt);
  return out;
}

MembershipReport manifold_membership_check(const PerturbedMap& map,
                                           const Evaluator& ev,
                                           TorusPoint psi, double t,
                                           int n_steps, int K) {
  if (n_steps < 1 || n_steps > 60) {
    throw TooLarge("membership check limited to 60 steps");
  }

  const HyperbolicAuto& a = ev.automorphism();
  TorusPoint x = ev.conjugate_point(psi, map.eps, K);
  TorusPoint y =
      ev.conjugate_point(shifted(psi, t * a.v_minus), map.eps, K);

  MembershipReport rep;
  rep.distances.reserve(n_steps + 1);
  rep.distances.push_back(toroidal_distance(x, y));
  for (int s = 0; s < n_steps; ++s) {
    x = map.apply(x);
    y = map.apply(y);
    rep.distances.push_back(toroidal_distance(x, y));
  }

  // log-linear fit over the steps that clear the noise floor
  constexpr double kFloor = 1e-12;
  std::vector<double> steps, logs;
  for (std::size_t s = 0; s < rep.distances.size(); ++s) {
    if (rep.distances[s] <= kFloor) break;
    steps.push_back(static_cast<double>(s));
    logs.push_back(std::log(rep.distances[s]));
  }
  rep.used_steps = static_cast<int>(steps.size());
  if (steps.size() >= 2) {
    rep.rate = std::exp(least_squares_slope(steps, logs));
  }
  return rep;
}

}  // namespace anosov
