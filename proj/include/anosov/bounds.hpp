#pragma once

#include <cstdint>
#include <vector>

#include "anosov/torus.hpp"

namespace anosov {

// Number of permutations of {1..r} with exactly k descents, exact in 64-bit
// (row sums reach 20! just below the signed limit).  Zero outside 0 <= k < r
// except the (0,0) entry.  Throws TooLarge for r > 20.
std::int64_t eulerian(int r, int k);

// Closed form of M * [sum_{n>=0} (n+1)^r x^n]^r at x = lambda_plus^{-2}:
//   M * P_r(x)^r / (1 - x)^{r(r+1)},  P_r(x) = sum_k eulerian(r, k) x^k.
// This majorizes the label sums whose main stem carries r non-negative
// labels, once the node functions are bounded by M.
double sc_majorant(int r, double lambda_plus, double M);

// Per-order coefficient majorant for a forcing with frequency bound N and
// sup-norm F: (2N)^k F^k (2N+1)^k 2^k 2^{2k} k * sc_majorant(k, lambda, 1).
// The shape factor 2^{2k} over-counts (the exact count is Catalan), which
// only loosens the bound.
double order_bound(int k, int N, double F, double lambda_plus);

// Root-test radius from the per-order majorants.
struct RadiusEstimate {
  int N = 0;
  double F = 0.0;
  double lambda_plus = 0.0;
  std::vector<double> per_order;  // order_bound(k), index k - 1; may overflow
  double radius = 0.0;            // min_k order_bound(k)^{-1/k}, computed in
                                  // log space; +infinity when F == 0
};
RadiusEstimate radius_estimate(int N, double F, double lambda_plus,
                               int k_max);

// Sup-norm of both eigenprojections of the forcing over an n-by-n grid;
// grids this dense are exact to well past plotting accuracy for the low
// frequency bounds used here.
double forcing_sup(const TrigPoly& f, const HyperbolicAuto& a, int n = 256);

}  // namespace anosov
