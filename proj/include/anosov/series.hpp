#pragma once

#include <vector>

#include "anosov/conjugacy.hpp"
#include "anosov/torus.hpp"

namespace anosov {

// Formal power series live in plain coefficient vectors, index = order.

// Truncated Cauchy product, result length = max of the input lengths.
std::vector<double> convolve(const std::vector<double>& x,
                             const std::vector<double>& y);

// Solve q * b = a order by order.  Requires a[0] == 0 and b[0] == 1
// (BadNormalization otherwise); the inputs must have equal nonzero length.
std::vector<double> series_ratio_recursive(const std::vector<double>& a,
                                           const std::vector<double>& b);

// The same ratio through the alternating sum over ordered compositions:
// q_n = sum over (m_0,...,m_s), m_i >= 1, sum m_i = n of
//       (-1)^s a[m_0] * b[m_1] * ... * b[m_s].
std::vector<double> series_ratio_explicit(const std::vector<double>& a,
                                          const std::vector<double>& b);

// Order-by-order coefficients of the chord slope between the conjugacy
// images of psi and of psi shifted by t along the contracting eigenvector.
// The chord direction is v_minus + sum_k eps^k * (difference of order-k
// displacements)/t; its slope in the eigenbasis is the ratio of the plus
// series over the minus series.
struct ChordSeries {
  std::vector<double> a;  // plus-component differences, a[0] = 0
  std::vector<double> b;  // minus-component differences, b[0] = 1
  std::vector<double> q;  // slope coefficients, q = a / b
};

// K is the highest order kept (vectors have length K + 1).  Throws ZeroStep
// when t == 0 and TooLarge when K exceeds the evaluator's order limit.
ChordSeries chord_slope_series(const Evaluator& ev, TorusPoint psi, double t,
                               int K);

}  // namespace anosov
