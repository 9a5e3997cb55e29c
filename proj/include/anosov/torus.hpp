#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "anosov/util.hpp"

namespace anosov {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline Vec2 operator-(Vec2 v) { return {-v.x, -v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
// z-component of the 3d cross product; measures the angle between a and b.
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::sqrt(dot(v, v)); }
Vec2 normalized(Vec2 v);  // throws ZeroDenominator on (near-)zero input

// Row-major real 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
};

inline Vec2 operator*(const Mat2& m, Vec2 v) {
  return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}
Mat2 operator*(const Mat2& m, const Mat2& n);
inline double det(const Mat2& m) { return m.a * m.d - m.b * m.c; }
Mat2 inverse(const Mat2& m);  // throws SingularJacobian

// Integer 2x2 matrix, the lattice map behind the torus automorphism.
struct IntMat2 {
  std::int64_t a = 1, b = 0, c = 0, d = 1;
};

// A point on the 2-torus; both coordinates live in [0, 2*pi).
struct TorusPoint {
  double t1 = 0.0;
  double t2 = 0.0;

  static TorusPoint wrapped(double a, double b) {
    return {wrap_angle(a), wrap_angle(b)};
  }
};

// Shortest displacement from a to b, each component in (-pi, pi].
Vec2 toroidal_delta(TorusPoint a, TorusPoint b);
double toroidal_distance(TorusPoint a, TorusPoint b);
inline TorusPoint shifted(TorusPoint p, Vec2 d) {
  return TorusPoint::wrapped(p.t1 + d.x, p.t2 + d.y);
}

inline TorusPoint random_point(AngleRng& rng) {
  double a = rng.angle();
  double b = rng.angle();
  return {a, b};
}

// A hyperbolic unimodular integer matrix together with its spectral data.
// Eigenvalues satisfy |lambda_plus| > 1 > |lambda_minus| and
// lambda_plus * lambda_minus = det = +-1 (the minus eigenvalue may be
// negative). Eigenvectors are unit length, mutually orthogonal, and signed
// so that the first nonzero component is positive.
struct HyperbolicAuto {
  IntMat2 m;
  int det = 1;
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  Vec2 v_plus;
  Vec2 v_minus;

  Mat2 real_matrix() const {
    return {static_cast<double>(m.a), static_cast<double>(m.b),
            static_cast<double>(m.c), static_cast<double>(m.d)};
  }

  TorusPoint apply(TorusPoint psi) const { return power_apply(psi, 1); }

  // Applies the p-th matrix power (p may be negative; the integer inverse is
  // exact because |det| = 1). The power is computed in exact integer
  // arithmetic and the products with the angles in double-double, so the
  // wrapped result keeps ~1e-16 accuracy even at |p| = 64. Throws
  // ExponentOverflow for |p| > 64 or if an intermediate entry leaves the
  // exactly-representable range.
  TorusPoint power_apply(TorusPoint psi, long long p) const;

  // Coordinates of v in the (v_plus, v_minus) basis; the basis is
  // orthonormal, so these are plain projections.
  Vec2 to_eigen_basis(Vec2 v) const {
    return {dot(v, v_plus), dot(v, v_minus)};
  }
  Vec2 from_eigen_basis(double c_plus, double c_minus) const {
    return c_plus * v_plus + c_minus * v_minus;
  }
  double lambda(int alpha) const { return alpha > 0 ? lambda_plus : lambda_minus; }
  Vec2 eigvec(int alpha) const { return alpha > 0 ? v_plus : v_minus; }
};

// Validates and decomposes m. Throws NotUnimodular, NotHyperbolic, or
// NonOrthogonalEigenbasis.
HyperbolicAuto eigen_decompose(const IntMat2& m);

// R^2-valued trigonometric polynomial on the torus, stored as a finite
// two-sided Fourier table. Real-valuedness is a construction invariant:
// every frequency n appears together with -n carrying conjugate
// coefficients.
struct TrigPoly {
  struct Harmonic {
    std::array<int, 2> n{0, 0};
    std::complex<double> c1;  // coefficient for the first output component
    std::complex<double> c2;  // coefficient for the second output component
  };

  std::vector<Harmonic> terms;
  // Strict Euclidean bound: every stored frequency has |n| < degree_bound.
  int degree_bound = 1;

  // Validates the harmonic table (conjugate pairing within 1e-12, frequencies
  // inside the bound, no duplicates) and returns the polynomial. Throws
  // ValidationError.
  static TrigPoly checked(std::vector<Harmonic> terms, int degree_bound);

  bool is_zero() const { return terms.empty(); }

  Vec2 eval(TorusPoint psi) const;
  Mat2 jacobian(TorusPoint psi) const;

  // Evaluates (prod_j d_{dirs[j]}) (f . proj) at psi, i.e. the directional
  // derivatives along dirs applied to the proj-component of f. Done in
  // Fourier space: each derivative multiplies the n-th coefficient by
  // i*(n . dir). Supports up to 32 derivatives. The imaginary residue of the
  // final sum must vanish to 1e-10 relative (it does for any table that
  // passed checked()); it is verified and discarded.
  double projected_derivative(Vec2 proj, const std::vector<Vec2>& dirs,
                              TorusPoint psi) const;

  // Sup-norm majorant of the same expression: sum_n |c_n . proj| *
  // prod_j |n . dirs[j]|. Used for truncation-tail accounting.
  double projected_derivative_bound(Vec2 proj,
                                    const std::vector<Vec2>& dirs) const;

  // max over an even grid of |f(psi) . proj|.
  double grid_sup(Vec2 proj, int grid_points = 256) const;
};

// The perturbed torus map psi -> m*psi - eps*f(psi) (mod 2*pi).
struct PerturbedMap {
  HyperbolicAuto base;
  TrigPoly f;
  double eps = 0.0;
  // Set when the caller proceeded past a failed convergence-radius check.
  bool radius_warning = false;

  TorusPoint apply(TorusPoint psi) const;
  Mat2 jacobian(TorusPoint psi) const;
};

}  // namespace anosov
