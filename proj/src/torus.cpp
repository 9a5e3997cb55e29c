#include "anosov/torus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "anosov/errors.hpp"

namespace anosov {
namespace {

// Entries of intermediate integer matrices must stay exactly representable
// as doubles (and well inside int64). 2^52 leaves headroom for one more
// addition inside the product.
constexpr std::int64_t kEntryLimit = std::int64_t{1} << 52;

struct WideMat {
  __int128 a = 1, b = 0, c = 0, d = 1;
};

WideMat wide(const IntMat2& m) { return {m.a, m.b, m.c, m.d}; }

__int128 abs128(__int128 v) { return v < 0 ? -v : v; }

WideMat mul_checked(const WideMat& x, const WideMat& y) {
  WideMat r;
  r.a = x.a * y.a + x.b * y.c;
  r.b = x.a * y.b + x.b * y.d;
  r.c = x.c * y.a + x.d * y.c;
  r.d = x.c * y.b + x.d * y.d;
  if (abs128(r.a) > kEntryLimit || abs128(r.b) > kEntryLimit ||
      abs128(r.c) > kEntryLimit || abs128(r.d) > kEntryLimit) {
    throw ExponentOverflow("integer matrix power: entry exceeds exact range");
  }
  return r;
}

// m^-1 for |det m| = 1: the adjugate divided by det stays integral.
IntMat2 int_inverse(const IntMat2& m) {
  std::int64_t det = m.a * m.d - m.b * m.c;
  // det is +-1 for every matrix that reaches this path.
  return {det * m.d, -det * m.b, -det * m.c, det * m.a};
}

}  // namespace

Vec2 normalized(Vec2 v) {
  double n = norm(v);
  if (!(n > 1e-300)) {
    throw ZeroDenominator("cannot normalize a zero vector");
  }
  return {v.x / n, v.y / n};
}

Mat2 operator*(const Mat2& m, const Mat2& n) {
  return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
          m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
}

Mat2 inverse(const Mat2& m) {
  double dt = det(m);
  if (std::abs(dt) < 1e-14) {
    throw SingularJacobian("2x2 inverse: determinant is numerically zero");
  }
  return {m.d / dt, -m.b / dt, -m.c / dt, m.a / dt};
}

Vec2 toroidal_delta(TorusPoint a, TorusPoint b) {
  auto wrap_diff = [](double d) {
    d -= kTwoPi * std::round(d / kTwoPi);
    if (d <= -0.5 * kTwoPi) d += kTwoPi;
    return d;
  };
  return {wrap_diff(b.t1 - a.t1), wrap_diff(b.t2 - a.t2)};
}

double toroidal_distance(TorusPoint a, TorusPoint b) {
  return norm(toroidal_delta(a, b));
}

TorusPoint HyperbolicAuto::power_apply(TorusPoint psi, long long p) const {
  if (p > 64 || p < -64) {
    std::ostringstream msg;
    msg << "matrix power " << p << " outside the supported range [-64, 64]";
    throw ExponentOverflow(msg.str());
  }

  WideMat acc;  // identity
  if (p != 0) {
    WideMat base = wide(p > 0 ? m : int_inverse(m));
    unsigned long long e = static_cast<unsigned long long>(p > 0 ? p : -p);
    while (e > 0) {
      if (e & 1ULL) acc = mul_checked(acc, base);
      e >>= 1;
      if (e > 0) base = mul_checked(base, base);
    }
  }

  // Entries passed the kEntryLimit check, so the double conversions are
  // exact and two_prod captures the products without loss.
  double a = static_cast<double>(static_cast<std::int64_t>(acc.a));
  double b = static_cast<double>(static_cast<std::int64_t>(acc.b));
  double c = static_cast<double>(static_cast<std::int64_t>(acc.c));
  double d = static_cast<double>(static_cast<std::int64_t>(acc.d));

  DD r1 = dd_add(two_prod(a, psi.t1), two_prod(b, psi.t2));
  DD r2 = dd_add(two_prod(c, psi.t1), two_prod(d, psi.t2));
  return {dd_wrap_two_pi(r1), dd_wrap_two_pi(r2)};
}

HyperbolicAuto eigen_decompose(const IntMat2& m) {
  std::int64_t det = m.a * m.d - m.b * m.c;
  if (det != 1 && det != -1) {
    std::ostringstream msg;
    msg << "matrix determinant is " << det << "; need |det| = 1";
    throw NotUnimodular(msg.str());
  }

  double tr = static_cast<double>(m.a + m.d);
  double disc = tr * tr - 4.0 * static_cast<double>(det);
  if (disc <= 0.0) {
    throw NotHyperbolic("eigenvalues are complex or repeated");
  }

  // Larger-magnitude root first, via the cancellation-free form; the other
  // root comes from the product lambda1 * lambda2 = det.
  double sq = std::sqrt(disc);
  double big = (tr >= 0.0) ? 0.5 * (tr + sq) : 0.5 * (tr - sq);
  double small = static_cast<double>(det) / big;
  if (!(std::abs(big) > 1.0 && std::abs(small) < 1.0)) {
    throw NotHyperbolic("spectrum touches the unit circle");
  }

  auto eigenvector = [&](double lambda) {
    // (m - lambda I) v = 0 has the two row solutions (lambda - d, c) and
    // (b, lambda - a); pick the better-conditioned one.
    Vec2 r1{lambda - static_cast<double>(m.d), static_cast<double>(m.c)};
    Vec2 r2{static_cast<double>(m.b), lambda - static_cast<double>(m.a)};
    Vec2 v = (dot(r1, r1) >= dot(r2, r2)) ? r1 : r2;
    v = normalized(v);
    if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) v = -v;
    return v;
  };

  HyperbolicAuto h;
  h.m = m;
  h.det = static_cast<int>(det);
  h.lambda_plus = big;
  h.lambda_minus = small;
  h.v_plus = eigenvector(big);
  h.v_minus = eigenvector(small);

  if (std::abs(dot(h.v_plus, h.v_minus)) > 1e-12) {
    throw NonOrthogonalEigenbasis(
        "expanding and contracting directions are not orthogonal");
  }
  return h;
}

TrigPoly TrigPoly::checked(std::vector<Harmonic> terms, int degree_bound) {
  if (degree_bound < 1) {
    throw ValidationError("harmonic degree bound must be >= 1");
  }

  auto find = [&](int n1, int n2) -> const Harmonic* {
    for (const auto& t : terms) {
      if (t.n[0] == n1 && t.n[1] == n2) return &t;
    }
    return nullptr;
  };

  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    long long n1 = t.n[0], n2 = t.n[1];
    if (n1 * n1 + n2 * n2 >= static_cast<long long>(degree_bound) * degree_bound) {
      std::ostringstream msg;
      msg << "frequency (" << n1 << ", " << n2 << ") violates |n| < "
          << degree_bound;
      throw ValidationError(msg.str());
    }
    for (std::size_t j = i + 1; j < terms.size(); ++j) {
      if (terms[j].n == t.n) {
        throw ValidationError("duplicate frequency in harmonic table");
      }
    }
    if (n1 == 0 && n2 == 0) {
      if (std::abs(t.c1.imag()) > 1e-12 || std::abs(t.c2.imag()) > 1e-12) {
        throw ValidationError("constant harmonic must be real");
      }
      continue;
    }
    const Harmonic* mirror = find(t.n[0] == 0 ? 0 : -t.n[0],
                                  t.n[1] == 0 ? 0 : -t.n[1]);
    if (mirror == nullptr) {
      std::ostringstream msg;
      msg << "frequency (" << n1 << ", " << n2
          << ") has no mirrored partner; the polynomial would not be real";
      throw ValidationError(msg.str());
    }
    if (std::abs(mirror->c1 - std::conj(t.c1)) > 1e-12 ||
        std::abs(mirror->c2 - std::conj(t.c2)) > 1e-12) {
      std::ostringstream msg;
      msg << "coefficients at (" << n1 << ", " << n2
          << ") and its mirror are not conjugate";
      throw ValidationError(msg.str());
    }
  }

  TrigPoly p;
  p.terms = std::move(terms);
  p.degree_bound = degree_bound;
  return p;
}

Vec2 TrigPoly::eval(TorusPoint psi) const {
  KahanSum s1, s2;
  for (const auto& t : terms) {
    double phase = t.n[0] * psi.t1 + t.n[1] * psi.t2;
    std::complex<double> e{std::cos(phase), std::sin(phase)};
    s1.add((t.c1 * e).real());
    s2.add((t.c2 * e).real());
  }
  return {s1.value(), s2.value()};
}

Mat2 TrigPoly::jacobian(TorusPoint psi) const {
  KahanSum a, b, c, d;
  for (const auto& t : terms) {
    double phase = t.n[0] * psi.t1 + t.n[1] * psi.t2;
    // d/dtheta_k of e^{i n.psi} multiplies by i*n_k.
    std::complex<double> ie{-std::sin(phase), std::cos(phase)};
    a.add((t.c1 * ie).real() * t.n[0]);
    b.add((t.c1 * ie).real() * t.n[1]);
    c.add((t.c2 * ie).real() * t.n[0]);
    d.add((t.c2 * ie).real() * t.n[1]);
  }
  return {a.value(), b.value(), c.value(), d.value()};
}

double TrigPoly::projected_derivative(Vec2 proj, const std::vector<Vec2>& dirs,
                                      TorusPoint psi) const {
  if (dirs.size() > 32) {
    throw TooLarge("more than 32 directional derivatives requested");
  }
  std::complex<double> acc{0.0, 0.0};
  double scale = 0.0;
  for (const auto& t : terms) {
    std::complex<double> coef = t.c1 * proj.x + t.c2 * proj.y;
    for (const auto& u : dirs) {
      double nu = t.n[0] * u.x + t.n[1] * u.y;
      coef *= std::complex<double>{0.0, nu};
    }
    double phase = t.n[0] * psi.t1 + t.n[1] * psi.t2;
    acc += coef * std::complex<double>{std::cos(phase), std::sin(phase)};
    scale += std::abs(coef);
  }
  if (std::abs(acc.imag()) > 1e-10 * (scale + 1e-300)) {
    throw NumericError(
        "projected derivative has a non-vanishing imaginary residue; "
        "harmonic table is not conjugate-symmetric");
  }
  return acc.real();
}

double TrigPoly::projected_derivative_bound(Vec2 proj,
                                            const std::vector<Vec2>& dirs) const {
  double bound = 0.0;
  for (const auto& t : terms) {
    double mag = std::abs(t.c1 * proj.x + t.c2 * proj.y);
    for (const auto& u : dirs) {
      mag *= std::abs(t.n[0] * u.x + t.n[1] * u.y);
    }
    bound += mag;
  }
  return bound;
}

double TrigPoly::grid_sup(Vec2 proj, int grid_points) const {
  if (grid_points < 2) {
    throw ValidationError("grid must have at least 2 points per side");
  }
  double best = 0.0;
  double step = kTwoPi / grid_points;
  for (int i = 0; i < grid_points; ++i) {
    for (int j = 0; j < grid_points; ++j) {
      Vec2 v = eval({i * step, j * step});
      best = std::max(best, std::abs(dot(v, proj)));
    }
  }
  return best;
}

TorusPoint PerturbedMap::apply(TorusPoint psi) const {
  TorusPoint s = base.apply(psi);
  if (f.is_zero() || eps == 0.0) return s;
  Vec2 d = f.eval(psi);
  return shifted(s, {-eps * d.x, -eps * d.y});
}

Mat2 PerturbedMap::jacobian(TorusPoint psi) const {
  Mat2 j = base.real_matrix();
  if (f.is_zero() || eps == 0.0) return j;
  Mat2 df = f.jacobian(psi);
  return {j.a - eps * df.a, j.b - eps * df.b,
          j.c - eps * df.c, j.d - eps * df.d};
}

}  // namespace anosov
