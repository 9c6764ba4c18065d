#pragma once

// Quaternions and split-octonions over a generic scalar. The split-octonion
// x = a + l*b is stored as the quaternion pair (a, b); the product is
//
//   (a + l b)(c + l d) = (ac + d*conj(b)) + l(conj(a) d + c b)
//
// which makes Q(x) = |a|^2 - |b|^2 multiplicative and gives the algebra its
// divisors of zero on the null cone of Q. The scalar is templated so the same
// arithmetic runs on doubles and on forward-mode jets.

#include <array>
#include <cmath>

#include "octoroll/errors.hpp"

namespace octoroll {

// Plain-scalar extraction; jet.hpp adds the overload for jets. Used for
// branch decisions (series switches, pivoting) inside templated numerics.
inline double value_of(double x) { return x; }
inline float value_of(float x) { return x; }

template <class S>
struct QuatT {
  S w{}, x{}, y{}, z{};

  constexpr QuatT() = default;
  constexpr QuatT(S w_, S x_, S y_, S z_) : w(w_), x(x_), y(y_), z(z_) {}

  static constexpr QuatT one() { return {S(1), S(0), S(0), S(0)}; }
  static constexpr QuatT i() { return {S(0), S(1), S(0), S(0)}; }
  static constexpr QuatT j() { return {S(0), S(0), S(1), S(0)}; }
  static constexpr QuatT k() { return {S(0), S(0), S(0), S(1)}; }

  constexpr QuatT operator+(const QuatT& o) const { return {w + o.w, x + o.x, y + o.y, z + o.z}; }
  constexpr QuatT operator-(const QuatT& o) const { return {w - o.w, x - o.x, y - o.y, z - o.z}; }
  constexpr QuatT operator-() const { return {-w, -x, -y, -z}; }

  // Hamilton product.
  constexpr QuatT operator*(const QuatT& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z,
            w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w};
  }

  constexpr QuatT operator*(const S& s) const { return {w * s, x * s, y * s, z * s}; }

  friend constexpr QuatT operator*(const S& s, const QuatT& q) { return q * s; }

  constexpr QuatT conj() const { return {w, -x, -y, -z}; }

  constexpr S norm_sq() const { return w * w + x * x + y * y + z * z; }

  S norm() const {
    using std::sqrt;
    return sqrt(norm_sq());
  }
};

template <class S>
QuatT<S> normalized(const QuatT<S>& q) {
  S n = q.norm();
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

template <class S>
constexpr QuatT<S> conj(const QuatT<S>& q) {
  return q.conj();
}

template <class S>
constexpr S dot(const QuatT<S>& p, const QuatT<S>& q) {
  return p.w * q.w + p.x * q.x + p.y * q.y + p.z * q.z;
}

// [p, q] = pq - qp. Commutators of imaginary quaternions stay imaginary.
template <class S>
constexpr QuatT<S> commutator(const QuatT<S>& p, const QuatT<S>& q) {
  return p * q - q * p;
}

// Quaternion exponential of an imaginary argument; lands on the unit sphere.
template <class S>
QuatT<S> exp_imag(const QuatT<S>& a) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  S t2 = a.x * a.x + a.y * a.y + a.z * a.z;
  if (value_of(t2) < 1e-24) {
    // sin(t)/t = 1 - t^2/6 + t^4/120
    S c = S(1) - t2 * S(0.5);
    S s = S(1) - t2 * (S(1) / S(6));
    return {c, a.x * s, a.y * s, a.z * s};
  }
  S t = sqrt(t2);
  S s = sin(t) / t;
  return {cos(t), a.x * s, a.y * s, a.z * s};
}

// Log of a unit quaternion, imaginary part only. Inverse of exp_imag on the
// |angle| < pi chart.
template <class S>
QuatT<S> log_unit(const QuatT<S>& q) {
  using std::atan2;
  using std::sqrt;
  S v2 = q.x * q.x + q.y * q.y + q.z * q.z;
  if (value_of(v2) < 1e-28) return {S(0), q.x, q.y, q.z};
  S v = sqrt(v2);
  S t = atan2(v, q.w);
  S s = t / v;
  return {S(0), q.x * s, q.y * s, q.z * s};
}

using Quaternion = QuatT<double>;

template <class S>
struct SplitOctT {
  QuatT<S> a{};  // quaternion slot
  QuatT<S> b{};  // l slot: x = a + l b

  constexpr SplitOctT() = default;
  constexpr SplitOctT(const QuatT<S>& a_, const QuatT<S>& b_) : a(a_), b(b_) {}

  static constexpr SplitOctT one() { return {QuatT<S>::one(), {}}; }
  static constexpr SplitOctT ell() { return {{}, QuatT<S>::one()}; }

  constexpr SplitOctT operator+(const SplitOctT& o) const { return {a + o.a, b + o.b}; }
  constexpr SplitOctT operator-(const SplitOctT& o) const { return {a - o.a, b - o.b}; }
  constexpr SplitOctT operator-() const { return {-a, -b}; }
  constexpr SplitOctT operator*(const S& s) const { return {a * s, b * s}; }

  constexpr SplitOctT operator*(const SplitOctT& o) const {
    return {a * o.a + o.b * b.conj(), a.conj() * o.b + o.a * b};
  }

  // Euclidean norm of the 8 coefficients; used for residual checks only.
  S frob_norm_sq() const { return a.norm_sq() + b.norm_sq(); }
  S frob_norm() const {
    using std::sqrt;
    return sqrt(frob_norm_sq());
  }
};

using SplitOctonion = SplitOctT<double>;

// Conjugation: the anti-involution fixing the unit and satisfying
// conj(x) * x = Q(x) * 1 for the product above. In the (a, b) slots it is
// (conj(a), -b).
template <class S>
constexpr SplitOctT<S> conj(const SplitOctT<S>& x) {
  return {x.a.conj(), -x.b};
}

template <class S>
constexpr S quadratic_form(const SplitOctT<S>& x) {
  return x.a.norm_sq() - x.b.norm_sq();
}

// Polarization of Q: symmetric bilinear, polarize(x, x) = Q(x).
template <class S>
constexpr S polarize(const SplitOctT<S>& x, const SplitOctT<S>& y) {
  return (quadratic_form(x + y) - quadratic_form(x - y)) * S(0.25);
}

template <class S>
SplitOctT<S> inverse(const SplitOctT<S>& x) {
  S q = quadratic_form(x);
  if (std::abs(value_of(q)) <= tol::membership)
    throw ZeroDivisorError("inverse: Q(x) vanishes, x is a divisor of zero");
  return conj(x) * (S(1) / q);
}

// Hopf map S^3 -> S^2, w -> conj(w) i w; lands in the imaginary unit sphere.
template <class S>
QuatT<S> hopf(const QuatT<S>& w) {
  return w.conj() * QuatT<S>::i() * w;
}

// Both legs of the double covering of the unit tangent bundle of S^2:
// w -> (conj(w) i w, conj(w) j w), an orthonormal pair of imaginary units.
template <class S>
std::array<QuatT<S>, 2> hopf_frame(const QuatT<S>& w) {
  return {w.conj() * QuatT<S>::i() * w, w.conj() * QuatT<S>::j() * w};
}

// Fixed coefficient basis (1, i, j, k, l, li, lj, lk). All matrix
// representations downstream (annihilator spaces, derivations) use this order.
using Vec8 = std::array<double, 8>;

inline Vec8 to_vec8(const SplitOctonion& x) {
  return {x.a.w, x.a.x, x.a.y, x.a.z, x.b.w, x.b.x, x.b.y, x.b.z};
}

inline SplitOctonion from_vec8(const Vec8& v) {
  return {{v[0], v[1], v[2], v[3]}, {v[4], v[5], v[6], v[7]}};
}

}  // namespace octoroll
