#pragma once

// Forward-mode dual numbers carrying N partial derivatives. T may itself be a
// Jet, which nests the tangents: Jet<Jet<double, 10>, 5> differentiates a
// function of 5 variables whose coefficients already carry 10-direction
// sensitivities. Everything downstream of the chart machinery is templated on
// the scalar precisely so the extremal flow can be differentiated this way,
// without finite differences.

#include <array>
#include <cmath>
#include <type_traits>

#include "octoroll/algebra.hpp"

namespace octoroll {

template <class T, int N>
struct Jet {
  T v{};
  std::array<T, N> d{};

  Jet() = default;
  Jet(const T& x) : v(x) {}  // NOLINT: implicit by design, mirrors double->Jet promotion

  template <class U = T, class = std::enable_if_t<!std::is_same_v<U, double>>>
  Jet(double x) : v(x) {}

  static Jet seed(const T& x, int slot) {
    Jet j(x);
    j.d[slot] = T(1);
    return j;
  }

  Jet operator-() const {
    Jet r(-v);
    for (int i = 0; i < N; ++i) r.d[i] = -d[i];
    return r;
  }

  Jet operator+(const Jet& o) const {
    Jet r(v + o.v);
    for (int i = 0; i < N; ++i) r.d[i] = d[i] + o.d[i];
    return r;
  }

  Jet operator-(const Jet& o) const {
    Jet r(v - o.v);
    for (int i = 0; i < N; ++i) r.d[i] = d[i] - o.d[i];
    return r;
  }

  Jet operator*(const Jet& o) const {
    Jet r(v * o.v);
    for (int i = 0; i < N; ++i) r.d[i] = d[i] * o.v + v * o.d[i];
    return r;
  }

  Jet operator/(const Jet& o) const {
    Jet r(v / o.v);
    for (int i = 0; i < N; ++i) r.d[i] = (d[i] - r.v * o.d[i]) / o.v;
    return r;
  }

  Jet& operator+=(const Jet& o) { return *this = *this + o; }
  Jet& operator-=(const Jet& o) { return *this = *this - o; }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
};

template <class T, int N>
double value_of(const Jet<T, N>& j) {
  return value_of(j.v);
}

template <class T, int N>
Jet<T, N> sqrt(const Jet<T, N>& a) {
  using std::sqrt;
  Jet<T, N> r;
  r.v = sqrt(a.v);
  T half_inv = T(0.5) / r.v;
  for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * half_inv;
  return r;
}

template <class T, int N>
Jet<T, N> sin(const Jet<T, N>& a) {
  using std::cos;
  using std::sin;
  Jet<T, N> r;
  r.v = sin(a.v);
  T c = cos(a.v);
  for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * c;
  return r;
}

template <class T, int N>
Jet<T, N> cos(const Jet<T, N>& a) {
  using std::cos;
  using std::sin;
  Jet<T, N> r;
  r.v = cos(a.v);
  T s = -sin(a.v);
  for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * s;
  return r;
}

template <class T, int N>
Jet<T, N> atan2(const Jet<T, N>& y, const Jet<T, N>& x) {
  using std::atan2;
  Jet<T, N> r;
  r.v = atan2(y.v, x.v);
  T denom = x.v * x.v + y.v * y.v;
  for (int i = 0; i < N; ++i) r.d[i] = (x.v * y.d[i] - y.v * x.d[i]) / denom;
  return r;
}

}  // namespace octoroll
