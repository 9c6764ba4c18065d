#pragma once

// Local chart of the quotient configuration space around a base pair:
// x in R^5 -> class of (exp(a(x)) w1, exp(b(x)) w2) with
//   a(x) = x0 j + x1 k + x4 i/sqrt2,   b(x) = x2 j + x3 k - x4 i/sqrt2.
// The complement direction x4 is orthogonal to the vertical pair (i, i), so
// the chart is a diffeomorphism onto a neighborhood of the coset. Frame
// fields of the distribution and their bracket fields are expressed in chart
// coordinates by solving the 6x6 system [chart columns | vertical] = field;
// by left invariance the solve depends on x only, not on the base pair.
// Everything is templated on the scalar so jets flow through.

#include <array>

#include "octoroll/algebra.hpp"
#include "octoroll/errors.hpp"
#include "octoroll/jet.hpp"
#include "octoroll/rolling.hpp"

namespace octoroll {

template <class S>
using Vec5 = std::array<S, 5>;
template <class S>
using Vec10 = std::array<S, 10>;

// Right-trivialized differential of the imaginary exponential:
// d/de exp(a + e d) = dexp_right(a, d) * exp(a).
template <class S>
QuatT<S> dexp_right(const QuatT<S>& a, const QuatT<S>& d) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  S t2 = a.x * a.x + a.y * a.y + a.z * a.z;
  S c1, c2;
  if (value_of(t2) < 1e-8) {
    c1 = S(0.5) - t2 * (S(1) / S(6));
    c2 = S(1) / S(6) - t2 * (S(1) / S(30));
  } else {
    S theta = sqrt(t2);
    S two_t = theta * S(2);
    c1 = (S(1) - cos(two_t)) / (t2 * S(4));
    c2 = (two_t - sin(two_t)) / (t2 * theta * S(8));
  }
  QuatT<S> ad1 = a * d - d * a;
  QuatT<S> ad2 = a * ad1 - ad1 * a;
  return d + ad1 * c1 + ad2 * c2;
}

struct ExpChart {
  ConfigPoint base{};
  double radius = 0.5;
};

// Coefficient pairs of the chart directions; index 4 is the direction
// orthogonal to the vertical inside the i-plane.
inline const std::array<CoeffPair, 5>& chart_directions() {
  static const std::array<CoeffPair, 5> dirs = [] {
    const double r = 1.0 / std::sqrt(2.0);
    std::array<CoeffPair, 5> d;
    d[0] = {Quaternion::j(), {}};
    d[1] = {Quaternion::k(), {}};
    d[2] = {{}, Quaternion::j()};
    d[3] = {{}, Quaternion::k()};
    d[4] = {Quaternion::i() * r, Quaternion::i() * (-r)};
    return d;
  }();
  return dirs;
}

template <class S>
std::pair<QuatT<S>, QuatT<S>> chart_config(const ExpChart& chart, const Vec5<S>& x) {
  const double r = 1.0 / std::sqrt(2.0);
  QuatT<S> a{S(0), x[4] * r, x[0], x[1]};
  QuatT<S> b{S(0), x[4] * (-r), x[2], x[3]};
  QuatT<S> w1{chart.base.w1.w, chart.base.w1.x, chart.base.w1.y, chart.base.w1.z};
  QuatT<S> w2{chart.base.w2.w, chart.base.w2.x, chart.base.w2.y, chart.base.w2.z};
  return {exp_imag(a) * w1, exp_imag(b) * w2};
}

// In-place Gaussian elimination with partial pivoting on the scalar values;
// solves A X = B for all columns of B.
template <class S, int N, int M>
void solve_linear(std::array<std::array<S, N>, N>& a, std::array<std::array<S, M>, N>& b) {
  for (int col = 0; col < N; ++col) {
    int pivot = col;
    double best = std::abs(value_of(a[col][col]));
    for (int r = col + 1; r < N; ++r) {
      double m = std::abs(value_of(a[r][col]));
      if (m > best) {
        best = m;
        pivot = r;
      }
    }
    if (best < 1e-14) throw TransportSingular("solve_linear: singular system");
    if (pivot != col) {
      std::swap(a[pivot], a[col]);
      std::swap(b[pivot], b[col]);
    }
    S inv = S(1) / a[col][col];
    for (int r = col + 1; r < N; ++r) {
      S f = a[r][col] * inv;
      for (int c = col; c < N; ++c) a[r][c] = a[r][c] - f * a[col][c];
      for (int c = 0; c < M; ++c) b[r][c] = b[r][c] - f * b[col][c];
    }
  }
  for (int col = N - 1; col >= 0; --col) {
    S inv = S(1) / a[col][col];
    for (int c = 0; c < M; ++c) {
      S s = b[col][c];
      for (int k = col + 1; k < N; ++k) s = s - a[col][k] * b[k][c];
      b[col][c] = s * inv;
    }
  }
}

// The five structure fields of the problem in bracket order:
// f1, f2, [f1,f2], [f1,[f1,f2]], [f2,[f1,f2]].
inline std::array<CoeffPair, 5> structure_fields(const Rho& rho) {
  auto [f1, f2] = distribution_frame(rho);
  CoeffPair f12 = bracket(f1, f2);
  return {f1, f2, f12, bracket(f1, f12), bracket(f2, f12)};
}

// Chart components of the structure fields at x: solves
// [chart columns | vertical] * [xdot; c] = field coefficients.
template <class S>
std::array<Vec5<S>, 5> chart_fields(const Rho& rho, const Vec5<S>& x) {
  const double r = 1.0 / std::sqrt(2.0);
  QuatT<S> a{S(0), x[4] * r, x[0], x[1]};
  QuatT<S> b{S(0), x[4] * (-r), x[2], x[3]};

  std::array<std::array<S, 6>, 6> m;
  const auto& dirs = chart_directions();
  for (int col = 0; col < 5; ++col) {
    QuatT<S> da{S(0), S(dirs[col].a.x), S(dirs[col].a.y), S(dirs[col].a.z)};
    QuatT<S> db{S(0), S(dirs[col].b.x), S(dirs[col].b.y), S(dirs[col].b.z)};
    QuatT<S> ca = dexp_right(a, da);
    QuatT<S> cb = dexp_right(b, db);
    m[0][col] = ca.x; m[1][col] = ca.y; m[2][col] = ca.z;
    m[3][col] = cb.x; m[4][col] = cb.y; m[5][col] = cb.z;
  }
  // vertical column (i, i)
  m[0][5] = S(1); m[1][5] = S(0); m[2][5] = S(0);
  m[3][5] = S(1); m[4][5] = S(0); m[5][5] = S(0);

  std::array<CoeffPair, 5> fields = structure_fields(rho);
  std::array<std::array<S, 5>, 6> rhs;
  for (int c = 0; c < 5; ++c) {
    rhs[0][c] = S(fields[c].a.x); rhs[1][c] = S(fields[c].a.y); rhs[2][c] = S(fields[c].a.z);
    rhs[3][c] = S(fields[c].b.x); rhs[4][c] = S(fields[c].b.y); rhs[5][c] = S(fields[c].b.z);
  }
  solve_linear<S, 6, 5>(m, rhs);

  std::array<Vec5<S>, 5> out;
  for (int c = 0; c < 5; ++c)
    for (int row = 0; row < 5; ++row) out[c][row] = rhs[row][c];
  return out;
}

// Structure fields plus their x-gradients, via an inner jet lift.
// grads[c][m][n] = d(field_c)_m / d x_n.
template <class S>
struct FieldsWithGrads {
  std::array<Vec5<S>, 5> value;
  std::array<std::array<Vec5<S>, 5>, 5> grad;
};

template <class S>
FieldsWithGrads<S> chart_fields_with_grads(const Rho& rho, const Vec5<S>& x) {
  using JS = Jet<S, 5>;
  Vec5<JS> xj;
  for (int m = 0; m < 5; ++m) xj[m] = JS::seed(x[m], m);
  std::array<Vec5<JS>, 5> f = chart_fields<JS>(rho, xj);
  FieldsWithGrads<S> out;
  for (int c = 0; c < 5; ++c)
    for (int m = 0; m < 5; ++m) {
      out.value[c][m] = f[c][m].v;
      for (int n = 0; n < 5; ++n) out.grad[c][m][n] = f[c][m].d[n];
    }
  return out;
}

}  // namespace octoroll
