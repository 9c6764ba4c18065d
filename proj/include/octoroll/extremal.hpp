#pragma once

// Abnormal extremals of the rolling distribution, integrated as the
// characteristic flow on the annihilator of the second bracket level: the
// momentum functions h_c(x, p) = <p, f_c(x)> of the structure fields satisfy
// h1 = h2 = h12 = 0 along the flow, and the control direction balances the
// two third-order momenta. The field is templated on the scalar so the
// linearized (variational) flow comes out of jets, not finite differences.

#include <vector>

#include "octoroll/chart.hpp"
#include "octoroll/linalg.hpp"

namespace octoroll {

struct CotangentState {
  ExpChart chart{};
  Eigen::Matrix<double, 5, 1> x = Eigen::Matrix<double, 5, 1>::Zero();
  Eigen::Matrix<double, 5, 1> p = Eigen::Matrix<double, 5, 1>::Zero();
};

struct CharMembership {
  bool in_perp2 = false;
  bool in_perp3 = false;
  double residual2 = 0.0;  // worst normalized pairing against the level-2 span
  double residual3 = 0.0;
};

inline CharMembership char_membership(const CotangentState& z, const Rho& rho,
                                      double threshold = tol::membership) {
  if (z.x.norm() > z.chart.radius)
    throw ChartOverflow("char_membership: point outside the chart radius");
  Vec5<double> x;
  for (int m = 0; m < 5; ++m) x[m] = z.x(m);
  auto fields = chart_fields<double>(rho, x);
  double pn = z.p.norm();
  if (pn == 0.0) throw std::invalid_argument("char_membership: zero covector");
  auto pairing = [&](int c) {
    double num = 0, fn = 0;
    for (int m = 0; m < 5; ++m) {
      num += z.p(m) * fields[c][m];
      fn += fields[c][m] * fields[c][m];
    }
    return std::abs(num) / (pn * std::sqrt(fn));
  };
  CharMembership out;
  out.residual2 = std::max({pairing(0), pairing(1), pairing(2)});
  out.residual3 = std::max(out.residual2, std::max(pairing(3), pairing(4)));
  out.in_perp2 = out.residual2 <= threshold;
  out.in_perp3 = out.residual3 <= threshold;
  return out;
}

namespace detail {

// Right-hand side of the singular flow. Controls are zero-homogeneous in p,
// so the flow commutes with fiber dilations exactly.
template <class S>
Vec10<S> singular_rhs(const Rho& rho, const Vec10<S>& state) {
  using std::sqrt;
  Vec5<S> x;
  for (int m = 0; m < 5; ++m) x[m] = state[m];
  FieldsWithGrads<S> fg = chart_fields_with_grads<S>(rho, x);

  S h112 = S(0), h212 = S(0);
  for (int m = 0; m < 5; ++m) {
    h112 = h112 + state[5 + m] * fg.value[3][m];
    h212 = h212 + state[5 + m] * fg.value[4][m];
  }
  S norm2 = h112 * h112 + h212 * h212;
  double pscale = 0;
  for (int m = 0; m < 5; ++m) pscale += value_of(state[5 + m]) * value_of(state[5 + m]);
  if (value_of(norm2) < 1e-16 * pscale * pscale)
    throw LeavesRegularLocus("singular_rhs: third-order momenta degenerate");
  S inv_norm = S(1) / sqrt(norm2);
  double s0 = 1.0 / std::sqrt(1.0 + rho.value * rho.value);  // unit-ish base speed
  S u1 = h212 * inv_norm * S(s0);
  S u2 = -(h112 * inv_norm * S(s0));

  Vec10<S> rhs;
  for (int m = 0; m < 5; ++m) rhs[m] = u1 * fg.value[0][m] + u2 * fg.value[1][m];
  for (int n = 0; n < 5; ++n) {
    S acc = S(0);
    for (int m = 0; m < 5; ++m)
      acc = acc + state[5 + m] * (u1 * fg.grad[0][m][n] + u2 * fg.grad[1][m][n]);
    rhs[5 + n] = -acc;
  }
  return rhs;
}

template <class S>
Vec10<S> rk4_step(const Rho& rho, const Vec10<S>& s, double h) {
  auto add = [](const Vec10<S>& a, const Vec10<S>& b, double f) {
    Vec10<S> r;
    for (int m = 0; m < 10; ++m) r[m] = a[m] + b[m] * S(f);
    return r;
  };
  Vec10<S> k1 = singular_rhs(rho, s);
  Vec10<S> k2 = singular_rhs(rho, add(s, k1, h / 2));
  Vec10<S> k3 = singular_rhs(rho, add(s, k2, h / 2));
  Vec10<S> k4 = singular_rhs(rho, add(s, k3, h));
  Vec10<S> r = s;
  for (int m = 0; m < 10; ++m)
    r[m] = s[m] + (k1[m] + k2[m] * S(2) + k3[m] * S(2) + k4[m]) * S(h / 6);
  return r;
}

// Orthogonal projection of p back onto the annihilator of {f1, f2, f12}.
inline void project_momentum(const Rho& rho, Eigen::Matrix<double, 5, 1>& p,
                             const Eigen::Matrix<double, 5, 1>& x) {
  Vec5<double> xv;
  for (int m = 0; m < 5; ++m) xv[m] = x(m);
  auto fields = chart_fields<double>(rho, xv);
  Eigen::Matrix<double, 3, 5> a;
  for (int c = 0; c < 3; ++c)
    for (int m = 0; m < 5; ++m) a(c, m) = fields[c][m];
  Eigen::Matrix<double, 3, 1> defect = a * p;
  p -= a.transpose() * (a * a.transpose()).ldlt().solve(defect);
}

}  // namespace detail

// Canonical covector on the regular characteristic locus over the chart
// origin: annihilates f1, f2, f12 and pairs with the third-order fields
// through the two free parameters (r, s).
inline CotangentState seed_covector(const Rho& rho, const ConfigPoint& base, double r,
                                    double s) {
  CotangentState z;
  z.chart.base = base;
  z.p << -rho.value * s, -rho.value * r, s, r, 0.0;
  if (z.p.norm() == 0.0)
    throw std::invalid_argument("seed_covector: (r, s) must not both vanish");
  z.p.normalize();
  return z;
}

struct ExtremalSample {
  double t = 0.0;
  CotangentState state;
  Eigen::Vector2d control = Eigen::Vector2d::Zero();
};

struct Extremal {
  Rho rho{};
  CotangentState z0;
  std::vector<ExtremalSample> samples;
  double max_membership_residual = 0.0;
  int chart_handovers = 0;
};

namespace detail {

inline Eigen::Vector2d controls_at(const Rho& rho, const Eigen::Matrix<double, 5, 1>& x,
                                   const Eigen::Matrix<double, 5, 1>& p) {
  Vec5<double> xv;
  for (int m = 0; m < 5; ++m) xv[m] = x(m);
  auto fields = chart_fields<double>(rho, xv);
  double h112 = 0, h212 = 0;
  for (int m = 0; m < 5; ++m) {
    h112 += p(m) * fields[3][m];
    h212 += p(m) * fields[4][m];
  }
  double norm = std::hypot(h112, h212);
  double s0 = 1.0 / std::sqrt(1.0 + rho.value * rho.value);
  return {s0 * h212 / norm, -s0 * h112 / norm};
}

// Re-bases the chart at the current configuration and maps (x, p) -> (0, p').
// Tangents transform by the upper 5x5 block of new_frame^{-1} * old_frame;
// covectors by its inverse transpose.
inline CotangentState rebase_chart(const CotangentState& z) {
  Vec5<double> xv;
  for (int m = 0; m < 5; ++m) xv[m] = z.x(m);
  auto [w1, w2] = chart_config<double>(z.chart, xv);

  // columns of the old chart differential and of the new one (at 0), as
  // coefficient pairs; the new chart at the same point has identity columns.
  const double r = 1.0 / std::sqrt(2.0);
  QuatT<double> a{0, xv[4] * r, xv[0], xv[1]};
  QuatT<double> b{0, -xv[4] * r, xv[2], xv[3]};
  Eigen::Matrix<double, 6, 6> old_cols;
  const auto& dirs = chart_directions();
  for (int col = 0; col < 5; ++col) {
    Quaternion ca = dexp_right(a, dirs[col].a);
    Quaternion cb = dexp_right(b, dirs[col].b);
    old_cols.col(col) << ca.x, ca.y, ca.z, cb.x, cb.y, cb.z;
  }
  old_cols.col(5) << 1, 0, 0, 1, 0, 0;
  Eigen::Matrix<double, 6, 6> new_cols;
  for (int col = 0; col < 5; ++col) {
    new_cols.col(col) << dirs[col].a.x, dirs[col].a.y, dirs[col].a.z, dirs[col].b.x,
        dirs[col].b.y, dirs[col].b.z;
  }
  new_cols.col(5) << 1, 0, 0, 1, 0, 0;

  Eigen::Matrix<double, 6, 6> m6 = new_cols.partialPivLu().solve(old_cols);
  Eigen::Matrix<double, 5, 5> t = m6.topLeftCorner<5, 5>();

  CotangentState out;
  out.chart.base = ConfigPoint{normalized(w1), normalized(w2)};
  out.chart.radius = z.chart.radius;
  out.x.setZero();
  out.p = t.transpose().partialPivLu().solve(z.p);
  return out;
}

}  // namespace detail

// Integrates the singular extremal through z0 over [0, T]. Momentum is
// projected back onto the annihilator each step; the chart is handed over
// whenever the base point approaches the chart boundary.
inline Extremal integrate_singular_extremal(const CotangentState& z0, const Rho& rho,
                                            double T, double dt) {
  CharMembership m0 = char_membership(z0, rho, 1e-8);
  if (!m0.in_perp2 || m0.in_perp3)
    throw std::invalid_argument(
        "integrate_singular_extremal: start is not on the regular characteristic locus");

  Extremal e;
  e.rho = rho;
  e.z0 = z0;
  int steps = static_cast<int>(std::ceil(std::abs(T) / dt));
  double h = T / steps;
  CotangentState z = z0;
  e.samples.push_back({0.0, z, detail::controls_at(rho, z.x, z.p)});
  for (int n = 0; n < steps; ++n) {
    Vec10<double> s;
    for (int mm = 0; mm < 5; ++mm) {
      s[mm] = z.x(mm);
      s[5 + mm] = z.p(mm);
    }
    s = detail::rk4_step(rho, s, h);
    for (int mm = 0; mm < 5; ++mm) {
      z.x(mm) = s[mm];
      z.p(mm) = s[5 + mm];
    }
    detail::project_momentum(rho, z.p, z.x);
    if (z.x.norm() > 0.7 * z.chart.radius) {
      z = detail::rebase_chart(z);
      ++e.chart_handovers;
    }
    CharMembership m = char_membership(z, rho, 1.0);
    e.max_membership_residual = std::max(e.max_membership_residual, m.residual2);
    e.samples.push_back({(n + 1) * h, z, detail::controls_at(rho, z.x, z.p)});
  }
  return e;
}

// Base curve of the extremal pushed through the Hopf map of the first slot;
// singular motions roll along great circles, so these points are coplanar
// with the origin.
inline std::vector<Eigen::Vector3d> base_hopf_trace(const Extremal& e) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(e.samples.size());
  for (const auto& s : e.samples) {
    Vec5<double> xv;
    for (int m = 0; m < 5; ++m) xv[m] = s.state.x(m);
    auto [w1, w2] = chart_config<double>(s.state.chart, xv);
    out.push_back(imag_part(hopf(normalized(w1))));
  }
  return out;
}

}  // namespace octoroll
