#pragma once

// Configuration space of two unit spheres rolling without slipping or
// twisting, modeled as pairs of unit quaternions modulo the diagonal circle
// action (w1, w2) -> (e^{i t} w1, e^{i t} w2). The rank-2 admissible-velocity
// distribution with radii ratio rho is spanned by the left-multiplication
// fields with coefficients (j, rho j) and (k, rho k); the circle direction
// (i, i) is vertical. Flags are computed exactly through the coefficient Lie
// algebra and only then reduced modulo the vertical.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "octoroll/algebra.hpp"
#include "octoroll/errors.hpp"
#include "octoroll/linalg.hpp"

namespace octoroll {

struct Rho {
  double value = 1.0;
  bool finite = true;

  static Rho of(double v) { return {v, true}; }
  static Rho infinite() { return {0.0, false}; }
};

// Coset representative with a fixed phase gauge: writing w1 = z1 + z2 j with
// z1, z2 complex in span{1, i}, both slots are multiplied by e^{-i arg z1}
// (falling through to z2 if z1 vanishes). Total gauge fix, idempotent.
struct ConfigPoint {
  Quaternion w1 = Quaternion::one();
  Quaternion w2 = Quaternion::one();
};

inline ConfigPoint normalize_config(const Quaternion& w1_in, const Quaternion& w2_in) {
  Quaternion w1 = normalized(w1_in);
  Quaternion w2 = normalized(w2_in);
  double theta;
  if (std::hypot(w1.w, w1.x) > tol::membership)
    theta = std::atan2(w1.x, w1.w);
  else
    theta = std::atan2(w1.z, w1.y);
  Quaternion phase{std::cos(theta), -std::sin(theta), 0.0, 0.0};
  return {normalized(phase * w1), normalized(phase * w2)};
}

inline double coset_distance(const ConfigPoint& p, const ConfigPoint& q) {
  ConfigPoint a = normalize_config(p.w1, p.w2);
  ConfigPoint b = normalize_config(q.w1, q.w2);
  return std::sqrt((a.w1 - b.w1).norm_sq() + (a.w2 - b.w2).norm_sq());
}

// Coefficient pair (a, b) of the vector field w -> (a w1, b w2); both
// imaginary. These pairs form a 6-dimensional Lie algebra under bracket().
struct CoeffPair {
  Quaternion a{};
  Quaternion b{};
};

inline CoeffPair vertical_pair() { return {Quaternion::i(), Quaternion::i()}; }

inline std::pair<CoeffPair, CoeffPair> distribution_frame(const Rho& rho) {
  if (!rho.finite)
    throw InfiniteRhoError("distribution_frame: infinite radii ratio is out of scope");
  return {CoeffPair{Quaternion::j(), Quaternion::j() * rho.value},
          CoeffPair{Quaternion::k(), Quaternion::k() * rho.value}};
}

// Lie bracket of the fields w -> (a1 w1, b1 w2) and w -> (a2 w1, b2 w2).
// Left-multiplication flows compose as w(t) = exp(t a) w, so the vector-field
// bracket carries the opposite sign of the quaternion commutator; the global
// sign is frozen against the flow-commutator oracle in the tests.
inline CoeffPair bracket(const CoeffPair& u, const CoeffPair& v) {
  return {-commutator(u.a, v.a), -commutator(u.b, v.b)};
}

inline Eigen::Matrix<double, 6, 1> coeff6(const CoeffPair& p) {
  Eigen::Matrix<double, 6, 1> v;
  v << p.a.x, p.a.y, p.a.z, p.b.x, p.b.y, p.b.z;
  return v;
}

inline double coeff_norm(const CoeffPair& p) { return coeff6(p).norm(); }

// Rank of a coefficient family after quotienting by the vertical pair (i, i).
inline int rank_mod_vertical(const std::vector<CoeffPair>& gens) {
  MatrixXd m(6, static_cast<int>(gens.size()) + 1);
  for (int c = 0; c < static_cast<int>(gens.size()); ++c) {
    auto v = coeff6(gens[c]);
    double n = v.norm();
    m.col(c) = n > 0 ? (v / n).eval() : v;
  }
  m.col(static_cast<int>(gens.size())) = coeff6(vertical_pair()).normalized();
  return rank_svd(m) - 1;
}

struct FlagReport {
  std::vector<int> dims;                       // dim of level l span, l = 1, 2, ...
  std::vector<std::vector<CoeffPair>> bases;   // generating words per level
};

// Flag of the distribution via iterated brackets of the two frame fields,
// computed in the coefficient algebra. dims are measured in the 5-dimensional
// quotient by the vertical direction and cap at 5.
inline FlagReport bracket_flag(const Rho& rho, int max_level) {
  if (!rho.finite) throw InfiniteRhoError("bracket_flag: rho must be finite");
  auto [f1, f2] = distribution_frame(rho);
  FlagReport report;
  std::vector<CoeffPair> accumulated{f1, f2};
  std::vector<CoeffPair> frontier{f1, f2};
  report.dims.push_back(rank_mod_vertical(accumulated));
  report.bases.push_back(accumulated);
  for (int level = 2; level <= max_level; ++level) {
    std::vector<CoeffPair> next;
    for (const auto& w : frontier) {
      for (const auto& f : {f1, f2}) {
        CoeffPair c = bracket(f, w);
        if (coeff_norm(c) > tol::membership) next.push_back(c);
      }
    }
    accumulated.insert(accumulated.end(), next.begin(), next.end());
    int dim = rank_mod_vertical(accumulated);
    report.dims.push_back(dim);
    report.bases.push_back(accumulated);
    frontier = std::move(next);
    if (dim >= 5 || frontier.empty()) break;
  }
  return report;
}

// Tangent vector of a coefficient pair at a representative, as an 8-vector in
// the ambient quaternion pair space.
inline Eigen::Matrix<double, 8, 1> tangent_at(const CoeffPair& c, const ConfigPoint& p) {
  Quaternion t1 = c.a * p.w1;
  Quaternion t2 = c.b * p.w2;
  Eigen::Matrix<double, 8, 1> v;
  v << t1.w, t1.x, t1.y, t1.z, t2.w, t2.x, t2.y, t2.z;
  return v;
}

inline int rank_at_point(const std::vector<CoeffPair>& gens, const ConfigPoint& p) {
  MatrixXd m(8, static_cast<int>(gens.size()) + 1);
  for (int c = 0; c < static_cast<int>(gens.size()); ++c)
    m.col(c) = tangent_at(gens[c], p).normalized();
  m.col(static_cast<int>(gens.size())) = tangent_at(vertical_pair(), p).normalized();
  return rank_svd(m) - 1;
}

// Flag dimensions evaluated through actual tangent vectors at a point; agrees
// with bracket_flag by homogeneity and serves as its point-wise cross-check.
inline std::vector<int> flag_dims_at(const Rho& rho, const ConfigPoint& p, int max_level) {
  FlagReport r = bracket_flag(rho, max_level);
  std::vector<int> dims;
  for (const auto& basis : r.bases) dims.push_back(rank_at_point(basis, p));
  return dims;
}

// True iff f, g, [f,g], [f,[f,g]], [g,[g,f]] span the full quotient tangent
// space at p; holds for every rho != 1 and fails at rho = 1.
inline bool has_generic_growth(const Rho& rho, const ConfigPoint& p) {
  auto [f, g] = distribution_frame(rho);
  CoeffPair fg = bracket(f, g);
  CoeffPair ffg = bracket(f, fg);
  CoeffPair ggf = bracket(g, bracket(g, f));
  return rank_at_point({f, g, fg, ffg, ggf}, p) == 5;
}

// --- rolling along a prescribed spherical curve ---------------------------

// Sampled curve on S^2 with centripetal Catmull-Rom interpolation of the
// samples, renormalized to the sphere; value() returns position and velocity.
class SphereCurve {
 public:
  SphereCurve(std::vector<double> t, std::vector<Eigen::Vector3d> q)
      : t_(std::move(t)), q_(std::move(q)) {
    if (t_.size() != q_.size() || t_.size() < 2)
      throw std::invalid_argument("SphereCurve: need matching t/q samples, >= 2");
    for (auto& v : q_) v.normalize();
  }

  double t_begin() const { return t_.front(); }
  double t_end() const { return t_.back(); }

  std::pair<Eigen::Vector3d, Eigen::Vector3d> value(double t) const {
    int n = static_cast<int>(t_.size());
    int hi = static_cast<int>(std::lower_bound(t_.begin(), t_.end(), t) - t_.begin());
    int i1 = std::clamp(hi - 1, 0, n - 2);
    int i0 = std::max(i1 - 1, 0);
    int i2 = i1 + 1;
    int i3 = std::min(i2 + 1, n - 1);
    double h = t_[i2] - t_[i1];
    double s = (t - t_[i1]) / h;
    // Catmull-Rom tangents, one-sided at the ends
    Eigen::Vector3d m1 = (q_[i2] - q_[i0]) / (t_[i2] - t_[i0]) * h;
    Eigen::Vector3d m2 = (q_[i3] - q_[i1]) / (t_[i3] - t_[i1]) * h;
    double s2 = s * s, s3 = s2 * s;
    Eigen::Vector3d c = (2 * s3 - 3 * s2 + 1) * q_[i1] + (s3 - 2 * s2 + s) * m1 +
                        (-2 * s3 + 3 * s2) * q_[i2] + (s3 - s2) * m2;
    Eigen::Vector3d dc = ((6 * s2 - 6 * s) * q_[i1] + (3 * s2 - 4 * s + 1) * m1 +
                          (-6 * s2 + 6 * s) * q_[i2] + (3 * s2 - 2 * s) * m2) /
                         h;
    // project to the sphere and its tangent
    double r = c.norm();
    Eigen::Vector3d q = c / r;
    Eigen::Vector3d dq = dc / r - q * (q.dot(dc) / r);
    return {q, dq};
  }

 private:
  std::vector<double> t_;
  std::vector<Eigen::Vector3d> q_;
};

inline Quaternion imag_quat(const Eigen::Vector3d& v) { return {0.0, v.x(), v.y(), v.z()}; }
inline Eigen::Vector3d imag_part(const Quaternion& q) { return {q.x, q.y, q.z}; }

struct RolledPath {
  std::vector<double> t;
  std::vector<ConfigPoint> points;
  double max_horizontality_residual = 0.0;
  double max_tracking_error = 0.0;
};

namespace detail {

// Control coefficient reproducing the prescribed contact-point velocity
// through the first slot: solves dot(hopf(w1)) = qdot for a in span{j, k}.
inline Quaternion roll_control(const Quaternion& w1, const Eigen::Vector3d& qdot) {
  Quaternion ek = w1.conj() * Quaternion::k() * w1;
  Quaternion ej = w1.conj() * Quaternion::j() * w1;
  double u = 0.5 * qdot.dot(imag_part(ek));
  double v = -0.5 * qdot.dot(imag_part(ej));
  return {0.0, 0.0, u, v};  // u j + v k
}

struct PairState {
  Quaternion w1, w2;
};

inline PairState roll_deriv(const PairState& s, double rho, const Eigen::Vector3d& qdot) {
  Quaternion a = roll_control(s.w1, qdot);
  return {a * s.w1, (a * rho) * s.w2};
}

inline double horizontality_residual(const PairState& s, const PairState& snext, double dt,
                                     double rho) {
  // midpoint finite-difference tangent against the distribution plane
  PairState mid{normalized(s.w1 + snext.w1), normalized(s.w2 + snext.w2)};
  ConfigPoint pm{mid.w1, mid.w2};
  Eigen::Matrix<double, 8, 1> tangent;
  Quaternion d1 = (snext.w1 - s.w1) * (1.0 / dt);
  Quaternion d2 = (snext.w2 - s.w2) * (1.0 / dt);
  tangent << d1.w, d1.x, d1.y, d1.z, d2.w, d2.x, d2.y, d2.z;
  double tn = tangent.norm();
  if (tn < 1e-14) return 0.0;
  auto [f1, f2] = distribution_frame(Rho::of(rho));
  MatrixXd plane(8, 3);
  plane.col(0) = tangent_at(f1, pm).normalized();
  plane.col(1) = tangent_at(f2, pm).normalized();
  plane.col(2) = tangent_at(vertical_pair(), pm).normalized();
  MatrixXd basis = column_span(plane);
  return span_residual(basis, tangent / tn);
}

}  // namespace detail

// Rolls the configuration along curve (driving the first contact point) over
// [curve.t_begin(), curve.t_begin() + T]. Classical RK4 with per-step
// renormalization; the step is halved until every sampled tangent sits in the
// distribution plane within `residual_tol`.
inline RolledPath roll(const Rho& rho, const ConfigPoint& start, const SphereCurve& curve,
                       double T, double dt = 1e-3, double residual_tol = 1e-6,
                       int max_refinements = 6) {
  if (!rho.finite) throw InfiniteRhoError("roll: rho must be finite");
  Eigen::Vector3d q0 = curve.value(curve.t_begin()).first;
  if ((imag_part(hopf(start.w1)) - q0).norm() > 1e-6)
    throw std::invalid_argument("roll: start configuration does not sit over curve start");

  for (int refine = 0; refine <= max_refinements; ++refine) {
    double h = dt / (1 << refine);
    int steps = static_cast<int>(std::ceil(T / h));
    h = T / steps;
    RolledPath path;
    path.t.reserve(steps + 1);
    path.points.reserve(steps + 1);
    detail::PairState s{start.w1, start.w2};
    double t0 = curve.t_begin();
    path.t.push_back(t0);
    path.points.push_back({s.w1, s.w2});
    bool ok = true;
    for (int n = 0; n < steps; ++n) {
      double t = t0 + n * h;
      auto qd = [&](double tt) { return curve.value(tt).second; };
      detail::PairState k1 = detail::roll_deriv(s, rho.value, qd(t));
      detail::PairState s2{s.w1 + k1.w1 * (h / 2), s.w2 + k1.w2 * (h / 2)};
      detail::PairState k2 = detail::roll_deriv(s2, rho.value, qd(t + h / 2));
      detail::PairState s3{s.w1 + k2.w1 * (h / 2), s.w2 + k2.w2 * (h / 2)};
      detail::PairState k3 = detail::roll_deriv(s3, rho.value, qd(t + h / 2));
      detail::PairState s4{s.w1 + k3.w1 * h, s.w2 + k3.w2 * h};
      detail::PairState k4 = detail::roll_deriv(s4, rho.value, qd(t + h));
      detail::PairState snext{
          s.w1 + (k1.w1 + k2.w1 * 2.0 + k3.w1 * 2.0 + k4.w1) * (h / 6),
          s.w2 + (k1.w2 + k2.w2 * 2.0 + k3.w2 * 2.0 + k4.w2) * (h / 6)};
      snext.w1 = normalized(snext.w1);
      snext.w2 = normalized(snext.w2);
      double res = detail::horizontality_residual(s, snext, h, rho.value);
      path.max_horizontality_residual = std::max(path.max_horizontality_residual, res);
      if (res > residual_tol) {
        ok = false;
        break;
      }
      double track = (imag_part(hopf(snext.w1)) - curve.value(t + h).first).norm();
      path.max_tracking_error = std::max(path.max_tracking_error, track);
      s = snext;
      path.t.push_back(t + h);
      path.points.push_back({s.w1, s.w2});
    }
    if (ok) return path;
  }
  throw NonHorizontalDrift("roll: horizontality residual above tolerance after refinement");
}

}  // namespace octoroll
