#pragma once

// The null cone of the split-octonion form Q, its spherization, the
// 3-dimensional left-annihilator spaces of cone points, and the quadratic
// correspondence between rolling configurations and cone points. The
// correspondence intertwines the radii-ratio-3 rolling distribution with the
// annihilator distribution on the cone; the tests quantify how specific to
// ratio 3 that is.

#include <array>
#include <vector>

#include "octoroll/algebra.hpp"
#include "octoroll/errors.hpp"
#include "octoroll/linalg.hpp"
#include "octoroll/rolling.hpp"

namespace octoroll {

// Spherized cone point x = v1 + l v2 with v1 an imaginary unit and v2 a unit
// quaternion; Q(x) = 0 by construction.
struct ConePoint {
  Quaternion v1{0.0, 1.0, 0.0, 0.0};
  Quaternion v2 = Quaternion::one();

  SplitOctonion oct() const { return {v1, v2}; }
};

inline ConePoint make_cone_point(const Quaternion& v1, const Quaternion& v2) {
  Quaternion a = v1;
  a.w = 0.0;
  return {normalized(a), normalized(v2)};
}

// Membership in the spherizable cone: orthogonal to the unit and Q-null. When
// both hold, x * x = 0 as well (the two characterizations agree).
inline bool on_null_cone(const SplitOctonion& x) {
  if (std::abs(polarize(SplitOctonion::one(), x)) > tol::membership) return false;
  if (std::abs(quadratic_form(x)) > tol::membership * (1.0 + x.frob_norm_sq())) return false;
  return (x * x).frob_norm() <= tol::membership * (1.0 + x.frob_norm_sq());
}

// Matrix of y -> x y in the (1, i, j, k, l, li, lj, lk) basis.
inline Eigen::Matrix<double, 8, 8> left_mult_matrix(const SplitOctonion& x) {
  Eigen::Matrix<double, 8, 8> m;
  for (int c = 0; c < 8; ++c) {
    Vec8 e{};
    e[c] = 1.0;
    Vec8 out = to_vec8(x * from_vec8(e));
    for (int r = 0; r < 8; ++r) m(r, c) = out[r];
  }
  return m;
}

struct DeltaFrame {
  std::vector<Vec8> basis;  // orthonormal
};

// Left annihilator {y in R^7 : x y = 0} of a cone point; exactly 3-dimensional
// everywhere on the cone and contains x itself.
inline DeltaFrame left_annihilator(const ConePoint& x) {
  Eigen::Matrix<double, 8, 8> lm = left_mult_matrix(x.oct());
  MatrixXd restricted = lm.rightCols<7>();  // R^7 excludes the unit coordinate
  MatrixXd null7 = nullspace(restricted);
  if (null7.cols() != 3)
    throw DegenerateCone("left_annihilator: expected a 3-dimensional annihilator");
  DeltaFrame frame;
  for (int c = 0; c < 3; ++c) {
    Vec8 v{};
    for (int r = 0; r < 7; ++r) v[r + 1] = null7(r, c);
    frame.basis.push_back(v);
  }
  return frame;
}

// The annihilator cut down to the tangent space of the spherization
// {|v1| = |v2| = 1}; 2-dimensional.
inline DeltaFrame spherized_annihilator(const ConePoint& x) {
  DeltaFrame full = left_annihilator(x);
  // rows: <y1, v1> = 0 and <y2, v2> = 0 expressed on the 3 basis coefficients
  MatrixXd constraints(2, 3);
  for (int c = 0; c < 3; ++c) {
    SplitOctonion y = from_vec8(full.basis[c]);
    constraints(0, c) = dot(y.a, x.v1);
    constraints(1, c) = dot(y.b, x.v2);
  }
  MatrixXd coeffs = nullspace(constraints);
  if (coeffs.cols() != 2)
    throw DegenerateCone("spherized_annihilator: expected a 2-dimensional section");
  DeltaFrame frame;
  for (int c = 0; c < 2; ++c) {
    Vec8 v{};
    for (int k = 0; k < 3; ++k)
      for (int r = 0; r < 8; ++r) v[r] += coeffs(k, c) * full.basis[k][r];
    double n = 0;
    for (double t : v) n += t * t;
    n = std::sqrt(n);
    for (double& t : v) t /= n;
    frame.basis.push_back(v);
  }
  return frame;
}

// Closed-form parameterization of the spherized annihilator:
// w -> [v1, w] + l((w + v1 w v1) v2). The image over w in H is exactly the
// tangent part of the annihilator (rank 2).
inline SplitOctonion annihilator_param(const Quaternion& v1, const Quaternion& v2,
                                       const Quaternion& w) {
  return {commutator(v1, w), (w + v1 * w * v1) * v2};
}

// Hopf lift: unit quaternion w with conj(w) i w = v, for an imaginary unit v.
// Geodesic rotation from i to v, deterministic antipodal fallback.
inline Quaternion hopf_lift(const Quaternion& v) {
  Eigen::Vector3d target = imag_part(v);
  Eigen::Vector3d axis(0.0, -target.z(), target.y());  // i x v
  double s = axis.norm();
  double c = target.x();
  if (s < 1e-12) {
    if (c > 0) return Quaternion::one();
    return -Quaternion::j();  // conj(-j) i (-j) = -i
  }
  double theta = std::atan2(s, c);
  axis /= s;
  Quaternion n = imag_quat(axis);
  return Quaternion{std::cos(theta / 2), 0, 0, 0} - n * std::sin(theta / 2);
}

// Configuration -> cone point: (w1, w2) -> conj(w1) i w1 + l (conj(w1) w2).
// Constant on cosets of the diagonal circle action.
inline ConePoint to_null_cone(const ConfigPoint& p) {
  Quaternion w1c = p.w1.conj();
  return {w1c * Quaternion::i() * p.w1, w1c * p.w2};
}

// Inverse up to the circle action: any Hopf lift w1 of v1 gives the coset of
// (w1, w1 v2); the result is normalized so the fiber choice drops out.
inline ConfigPoint from_null_cone(const ConePoint& x) {
  Quaternion w1 = hopf_lift(x.v1);
  return normalize_config(w1, w1 * x.v2);
}

// Differential of the cone map along the weighted distribution direction
// (z j w1, rho * z j w2), z = zr + zi * i:
//   2 conj(w1) z k w1 + (rho - 1) l (conj(w1) z j w2).
// At rho = 3 this is the closed form whose products with the cone point
// vanish identically.
inline SplitOctonion cone_pushforward(const ConfigPoint& p, double zr, double zi,
                                      double rho) {
  Quaternion z{zr, zi, 0.0, 0.0};
  Quaternion w1c = p.w1.conj();
  Quaternion qa = (w1c * z * Quaternion::k() * p.w1) * 2.0;
  Quaternion qb = (w1c * z * Quaternion::j() * p.w2) * (rho - 1.0);
  return {qa, qb};
}

inline SplitOctonion dphi_pushforward(const ConfigPoint& p, double zr, double zi) {
  return cone_pushforward(p, zr, zi, 3.0);
}

struct DerivationAlgebra {
  int dimension = 0;
  std::vector<Eigen::Matrix<double, 8, 8>> basis;
};

// Solves D(xy) = D(x)y + xD(y) over the 8-vector basis; the nullspace is the
// derivation algebra of the split-octonions, dimension 14. Basis cached after
// the first call.
inline const DerivationAlgebra& derivation_algebra() {
  static DerivationAlgebra cached = [] {
    double C[8][8][8];
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b) {
        Vec8 ea{}, eb{};
        ea[a] = 1.0;
        eb[b] = 1.0;
        Vec8 prod = to_vec8(from_vec8(ea) * from_vec8(eb));
        for (int d = 0; d < 8; ++d) C[a][b][d] = prod[d];
      }
    MatrixXd sys(512, 64);
    sys.setZero();
    auto col = [](int r, int c) { return r * 8 + c; };
    int row = 0;
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b)
        for (int d = 0; d < 8; ++d, ++row)
          for (int g = 0; g < 8; ++g) {
            sys(row, col(d, g)) += C[a][b][g];   // D(e_a e_b)
            sys(row, col(g, a)) -= C[g][b][d];   // D(e_a) e_b
            sys(row, col(g, b)) -= C[a][g][d];   // e_a D(e_b)
          }
    MatrixXd null = nullspace(sys);
    DerivationAlgebra alg;
    alg.dimension = static_cast<int>(null.cols());
    for (int c = 0; c < null.cols(); ++c) {
      Eigen::Matrix<double, 8, 8> m;
      for (int r = 0; r < 8; ++r)
        for (int cc = 0; cc < 8; ++cc) m(r, cc) = null(r * 8 + cc, c);
      alg.basis.push_back(m);
    }
    return alg;
  }();
  return cached;
}

inline SplitOctonion apply_derivation(const Eigen::Matrix<double, 8, 8>& d,
                                      const SplitOctonion& x) {
  Vec8 v = to_vec8(x);
  Vec8 out{};
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) out[r] += d(r, c) * v[c];
  return from_vec8(out);
}

// Max |Q(y)| over the spherized annihilator frame at x: the annihilator plane
// sits inside the null quadric of the tangent space.
inline double cone_quadric_residual(const ConePoint& x) {
  DeltaFrame frame = spherized_annihilator(x);
  double worst = 0.0;
  for (const auto& v : frame.basis)
    worst = std::max(worst, std::abs(quadratic_form(from_vec8(v))));
  return worst;
}

}  // namespace octoroll
