#include <catch2/catch_amalgamated.hpp>

#include "octoroll/octmodel.hpp"
#include "octoroll/rng.hpp"

using namespace octoroll;

namespace {

const Quaternion I = Quaternion::i();
const Quaternion J = Quaternion::j();

ConePoint random_cone_point(CounterRng& rng) {
  return make_cone_point(rng.unit_imaginary(), rng.unit_quaternion());
}

Vec8 oct_to_vec(const SplitOctonion& x) { return to_vec8(x); }

double frame_product_residual(const ConePoint& x, const DeltaFrame& f) {
  double worst = 0.0;
  for (const auto& v : f.basis)
    worst = std::max(worst, (x.oct() * from_vec8(v)).frob_norm());
  return worst;
}

}  // namespace

TEST_CASE("cone membership") {
  CHECK(on_null_cone(SplitOctonion{I, Quaternion::one()}));
  CHECK_FALSE(on_null_cone(SplitOctonion::one()));
  CHECK_FALSE(on_null_cone(SplitOctonion{I, {}}));

  CounterRng rng(31);
  for (int n = 0; n < 100; ++n) {
    ConePoint x = random_cone_point(rng);
    CHECK(on_null_cone(x.oct()));
  }
}

TEST_CASE("left annihilator: dimension three, annihilates, contains the point") {
  ConePoint base{I, Quaternion::one()};
  DeltaFrame f = left_annihilator(base);
  REQUIRE(f.basis.size() == 3);
  CHECK(frame_product_residual(base, f) <= 1e-10);

  CounterRng rng(32);
  for (int n = 0; n < 100; ++n) {
    ConePoint x = random_cone_point(rng);
    DeltaFrame fr = left_annihilator(x);
    REQUIRE(fr.basis.size() == 3);
    CHECK(frame_product_residual(x, fr) <= 1e-10);
    // x itself lies in its annihilator span
    MatrixXd basis(8, 3);
    for (int c = 0; c < 3; ++c)
      basis.col(c) = Eigen::Map<const Eigen::Matrix<double, 8, 1>>(fr.basis[c].data());
    VectorXd xv = Eigen::Map<const Eigen::Matrix<double, 8, 1>>(oct_to_vec(x.oct()).data());
    CHECK(span_residual(basis, xv) < 1e-9 * xv.norm());
  }
}

TEST_CASE("closed-form annihilator parameterization") {
  // w = v1 collapses: [v1,v1] = 0 and v1 + v1^3 = 0 for unit imaginary v1
  ConePoint base{I, Quaternion::one()};
  SplitOctonion collapsed = annihilator_param(base.v1, base.v2, base.v1);
  CHECK(collapsed.frob_norm() < 1e-14);

  CounterRng rng(33);
  for (int n = 0; n < 100; ++n) {
    ConePoint x = random_cone_point(rng);
    Quaternion w{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    SplitOctonion y = annihilator_param(x.v1, x.v2, w);
    CHECK((x.oct() * y).frob_norm() <= 1e-10 * (1.0 + y.frob_norm()));
  }

  // the image over a quaternion basis has rank 2 and equals the spherized
  // annihilator plane
  for (int n = 0; n < 20; ++n) {
    ConePoint x = random_cone_point(rng);
    DeltaFrame sph = spherized_annihilator(x);
    Quaternion basis_w[4] = {Quaternion::one(), Quaternion::i(), Quaternion::j(),
                             Quaternion::k()};
    std::vector<Eigen::Matrix<double, 8, 1>> cols;
    for (const auto& bw : basis_w) {
      Vec8 v = oct_to_vec(annihilator_param(x.v1, x.v2, bw));
      auto ev = Eigen::Map<const Eigen::Matrix<double, 8, 1>>(v.data());
      if (ev.norm() > 1e-8) cols.push_back(ev.normalized());
    }
    MatrixXd image(8, static_cast<int>(cols.size()));
    for (int c = 0; c < image.cols(); ++c) image.col(c) = cols[c];
    MatrixXd stack(8, image.cols() + 2);
    stack.leftCols(image.cols()) = image;
    for (int c = 0; c < 2; ++c)
      stack.col(image.cols() + c) =
          Eigen::Map<const Eigen::Matrix<double, 8, 1>>(sph.basis[c].data());
    CHECK(rank_svd(image) == 2);
    CHECK(rank_svd(stack) == 2);  // same plane as the spherized annihilator
  }
}

TEST_CASE("configuration-to-cone map") {
  ConePoint img = to_null_cone(ConfigPoint{});
  CHECK((img.v1 - I).norm() < 1e-15);
  CHECK((img.v2 - Quaternion::one()).norm() < 1e-15);

  CounterRng rng(34);
  for (int n = 0; n < 100; ++n) {
    Quaternion w1 = rng.unit_quaternion();
    Quaternion w2 = rng.unit_quaternion();
    ConePoint x = to_null_cone(ConfigPoint{w1, w2});
    CHECK(on_null_cone(x.oct()));
    if (n < 50) {
      double theta = rng.uniform(-3, 3);
      Quaternion ph{std::cos(theta), std::sin(theta), 0, 0};
      ConePoint x2 = to_null_cone(ConfigPoint{ph * w1, ph * w2});
      CHECK((x.v1 - x2.v1).norm() < 1e-12);
      CHECK((x.v2 - x2.v2).norm() < 1e-12);
    }
  }
}

TEST_CASE("cone map round trips") {
  ConfigPoint back = from_null_cone(ConePoint{I, Quaternion::one()});
  CHECK(coset_distance(back, ConfigPoint{}) < 1e-12);

  CounterRng rng(35);
  for (int n = 0; n < 100; ++n) {
    ConfigPoint p{rng.unit_quaternion(), rng.unit_quaternion()};
    ConfigPoint round = from_null_cone(to_null_cone(p));
    CHECK(coset_distance(round, p) < 1e-10);
  }
  for (int n = 0; n < 100; ++n) {
    ConePoint x = random_cone_point(rng);
    ConePoint round = to_null_cone(from_null_cone(x));
    CHECK((round.v1 - x.v1).norm() < 1e-10);
    CHECK((round.v2 - x.v2).norm() < 1e-10);
  }
  // fiber independence: any phase shift of the Hopf lift lands in the same coset
  for (int n = 0; n < 20; ++n) {
    ConePoint x = random_cone_point(rng);
    Quaternion w1 = hopf_lift(x.v1);
    double theta = rng.uniform(-3, 3);
    Quaternion ph{std::cos(theta), std::sin(theta), 0, 0};
    Quaternion w1b = ph * w1;
    CHECK((hopf(w1b) - x.v1).norm() < 1e-12);
    ConfigPoint alt = normalize_config(w1b, w1b * x.v2);
    CHECK(coset_distance(alt, from_null_cone(x)) < 1e-10);
  }
}

TEST_CASE("pushforward closed form and finite differences") {
  SplitOctonion at_origin = dphi_pushforward(ConfigPoint{}, 1.0, 0.0);
  // 2k + 2 l j
  CHECK((at_origin - SplitOctonion{Quaternion::k() * 2.0, J * 2.0}).frob_norm() < 1e-14);

  CounterRng rng(36);
  for (int n = 0; n < 20; ++n) {
    ConfigPoint p{rng.unit_quaternion(), rng.unit_quaternion()};
    double zr = rng.uniform(-1, 1), zi = rng.uniform(-1, 1);
    Quaternion zj = Quaternion{zr, zi, 0, 0} * J;
    double h = 1e-5;
    auto phi_along = [&](double t) {
      ConfigPoint q{exp_imag(zj * t) * p.w1, exp_imag(zj * (3.0 * t)) * p.w2};
      return to_null_cone(q).oct();
    };
    SplitOctonion fd = (phi_along(h) - phi_along(-h)) * (1.0 / (2 * h));
    SplitOctonion closed = dphi_pushforward(p, zr, zi);
    CHECK((fd - closed).frob_norm() <= 1e-6);
  }
}

TEST_CASE("ratio-3 annihilation identity and its failure off ratio 3") {
  CounterRng rng(37);
  double worst3 = 0.0;
  for (int n = 0; n < 100; ++n) {
    ConfigPoint p{rng.unit_quaternion(), rng.unit_quaternion()};
    double theta = rng.uniform(0, 2 * M_PI);
    // both frame directions are covered by unit z sweeping the circle
    for (double zr : {std::cos(theta), 1.0, 0.0}) {
      double zi = (zr == 1.0) ? 0.0 : ((zr == 0.0) ? 1.0 : std::sin(theta));
      SplitOctonion prod = to_null_cone(p).oct() * cone_pushforward(p, zr, zi, 3.0);
      worst3 = std::max(worst3, prod.frob_norm());
    }
  }
  CHECK(worst3 <= 1e-10);

  for (double rho : {2.0, 4.0}) {
    int below = 0;
    for (int n = 0; n < 100; ++n) {
      ConfigPoint p{rng.unit_quaternion(), rng.unit_quaternion()};
      double theta = rng.uniform(0, 2 * M_PI);
      SplitOctonion prod =
          to_null_cone(p).oct() * cone_pushforward(p, std::cos(theta), std::sin(theta), rho);
      if (prod.frob_norm() < 0.05) ++below;
    }
    CHECK(below <= 5);
  }
}

TEST_CASE("derivation algebra has dimension 14") {
  const DerivationAlgebra& alg = derivation_algebra();
  CHECK(alg.dimension == 14);
  REQUIRE(static_cast<int>(alg.basis.size()) == 14);

  CounterRng rng(38);
  for (const auto& d : alg.basis) {
    // derivations kill the unit
    CHECK(apply_derivation(d, SplitOctonion::one()).frob_norm() < 1e-9);
    // infinitesimal invariance of Q
    for (int n = 0; n < 20; ++n) {
      SplitOctonion x = rng.split_octonion(1.5);
      CHECK(std::abs(polarize(apply_derivation(d, x), x)) <= 1e-10 * (1 + x.frob_norm_sq()));
    }
    // Leibniz residual on random pairs
    SplitOctonion x = rng.split_octonion(1.0);
    SplitOctonion y = rng.split_octonion(1.0);
    SplitOctonion res =
        apply_derivation(d, x * y) - apply_derivation(d, x) * y - x * apply_derivation(d, y);
    CHECK(res.frob_norm() < 1e-9);
  }
}

TEST_CASE("annihilator planes sit inside the tangent null quadric") {
  CHECK(cone_quadric_residual(ConePoint{I, Quaternion::one()}) <= 1e-10);

  CounterRng rng(39);
  for (int n = 0; n < 100; ++n) {
    ConePoint x = random_cone_point(rng);
    CHECK(cone_quadric_residual(x) <= 1e-10);
  }

  // contrast: generic tangent directions of the spherized cone are not Q-null
  int big = 0;
  const int trials = 100;
  for (int n = 0; n < trials; ++n) {
    ConePoint x = random_cone_point(rng);
    DeltaFrame sph = spherized_annihilator(x);
    // random tangent: y1 imaginary orthogonal to v1, y2 orthogonal to v2
    Quaternion y1 = rng.imaginary(1.0);
    y1 = y1 - x.v1 * dot(y1, x.v1);
    Quaternion y2{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                  rng.uniform(-1, 1)};
    y2 = y2 - x.v2 * dot(y2, x.v2);
    Eigen::Matrix<double, 8, 1> y;
    Vec8 yv = to_vec8(SplitOctonion{y1, y2});
    y = Eigen::Map<const Eigen::Matrix<double, 8, 1>>(yv.data());
    for (const auto& b : sph.basis) {
      auto bv = Eigen::Map<const Eigen::Matrix<double, 8, 1>>(b.data());
      y -= bv * bv.dot(y);
    }
    if (y.norm() < 1e-6) continue;
    y.normalize();
    Vec8 out;
    for (int k = 0; k < 8; ++k) out[k] = y(k);
    if (std::abs(quadratic_form(from_vec8(out))) > 0.01) ++big;
  }
  CHECK(big > (2 * trials) / 3);
}
