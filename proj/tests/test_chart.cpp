#include <catch2/catch_amalgamated.hpp>

#include "octoroll/chart.hpp"
#include "octoroll/extremal.hpp"
#include "octoroll/rng.hpp"

using namespace octoroll;

TEST_CASE("jet arithmetic differentiates compositions") {
  using J1 = Jet<double, 1>;
  // f(x) = sin(x) * sqrt(1 + x*x) at x = 0.7
  double x0 = 0.7;
  J1 x = J1::seed(x0, 0);
  J1 f = sin(x) * sqrt(J1(1.0) + x * x);
  double fd = (std::sin(x0 + 1e-6) * std::sqrt(1 + (x0 + 1e-6) * (x0 + 1e-6)) -
               std::sin(x0 - 1e-6) * std::sqrt(1 + (x0 - 1e-6) * (x0 - 1e-6))) /
              2e-6;
  CHECK(std::abs(f.d[0] - fd) < 1e-9);

  // nested jets give the mixed second derivative of g(a, b) = sin(a b)
  using J2 = Jet<J1, 1>;
  double a0 = 0.4, b0 = 1.3;
  J2 a(J1::seed(a0, 0));          // inner slot differentiates in a
  J2 b = J2::seed(J1(b0), 0);     // outer slot differentiates in b
  J2 g = sin(a * b);
  double mixed = g.d[0].d[0];
  double analytic = std::cos(a0 * b0) - a0 * b0 * std::sin(a0 * b0);
  CHECK(std::abs(mixed - analytic) < 1e-12);
}

TEST_CASE("dexp_right matches finite differences of the exponential") {
  CounterRng rng(41);
  for (int n = 0; n < 50; ++n) {
    Quaternion a = rng.imaginary(0.8);
    Quaternion d = rng.imaginary(1.0);
    double h = 1e-6;
    Quaternion fd = (exp_imag(a + d * h) - exp_imag(a - d * h)) * (1.0 / (2 * h));
    Quaternion closed = dexp_right(a, d) * exp_imag(a);
    CHECK((fd - closed).norm() < 1e-8);
  }
  // tiny-angle branch
  Quaternion small = Quaternion::j() * 1e-7;
  Quaternion d = Quaternion::k();
  Quaternion fd = (exp_imag(small + d * 1e-7) - exp_imag(small - d * 1e-7)) * (1.0 / 2e-7);
  CHECK((fd - dexp_right(small, d) * exp_imag(small)).norm() < 1e-9);
}

TEST_CASE("chart origin and frame components") {
  ExpChart chart;  // identity base
  Vec5<double> zero{};
  auto [w1, w2] = chart_config<double>(chart, zero);
  CHECK((w1 - Quaternion::one()).norm() < 1e-15);
  CHECK((w2 - Quaternion::one()).norm() < 1e-15);

  double rho = 2.0;
  auto fields = chart_fields<double>(Rho::of(rho), zero);
  Vec5<double> f1_expect{1, 0, rho, 0, 0};
  Vec5<double> f2_expect{0, 1, 0, rho, 0};
  for (int m = 0; m < 5; ++m) {
    CHECK(std::abs(fields[0][m] - f1_expect[m]) < 1e-14);
    CHECK(std::abs(fields[1][m] - f2_expect[m]) < 1e-14);
  }
  // bracket field at the origin points along the vertical complement
  CHECK(std::abs(fields[2][4] - (-2.0) * (1 - rho * rho) / std::sqrt(2.0)) < 1e-12);
  for (int m = 0; m < 4; ++m) CHECK(std::abs(fields[2][m]) < 1e-14);
}

TEST_CASE("chart fields push forward to the coefficient fields modulo vertical") {
  CounterRng rng(42);
  Rho rho = Rho::of(2.0);
  auto sf = structure_fields(rho);
  for (int n = 0; n < 10; ++n) {
    ExpChart chart;
    chart.base = ConfigPoint{rng.unit_quaternion(), rng.unit_quaternion()};
    Vec5<double> x;
    for (auto& c : x) c = rng.uniform(-0.3, 0.3);
    auto fields = chart_fields<double>(rho, x);
    auto [w1, w2] = chart_config<double>(chart, x);
    ConfigPoint at{normalized(w1), normalized(w2)};

    for (int c = 0; c < 5; ++c) {
      // finite-difference pushforward of the chart velocity field[c]
      double h = 1e-6;
      Vec5<double> xp = x, xm = x;
      for (int m = 0; m < 5; ++m) {
        xp[m] += h * fields[c][m];
        xm[m] -= h * fields[c][m];
      }
      auto [w1p, w2p] = chart_config<double>(chart, xp);
      auto [w1m, w2m] = chart_config<double>(chart, xm);
      Eigen::Matrix<double, 8, 1> fd;
      Quaternion d1 = (w1p - w1m) * (1.0 / (2 * h));
      Quaternion d2 = (w2p - w2m) * (1.0 / (2 * h));
      fd << d1.w, d1.x, d1.y, d1.z, d2.w, d2.x, d2.y, d2.z;
      // must equal the coefficient field tangent modulo the vertical tangent
      Eigen::Matrix<double, 8, 1> target = tangent_at(sf[c], at);
      Eigen::Matrix<double, 8, 1> vert = tangent_at(vertical_pair(), at);
      Eigen::Matrix<double, 2, 1> coeffs =
          (Eigen::Matrix<double, 8, 2>() << target, vert).finished().colPivHouseholderQr().solve(
              fd);
      Eigen::Matrix<double, 8, 1> recon = coeffs(0) * target + coeffs(1) * vert;
      CHECK((fd - recon).norm() < 1e-6 * (1.0 + fd.norm()));
      CHECK(std::abs(coeffs(0) - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("gradients from the inner jet match finite differences") {
  CounterRng rng(43);
  Rho rho = Rho::of(3.0);
  for (int n = 0; n < 5; ++n) {
    Vec5<double> x;
    for (auto& c : x) c = rng.uniform(-0.3, 0.3);
    FieldsWithGrads<double> fg = chart_fields_with_grads<double>(rho, x);
    for (int m = 0; m < 5; ++m) {
      Vec5<double> xp = x, xm = x;
      xp[m] += 1e-6;
      xm[m] -= 1e-6;
      auto fp = chart_fields<double>(rho, xp);
      auto fm = chart_fields<double>(rho, xm);
      for (int c = 0; c < 5; ++c)
        for (int row = 0; row < 5; ++row) {
          double fd = (fp[c][row] - fm[c][row]) / 2e-6;
          CHECK(std::abs(fg.grad[c][row][m] - fd) < 1e-7 * (1 + std::abs(fd)));
        }
    }
  }
}

TEST_CASE("momentum bracket of the frame hamiltonians is the bracket-field pairing") {
  CounterRng rng(44);
  Rho rho = Rho::of(2.0);
  auto h_of = [&](int c, const Eigen::Matrix<double, 5, 1>& x,
                  const Eigen::Matrix<double, 5, 1>& p) {
    Vec5<double> xv;
    for (int m = 0; m < 5; ++m) xv[m] = x(m);
    auto fields = chart_fields<double>(rho, xv);
    double s = 0;
    for (int m = 0; m < 5; ++m) s += p(m) * fields[c][m];
    return s;
  };
  auto poisson12 = [&](const Eigen::Matrix<double, 5, 1>& x,
                       const Eigen::Matrix<double, 5, 1>& p) {
    // {h1, h2} = sum_m dh1/dp_m dh2/dx_m - dh1/dx_m dh2/dp_m by central FD
    double pb = 0;
    double h = 1e-5;
    for (int m = 0; m < 5; ++m) {
      auto ep = Eigen::Matrix<double, 5, 1>::Unit(m);
      double d1p = (h_of(0, x, p + h * ep) - h_of(0, x, p - h * ep)) / (2 * h);
      double d2x = (h_of(1, x + h * ep, p) - h_of(1, x - h * ep, p)) / (2 * h);
      double d1x = (h_of(0, x + h * ep, p) - h_of(0, x - h * ep, p)) / (2 * h);
      double d2p = (h_of(1, x, p + h * ep) - h_of(1, x, p - h * ep)) / (2 * h);
      pb += d1p * d2x - d1x * d2p;
    }
    return pb;
  };
  for (int n = 0; n < 10; ++n) {
    Eigen::Matrix<double, 5, 1> x, p;
    for (int m = 0; m < 5; ++m) {
      x(m) = rng.uniform(-0.3, 0.3);
      p(m) = rng.uniform(-1, 1);
    }
    // Pointwise, {h1, h2} pairs p with the honest vector-field bracket of the
    // chart fields.
    Vec5<double> xv;
    for (int m = 0; m < 5; ++m) xv[m] = x(m);
    FieldsWithGrads<double> fg = chart_fields_with_grads<double>(rho, xv);
    double vf = 0;
    for (int m = 0; m < 5; ++m) {
      double lie = 0;
      for (int k = 0; k < 5; ++k)
        lie += fg.grad[1][m][k] * fg.value[0][k] - fg.grad[0][m][k] * fg.value[1][k];
      vf += p(m) * lie;
    }
    CHECK(std::abs(poisson12(x, p) - vf) < 1e-6 * (1 + std::abs(vf)));

    // The pushed bracket field differs from the vector-field bracket only
    // inside the distribution plane, so the two agree against any covector
    // annihilating f1 and f2. That is the identity the characteristic
    // integrator relies on.
    Eigen::Matrix<double, 2, 5> a;
    for (int m = 0; m < 5; ++m) {
      a(0, m) = fg.value[0][m];
      a(1, m) = fg.value[1][m];
    }
    Eigen::Matrix<double, 5, 1> pa =
        p - a.transpose() * (a * a.transpose()).ldlt().solve(a * p);
    CHECK(std::abs(poisson12(x, pa) - h_of(2, x, pa)) < 1e-6 * (1 + std::abs(h_of(2, x, pa))));
  }
}
