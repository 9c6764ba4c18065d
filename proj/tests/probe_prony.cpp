// Frequency structure of the stationary line kernel; not part of the suite.
#include <complex>
#include <cstdio>

#include "octoroll/jacobi.hpp"

using namespace octoroll;

int main() {
  for (double rv : {2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 7.0, 9.0}) {
    Rho rho = Rho::of(rv);
    CotangentState z0 = seed_covector(rho, ConfigPoint{}, 1.0, 0.0);
    JacobiContext ctx(z0, rho);

    // signed stationary kernel W(0, k d0) with a continuous line section
    const int K = 56;
    const double d0 = 0.35 / K;
    std::vector<Eigen::Matrix<double, 4, 1>> w(K + 1);
    w[0] = ctx.line_direction(0.0);
    for (int k = 1; k <= K; ++k) {
      w[k] = ctx.line_direction(k * d0);
      if (w[k].dot(w[k - 1]) < 0) w[k] = -w[k];
    }
    std::vector<double> s(K + 1);
    for (int k = 0; k <= K; ++k) s[k] = w[0].transpose() * ctx.reduced_form() * w[k];

    // four-term symmetric recurrence for two sinusoids:
    // s[k+4] - a s[k+3] + b s[k+2] - a s[k+1] + s[k] = 0
    int rows = K - 3;
    Eigen::MatrixXd m(rows, 2);
    Eigen::VectorXd rhs(rows);
    for (int k = 0; k < rows; ++k) {
      m(k, 0) = s[k + 3] + s[k + 1];
      m(k, 1) = -s[k + 2];
      rhs(k) = s[k + 4] + s[k];
    }
    Eigen::Vector2d ab = m.colPivHouseholderQr().solve(rhs);
    double a = ab(0), b = ab(1);
    // cos(w1 d0), cos(w2 d0) are roots of 2c^2 - a c + (b/2 - 1) = 0
    double disc = a * a - 8 * (b / 2 - 1);
    double resid = (m * ab - rhs).norm() / rhs.norm();
    double closed = rv > 3 ? rbar_closed_form(rho) : 0.0;
    if (disc >= 0) {
      double c1 = (a + std::sqrt(disc)) / 4.0, c2 = (a - std::sqrt(disc)) / 4.0;
      // roots on the unit circle are cos(w d0); off-circle are cosh(k d0)
      auto decode = [&](double c) {
        return c <= 1.0 ? std::acos(std::max(c, -1.0)) / d0 : -std::acosh(c) / d0;
      };
      double r1 = decode(c1), r2 = decode(c2);  // negative = hyperbolic rate
      double kappa = r1 < 0 ? -r1 : (r2 < 0 ? -r2 : 0.0);
      double omega = r1 < 0 ? r2 : (r2 < 0 ? r1 : std::max(r1, r2));
      double other = (r1 < 0 || r2 < 0) ? 0.0 : std::min(r1, r2);
      printf("rho=%5.2f  kappa=%10.6f omega=%10.6f (other osc %.6f)  resid=%.1e closed=%8.5f\n",
             rv, kappa, omega, other, resid, closed);
      printf("          k^2=%10.6f w^2=%10.6f  w^2-k^2=%10.6f w^2*k^2=%10.6f w/k=%9.5f\n",
             kappa * kappa, omega * omega, omega * omega - kappa * kappa,
             omega * omega * kappa * kappa, kappa > 0 ? omega / kappa : 0.0);
    } else {
      // complex quartet exp(+-k +- i w): roots of z^2 - a/2 z + ... decode via
      // z = e^{k d0} e^{i w d0}: c = Re root pair: use quadratic in z: z+1/z = c*2
      std::complex<double> croot((a) / 4.0, std::sqrt(-disc) / 4.0);
      std::complex<double> z = croot + std::sqrt(croot * croot - 1.0);
      double kappa = std::log(std::abs(z)) / d0;
      double omega = std::abs(std::arg(z)) / d0;
      printf("rho=%5.2f  complex quartet: kappa=%10.6f omega=%10.6f  resid=%.1e\n", rv,
             kappa, omega, resid);
      printf("          k^2=%10.6f w^2=%10.6f  w^2-k^2=%10.6f 4k^2w^2=%10.6f\n",
             kappa * kappa, omega * omega, omega * omega - kappa * kappa,
             4 * kappa * kappa * omega * omega);
    }
  }
  return 0;
}
