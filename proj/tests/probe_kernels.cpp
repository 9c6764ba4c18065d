// Precision study of the two pairing kernels across rho; not part of the suite.
#include <cstdio>

#include "octoroll/jacobi.hpp"

using namespace octoroll;

struct KernelFit {
  double r;    // diagonal value
  double d2;   // d^2/dtau^2 on diagonal
  double rms;
};

KernelFit fit_kernel(const JacobiContext& ctx, double pole, double lo, double hi, int n) {
  Eigen::MatrixXd design(n, 4);
  Eigen::VectorXd values(n);
  for (int k = 0; k < n; ++k) {
    double th = lo + (hi - lo) * k / (n - 1);
    values(k) = 0.5 * (kernel::g_kernel(ctx, 0.0, th, 2.5e-3, {}, pole) +
                       kernel::g_kernel(ctx, 0.0, -th, 2.5e-3, {}, pole));
    double t2 = th * th;
    design(k, 0) = 1.0;
    design(k, 1) = t2;
    design(k, 2) = t2 * t2;
    design(k, 3) = t2 * t2 * t2;
  }
  Eigen::VectorXd c = design.colPivHouseholderQr().solve(values);
  KernelFit out;
  out.r = c(0);
  out.d2 = 2.0 * c(1);
  out.rms = (design * c - values).norm() / std::sqrt(double(n));
  return out;
}

int main() {
  printf("rho     r_det      d2_det     A_det      r_line     d2_line    A_line     rbar_det  rbar_line  closed\n");
  for (double rv : {3.0, 3.2, 3.5, 4.0, 5.0, 7.0, 9.0, 16.0}) {
    Rho rho = Rho::of(rv);
    CotangentState z0 = seed_covector(rho, ConfigPoint{}, 1.0, 0.0);
    JacobiContext ctx(z0, rho);
    KernelFit det = fit_kernel(ctx, 4.0, 0.06, 0.30, 13);
    KernelFit line = fit_kernel(ctx, 3.0, 0.06, 0.30, 13);
    // weight-4 densities: pole p combination  d2 - (6/(5p)) r^2  (r_tt = 0 here)
    double a_det = det.d2 - (6.0 / 20.0) * det.r * det.r;
    double a_line = line.d2 - (6.0 / 15.0) * line.r * line.r;
    double rb_det = a_det > 0 ? det.r / std::sqrt(a_det) : -1;
    double rb_line = a_line > 0 ? line.r / std::sqrt(a_line) : -1;
    double closed = rv > 3 ? rbar_closed_form(rho) : 0.0;
    printf("%5.2f  %9.6f  %9.6f  %9.6f  %9.6f  %9.6f  %9.6f  %8.5f  %8.5f  %8.5f\n", rv,
           det.r, det.d2, a_det, line.r, line.d2, a_line, rb_det, rb_line, closed);
    printf("       fit rms: det %.2e line %.2e\n", det.rms, line.rms);
  }
  for (double rv : {1.5, 2.0, 2.5}) {
    Rho rho = Rho::of(rv);
    CotangentState z0 = seed_covector(rho, ConfigPoint{}, 1.0, 0.0);
    JacobiContext ctx(z0, rho);
    KernelFit det = fit_kernel(ctx, 4.0, 0.06, 0.30, 13);
    KernelFit line = fit_kernel(ctx, 3.0, 0.06, 0.30, 13);
    double a_det = det.d2 - 0.3 * det.r * det.r;
    double a_line = line.d2 - 0.4 * line.r * line.r;
    printf("%5.2f  %9.6f  %9.6f  %9.6f  %9.6f  %9.6f  %9.6f\n", rv, det.r, det.d2, a_det,
           line.r, line.d2, a_line);
  }
  return 0;
}
