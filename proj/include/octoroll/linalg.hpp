#pragma once

// Thin helpers over Eigen for the rank/nullspace decisions. All spectra in
// this project have O(1) gaps at the decision thresholds, so absolute
// singular-value cutoffs are safe.

#include <Eigen/Dense>

#include "octoroll/errors.hpp"

namespace octoroll {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline int rank_svd(const MatrixXd& m, double threshold = tol::rank_svd) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > threshold) ++r;
  return r;
}

// Orthonormal basis of the right nullspace {x : m x = 0}, as columns.
inline MatrixXd nullspace(const MatrixXd& m, double threshold = tol::rank_svd) {
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > threshold) ++r;
  return svd.matrixV().rightCols(m.cols() - r);
}

// Orthonormal basis of the column span, as columns.
inline MatrixXd column_span(const MatrixXd& m, double threshold = tol::rank_svd) {
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > threshold) ++r;
  return svd.matrixU().leftCols(r);
}

// Residual of v against the span of the (orthonormal) columns of basis.
inline double span_residual(const MatrixXd& basis, const VectorXd& v) {
  VectorXd r = v - basis * (basis.transpose() * v);
  return r.norm();
}

// Smallest principal angle between two subspaces given by orthonormal columns.
inline double smallest_principal_angle(const MatrixXd& a, const MatrixXd& b) {
  Eigen::JacobiSVD<MatrixXd> svd(a.transpose() * b);
  double c = svd.singularValues()(0);
  if (c > 1.0) c = 1.0;
  return std::acos(c);
}

}  // namespace octoroll
