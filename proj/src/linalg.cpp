#include "tylerscale/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tylerscale {

SymmetricEigen symmetric_eigen(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric_eigen: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = m.norm();
  return (m - m.transpose()).norm() <= rel_tol * scale;
}

double op_norm_power_iteration(const Matrix& m, double tol, int max_iters) {
  const Index n = m.rows();
  if (n == 0) return 0.0;
  // Deterministic start with components along every axis.
  Vector x = Vector::LinSpaced(n, 1.0, 2.0).normalized();
  double estimate = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vector y = m * x;
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    const double rel_change = std::abs(norm - estimate) / norm;
    estimate = norm;
    x = y / norm;
    if (it > 0 && rel_change < tol) break;
  }
  return estimate;
}

double op_norm_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("op_norm_symmetric: matrix is not square");
  }
  if (m.size() == 0) return 0.0;
  if (!is_symmetric(m, 1e-10)) {
    throw std::invalid_argument("op_norm_symmetric: matrix is not symmetric");
  }
  if (m.rows() > kDenseEigenLimit) return op_norm_power_iteration(m);
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(
                        m, Eigen::EigenvaluesOnly)
                        .eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

namespace {

template <typename Fn>
Matrix apply_spectral(const Matrix& m, Fn fn) {
  const SymmetricEigen eig = symmetric_eigen(symmetrize(m));
  const double top = eig.values.maxCoeff();
  if (!(top > 0.0)) {
    throw std::invalid_argument("matrix function: input is not positive definite");
  }
  const double floor = kEigenFloor * top;
  Vector mapped(eig.values.size());
  for (Index i = 0; i < eig.values.size(); ++i) {
    mapped(i) = fn(std::max(eig.values(i), floor));
  }
  Matrix out = eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
  return symmetrize(out);
}

}  // namespace

Matrix sqrt_pd(const Matrix& m) {
  return apply_spectral(m, [](double v) { return std::sqrt(v); });
}

Matrix inverse_sqrt_pd(const Matrix& m) {
  return apply_spectral(m, [](double v) { return 1.0 / std::sqrt(v); });
}

Matrix inverse_pd(const Matrix& m) {
  return apply_spectral(m, [](double v) { return 1.0 / v; });
}

double log_det_pd(const Matrix& m) {
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(
                        symmetrize(m), Eigen::EigenvaluesOnly)
                        .eigenvalues();
  if (!(ev(0) > 0.0)) {
    throw std::invalid_argument("log_det_pd: input is not positive definite");
  }
  return ev.array().log().sum();
}

Matrix polar_pd_factor(const Matrix& a) {
  return sqrt_pd(a.transpose() * a);
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace tylerscale
