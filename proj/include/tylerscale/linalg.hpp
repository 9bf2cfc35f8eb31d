#pragma once

#include <Eigen/Dense>

namespace tylerscale {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

SymmetricEigen symmetric_eigen(const Matrix& m);

/// Spectral norm of a symmetric matrix: max |eigenvalue|.
///
/// Uses a full eigendecomposition up to dimension 512 and power iteration
/// (tolerance 1e-12, at most 10000 iterations) above. Throws
/// std::invalid_argument if `m` is not square or not symmetric within
/// 1e-10 * ||m||_F.
double op_norm_symmetric(const Matrix& m);

// Dimension at which op_norm_symmetric switches to power iteration.
inline constexpr Index kDenseEigenLimit = 512;

double op_norm_power_iteration(const Matrix& m, double tol = 1e-12,
                               int max_iters = 10000);

// Matrix functions of a symmetric PD matrix, via eigendecomposition.
// Eigenvalues are floored at 1e-14 * lambda_max before inversion.
inline constexpr double kEigenFloor = 1e-14;

Matrix sqrt_pd(const Matrix& m);
Matrix inverse_sqrt_pd(const Matrix& m);
Matrix inverse_pd(const Matrix& m);
double log_det_pd(const Matrix& m);

// Positive definite factor P = (A^T A)^{1/2} of the polar decomposition A = Q P.
Matrix polar_pd_factor(const Matrix& a);

Matrix symmetrize(const Matrix& m);

bool is_symmetric(const Matrix& m, double rel_tol);

}  // namespace tylerscale
