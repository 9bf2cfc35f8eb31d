#include "tylerscale/tyler.hpp"

#include <cmath>
#include <limits>

#include "tylerscale/errors.hpp"

namespace tylerscale {

namespace {

void check_columns(const Matrix& x) {
  if (x.rows() < 1 || x.cols() < 1) {
    throw DegenerateInputError("empty data matrix");
  }
  if (!x.allFinite()) throw DegenerateInputError("non-finite data entry");
  for (Index j = 0; j < x.cols(); ++j) {
    if (x.col(j).squaredNorm() == 0.0) {
      throw DegenerateInputError("zero column " + std::to_string(j), j);
    }
  }
}

struct Pass {
  bool ok = false;
  Matrix scatter;  // sum_j x_j x_j^T / w_j
  double residual = 0.0;
  double capacity = 0.0;
};

Pass evaluate(const Matrix& x, const Matrix& sigma) {
  Pass p;
  Eigen::LLT<Matrix> chol(sigma);
  if (chol.info() != Eigen::Success) return p;
  const Matrix y = chol.matrixL().solve(x);
  const Vector w = y.colwise().squaredNorm().transpose();
  if (!w.allFinite() || !(w.minCoeff() > 0.0)) return p;
  const double d = static_cast<double>(x.rows());
  const double n = static_cast<double>(x.cols());
  p.scatter = symmetrize(x * w.cwiseInverse().asDiagonal() * x.transpose());
  p.residual = ((d / n) * p.scatter - sigma).norm();
  const double log_det =
      2.0 * chol.matrixLLT().diagonal().array().log().sum();
  p.capacity = (d / n) * w.array().log().sum() + log_det;
  p.ok = std::isfinite(p.residual) && std::isfinite(p.capacity);
  return p;
}

}  // namespace

double tyler_fixed_point_residual(const Matrix& x, const ShapePD& sigma) {
  check_columns(x);
  if (x.rows() != sigma.dim()) {
    throw ConfigurationError("data and shape dimensions differ");
  }
  const Pass p = evaluate(x, sigma.matrix());
  if (!p.ok) throw NumericalError("fixed-point residual: weights not positive");
  return p.residual;
}

long tyler_default_budget(Index d, double log_det) {
  return static_cast<long>(
      std::ceil(10.0 * (static_cast<double>(d) + std::abs(log_det) + 60.0)));
}

EstimatorResult tyler_iterate(const Matrix& x, const SolverConfig& config,
                              const TylerObserver& observer) {
  config.validate();
  check_columns(x);
  const Index d = x.rows();
  EstimatorResult result{.sigma_hat = ShapePD::identity(d)};
  if (x.cols() < d) {
    result.failure = "fewer samples than dimensions; the estimator does not exist";
    result.residual = std::numeric_limits<double>::infinity();
    return result;
  }

  Matrix sigma = Matrix::Identity(d, d);
  Pass pass = evaluate(x, sigma);
  if (!pass.ok) {
    result.failure = "weights not positive at the identity";
    result.residual = std::numeric_limits<double>::infinity();
    return result;
  }
  result.capacity_trace.push_back(pass.capacity);
  Matrix best = sigma;
  double best_residual = std::numeric_limits<double>::infinity();
  double log_det = 0.0;
  long iter = 0;

  while (true) {
    if (iter >= 1 && pass.residual <= config.tol) break;
    const long budget = config.max_iters.value_or(tyler_default_budget(d, log_det));
    if (iter >= budget) {
      result.failure = "iteration budget exhausted";
      break;
    }
    const double tr = pass.scatter.trace();
    if (!(tr > 0.0) || !std::isfinite(tr)) {
      result.failure = "scatter matrix degenerate";
      break;
    }
    Matrix next = (static_cast<double>(d) / tr) * pass.scatter;
    Pass next_pass = evaluate(x, next);
    if (!next_pass.ok) {
      result.failure = "iterate lost positive definiteness";
      break;
    }
    ++iter;
    sigma = std::move(next);
    pass = std::move(next_pass);
    result.capacity_trace.push_back(pass.capacity);
    Eigen::LLT<Matrix> chol(sigma);
    log_det = 2.0 * chol.matrixLLT().diagonal().array().log().sum();
    if (observer) observer(iter, sigma, pass.residual, pass.capacity);
    if (pass.residual < best_residual) {
      best_residual = pass.residual;
      best = sigma;
    }
  }

  result.iterations = iter;
  if (iter == 0) {
    best = sigma;
    best_residual = pass.residual;
  }
  result.residual = best_residual;
  result.converged = best_residual <= config.tol && iter >= 1;
  try {
    result.sigma_hat = ShapePD::normalized(best);
  } catch (const std::exception& e) {
    result.converged = false;
    result.failure = e.what();
  }
  return result;
}

ShapePD estimator_from_scaling(const Matrix& left) {
  if (left.rows() != left.cols() || left.rows() < 1 || !left.allFinite()) {
    throw ConfigurationError("left scaling must be a finite square matrix");
  }
  const Vector sv = Eigen::JacobiSVD<Matrix>(left).singularValues();
  if (!(sv(sv.size() - 1) > 1e-14 * sv(0))) {
    throw DegenerateInputError("left scaling is singular");
  }
  const Matrix inv = inverse_pd(symmetrize(left.transpose() * left));
  return ShapePD::normalized(inv);
}

EstimatorScaling scaling_from_estimator(const Matrix& x, const ShapePD& sigma_hat) {
  check_columns(x);
  if (x.rows() != sigma_hat.dim()) {
    throw ConfigurationError("data and shape dimensions differ");
  }
  const SymmetricEigen eig = symmetric_eigen(sigma_hat.matrix());
  const Matrix left = inverse_sqrt_pd(sigma_hat.matrix());
  const Vector w = (left * x).colwise().squaredNorm().transpose();
  return {ScalingPair(left, w.cwiseSqrt().cwiseInverse()), 1.0 / eig.values(0)};
}

double capacity(const Matrix& x, const Matrix& z) {
  check_columns(x);
  if (z.rows() != x.rows() || z.cols() != x.rows()) {
    throw ConfigurationError("capacity: Z must be d x d");
  }
  const double d = static_cast<double>(x.rows());
  const double n = static_cast<double>(x.cols());
  const Vector q = (x.transpose() * z * x).diagonal();
  if (!(q.minCoeff() > 0.0)) throw PreconditionError("capacity: Z is not PD");
  return (d / n) * q.array().log().sum() - log_det_pd(symmetrize(z));
}

double relative_op_error(const ShapePD& sigma, const ShapePD& sigma_hat) {
  if (sigma.dim() != sigma_hat.dim()) {
    throw ConfigurationError("relative_op_error: dimensions differ");
  }
  const Matrix root = sqrt_pd(sigma.matrix());
  const Matrix m = symmetrize(root * inverse_pd(sigma_hat.matrix()) * root);
  return op_norm_symmetric(Matrix::Identity(m.rows(), m.cols()) - m);
}

double relative_frobenius_error(const Matrix& sigma, const Matrix& sigma_hat) {
  const Matrix root = sqrt_pd(sigma);
  const Matrix m = symmetrize(root * inverse_pd(sigma_hat) * root);
  return (Matrix::Identity(m.rows(), m.cols()) - m).norm();
}

}  // namespace tylerscale
