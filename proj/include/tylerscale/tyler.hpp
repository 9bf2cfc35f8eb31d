#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tylerscale/scaler.hpp"
#include "tylerscale/shape.hpp"

namespace tylerscale {

struct EstimatorResult {
  ShapePD sigma_hat;
  double residual = 0.0;
  long iterations = 0;
  bool converged = false;
  // Capacity of every iterate, starting with Sigma_0 = I.
  std::vector<double> capacity_trace{};
  std::string failure{};
};

/// Frobenius norm of (d/n) sum_j x_j x_j^T / (x_j^T Sigma^{-1} x_j) - Sigma.
double tyler_fixed_point_residual(const Matrix& x, const ShapePD& sigma);

/// Called after every update with the iteration number, the new iterate,
/// its fixed-point residual and its capacity.
using TylerObserver =
    std::function<void(long iteration, const Matrix& sigma, double residual,
                       double capacity)>;

/// Tyler's fixed-point iteration from Sigma_0 = I:
/// Sigma_{t+1} = d S_t / tr S_t with S_t = sum_j x_j x_j^T / (x_j^T Sigma_t^{-1} x_j).
///
/// Stops at residual <= config.tol after at least one update. Without an
/// explicit max_iters the budget is 10 (d + |log det Sigma_t| + 60),
/// re-evaluated at the current iterate. When the estimator fails to exist
/// (n < d, data on a subspace) the result has converged = false and holds
/// the best iterate found.
EstimatorResult tyler_iterate(const Matrix& x, const SolverConfig& config,
                              const TylerObserver& observer = {});

long tyler_default_budget(Index d, double log_det);

/// Sigma = d (L^T L)^{-1} / tr (L^T L)^{-1}. Rejects singular L.
ShapePD estimator_from_scaling(const Matrix& left);

struct EstimatorScaling {
  ScalingPair scaling;
  // op_error / s of L X diag(R) is at most error_constant * residual.
  double error_constant = 0.0;
};

/// L = Sigma^{-1/2}, R_j = (x_j^T Sigma^{-1} x_j)^{-1/2}.
EstimatorScaling scaling_from_estimator(const Matrix& x, const ShapePD& sigma_hat);

/// f_X(Z) = (d/n) sum_j log <x_j, Z x_j> - log det Z.
double capacity(const Matrix& x, const Matrix& z);

/// ||I - Sigma^{1/2} Sigma_hat^{-1} Sigma^{1/2}||_op.
double relative_op_error(const ShapePD& sigma, const ShapePD& sigma_hat);

/// ||I - Sigma^{1/2} Sigma_hat^{-1} Sigma^{1/2}||_F.
double relative_frobenius_error(const Matrix& sigma, const Matrix& sigma_hat);

}  // namespace tylerscale
