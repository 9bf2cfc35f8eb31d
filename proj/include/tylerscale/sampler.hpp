#pragma once

#include <string>

#include "tylerscale/frame.hpp"
#include "tylerscale/rng.hpp"
#include "tylerscale/shape.hpp"

namespace tylerscale {

/// Law of the scalar radius u in X = Sigma^{1/2} * direction * u.
struct RadialLaw {
  enum class Kind { kConstant, kGaussianNorm, kStudentT };

  Kind kind = Kind::kConstant;
  double nu = 0.0;  // degrees of freedom, student-t only

  static RadialLaw constant() { return {}; }
  static RadialLaw gaussian_norm() { return {Kind::kGaussianNorm, 0.0}; }
  static RadialLaw student_t(double nu);

  // Parses "constant", "gaussian" or "t:NU".
  static RadialLaw parse(const std::string& text);
  std::string to_string() const;
};

struct EllipticalModel {
  EllipticalModel(ShapePD sigma, RadialLaw radial);

  ShapePD sigma;
  RadialLaw radial;
  Matrix sigma_sqrt;  // symmetric square root of sigma
};

// Lanes of a SeedSpec stream; directions and radii never share draws.
inline constexpr std::uint32_t kDirectionLane = 0;
inline constexpr std::uint32_t kRadialLane = 1;
inline constexpr std::uint32_t kGaussianFrameLane = 2;

/// Uniform unit vector in R^d (normalized Gaussian draw).
Vector sample_sphere(Index d, SeedSpec seed);

/// d x n matrix whose columns are independent draws from the model.
///
/// Column j is (Sigma^{1/2} u_j) * r_j where u_j is the j-th sphere draw of
/// the direction lane and r_j the j-th radius of the radial lane. For the
/// Gaussian and Student-t laws the radius reuses the norm of the Gaussian
/// vector behind u_j, which is independent of its direction.
Matrix sample_elliptical(const EllipticalModel& model, Index n, SeedSpec seed);

/// d x n frame of i.i.d. N(0, variance) entries.
Frame sample_gaussian_frame(Index d, Index n, double variance, SeedSpec seed);

/// d x n matrix whose columns are independent uniform unit vectors.
Matrix sample_sphere_matrix(Index d, Index n, SeedSpec seed);

/// Scales every column to unit norm. Throws DegenerateInputError naming the
/// first zero column.
Frame normalize_columns(const Matrix& x);

/// Unit columns Sigma^{-1/2} x_j / ||Sigma^{-1/2} x_j||.
Frame whiten(const Matrix& x, const ShapePD& sigma);

// Column normalization without the frame checks.
Matrix normalize_columns_matrix(const Matrix& x);

}  // namespace tylerscale
