#include "tylerscale/sampler.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "tylerscale/errors.hpp"

namespace tylerscale {

RadialLaw RadialLaw::student_t(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw ConfigurationError("student-t radial law needs nu > 0");
  }
  return {Kind::kStudentT, nu};
}

RadialLaw RadialLaw::parse(const std::string& text) {
  if (text == "constant") return constant();
  if (text == "gaussian") return gaussian_norm();
  if (text.rfind("t:", 0) == 0) {
    std::size_t used = 0;
    double nu = 0.0;
    try {
      nu = std::stod(text.substr(2), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() - 2) {
      throw ConfigurationError("bad radial law '" + text + "'");
    }
    return student_t(nu);
  }
  throw ConfigurationError("unknown radial law '" + text +
                           "' (expected constant, gaussian or t:NU)");
}

std::string RadialLaw::to_string() const {
  switch (kind) {
    case Kind::kConstant:
      return "constant";
    case Kind::kGaussianNorm:
      return "gaussian";
    case Kind::kStudentT: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "t:%g", nu);
      return buf;
    }
  }
  return "?";
}

EllipticalModel::EllipticalModel(ShapePD sigma_in, RadialLaw radial_in)
    : sigma(std::move(sigma_in)), radial(radial_in) {
  if (radial.kind == RadialLaw::Kind::kStudentT && !(radial.nu > 0.0)) {
    throw ConfigurationError("student-t radial law needs nu > 0");
  }
  sigma_sqrt = sqrt_pd(sigma.matrix());
}

namespace {

// Fills `g` with standard normals and returns its norm, redrawing the
// (probability zero) all-zero vector.
double gaussian_vector(CounterRng& rng, Vector& g) {
  double norm = 0.0;
  do {
    for (Index i = 0; i < g.size(); ++i) g(i) = rng.normal();
    norm = g.norm();
  } while (norm == 0.0);
  return norm;
}

}  // namespace

Vector sample_sphere(Index d, SeedSpec seed) {
  if (d < 1) throw ConfigurationError("sample_sphere: dimension must be >= 1");
  CounterRng rng(seed, kDirectionLane);
  Vector g(d);
  const double norm = gaussian_vector(rng, g);
  return g / norm;
}

Matrix sample_sphere_matrix(Index d, Index n, SeedSpec seed) {
  if (d < 1 || n < 1) {
    throw ConfigurationError("sample_sphere_matrix: need d >= 1 and n >= 1");
  }
  CounterRng rng(seed, kDirectionLane);
  Matrix out(d, n);
  Vector g(d);
  for (Index j = 0; j < n; ++j) {
    const double norm = gaussian_vector(rng, g);
    out.col(j) = g / norm;
  }
  return out;
}

Matrix sample_elliptical(const EllipticalModel& model, Index n, SeedSpec seed) {
  if (n < 1) throw ConfigurationError("sample_elliptical: n must be >= 1");
  const Index d = model.sigma.dim();
  CounterRng directions(seed, kDirectionLane);
  CounterRng radii(seed, kRadialLane);
  std::gamma_distribution<double> half_chi_square(
      model.radial.kind == RadialLaw::Kind::kStudentT ? model.radial.nu / 2.0
                                                      : 1.0,
      2.0);

  Matrix out(d, n);
  Vector g(d);
  for (Index j = 0; j < n; ++j) {
    const double norm = gaussian_vector(directions, g);
    const Vector shaped = model.sigma_sqrt * (g / norm);
    double radius = 1.0;
    switch (model.radial.kind) {
      case RadialLaw::Kind::kConstant:
        break;
      case RadialLaw::Kind::kGaussianNorm:
        radius = norm;
        break;
      case RadialLaw::Kind::kStudentT: {
        double w = 0.0;
        do {
          w = half_chi_square(radii);
        } while (w <= 0.0);
        radius = norm / std::sqrt(w / model.radial.nu);
        break;
      }
    }
    out.col(j) = shaped * radius;
  }
  return out;
}

Frame sample_gaussian_frame(Index d, Index n, double variance, SeedSpec seed) {
  if (!(variance > 0.0)) {
    throw ConfigurationError("sample_gaussian_frame: variance must be > 0");
  }
  CounterRng rng(seed, kGaussianFrameLane);
  const double sd = std::sqrt(variance);
  Matrix g(d, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < d; ++i) g(i, j) = sd * rng.normal();
  }
  return Frame(std::move(g));
}

Matrix normalize_columns_matrix(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double norm = x.col(j).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw DegenerateInputError(
          "column " + std::to_string(j) + " is zero or non-finite",
          static_cast<std::size_t>(j));
    }
    out.col(j) = x.col(j) / norm;
  }
  return out;
}

Frame normalize_columns(const Matrix& x) {
  return Frame(normalize_columns_matrix(x));
}

Frame whiten(const Matrix& x, const ShapePD& sigma) {
  if (sigma.dim() != x.rows()) {
    throw ConfigurationError("whiten: dimension mismatch");
  }
  return normalize_columns(inverse_sqrt_pd(sigma.matrix()) * x);
}

}  // namespace tylerscale
