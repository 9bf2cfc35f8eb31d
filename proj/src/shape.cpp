#include "tylerscale/shape.hpp"

#include <cmath>
#include <stdexcept>

namespace tylerscale {

ShapePD::ShapePD(Matrix m) : m_(std::move(m)) {
  if (m_.rows() < 1 || m_.rows() != m_.cols()) {
    throw std::invalid_argument("ShapePD: matrix must be square and non-empty");
  }
  if (!m_.allFinite()) throw std::invalid_argument("ShapePD: non-finite entry");
  if (!is_symmetric(m_, 1e-12)) {
    throw std::invalid_argument("ShapePD: matrix is not symmetric");
  }
  m_ = symmetrize(m_);
  const double d = static_cast<double>(m_.rows());
  if (std::abs(m_.trace() - d) > 1e-10 * d) {
    throw std::invalid_argument("ShapePD: trace must equal the dimension");
  }
  const Vector ev =
      Eigen::SelfAdjointEigenSolver<Matrix>(m_, Eigen::EigenvaluesOnly).eigenvalues();
  if (!(ev(0) > 0.0)) {
    throw std::invalid_argument("ShapePD: matrix is not positive definite");
  }
}

ShapePD ShapePD::normalized(const Matrix& m) {
  const double tr = m.trace();
  if (!(tr > 0.0)) {
    throw std::invalid_argument("ShapePD::normalized: non-positive trace");
  }
  return ShapePD(symmetrize(m) * (static_cast<double>(m.rows()) / tr));
}

ShapePD ShapePD::identity(Index d) { return ShapePD(Matrix::Identity(d, d)); }

}  // namespace tylerscale
