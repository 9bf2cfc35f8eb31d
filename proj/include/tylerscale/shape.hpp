#pragma once

#include "tylerscale/linalg.hpp"

namespace tylerscale {

/// Symmetric positive definite d x d matrix with trace d.
///
/// The checked constructor rejects asymmetry beyond 1e-12 relative,
/// non-positive eigenvalues, and traces off d by more than 1e-10 relative.
/// `normalized` rescales an arbitrary SPD matrix to trace d first.
class ShapePD {
 public:
  explicit ShapePD(Matrix m);

  static ShapePD normalized(const Matrix& m);
  static ShapePD identity(Index d);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

}  // namespace tylerscale
