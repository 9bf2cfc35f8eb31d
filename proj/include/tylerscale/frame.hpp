#pragma once

#include <iosfwd>
#include <string>

#include "tylerscale/linalg.hpp"

namespace tylerscale {

/// A spanning set of n column vectors in R^d, stored as a d x n matrix.
///
/// Construction rejects non-finite entries, n < d, and column sets whose
/// smallest singular value is at most 1e-12 times the largest. Frames are
/// immutable; they carry their raw scale.
class Frame {
 public:
  explicit Frame(Matrix columns);

  Index dim() const { return v_.rows(); }
  Index count() const { return v_.cols(); }
  const Matrix& matrix() const { return v_; }
  auto column(Index j) const { return v_.col(j); }

  // Relative cutoff used by the spanning check.
  static constexpr double kSpanTolerance = 1e-12;

 private:
  Matrix v_;
};

/// Isotropy and equal-norm defects of a frame.
///
/// E = d V V^T - s I_d, F = diag(n V^T V - s I_n) (kept as a vector),
/// delta = ||E||_F^2 / d + ||F||_F^2 / n, op_error = max(||E||_op, ||F||_op).
struct ErrorReport {
  double size = 0.0;
  Matrix E;
  Vector F;
  double delta = 0.0;
  double e_op = 0.0;
  double f_op = 0.0;
  double op_error = 0.0;
};

double size(const Frame& frame);
ErrorReport error_report(const Frame& frame);
bool is_eps_doubly_balanced(const Frame& frame, double eps);

// Same computations on an unchecked matrix; used inside solvers where the
// intermediate iterates are known to span.
double size_of(const Matrix& v);
ErrorReport error_report_of(const Matrix& v);

// Frame text format: optional '#' comment lines, a "d n" header, then d rows
// of n floats. Data files use the header "data d n" and skip the spanning check.
Frame read_frame(std::istream& in);
Matrix read_data_matrix(std::istream& in);
void write_frame(std::ostream& out, const Frame& frame);
void write_data_matrix(std::ostream& out, const Matrix& data);

Frame read_frame_file(const std::string& path);
Matrix read_matrix_file(const std::string& path);

}  // namespace tylerscale
