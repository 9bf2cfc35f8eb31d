#include "tylerscale/frame.hpp"

#include <string>

#include "tylerscale/errors.hpp"

namespace tylerscale {

Frame::Frame(Matrix columns) : v_(std::move(columns)) {
  if (v_.rows() < 1 || v_.cols() < 1) {
    throw std::invalid_argument("Frame: empty matrix");
  }
  if (!v_.allFinite()) {
    throw std::invalid_argument("Frame: non-finite entry");
  }
  if (v_.cols() < v_.rows()) {
    throw DegenerateInputError("Frame: n = " + std::to_string(v_.cols()) +
                               " columns cannot span d = " +
                               std::to_string(v_.rows()) + " dimensions");
  }
  const Vector sv = Eigen::JacobiSVD<Matrix>(v_).singularValues();
  const double smallest = sv(sv.size() - 1);
  if (!(smallest > kSpanTolerance * sv(0))) {
    throw DegenerateInputError(
        "Frame: columns do not span R^" + std::to_string(v_.rows()) +
        " (sigma_min / sigma_max = " + std::to_string(smallest / sv(0)) + ")");
  }
}

double size_of(const Matrix& v) { return v.squaredNorm(); }

ErrorReport error_report_of(const Matrix& v) {
  const double d = static_cast<double>(v.rows());
  const double n = static_cast<double>(v.cols());
  ErrorReport r;
  r.size = size_of(v);
  Matrix gram = v * v.transpose();
  r.E = symmetrize(d * gram);
  r.E.diagonal().array() -= r.size;
  r.F = n * v.colwise().squaredNorm().transpose();
  r.F.array() -= r.size;
  r.delta = r.E.squaredNorm() / d + r.F.squaredNorm() / n;
  r.e_op = op_norm_symmetric(r.E);
  r.f_op = r.F.cwiseAbs().maxCoeff();
  r.op_error = std::max(r.e_op, r.f_op);
  return r;
}

double size(const Frame& frame) { return size_of(frame.matrix()); }

ErrorReport error_report(const Frame& frame) {
  return error_report_of(frame.matrix());
}

bool is_eps_doubly_balanced(const Frame& frame, double eps) {
  if (eps < 0.0) throw std::invalid_argument("is_eps_doubly_balanced: eps < 0");
  const ErrorReport r = error_report(frame);
  return r.op_error <= r.size * eps;
}

}  // namespace tylerscale
