#include "tylerscale/report_json.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace tylerscale {

namespace {

std::string number(double v) {
  if (!std::isfinite(v)) return "null";
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quoted(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

std::string boolean(bool b) { return b ? "true" : "false"; }

template <typename Range, typename Fn>
std::string array(const Range& items, Fn fn) {
  std::string out = "[";
  bool first = true;
  for (const auto& item : items) {
    if (!first) out += ", ";
    out += fn(item);
    first = false;
  }
  return out + "]";
}

std::string matrix_row_major(const Matrix& m) {
  std::string out = "[";
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (i || j) out += ", ";
      out += number(m(i, j));
    }
  }
  return out + "]";
}

std::string vector_json(const Vector& v) {
  std::string out = "[";
  for (Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += number(v(i));
  }
  return out + "]";
}

std::string optional_number(const std::optional<double>& v) {
  return v ? number(*v) : "null";
}

}  // namespace

void write_estimate_json(std::ostream& out, const EstimatorResult& result) {
  const Matrix& s = result.sigma_hat.matrix();
  out << "{\n"
      << "  \"d\": " << s.rows() << ",\n"
      << "  \"sigma_hat\": " << matrix_row_major(s) << ",\n"
      << "  \"residual\": " << number(result.residual) << ",\n"
      << "  \"iterations\": " << result.iterations << ",\n"
      << "  \"converged\": " << boolean(result.converged) << ",\n"
      << "  \"capacity_trace\": "
      << array(result.capacity_trace, [](double v) { return number(v); });
  if (!result.failure.empty()) out << ",\n  \"failure\": " << quoted(result.failure);
  out << "\n}\n";
}

void write_scaling_json(std::ostream& out, const ScalingResult& result,
                        ScalingMethod method, double tol) {
  const Matrix& left = result.scaling.left();
  out << "{\n"
      << "  \"method\": " << quoted(to_string(method)) << ",\n"
      << "  \"d\": " << left.rows() << ",\n"
      << "  \"n\": " << result.scaling.right().size() << ",\n"
      << "  \"tol\": " << number(tol) << ",\n"
      << "  \"converged\": " << boolean(result.converged) << ",\n"
      << "  \"iterations\": " << result.iterations << ",\n"
      << "  \"final_error\": " << number(result.final_error) << ",\n"
      << "  \"L\": " << matrix_row_major(left) << ",\n"
      << "  \"R\": " << vector_json(result.scaling.right()) << ",\n"
      << "  \"balanced\": " << matrix_row_major(result.balanced);
  if (method == ScalingMethod::kFlow) {
    out << ",\n  \"int_E_op\": " << number(result.int_E_op)
        << ",\n  \"int_F_op\": " << number(result.int_F_op)
        << ",\n  \"left_growth\": " << number(result.left_growth)
        << ",\n  \"left_growth_bound\": " << number(result.left_growth_bound)
        << ",\n  \"right_growth\": " << number(result.right_growth)
        << ",\n  \"right_growth_bound\": " << number(result.right_growth_bound)
        << ",\n  \"size_increases\": " << result.size_increases;
  } else {
    out << ",\n  \"error_increases\": " << result.error_increases;
  }
  if (!result.failure.empty()) out << ",\n  \"failure\": " << quoted(result.failure);
  out << "\n}\n";
}

void write_expansion_json(std::ostream& out, const ExpansionReport& report, Index n) {
  out << "{\n"
      << "  \"n\": " << n << ",\n"
      << "  \"lambda_quantum\": " << optional_number(report.lambda_quantum) << ",\n"
      << "  \"lambda_infty\": " << optional_number(report.lambda_infty) << ",\n"
      << "  \"alpha_min\": " << number(report.alpha_min) << ",\n"
      << "  \"alpha_max\": " << number(report.alpha_max) << ",\n"
      << "  \"beta\": " << quoted(report.beta.to_string()) << ",\n"
      << "  \"cheeger\": " << optional_number(report.cheeger) << ",\n"
      << "  \"mode\": " << quoted(to_string(report.mode)) << ",\n"
      << "  \"trials\": " << report.trials << ",\n";
  if (report.seed) {
    out << "  \"seed\": {\"master_seed\": " << report.seed->master_seed
        << ", \"stream_index\": " << report.seed->stream_index << "},\n";
  } else {
    out << "  \"seed\": null,\n";
  }
  if (report.witness) {
    out << "  \"witness\": {\"subset\": "
        << array(report.witness->subset, [](Index j) { return std::to_string(j + 1); })
        << ", \"y\": " << vector_json(report.witness->y) << "}\n";
  } else {
    out << "  \"witness\": null\n";
  }
  out << "}\n";
}

void write_diagnostics_json(std::ostream& out, const DiagnosticsResult& result) {
  out << "{\n  \"passed\": " << boolean(result.passed()) << ",\n  \"frames\": [";
  bool first = true;
  for (const DiagnosticsEntry& e : result.entries) {
    out << (first ? "\n" : ",\n");
    first = false;
    out << "    {\"frame\": " << quoted(e.frame) << ", \"h\": " << number(e.report.h)
        << ", \"size\": " << number(e.report.size) << ", \"passed\": " << boolean(e.passed)
        << ", \"checks\": [";
    bool first_check = true;
    for (const DerivativeCheck* c :
         {&e.report.quadratic_form, &e.report.column_norm, &e.report.size_change}) {
      out << (first_check ? "" : ", ");
      first_check = false;
      out << "{\"name\": " << quoted(c->name) << ", \"analytic\": " << number(c->analytic)
          << ", \"finite_difference\": " << number(c->finite_difference)
          << ", \"rel_error\": " << number(c->rel_error) << "}";
    }
    out << "]}";
  }
  out << "\n  ]\n}\n";
}

}  // namespace tylerscale
