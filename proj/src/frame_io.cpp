#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "tylerscale/errors.hpp"
#include "tylerscale/frame.hpp"

namespace tylerscale {

namespace {

bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    return true;
  }
  return false;
}

Matrix read_body(std::istream& in, bool data_header) {
  std::string line;
  if (!next_content_line(in, line)) {
    throw ConfigurationError("frame file: missing header line");
  }
  std::istringstream header(line);
  if (data_header) {
    std::string tag;
    header >> tag;
    if (tag != "data") {
      // A plain "d n" header is also accepted for data files.
      header.clear();
      header.str(line);
    }
  }
  long d = 0;
  long n = 0;
  if (!(header >> d >> n) || d < 1 || n < 1) {
    throw ConfigurationError("frame file: malformed header '" + line + "'");
  }
  Matrix m(d, n);
  for (long i = 0; i < d; ++i) {
    if (!next_content_line(in, line)) {
      throw ConfigurationError("frame file: expected " + std::to_string(d) +
                               " rows, got " + std::to_string(i));
    }
    std::istringstream row(line);
    for (long j = 0; j < n; ++j) {
      if (!(row >> m(i, j))) {
        throw ConfigurationError("frame file: row " + std::to_string(i + 1) +
                                 " has fewer than " + std::to_string(n) +
                                 " values");
      }
    }
    double extra = 0.0;
    if (row >> extra) {
      throw ConfigurationError("frame file: row " + std::to_string(i + 1) +
                               " has more than " + std::to_string(n) +
                               " values");
    }
  }
  return m;
}

void write_body(std::ostream& out, const Matrix& m) {
  char buf[40];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j > 0) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace

Frame read_frame(std::istream& in) { return Frame(read_body(in, false)); }

Matrix read_data_matrix(std::istream& in) { return read_body(in, true); }

void write_frame(std::ostream& out, const Frame& frame) {
  out << frame.dim() << ' ' << frame.count() << '\n';
  write_body(out, frame.matrix());
}

void write_data_matrix(std::ostream& out, const Matrix& data) {
  out << "data " << data.rows() << ' ' << data.cols() << '\n';
  write_body(out, data);
}

Frame read_frame_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_frame(in);
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_data_matrix(in);
}

}  // namespace tylerscale
