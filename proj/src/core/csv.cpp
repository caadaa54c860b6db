#include "core/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "core/linalg.hpp"

namespace kronmtl {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  require(res.ec == std::errc(), ErrKind::numeric, "failed to format number");
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrKind::io, "cannot open file for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  require(!in.bad(), ErrKind::io, "read failure: " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrKind::io, "cannot open file for writing: " + path);
  out << content;
  out.flush();
  require(out.good(), ErrKind::io, "write failure: " + path);
}

Matrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrKind::io, "cannot open file for reading: " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) break;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      require(res.ec == std::errc() && res.ptr != p, ErrKind::config,
              path + ":" + std::to_string(line_no) + ": malformed number");
      require(std::isfinite(v), ErrKind::config,
              path + ":" + std::to_string(line_no) + ": non-finite entry");
      row.push_back(v);
      p = res.ptr;
      if (p == end) break;
      require(*p == ',', ErrKind::config,
              path + ":" + std::to_string(line_no) + ": expected ','");
      ++p;
      require(p != end, ErrKind::config,
              path + ":" + std::to_string(line_no) + ": trailing ','");
    }
    if (!rows.empty()) {
      require(row.size() == rows.front().size(), ErrKind::config,
              path + ":" + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  require(in.eof() && !in.bad(), ErrKind::io, "read failure: " + path);
  require(!rows.empty() && !rows.front().empty(), ErrKind::config,
          path + ": empty matrix");

  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

void write_csv_matrix(const std::string& path, const Matrix& m) {
  require(m.rows() >= 1 && m.cols() >= 1, ErrKind::config,
          "refusing to write empty matrix: " + path);
  require(all_finite(m), ErrKind::numeric,
          "refusing to write non-finite matrix: " + path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrKind::io, "cannot open file for writing: " + path);
  std::string line;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) line += ',';
      line += format_double(m(i, j));
    }
    line += '\n';
    out << line;
  }
  out.flush();
  require(out.good(), ErrKind::io, "write failure: " + path);
}

}  // namespace kronmtl
