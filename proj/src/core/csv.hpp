#pragma once

#include <string>

#include "core/types.hpp"

namespace kronmtl {

// Matrix files: one row per line, comma separated, '.' decimal point, no
// header. Values are written with the shortest digit string that round-trips
// the double exactly (at most 17 significant digits).
Matrix read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Matrix& m);

std::string format_double(double v);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace kronmtl
