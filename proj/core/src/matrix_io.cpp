#include "fspca/matrix_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fspca/errors.hpp"

namespace fspca {

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string matrix_to_csv(const Eigen::MatrixXd& M, bool header,
                          const std::vector<std::string>& colnames) {
  std::ostringstream out;
  if (header) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) out << ',';
      if (j < static_cast<Eigen::Index>(colnames.size()))
        out << colnames[j];
      else
        out << 'x' << (j + 1);
    }
    out << "\n";
  }
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) out << ',';
      out << format_g17(M(i, j));
    }
    out << "\n";
  }
  return out.str();
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& M,
                      bool header, const std::vector<std::string>& colnames) {
  write_text_file(path, matrix_to_csv(M, header, colnames));
}

Eigen::MatrixXd matrix_from_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    bool numeric = true;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      const std::string tok =
          line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      while (end && *end == ' ') ++end;
      if (end == tok.c_str() || (end && *end != '\0')) {
        numeric = false;
        break;
      }
      row.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header line
      }
      throw IoError("matrix CSV: non-numeric value outside header line");
    }
    first = false;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("matrix CSV: no data rows");
  const std::size_t cols = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != cols) throw IoError("matrix CSV: ragged rows");
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return M;
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  return matrix_from_csv(read_text_file(path));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading: " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << content;
  if (!out) throw IoError("error while writing: " + path);
}

}  // namespace fspca
