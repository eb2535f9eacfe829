#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace fspca {

// Shortest lossless decimal form ("%.17g").
std::string format_g17(double x);

// Dense row-major CSV, one matrix row per line, %.17g floats. With header,
// the first line holds column names (x1..xp unless given).
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& M,
                      bool header = false,
                      const std::vector<std::string>& colnames = {});
std::string matrix_to_csv(const Eigen::MatrixXd& M, bool header = false,
                          const std::vector<std::string>& colnames = {});

// Reads a dense CSV; a leading non-numeric line is treated as a header and
// skipped. Ragged rows are rejected.
Eigen::MatrixXd read_matrix_csv(const std::string& path);
Eigen::MatrixXd matrix_from_csv(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace fspca
