#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace svmboot {

/// Shortest text that round-trips the double ("%.17g").
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

/// Numeric CSV with a one-line header. Throws IoError on filesystem failure.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& values,
                      const std::vector<std::string>& header);
CsvTable read_matrix_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace svmboot
