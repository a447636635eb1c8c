#pragma once
#include <Eigen/Dense>
#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace eit {

// Flat little-endian 64-bit float arrays; complex data is stored as
// interleaved (re, im) pairs. Writes go through a temp file + rename.
void write_f64(const std::filesystem::path& path, const double* data, std::size_t n);
void write_f64(const std::filesystem::path& path, const Eigen::VectorXd& v);
void write_f64(const std::filesystem::path& path, const Eigen::MatrixXd& m); // column-major
Eigen::VectorXd read_f64(const std::filesystem::path& path);
Eigen::MatrixXd read_f64_matrix(const std::filesystem::path& path, int rows, int cols);

void write_c64(const std::filesystem::path& path, const Eigen::MatrixXcd& m); // column-major
Eigen::MatrixXcd read_c64_matrix(const std::filesystem::path& path, int rows, int cols);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

std::uintmax_t file_size_or_zero(const std::filesystem::path& path);

} // namespace eit
