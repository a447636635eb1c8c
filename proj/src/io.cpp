#include "eit/io.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>

namespace eit {

static_assert(std::endian::native == std::endian::little,
              "voltage/feature files are little-endian; big-endian hosts unsupported");

void write_f64(const std::filesystem::path& path, const double* data, std::size_t n) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for write: " + path.string());
    out.write(reinterpret_cast<const char*>(data), std::streamsize(n * sizeof(double)));
    if (!out) throw std::runtime_error("short write: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_f64(const std::filesystem::path& path, const Eigen::VectorXd& v) {
  write_f64(path, v.data(), std::size_t(v.size()));
}

void write_f64(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  write_f64(path, m.data(), std::size_t(m.size()));
}

Eigen::VectorXd read_f64(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  const auto bytes = std::size_t(in.tellg());
  if (bytes % sizeof(double) != 0)
    throw std::runtime_error("not a float64 array: " + path.string());
  Eigen::VectorXd v(bytes / sizeof(double));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(v.data()), std::streamsize(bytes));
  if (!in) throw std::runtime_error("short read: " + path.string());
  return v;
}

Eigen::MatrixXd read_f64_matrix(const std::filesystem::path& path, int rows, int cols) {
  Eigen::VectorXd flat = read_f64(path);
  if (flat.size() != Eigen::Index(rows) * cols)
    throw std::runtime_error("size mismatch reading " + path.string());
  return Eigen::Map<Eigen::MatrixXd>(flat.data(), rows, cols);
}

void write_c64(const std::filesystem::path& path, const Eigen::MatrixXcd& m) {
  write_f64(path, reinterpret_cast<const double*>(m.data()), std::size_t(m.size()) * 2);
}

Eigen::MatrixXcd read_c64_matrix(const std::filesystem::path& path, int rows, int cols) {
  Eigen::VectorXd flat = read_f64(path);
  if (flat.size() != 2 * Eigen::Index(rows) * cols)
    throw std::runtime_error("size mismatch reading " + path.string());
  return Eigen::Map<Eigen::MatrixXcd>(reinterpret_cast<std::complex<double>*>(flat.data()),
                                      rows, cols);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for write: " + path.string());
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  nlohmann::json j;
  in >> j;
  return j;
}

std::uintmax_t file_size_or_zero(const std::filesystem::path& path) {
  std::error_code ec;
  auto n = std::filesystem::file_size(path, ec);
  return ec ? 0 : n;
}

} // namespace eit
