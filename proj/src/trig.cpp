#include "eit/trig.hpp"

#include <cmath>
#include <stdexcept>

namespace eit {

double TrigBasis::eval(int k, double s) const {
  const double amp = std::sqrt(2.0 / L);
  const double arg = mode(k) * 2.0 * M_PI * s / L;
  return (k % 2 == 1) ? amp * std::cos(arg) : amp * std::sin(arg);
}

Eigen::MatrixXd TrigBasis::eval_matrix(const Eigen::VectorXd& s) const {
  Eigen::MatrixXd Phi(s.size(), K);
  for (int j = 0; j < s.size(); ++j)
    for (int k = 1; k <= K; ++k) Phi(j, k - 1) = eval(k, s[j]);
  return Phi;
}

Eigen::MatrixXd TrigBasis::analysis_matrix(const Eigen::VectorXd& s) const {
  const int N = int(s.size());
  if (N <= K)
    throw std::invalid_argument("TrigBasis::analysis_matrix: need N > K nodes");
  return (L / double(N)) * eval_matrix(s).transpose();
}

Eigen::MatrixXd TrigBasis::antiderivative_matrix() const {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(K, K);
  for (int n = 1; 2 * n <= K; ++n) {
    const double f = L / (2.0 * M_PI * double(n));
    D(2 * n - 1, 2 * n - 2) = f;  // sin_n row <- cos_n column
    D(2 * n - 2, 2 * n - 1) = -f; // cos_n row <- sin_n column
  }
  return D;
}

} // namespace eit
