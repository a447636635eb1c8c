#pragma once
#include <Eigen/Dense>

namespace eit {

// Orthonormal trigonometric basis on a closed boundary of length L:
//   phi_k(s) = sqrt(2/L) cos(n 2 pi s / L), n = (k+1)/2   (odd k)
//   phi_k(s) = sqrt(2/L) sin(n 2 pi s / L), n = k/2       (even k)
// for k = 1..K with K even; orthonormal in L^2(ds). Mode of index k is
// n(k) = (k+1)/2 for odd k, k/2 for even k.
struct TrigBasis {
  int K;
  double L;

  TrigBasis(int K_, double L_) : K(K_), L(L_) {}

  int mode(int k) const { return (k % 2 == 1) ? (k + 1) / 2 : k / 2; }

  double eval(int k, double s) const;

  // N x K matrix of basis values at the given arc coordinates.
  Eigen::MatrixXd eval_matrix(const Eigen::VectorXd& s) const;

  // Analysis operator for samples on N equispaced nodes s_j = j L / N:
  // coefficients c = (L/N) Phi^T v. Exact for functions bandlimited to
  // modes <= K/2 when N > K.
  Eigen::MatrixXd analysis_matrix(const Eigen::VectorXd& s_equispaced) const;

  // Antiderivative in coefficient space: if w = sum c_k phi_k (mean free)
  // then its mean-free antiderivative is sum (D c)_k phi_k with
  //   D[2n-1 <- 2n-1? ] : cos_n -> (L / 2 pi n) sin_n,  sin_n -> -(L / 2 pi n) cos_n.
  Eigen::MatrixXd antiderivative_matrix() const;
};

} // namespace eit
