#pragma once
#include <Eigen/Dense>
#include <string>

#include "eit/cem.hpp"
#include "eit/geometry.hpp"

namespace eit {

// Matrix approximation of the sigma = 1 Neumann-to-Dirichlet map in the
// trigonometric boundary basis. The primary path solves the Neumann
// problems spectrally through the conformal pullback to the disc; an FEM
// recomputation is kept as a cross-check.
struct NDMatrix {
  enum class Provenance { spectral_conformal, fem };
  Eigen::MatrixXd R1; // (M-1) x (M-1)
  Provenance provenance = Provenance::spectral_conformal;
  int resolution = 0;      // quadrature nodes (spectral) or mesh size hint (fem)
  double sym_error = 0.0;  // ||R1 - R1^T|| / ||R1||
  double conv_error = 0.0; // entrywise change under refinement (spectral path)
};

NDMatrix reference_nd_matrix(const ConformalMap& map, int M, int quad_nodes = 4096);
NDMatrix reference_nd_matrix_fem(const ConformalMap& map, int M, double target_h);

// Step 3 of the mimicking construction: U^T I, where U holds the
// per-pattern voltage differences (R_sigma^CEM - R_1^CEM) I^(k).
Eigen::MatrixXd relative_nd_matrix(const Eigen::MatrixXd& U, const CurrentPatternSet& patterns);

// DN matrix L_sigma: zero row/column for the constant basis function
// prepended to L~ = (U^T I + R1)^{-1}.
struct DNMatrix {
  Eigen::MatrixXd L;    // M x M, first row/column zero
  double delta = 0.0;   // noise level of the voltages that produced it
  double cond = 0.0;    // condition number of U^T I + R1
  double asym = 0.0;    // ||L~ - L~^T|| / ||L~|| (logged, not symmetrized)
  std::string sample_id;

  Eigen::MatrixXd reduced() const { return L.bottomRightCorner(L.rows() - 1, L.cols() - 1); }
};

DNMatrix dn_matrix(const Eigen::MatrixXd& relative, const NDMatrix& R1);

} // namespace eit
