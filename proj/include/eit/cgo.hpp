#pragma once
#include <Eigen/Dense>
#include <array>
#include <complex>
#include <vector>

#include "eit/geometry.hpp"
#include "eit/mimic.hpp"

namespace eit {

// Spectral grid k = tau e^{i phi}: symmetric tau nodes (0 included) times
// a fixed list of angles phi.
struct KGrid {
  double tau_max = 5.0;
  Eigen::VectorXd tau;        // ascending, symmetric about 0
  std::vector<double> angles; // radians

  int n_tau() const { return int(tau.size()); }
  int n_angles() const { return int(angles.size()); }
};

std::vector<double> default_vhed_angles(); // i pi / 8, i in {4,5,6,12,13,14}
KGrid build_k_grid(double tau_max, int n_tau, std::vector<double> angles);

// Traces of the CGO remainders omega^{+-}(z_j, k) on the boundary grid.
struct CGOTraces {
  KGrid grid;
  Eigen::VectorXd s; // boundary arc nodes
  // omega[sign][angle] is (n_nodes x n_tau); sign 0 = '+', 1 = '-'
  std::array<std::vector<Eigen::MatrixXcd>, 2> omega;
  std::array<Eigen::MatrixXd, 2> residual; // (n_tau x n_angles)
  double max_residual = 0.0;
};

// Dense real-linear collocation solver for the boundary integral equation
// satisfied by the CGO traces:
//
//   W(.,k) = 1 + omega(.,k) on the boundary, where
//   (i)  omega extends holomorphically outside the domain and vanishes at
//        infinity  -> omega is expanded in the exterior (Joukowski) modes
//        of the ellipse, and
//   (ii) e^{ikz} W is the trace of a Beltrami solution inside -> its
//        imaginary part matches the conjugate function of its real part,
//        with the conjugation operator H read off the DN matrix
//        (H_+ = D L~ in the trig basis, H_- = -H_+^{-1}).
//
// Projecting (ii) onto the trig modes carried by the data gives a square
// real system per k; the k = 0 node is the analytic W = 1 shortcut.
class BieSolver {
public:
  BieSolver(const DNMatrix& Lsigma, const BoundaryParametrization& boundary, int n_modes);

  struct Solution {
    Eigen::VectorXcd omega_plus, omega_minus;
    double residual_plus = 0.0, residual_minus = 0.0;
  };
  Solution solve_pair(cdouble k) const;

  // single-sign variant; sign = +1 or -1
  Eigen::VectorXcd solve(cdouble k, int sign, double* residual = nullptr) const;

  int n_nodes() const { return Nb_; }
  int n_modes() const { return nm_; }

private:
  int Nb_ = 0, nm_ = 0, K_ = 0;
  Eigen::MatrixXd Hplus_, Hminus_;
  Eigen::MatrixXd analysis_; // K x Nb
  Eigen::MatrixXcd ext_;     // Nb x nm, e^{-i n alpha_j}
  Eigen::VectorXcd z_;       // boundary nodes
};

CGOTraces cgo_traces(const DNMatrix& Lsigma, const KGrid& grid,
                     const BoundaryParametrization& boundary, int n_modes);

} // namespace eit
