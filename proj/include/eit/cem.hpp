#pragma once
#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cstdint>
#include <memory>
#include <vector>

#include "eit/geometry.hpp"
#include "eit/mesh.hpp"
#include "eit/phantom.hpp"

namespace eit {

// Electrode current patterns mimicking the trigonometric continuum basis:
// column k is I^(k) = (2 pi / M) (w_k - mean(w_k) 1) with
// (w_k)_m = phi_k(s_m) |Psi'(x_m)|. Columns sum to zero.
struct CurrentPatternSet {
  int M = 0;
  double L = 0.0;
  Eigen::MatrixXd I;  // M x (M-1)
  Eigen::VectorXd s;  // electrode arc coordinates
  Eigen::VectorXd w;  // |Psi'| weights
};

CurrentPatternSet trig_current_patterns(int M, double L, const Eigen::VectorXd& s_m,
                                        const Eigen::VectorXd& w_m);

// Complete electrode model solver with piecewise-linear elements and a
// Lagrange multiplier fixing sum(U) = 0. One factorization per
// (mesh, sigma); all current patterns reuse it.
class CemSolver {
public:
  CemSolver(const Mesh& mesh, const std::vector<double>& sigma_of_region,
            double contact_impedance);

  // I: net electrode currents (must sum to zero). Returns electrode
  // potentials U (zero mean). If interior != nullptr, the nodal potential
  // is written there.
  Eigen::VectorXd solve(const Eigen::VectorXd& I, Eigen::VectorXd* interior = nullptr) const;

  // Robin-form electrode currents (1/z) int_{e_m} (U_m - u) ds recovered
  // from a solution; used for conservation / flux checks.
  Eigen::VectorXd recovered_currents(const Eigen::VectorXd& interior,
                                     const Eigen::VectorXd& U) const;

  int n_nodes() const { return n_; }
  int n_electrodes() const { return M_; }

private:
  int n_ = 0, M_ = 0;
  double z_ = 0.01;
  Eigen::SparseMatrix<double> A_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
  // electrode edge data for flux recovery: per electrode, (i, j, length)
  std::vector<std::vector<std::array<double, 3>>> edges_;
  std::vector<double> electrode_len_;
};

struct VoltageSet {
  int M = 0;
  Eigen::MatrixXd U;       // M x (M-1), column k = potentials under I^(k)
  Eigen::VectorXd stacked; // column-major concatenation, length M (M-1)
  double delta = 0.0;
  std::uint64_t seed = 0;
};

VoltageSet pack_voltages(const Eigen::MatrixXd& U);

// Solves all M-1 patterns on the phantom conductivity and on sigma = 1,
// sharing the mesh and electrode layout. Returns {sigma solve, reference}.
std::pair<VoltageSet, VoltageSet> simulate_measurements(const HeadPhantom& phantom,
                                                        const ConformalMap& map,
                                                        const ElectrodeLayout& layout,
                                                        const CurrentPatternSet& patterns,
                                                        double target_h,
                                                        double contact_impedance);

// V + Gaussian draw rescaled so that ||V - V_delta|| / ||V|| = delta exactly.
Eigen::VectorXd add_noise(const Eigen::VectorXd& V, double delta, std::uint64_t seed);

} // namespace eit
