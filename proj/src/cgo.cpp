#include "eit/cgo.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "eit/trig.hpp"

namespace eit {

std::vector<double> default_vhed_angles() {
  std::vector<double> out;
  for (int i : {4, 5, 6, 12, 13, 14}) out.push_back(i * M_PI / 8.0);
  return out;
}

KGrid build_k_grid(double tau_max, int n_tau, std::vector<double> angles) {
  if (!(tau_max > 0.0)) throw std::invalid_argument("build_k_grid: tau_max must be positive");
  if (n_tau < 17 || n_tau % 2 == 0)
    throw std::invalid_argument("build_k_grid: n_tau must be odd and >= 17");
  if (angles.empty()) angles = default_vhed_angles();
  KGrid g;
  g.tau_max = tau_max;
  g.tau.resize(n_tau);
  for (int i = 0; i < n_tau; ++i) g.tau[i] = tau_max * (2.0 * i / (n_tau - 1) - 1.0);
  g.angles = std::move(angles);
  return g;
}

BieSolver::BieSolver(const DNMatrix& Lsigma, const BoundaryParametrization& boundary,
                     int n_modes) {
  const Eigen::MatrixXd Lt = Lsigma.reduced();
  K_ = int(Lt.rows());
  if (n_modes < 1 || 2 * n_modes > K_)
    throw std::invalid_argument("BieSolver: need 1 <= n_modes <= (M-1)/2");
  nm_ = n_modes;
  Nb_ = int(boundary.s.size());
  if (Nb_ <= K_) throw std::invalid_argument("BieSolver: boundary grid too coarse for the data");

  TrigBasis basis(K_, boundary.length);
  analysis_ = basis.analysis_matrix(boundary.s);
  Hplus_ = basis.antiderivative_matrix() * Lt;
  Hminus_ = -Hplus_.partialPivLu().solve(Eigen::MatrixXd::Identity(K_, K_));

  ext_.resize(Nb_, nm_);
  z_.resize(Nb_);
  for (int j = 0; j < Nb_; ++j) {
    const cdouble p = boundary.point[std::size_t(j)];
    z_[j] = p;
    const double alpha = std::atan2(p.imag() / boundary.by, p.real() / boundary.ax);
    for (int n = 1; n <= nm_; ++n)
      ext_(j, n - 1) = cdouble(std::cos(n * alpha), -std::sin(n * alpha));
  }
}

BieSolver::Solution BieSolver::solve_pair(cdouble k) const {
  Solution sol;
  if (std::abs(k) == 0.0) {
    sol.omega_plus = Eigen::VectorXcd::Zero(Nb_);
    sol.omega_minus = Eigen::VectorXcd::Zero(Nb_);
    return sol;
  }
  Eigen::VectorXcd G0(Nb_);
  for (int j = 0; j < Nb_; ++j) G0[j] = std::exp(cdouble(0.0, 1.0) * k * z_[j]);
  Eigen::MatrixXcd B = G0.asDiagonal() * ext_;
  const Eigen::MatrixXd PRe = analysis_ * B.real();
  const Eigen::MatrixXd PIm = analysis_ * B.imag();
  const Eigen::VectorXd r0Re = analysis_ * G0.real();
  const Eigen::VectorXd r0Im = analysis_ * G0.imag();

  auto run = [&](const Eigen::MatrixXd& H, Eigen::VectorXcd& omega, double& residual) {
    Eigen::MatrixXd Mred(K_, 2 * nm_);
    const Eigen::MatrixXd HPRe = H * PRe;
    const Eigen::MatrixXd HPIm = H * PIm;
    for (int n = 0; n < nm_; ++n) {
      Mred.col(2 * n) = PIm.col(n) - HPRe.col(n);     // Re a_n direction
      Mred.col(2 * n + 1) = PRe.col(n) + HPIm.col(n); // Im a_n direction
    }
    const Eigen::VectorXd rhs = -(r0Im - H * r0Re);
    Eigen::VectorXd x;
    if (2 * nm_ == K_) {
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(Mred);
      x = lu.solve(rhs);
      x += lu.solve(rhs - Mred * x); // one refinement pass
    } else {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Mred);
      x = qr.solve(rhs);
      x += qr.solve(rhs - Mred * x);
    }
    const double scale = Mred.norm() * x.norm() + rhs.norm() + 1e-300;
    residual = (Mred * x - rhs).norm() / scale;
    if (!(residual < 1e-10)) {
      std::ostringstream msg;
      msg << "BieSolver: residual " << residual << " above tolerance at k = (" << 0 << ")";
      throw std::runtime_error(msg.str());
    }
    Eigen::VectorXcd a(nm_);
    for (int n = 0; n < nm_; ++n) a[n] = cdouble(x[2 * n], x[2 * n + 1]);
    omega = ext_ * a;
  };
  run(Hplus_, sol.omega_plus, sol.residual_plus);
  run(Hminus_, sol.omega_minus, sol.residual_minus);
  return sol;
}

Eigen::VectorXcd BieSolver::solve(cdouble k, int sign, double* residual) const {
  Solution sol = solve_pair(k);
  if (residual) *residual = (sign > 0) ? sol.residual_plus : sol.residual_minus;
  return (sign > 0) ? sol.omega_plus : sol.omega_minus;
}

CGOTraces cgo_traces(const DNMatrix& Lsigma, const KGrid& grid,
                     const BoundaryParametrization& boundary, int n_modes) {
  BieSolver solver(Lsigma, boundary, n_modes);
  CGOTraces tr;
  tr.grid = grid;
  tr.s = boundary.s;
  const int Nb = solver.n_nodes();
  const int nt = grid.n_tau(), na = grid.n_angles();
  for (int sgn = 0; sgn < 2; ++sgn) {
    tr.omega[std::size_t(sgn)].assign(std::size_t(na), Eigen::MatrixXcd::Zero(Nb, nt));
    tr.residual[std::size_t(sgn)] = Eigen::MatrixXd::Zero(nt, na);
  }
  std::vector<std::pair<int, int>> failures;
  std::string first_error;
  for (int a = 0; a < na; ++a) {
    const cdouble dir(std::cos(grid.angles[std::size_t(a)]), std::sin(grid.angles[std::size_t(a)]));
    for (int q = 0; q < nt; ++q) {
      const cdouble k = grid.tau[q] * dir;
      try {
        BieSolver::Solution sol = solver.solve_pair(k);
        tr.omega[0][std::size_t(a)].col(q) = sol.omega_plus;
        tr.omega[1][std::size_t(a)].col(q) = sol.omega_minus;
        tr.residual[0](q, a) = sol.residual_plus;
        tr.residual[1](q, a) = sol.residual_minus;
        tr.max_residual = std::max({tr.max_residual, sol.residual_plus, sol.residual_minus});
      } catch (const std::exception& e) {
        failures.emplace_back(a, q);
        if (first_error.empty()) first_error = e.what();
      }
    }
  }
  if (!failures.empty()) {
    std::ostringstream msg;
    msg << "cgo_traces: " << failures.size() << " grid solves failed (first at angle index "
        << failures.front().first << ", tau index " << failures.front().second
        << "): " << first_error;
    throw std::runtime_error(msg.str());
  }
  return tr;
}

} // namespace eit
