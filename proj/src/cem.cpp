#include "eit/cem.hpp"

#include <cmath>
#include <stdexcept>

#include "eit/rng.hpp"
#include "eit/trig.hpp"

namespace eit {

CurrentPatternSet trig_current_patterns(int M, double L, const Eigen::VectorXd& s_m,
                                        const Eigen::VectorXd& w_m) {
  if (M % 2 == 0) throw std::invalid_argument("trig_current_patterns: M must be odd");
  if (s_m.size() != M || w_m.size() != M)
    throw std::invalid_argument("trig_current_patterns: layout size mismatch");
  for (int m = 1; m < M; ++m)
    if (!(s_m[m] > s_m[m - 1]))
      throw std::invalid_argument("trig_current_patterns: s_m must be strictly increasing");
  CurrentPatternSet cp;
  cp.M = M;
  cp.L = L;
  cp.s = s_m;
  cp.w = w_m;
  cp.I.resize(M, M - 1);
  TrigBasis basis(M - 1, L);
  for (int k = 1; k <= M - 1; ++k) {
    Eigen::VectorXd wk(M);
    for (int m = 0; m < M; ++m) wk[m] = basis.eval(k, s_m[m]) * w_m[m];
    const double mean = wk.mean();
    cp.I.col(k - 1) = (2.0 * M_PI / M) * (wk.array() - mean).matrix();
  }
  return cp;
}

CemSolver::CemSolver(const Mesh& mesh, const std::vector<double>& sigma_of_region,
                     double contact_impedance) {
  n_ = mesh.n_nodes();
  M_ = int(mesh.electrode_edges.size());
  z_ = contact_impedance;
  if (!(z_ > 0.0)) throw std::invalid_argument("CemSolver: contact impedance must be positive");

  using T = Eigen::Triplet<double>;
  std::vector<T> trip;
  trip.reserve(std::size_t(mesh.n_tris()) * 9 + std::size_t(n_) + 64);

  for (int t = 0; t < mesh.n_tris(); ++t) {
    const auto& tr = mesh.tris[std::size_t(t)];
    const int rid = mesh.region[std::size_t(t)];
    if (rid < 0 || rid >= int(sigma_of_region.size()))
      throw std::invalid_argument("CemSolver: region id outside sigma table");
    const double sigma = sigma_of_region[std::size_t(rid)];
    if (!(sigma > 0.0)) throw std::invalid_argument("CemSolver: nonpositive conductivity");
    const Eigen::Vector2d p0 = mesh.nodes[std::size_t(tr[0])], p1 = mesh.nodes[std::size_t(tr[1])],
                          p2 = mesh.nodes[std::size_t(tr[2])];
    const double area = 0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) -
                               (p2.x() - p0.x()) * (p1.y() - p0.y()));
    if (area <= 0.0) throw std::runtime_error("CemSolver: inverted triangle");
    const double bx[3] = {p1.y() - p2.y(), p2.y() - p0.y(), p0.y() - p1.y()};
    const double by[3] = {p2.x() - p1.x(), p0.x() - p2.x(), p1.x() - p0.x()};
    for (int i = 0; i < 3; ++i)
      for (int jn = 0; jn < 3; ++jn)
        trip.emplace_back(tr[std::size_t(i)], tr[std::size_t(jn)],
                          sigma * (bx[i] * bx[jn] + by[i] * by[jn]) / (4.0 * area));
  }

  edges_.assign(std::size_t(M_), {});
  electrode_len_.assign(std::size_t(M_), 0.0);
  for (int m = 0; m < M_; ++m) {
    for (const auto& e : mesh.electrode_edges[std::size_t(m)]) {
      const int i = e[0], jn = e[1];
      const double len = (mesh.nodes[std::size_t(i)] - mesh.nodes[std::size_t(jn)]).norm();
      edges_[std::size_t(m)].push_back({double(i), double(jn), len});
      electrode_len_[std::size_t(m)] += len;
      // (1/z) int_e psi_i psi_j ds
      trip.emplace_back(i, i, len / (3.0 * z_));
      trip.emplace_back(jn, jn, len / (3.0 * z_));
      trip.emplace_back(i, jn, len / (6.0 * z_));
      trip.emplace_back(jn, i, len / (6.0 * z_));
      // -(1/z) int_e psi_i ds coupling to U_m
      trip.emplace_back(i, n_ + m, -len / (2.0 * z_));
      trip.emplace_back(jn, n_ + m, -len / (2.0 * z_));
      trip.emplace_back(n_ + m, i, -len / (2.0 * z_));
      trip.emplace_back(n_ + m, jn, -len / (2.0 * z_));
    }
    trip.emplace_back(n_ + m, n_ + m, electrode_len_[std::size_t(m)] / z_);
    // ground constraint multiplier
    trip.emplace_back(n_ + m, n_ + M_, 1.0);
    trip.emplace_back(n_ + M_, n_ + m, 1.0);
  }

  A_.resize(n_ + M_ + 1, n_ + M_ + 1);
  A_.setFromTriplets(trip.begin(), trip.end());
  A_.makeCompressed();
  lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  lu_->compute(A_);
  if (lu_->info() != Eigen::Success)
    throw std::runtime_error("CemSolver: factorization failed (singular CEM system)");
}

Eigen::VectorXd CemSolver::solve(const Eigen::VectorXd& I, Eigen::VectorXd* interior) const {
  if (I.size() != M_) throw std::invalid_argument("CemSolver::solve: current vector size");
  if (std::abs(I.sum()) > 1e-10 * (1.0 + I.lpNorm<Eigen::Infinity>()))
    throw std::invalid_argument("CemSolver::solve: currents must sum to zero");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_ + M_ + 1);
  rhs.segment(n_, M_) = I;
  Eigen::VectorXd x = lu_->solve(rhs);
  if (lu_->info() != Eigen::Success) throw std::runtime_error("CemSolver::solve: solve failed");
  if (interior) *interior = x.head(n_);
  return x.segment(n_, M_);
}

Eigen::VectorXd CemSolver::recovered_currents(const Eigen::VectorXd& interior,
                                              const Eigen::VectorXd& U) const {
  Eigen::VectorXd I = Eigen::VectorXd::Zero(M_);
  for (int m = 0; m < M_; ++m) {
    double acc = electrode_len_[std::size_t(m)] * U[m];
    for (const auto& e : edges_[std::size_t(m)])
      acc -= 0.5 * e[2] * (interior[int(e[0])] + interior[int(e[1])]);
    I[m] = acc / z_;
  }
  return I;
}

VoltageSet pack_voltages(const Eigen::MatrixXd& U) {
  VoltageSet vs;
  vs.M = int(U.rows());
  vs.U = U;
  vs.stacked = Eigen::Map<const Eigen::VectorXd>(U.data(), U.size());
  return vs;
}

std::pair<VoltageSet, VoltageSet> simulate_measurements(const HeadPhantom& phantom,
                                                        const ConformalMap& map,
                                                        const ElectrodeLayout& layout,
                                                        const CurrentPatternSet& patterns,
                                                        double target_h,
                                                        double contact_impedance) {
  const Mesh mesh = build_mesh(phantom, map, layout, target_h);
  std::vector<double> sigma(static_cast<std::size_t>(phantom.n_regions()));
  for (int r = 0; r < phantom.n_regions(); ++r)
    sigma[std::size_t(r)] = phantom.conductivity_of_region(r);
  const std::vector<double> ones(std::size_t(phantom.n_regions()), 1.0);

  CemSolver solver_sigma(mesh, sigma, contact_impedance);
  CemSolver solver_ref(mesh, ones, contact_impedance);

  const int M = patterns.M;
  Eigen::MatrixXd Us(M, M - 1), Ur(M, M - 1);
  for (int k = 0; k < M - 1; ++k) {
    Us.col(k) = solver_sigma.solve(patterns.I.col(k));
    Ur.col(k) = solver_ref.solve(patterns.I.col(k));
  }
  return {pack_voltages(Us), pack_voltages(Ur)};
}

Eigen::VectorXd add_noise(const Eigen::VectorXd& V, double delta, std::uint64_t seed) {
  if (delta < 0.0) throw std::invalid_argument("add_noise: delta must be >= 0");
  if (delta == 0.0) return V;
  const double vnorm = V.norm();
  if (vnorm == 0.0) throw std::invalid_argument("add_noise: zero signal with positive delta");
  Rng rng(Rng::derive(seed, 0x4015E));
  Eigen::VectorXd e(V.size());
  for (int i = 0; i < e.size(); ++i) e[i] = rng.normal();
  const double enorm = e.norm();
  if (enorm == 0.0) throw std::runtime_error("add_noise: degenerate noise draw");
  return V + e * (delta * vnorm / enorm);
}

} // namespace eit
