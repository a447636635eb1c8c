#include "eit/mimic.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "eit/fft.hpp"
#include "eit/trig.hpp"

namespace eit {

namespace {

// One spectral evaluation of R1 at a given quadrature resolution.
Eigen::MatrixXd spectral_r1(const ConformalMap& map, int M, int nq) {
  const int K = M - 1;
  const double L = map.length;
  TrigBasis basis(K, L);

  // pulled-back Neumann data: phi_k(s(theta)) |Psi'(theta)| on the theta grid
  Eigen::MatrixXd Phit(nq, K);
  std::vector<double> s_of(static_cast<std::size_t>(nq)), w_of(static_cast<std::size_t>(nq));
  for (int i = 0; i < nq; ++i) {
    const double th = 2.0 * M_PI * i / nq;
    s_of[std::size_t(i)] = map.arc_of_angle(th);
    w_of[std::size_t(i)] = map.dpsi_abs(th);
  }
  for (int i = 0; i < nq; ++i)
    for (int k = 1; k <= K; ++k)
      Phit(i, k - 1) = basis.eval(k, s_of[std::size_t(i)]) * w_of[std::size_t(i)];

  // disc Neumann solve per column: Fourier multiplier 1/|m|
  Eigen::MatrixXd Ut(nq, K);
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(nq));
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < nq; ++i) buf[std::size_t(i)] = Phit(i, k);
    fft_inplace(buf, -1);
    buf[0] = 0.0;
    for (int m = 1; m <= nq / 2; ++m) {
      buf[std::size_t(m)] /= double(m);
      if (m < nq / 2) buf[std::size_t(nq - m)] /= double(m);
    }
    fft_inplace(buf, +1);
    for (int i = 0; i < nq; ++i) Ut(i, k) = buf[std::size_t(i)].real() / double(nq);
  }

  return (2.0 * M_PI / nq) * (Phit.transpose() * Ut);
}

} // namespace

NDMatrix reference_nd_matrix(const ConformalMap& map, int M, int quad_nodes) {
  if (quad_nodes < 4 * (M - 1) || (quad_nodes & (quad_nodes - 1)) != 0)
    throw std::invalid_argument("reference_nd_matrix: quad_nodes must be a power of two >= 4(M-1)");
  Eigen::MatrixXd coarse = spectral_r1(map, M, quad_nodes);
  Eigen::MatrixXd fine = spectral_r1(map, M, 2 * quad_nodes);
  const double conv = (coarse - fine).lpNorm<Eigen::Infinity>();
  if (conv > 1e-6)
    throw std::runtime_error("reference_nd_matrix: quadrature not converged, entrywise delta " +
                             std::to_string(conv));
  NDMatrix nd;
  nd.R1 = fine;
  nd.provenance = NDMatrix::Provenance::spectral_conformal;
  nd.resolution = 2 * quad_nodes;
  nd.conv_error = conv;
  nd.sym_error = (fine - fine.transpose()).norm() / fine.norm();
  return nd;
}

NDMatrix reference_nd_matrix_fem(const ConformalMap& map, int M, double target_h) {
  const int K = M - 1;
  const double L = map.length;
  TrigBasis basis(K, L);
  HeadPhantom homog = bare_phantom(map.ax, map.by, {});
  const ElectrodeLayout layout = electrode_midpoints(map, M);
  const Mesh mesh = build_mesh(homog, map, layout, target_h);
  const int n = mesh.n_nodes();

  using T = Eigen::Triplet<double>;
  std::vector<T> trip;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const auto& tr = mesh.tris[std::size_t(t)];
    const Eigen::Vector2d p0 = mesh.nodes[std::size_t(tr[0])], p1 = mesh.nodes[std::size_t(tr[1])],
                          p2 = mesh.nodes[std::size_t(tr[2])];
    const double area = 0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) -
                               (p2.x() - p0.x()) * (p1.y() - p0.y()));
    const double bx[3] = {p1.y() - p2.y(), p2.y() - p0.y(), p0.y() - p1.y()};
    const double by[3] = {p2.x() - p1.x(), p0.x() - p2.x(), p1.x() - p0.x()};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(tr[std::size_t(i)], tr[std::size_t(j)],
                          (bx[i] * bx[j] + by[i] * by[j]) / (4.0 * area));
  }
  // border with the boundary mass vector: mean-on-boundary constraint
  const int nb = int(mesh.boundary_loop.size());
  std::vector<double> edge_len(static_cast<std::size_t>(nb));
  for (int i = 0; i < nb; ++i) {
    const int a = mesh.boundary_loop[std::size_t(i)], b = mesh.boundary_loop[std::size_t((i + 1) % nb)];
    edge_len[std::size_t(i)] = (mesh.nodes[std::size_t(a)] - mesh.nodes[std::size_t(b)]).norm();
  }
  for (int i = 0; i < nb; ++i) {
    const int a = mesh.boundary_loop[std::size_t(i)], b = mesh.boundary_loop[std::size_t((i + 1) % nb)];
    trip.emplace_back(a, n, 0.5 * edge_len[std::size_t(i)]);
    trip.emplace_back(n, a, 0.5 * edge_len[std::size_t(i)]);
    trip.emplace_back(b, n, 0.5 * edge_len[std::size_t(i)]);
    trip.emplace_back(n, b, 0.5 * edge_len[std::size_t(i)]);
  }
  Eigen::SparseMatrix<double> A(n + 1, n + 1);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("reference_nd_matrix_fem: factorization failed");

  // 2-point Gauss on each boundary edge, in the arc coordinate
  const double g1 = 0.5 - std::sqrt(3.0) / 6.0, g2 = 0.5 + std::sqrt(3.0) / 6.0;
  auto edge_s = [&](int i, double t) {
    double s0 = mesh.boundary_s[std::size_t(i)], s1 = mesh.boundary_s[std::size_t((i + 1) % nb)];
    if (s1 < s0) s1 += L;
    return s0 + t * (s1 - s0);
  };

  Eigen::MatrixXd R(K, K);
  Eigen::MatrixXd traces(nb, K); // u_k at boundary nodes
  for (int k = 1; k <= K; ++k) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    for (int i = 0; i < nb; ++i) {
      const int a = mesh.boundary_loop[std::size_t(i)], b = mesh.boundary_loop[std::size_t((i + 1) % nb)];
      const double len = edge_len[std::size_t(i)];
      const double f1 = basis.eval(k, edge_s(i, g1)), f2 = basis.eval(k, edge_s(i, g2));
      rhs[a] += 0.5 * len * (f1 * (1.0 - g1) + f2 * (1.0 - g2));
      rhs[b] += 0.5 * len * (f1 * g1 + f2 * g2);
    }
    const Eigen::VectorXd u = lu.solve(rhs);
    for (int i = 0; i < nb; ++i) traces(i, k - 1) = u[mesh.boundary_loop[std::size_t(i)]];
  }
  for (int j = 1; j <= K; ++j)
    for (int k = 1; k <= K; ++k) {
      double acc = 0.0;
      for (int i = 0; i < nb; ++i) {
        const double len = edge_len[std::size_t(i)];
        const double ua = traces(i, k - 1), ub = traces((i + 1) % nb, k - 1);
        const double f1 = basis.eval(j, edge_s(i, g1)), f2 = basis.eval(j, edge_s(i, g2));
        acc += 0.5 * len *
               (f1 * (ua * (1.0 - g1) + ub * g1) + f2 * (ua * (1.0 - g2) + ub * g2));
      }
      R(j - 1, k - 1) = acc;
    }

  NDMatrix nd;
  nd.R1 = R;
  nd.provenance = NDMatrix::Provenance::fem;
  nd.resolution = n;
  nd.sym_error = (R - R.transpose()).norm() / R.norm();
  return nd;
}

Eigen::MatrixXd relative_nd_matrix(const Eigen::MatrixXd& U, const CurrentPatternSet& patterns) {
  if (U.rows() != patterns.M || U.cols() != patterns.M - 1)
    throw std::invalid_argument("relative_nd_matrix: dimension mismatch");
  return U.transpose() * patterns.I;
}

DNMatrix dn_matrix(const Eigen::MatrixXd& relative, const NDMatrix& R1) {
  if (relative.rows() != R1.R1.rows() || relative.cols() != R1.R1.cols())
    throw std::invalid_argument("dn_matrix: dimension mismatch");
  const Eigen::MatrixXd sum = relative + R1.R1;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sum);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  const double cond = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(cond < 1e12))
    throw std::runtime_error("dn_matrix: ill-conditioned U^T I + R1, cond estimate " +
                             std::to_string(cond));
  const int K = int(sum.rows());
  const Eigen::MatrixXd Lt = sum.partialPivLu().solve(Eigen::MatrixXd::Identity(K, K));
  DNMatrix dn;
  dn.L = Eigen::MatrixXd::Zero(K + 1, K + 1);
  dn.L.bottomRightCorner(K, K) = Lt;
  dn.cond = cond;
  dn.asym = (Lt - Lt.transpose()).norm() / Lt.norm();
  return dn;
}

} // namespace eit
