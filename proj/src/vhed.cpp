#include "eit/vhed.hpp"

#include <cmath>
#include <stdexcept>

namespace eit {

WindowSpec WindowSpec::defaults(double tau_max, int n_t, double t_lo, double t_hi) {
  WindowSpec w;
  w.tau_max = tau_max;
  w.a = std::log(100.0) / (tau_max * tau_max);
  w.t.resize(n_t);
  for (int i = 0; i < n_t; ++i) w.t[i] = t_lo + (t_hi - t_lo) * i / (n_t - 1);
  return w;
}

namespace {

Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& tau) {
  const int n = int(tau.size());
  Eigen::VectorXd w(n);
  for (int q = 0; q < n; ++q) {
    const double lo = (q == 0) ? tau[0] : tau[q - 1];
    const double hi = (q == n - 1) ? tau[n - 1] : tau[q + 1];
    w[q] = 0.5 * (hi - lo);
  }
  return w;
}

} // namespace

WindowedTraces windowed_fourier(const CGOTraces& traces, const WindowSpec& spec) {
  const int nt = int(spec.t.size());
  const int nq = traces.grid.n_tau();
  const int na = traces.grid.n_angles();
  if (nq < 2 || traces.grid.tau[0] > -spec.tau_max + 1e-12 ||
      traces.grid.tau[nq - 1] < spec.tau_max - 1e-12)
    throw std::invalid_argument("windowed_fourier: traces do not cover [-tau_max, tau_max]");

  Eigen::MatrixXcd F(nq, nt);
  const Eigen::VectorXd wq = trapezoid_weights(traces.grid.tau);
  for (int q = 0; q < nq; ++q) {
    const double tau = traces.grid.tau[q];
    const double amp = wq[q] * spec.window(tau);
    for (int i = 0; i < nt; ++i) {
      const double ph = -tau * spec.t[i];
      F(q, i) = amp * cdouble(std::cos(ph), std::sin(ph));
    }
  }

  WindowedTraces out;
  out.spec = spec;
  out.s = traces.s;
  for (int sgn = 0; sgn < 2; ++sgn) {
    out.breve[std::size_t(sgn)].reserve(std::size_t(na));
    for (int a = 0; a < na; ++a)
      out.breve[std::size_t(sgn)].push_back(traces.omega[std::size_t(sgn)][std::size_t(a)] * F);
  }
  return out;
}

Eigen::MatrixXcd contour_average(const WindowedTraces& breve, int sign,
                                 const BoundaryParametrization& boundary) {
  const auto& blocks = breve.breve[std::size_t(sign)];
  const int na = int(blocks.size());
  if (na == 0) throw std::invalid_argument("contour_average: empty traces");
  const int Nb = int(boundary.s.size());
  if (blocks[0].rows() != Nb || (breve.s - boundary.s).lpNorm<Eigen::Infinity>() > 1e-9)
    throw std::invalid_argument("contour_average: boundary grid mismatch");
  const int nt = int(blocks[0].cols());
  const double ds = boundary.length / Nb;
  Eigen::RowVectorXcd dz(Nb);
  for (int j = 0; j < Nb; ++j) dz[j] = boundary.tangent[std::size_t(j)] * ds;
  const cdouble scale = 1.0 / cdouble(0.0, 2.0 * M_PI);
  Eigen::MatrixXcd T(na, nt);
  for (int a = 0; a < na; ++a) T.row(a) = scale * (dz * blocks[std::size_t(a)]);
  return T;
}

Eigen::MatrixXcd odd_part(const Eigen::MatrixXcd& Tplus, const Eigen::MatrixXcd& Tminus) {
  if (Tplus.rows() != Tminus.rows() || Tplus.cols() != Tminus.cols())
    throw std::invalid_argument("odd_part: grid mismatch");
  return 0.5 * (Tplus - Tminus);
}

VHEDProfile vhed_profile(const CGOTraces& traces, const WindowSpec& spec,
                         const BoundaryParametrization& boundary) {
  const WindowedTraces breve = windowed_fourier(traces, spec);
  VHEDProfile p;
  p.angles = traces.grid.angles;
  p.spec = spec;
  p.Tplus = contour_average(breve, 0, boundary);
  p.Tminus = contour_average(breve, 1, boundary);
  p.Todd = odd_part(p.Tplus, p.Tminus);
  if (!p.Todd.allFinite()) throw std::runtime_error("vhed_profile: non-finite profile");
  return p;
}

Eigen::VectorXd vhed_feature_vector(const VHEDProfile& profile) {
  const int na = int(profile.Todd.rows()), nt = int(profile.Todd.cols());
  if (na == 0 || nt == 0) throw std::invalid_argument("vhed_feature_vector: incomplete profile");
  Eigen::VectorXd v(2 * na * nt);
  for (int a = 0; a < na; ++a) {
    v.segment(2 * a * nt, nt) = profile.Todd.row(a).real();
    v.segment((2 * a + 1) * nt, nt) = profile.Todd.row(a).imag();
  }
  return v;
}

Eigen::MatrixXcd unflatten_features(const Eigen::VectorXd& v, int n_angles, int n_t) {
  if (v.size() != 2 * Eigen::Index(n_angles) * n_t)
    throw std::invalid_argument("unflatten_features: size mismatch");
  Eigen::MatrixXcd T(n_angles, n_t);
  for (int a = 0; a < n_angles; ++a)
    for (int i = 0; i < n_t; ++i)
      T(a, i) = cdouble(v[2 * a * n_t + i], v[(2 * a + 1) * n_t + i]);
  return T;
}

cdouble evaluate_T(const CGOTraces& traces, const BoundaryParametrization& boundary, int sign,
                   int angle_index, double window_a, double t) {
  const auto& omega = traces.omega[std::size_t(sign)][std::size_t(angle_index)];
  const int Nb = int(omega.rows()), nq = int(omega.cols());
  const Eigen::VectorXd wq = trapezoid_weights(traces.grid.tau);
  const double ds = boundary.length / Nb;
  cdouble acc(0.0, 0.0);
  for (int q = 0; q < nq; ++q) {
    const double tau = traces.grid.tau[q];
    const double ph = -tau * t;
    const cdouble f = wq[q] * std::exp(-window_a * tau * tau) * cdouble(std::cos(ph), std::sin(ph));
    cdouble contour(0.0, 0.0);
    for (int j = 0; j < Nb; ++j) contour += omega(j, q) * boundary.tangent[std::size_t(j)] * ds;
    acc += f * contour;
  }
  return acc / cdouble(0.0, 2.0 * M_PI);
}

} // namespace eit
