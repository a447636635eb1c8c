#include "eit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "eit/fft.hpp"

namespace eit {

cdouble ConformalMap::map(cdouble z) const {
  // Horner in z^2 for sum_j c_j z^{2j+1}
  cdouble z2 = z * z, acc(0.0, 0.0);
  for (int j = int(coeff.size()) - 1; j >= 0; --j) acc = acc * z2 + coeff[j];
  return acc * z;
}

cdouble ConformalMap::dmap(cdouble z) const {
  cdouble z2 = z * z, acc(0.0, 0.0);
  for (int j = int(coeff.size()) - 1; j >= 0; --j)
    acc = acc * z2 + double(2 * j + 1) * coeff[j];
  return acc;
}

double ConformalMap::dpsi_abs(double theta) const {
  const int N = table_n;
  cdouble acc = dpsi_fourier[0];
  for (int k = 1; k < N / 2; ++k) {
    const cdouble e(std::cos(k * theta), std::sin(k * theta));
    acc += dpsi_fourier[std::size_t(k)] * e + dpsi_fourier[std::size_t(N - k)] * std::conj(e);
  }
  return acc.real();
}

double ConformalMap::arc_of_angle(double theta) const {
  const int N = table_n;
  const double f0 = dpsi_fourier[0].real();
  double wraps = std::floor(theta / (2.0 * M_PI));
  double th = theta - wraps * 2.0 * M_PI;
  cdouble acc(0.0, 0.0);
  for (int k = 1; k < N / 2; ++k) {
    const cdouble e(std::cos(k * th), std::sin(k * th));
    const cdouble ik(0.0, double(k));
    acc += dpsi_fourier[std::size_t(k)] * (e - 1.0) / ik -
           dpsi_fourier[std::size_t(N - k)] * (std::conj(e) - 1.0) / ik;
  }
  return f0 * th + acc.real() + wraps * length;
}

double ConformalMap::angle_of_arc(double s) const {
  const double L = length;
  double wraps = std::floor(s / L);
  double sw = s - wraps * L;
  // initial guess from the table (s_table ascending over [0, L))
  const int N = table_n;
  int lo = int(std::upper_bound(s_table.data(), s_table.data() + N, sw) - s_table.data()) - 1;
  lo = std::clamp(lo, 0, N - 1);
  const double s_lo = s_table[lo];
  const double s_hi = (lo + 1 < N) ? s_table[lo + 1] : L;
  double theta = (2.0 * M_PI / N) * (lo + (sw - s_lo) / std::max(s_hi - s_lo, 1e-300));
  for (int it = 0; it < 50; ++it) {
    const double r = arc_of_angle(theta) - sw;
    const double d = dpsi_abs(theta);
    const double step = r / d;
    theta -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return theta + wraps * 2.0 * M_PI;
}

cdouble ConformalMap::boundary_point(double s) const {
  const double theta = angle_of_arc(s);
  return map(cdouble(std::cos(theta), std::sin(theta)));
}

cdouble ConformalMap::boundary_tangent(double s) const {
  const double theta = angle_of_arc(s);
  const cdouble x(std::cos(theta), std::sin(theta));
  const cdouble d = dmap(x) * cdouble(0.0, 1.0) * x;
  return d / std::abs(d);
}

double ConformalMap::boundary_radius(double phi) const {
  // polar angle of the boundary image is monotone in theta and the map
  // preserves quadrant-symmetric angles {0, pi/2, pi, 3 pi/2}; bisect.
  double p = std::atan2(std::sin(phi), std::cos(phi)); // wrap to (-pi, pi]
  auto polar = [&](double theta) {
    const cdouble w = map(cdouble(std::cos(theta), std::sin(theta)));
    return std::atan2(w.imag(), w.real());
  };
  // bracket in theta within one quadrant containing phi
  const double q = std::floor((p + M_PI) / (M_PI / 2.0)); // 0..3 for (-pi,pi]
  double t_lo = -M_PI + q * M_PI / 2.0;
  double t_hi = t_lo + M_PI / 2.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (t_lo + t_hi);
    double pm = polar(mid);
    // unwrap relative to bracket (quadrant is angle-monotone, no wrap inside
    // except at the (-pi, pi] seam which coincides with a bracket endpoint)
    if (pm < t_lo - 1e-9) pm += 2.0 * M_PI;
    if (pm < p)
      t_lo = mid;
    else
      t_hi = mid;
  }
  return std::abs(map(cdouble(std::cos(0.5 * (t_lo + t_hi)), std::sin(0.5 * (t_lo + t_hi)))));
}

ConformalMap disc_to_ellipse_map(double ax, double by, int truncation_order, int table_n) {
  if (!(ax > 0.0) || !(by > 0.0))
    throw std::invalid_argument("disc_to_ellipse_map: semi-axes must be positive");
  if (truncation_order < 8)
    throw std::invalid_argument("disc_to_ellipse_map: truncation_order must be >= 8");
  if (table_n < 4 || (table_n & (table_n - 1)) != 0)
    throw std::invalid_argument("disc_to_ellipse_map: table_n must be a power of two");

  const int p = truncation_order;
  const int n_fit = std::max(8 * p, 512);

  ConformalMap cm;
  cm.ax = ax;
  cm.by = by;
  cm.coeff = Eigen::VectorXd::Zero(p);
  cm.coeff[0] = 0.5 * (ax + by);

  Eigen::VectorXd ct(n_fit), st(n_fit);
  Eigen::MatrixXd C(n_fit, p), S(n_fit, p);
  for (int i = 0; i < n_fit; ++i) {
    const double th = 2.0 * M_PI * i / n_fit;
    ct[i] = std::cos(th);
    st[i] = std::sin(th);
    for (int j = 0; j < p; ++j) {
      C(i, j) = std::cos((2 * j + 1) * th);
      S(i, j) = std::sin((2 * j + 1) * th);
    }
  }

  auto residual = [&](const Eigen::VectorXd& c, Eigen::VectorXd& r, Eigen::VectorXd& x,
                      Eigen::VectorXd& y) {
    x = C * c;
    y = S * c;
    r = (x.array() / ax).square() + (y.array() / by).square() - 1.0;
  };

  Eigen::VectorXd r, x, y;
  residual(cm.coeff, r, x, y);
  double rnorm = r.norm();
  for (int it = 0; it < 100; ++it) {
    Eigen::MatrixXd J(n_fit, p);
    for (int j = 0; j < p; ++j)
      J.col(j) = 2.0 * (x.array() * C.col(j).array() / (ax * ax) +
                        y.array() * S.col(j).array() / (by * by));
    Eigen::VectorXd step = J.colPivHouseholderQr().solve(-r);
    double t = 1.0;
    Eigen::VectorXd c_new, r_new, x_new, y_new;
    for (int back = 0; back < 30; ++back) {
      c_new = cm.coeff + t * step;
      residual(c_new, r_new, x_new, y_new);
      if (r_new.norm() < rnorm) break;
      t *= 0.5;
    }
    if (r_new.norm() >= rnorm) break; // stalled; keep the best iterate
    cm.coeff = c_new;
    r = r_new;
    x = x_new;
    y = y_new;
    const double prev = rnorm;
    rnorm = r.norm();
    if (r.lpNorm<Eigen::Infinity>() < 1e-14) break;
    if (std::abs(prev - rnorm) < 1e-16 * (1.0 + prev)) break;
  }
  cm.fit_residual = r.lpNorm<Eigen::Infinity>();
  // boundary deviation ~ fit residual / 2 in units of the semi-minor axis
  if (cm.fit_residual > 2e-6 * std::min(ax, by) / std::max(ax, by)) {
    std::ostringstream msg;
    msg << "disc_to_ellipse_map: series fit did not converge, residual "
        << cm.fit_residual << " (truncation_order " << p << ")";
    throw std::runtime_error(msg.str());
  }
  if (cm.coeff[0] <= 0.0)
    throw std::runtime_error("disc_to_ellipse_map: normalization Psi'(0) > 0 lost");

  // boundary tables
  cm.table_n = table_n;
  std::vector<double> dpsi(static_cast<std::size_t>(table_n));
  cm.dpsi_table.resize(table_n);
  for (int i = 0; i < table_n; ++i) {
    const double th = 2.0 * M_PI * i / table_n;
    const double v = std::abs(cm.dmap(cdouble(std::cos(th), std::sin(th))));
    dpsi[std::size_t(i)] = v;
    cm.dpsi_table[i] = v;
    if (!(v > 0.0))
      throw std::runtime_error("disc_to_ellipse_map: |Psi'| vanished on the boundary");
  }
  cm.dpsi_fourier = dft_coefficients(dpsi);
  cm.length = 2.0 * M_PI * cm.dpsi_fourier[0].real();
  cm.s_table.resize(table_n);
  for (int i = 0; i < table_n; ++i) cm.s_table[i] = cm.arc_of_angle(2.0 * M_PI * i / table_n);
  for (int i = 1; i < table_n; ++i)
    if (!(cm.s_table[i] > cm.s_table[i - 1]))
      throw std::runtime_error("disc_to_ellipse_map: boundary correspondence not increasing");
  return cm;
}

ElectrodeLayout electrode_midpoints(const ConformalMap& map, int M) {
  if (M < 3 || M % 2 == 0)
    throw std::invalid_argument("electrode_midpoints: M must be odd and >= 3");
  ElectrodeLayout lay;
  lay.M = M;
  lay.theta.resize(M);
  lay.s.resize(M);
  lay.w.resize(M);
  lay.y.resize(std::size_t(M));
  for (int m = 1; m <= M; ++m) {
    const double th = 2.0 * M_PI * m / M;
    lay.theta[m - 1] = th;
    lay.s[m - 1] = map.arc_of_angle(th);
    lay.w[m - 1] = map.dpsi_abs(th);
    lay.y[std::size_t(m - 1)] = map.map(cdouble(std::cos(th), std::sin(th)));
  }
  return lay;
}

BoundaryParametrization arc_parametrization(const ConformalMap& map, int nodes) {
  if (nodes < 256)
    throw std::invalid_argument("arc_parametrization: need at least 256 nodes");
  BoundaryParametrization bp;
  bp.length = map.length;
  bp.ax = map.ax;
  bp.by = map.by;
  bp.s.resize(nodes);
  bp.point.resize(std::size_t(nodes));
  bp.tangent.resize(std::size_t(nodes));
  for (int j = 0; j < nodes; ++j) {
    const double s = map.length * j / nodes;
    const double theta = map.angle_of_arc(s);
    const cdouble x(std::cos(theta), std::sin(theta));
    const cdouble d = map.dmap(x) * cdouble(0.0, 1.0) * x;
    bp.s[j] = s;
    bp.point[std::size_t(j)] = map.map(x);
    bp.tangent[std::size_t(j)] = d / std::abs(d);
  }
  return bp;
}

} // namespace eit
