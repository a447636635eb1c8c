#pragma once
#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "eit/cgo.hpp"
#include "eit/geometry.hpp"

namespace eit {

// Gaussian frequency window W_a(tau) = exp(-a tau^2) and the pseudo-time
// grid. Default sharpness puts W_a(tau_max) = 1e-2.
struct WindowSpec {
  double tau_max = 5.0;
  double a = std::log(100.0) / 25.0;
  Eigen::VectorXd t;

  static WindowSpec defaults(double tau_max = 5.0, int n_t = 256, double t_lo = -3.0,
                             double t_hi = 3.0);
  double window(double tau) const { return std::exp(-a * tau * tau); }
  double fwhm() const { return 4.0 * std::sqrt(a * std::log(2.0)); }
};

struct WindowedTraces {
  WindowSpec spec;
  Eigen::VectorXd s;
  // breve[sign][angle]: (n_nodes x n_t)
  std::array<std::vector<Eigen::MatrixXcd>, 2> breve;
};

// Trapezoidal quadrature of int W_a(tau) e^{-i tau t} omega(z, tau e^{i phi}) dtau.
WindowedTraces windowed_fourier(const CGOTraces& traces, const WindowSpec& spec);

// (1/2 pi i) closed-contour integral of the windowed traces; one row per angle.
Eigen::MatrixXcd contour_average(const WindowedTraces& breve, int sign,
                                 const BoundaryParametrization& boundary);

Eigen::MatrixXcd odd_part(const Eigen::MatrixXcd& Tplus, const Eigen::MatrixXcd& Tminus);

struct VHEDProfile {
  std::vector<double> angles;
  WindowSpec spec;
  Eigen::MatrixXcd Tplus, Tminus, Todd; // (n_angles x n_t)
  double delta = 0.0;
  std::string sample_id;
};

VHEDProfile vhed_profile(const CGOTraces& traces, const WindowSpec& spec,
                         const BoundaryParametrization& boundary);

// Per angle: 256 real parts then 256 imaginary parts of T_odd, angles
// concatenated in grid order; length n_angles * 2 * n_t (3072 by default).
Eigen::VectorXd vhed_feature_vector(const VHEDProfile& profile);
Eigen::MatrixXcd unflatten_features(const Eigen::VectorXd& v, int n_angles, int n_t);

// T^{+-} at an arbitrary pseudo-time (not restricted to the grid).
cdouble evaluate_T(const CGOTraces& traces, const BoundaryParametrization& boundary, int sign,
                   int angle_index, double window_a, double t);

} // namespace eit
