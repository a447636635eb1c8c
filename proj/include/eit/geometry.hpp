#pragma once
#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace eit {

using cdouble = std::complex<double>;

// Conformal map Psi from the unit disc onto the elliptic helmet domain
// with semi-axes (ax, by), normalized by Psi(0) = 0, Psi'(0) > 0.
// Psi(z) = sum_j c_{2j+1} z^{2j+1} with real coefficients (the ellipse
// symmetries force odd powers and real c), fitted so the boundary image
// lies on the ellipse. Everything downstream treats the fitted curve
// Gamma = Psi(unit circle) as *the* boundary; all boundary tables
// (arc length, |Psi'|, tangents) are derived from it consistently.
struct ConformalMap {
  double ax = 1.0, by = 1.0;        // semi-axes
  Eigen::VectorXd coeff;            // c_{2j+1}, j = 0..p-1
  double fit_residual = 0.0;        // max |x^2/a^2 + y^2/b^2 - 1| on the fit grid

  int table_n = 0;                  // boundary tabulation nodes (power of two)
  Eigen::VectorXd s_table;          // s(theta_i), theta_i = 2 pi i / table_n
  Eigen::VectorXd dpsi_table;       // |Psi'(e^{i theta_i})|
  std::vector<cdouble> dpsi_fourier; // DFT coefficients of |Psi'(e^{i theta})|
  double length = 0.0;              // total arc length L

  cdouble map(cdouble z) const;     // Psi(z)
  cdouble dmap(cdouble z) const;    // Psi'(z)

  double dpsi_abs(double theta) const;    // |Psi'(e^{i theta})|, spectral
  double arc_of_angle(double theta) const; // s(theta); s(theta + 2 pi) = s(theta) + L
  double angle_of_arc(double s) const;     // inverse correspondence

  cdouble boundary_point(double s) const;   // gamma(s)
  cdouble boundary_tangent(double s) const; // gamma'(s), unit modulus

  // Radius of the boundary curve along the polar direction phi
  // (the curve is star-shaped about the origin). Table-interpolated;
  // intended for mesh construction, not for spectral work.
  double boundary_radius(double phi) const;
};

ConformalMap disc_to_ellipse_map(double ax, double by, int truncation_order,
                                 int table_n = 1024);

// Electrode midpoints: theta_m = 2 pi m / M, y_m = Psi(e^{i theta_m}),
// s_m the matching arc coordinate, w_m = |Psi'(e^{i theta_m})|.
struct ElectrodeLayout {
  int M = 0;
  Eigen::VectorXd theta; // disc angles, ascending
  Eigen::VectorXd s;     // arc coordinates in (0, L]
  Eigen::VectorXd w;     // |Psi'| weights
  std::vector<cdouble> y; // boundary points
};

ElectrodeLayout electrode_midpoints(const ConformalMap& map, int M);

// Arc length parametrization sampled on equispaced nodes s_j = j L / N.
struct BoundaryParametrization {
  double length = 0.0;
  double ax = 1.0, by = 1.0; // semi-axes of the enclosing ellipse
  Eigen::VectorXd s;
  std::vector<cdouble> point;   // gamma(s_j)
  std::vector<cdouble> tangent; // gamma'(s_j)
};

BoundaryParametrization arc_parametrization(const ConformalMap& map, int nodes);

} // namespace eit
