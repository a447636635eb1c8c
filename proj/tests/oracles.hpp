// Independent test oracles. Everything here is computed by a different
// route than the library code it checks (quadrature, classical series
// solutions, Born-level closed forms, finite differences).
#pragma once
#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>

namespace oracle {

// Adaptive Simpson quadrature.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 30) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double acc,
          int d) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lmid = 0.5 * (lo + mid), rmid = 0.5 * (mid + hi);
    const double flm = f(lmid), frm = f(rmid);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    if (d <= 0 || std::abs(left + right - acc) < 15.0 * tol) return left + right;
    return rec(lo, mid, flo, flm, fmid, left, d - 1) +
           rec(mid, hi, fmid, frm, fhi, right, d - 1);
  };
  const double mid = 0.5 * (a + b);
  const double fa = f(a), fm = f(mid), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return rec(a, b, fa, fm, fb, whole, depth);
}

inline double ellipse_perimeter(double a, double b) {
  return adaptive_simpson(
      [&](double th) {
        const double s = std::sin(th), c = std::cos(th);
        return std::sqrt(a * a * s * s + b * b * c * c);
      },
      0.0, 2.0 * M_PI, 1e-13);
}

// DN eigenvalues of the unit disc with a concentric inclusion of radius
// rho and conductivity sigma_c in a unit background (classical separation
// of variables): lambda_n = n (1 - mu rho^{2n}) / (1 + mu rho^{2n}),
// mu = (1 - sigma_c) / (1 + sigma_c).
inline double disc_dn_eigenvalue(int n, double rho, double sigma_c) {
  const double mu = (1.0 - sigma_c) / (1.0 + sigma_c);
  const double r2n = std::pow(rho, 2 * n);
  return n * (1.0 - mu * r2n) / (1.0 + mu * r2n);
}

// Exact DN matrix of that radial conductivity in the trig basis
// (diagonal; cos_n and sin_n share the eigenvalue), zero-augmented to
// (K+1) x (K+1) like the mimicked matrix.
inline Eigen::MatrixXd disc_dn_matrix(int M, double rho, double sigma_c) {
  const int K = M - 1;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(K + 1, K + 1);
  for (int n = 1; 2 * n <= K; ++n) {
    const double lam = disc_dn_eigenvalue(n, rho, sigma_c);
    L(2 * n - 1, 2 * n - 1) = lam;
    L(2 * n, 2 * n) = lam;
  }
  return L;
}

// Born-level VHED profile for a concentric disc inclusion on the unit
// disc: the leading scattering term gives
//   T_odd(t, phi) ~ -i mu rho^2 e^{-i phi}
//                   int W_a(tau) tau jinc(2 |tau| rho) e^{-i tau t} dtau
// with jinc(x) = 2 J_1(x) / x. Valid to O(mu^2).
inline std::complex<double> born_todd_disc(double t, double phi, double mu, double rho,
                                           double window_a, double tau_max, int n_quad = 4001) {
  std::complex<double> acc(0.0, 0.0);
  for (int q = 0; q < n_quad; ++q) {
    const double tau = -tau_max + 2.0 * tau_max * q / (n_quad - 1);
    const double wgt = (q == 0 || q == n_quad - 1) ? 0.5 : 1.0;
    const double x = 2.0 * std::abs(tau) * rho;
    const double jinc = (x < 1e-12) ? 1.0 : 2.0 * std::cyl_bessel_j(1, x) / x;
    const double win = std::exp(-window_a * tau * tau);
    acc += wgt * win * tau * jinc *
           std::exp(std::complex<double>(0.0, -tau * t));
  }
  acc *= 2.0 * tau_max / (n_quad - 1);
  return std::complex<double>(0.0, -1.0) * mu * rho * rho *
         std::exp(std::complex<double>(0.0, -phi)) * acc;
}

// Central finite-difference gradient of a scalar function.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, const std::vector<int>& coords,
                                   double h = 1e-6) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (int c : coords) {
    Eigen::VectorXd xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    g[c] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

} // namespace oracle
