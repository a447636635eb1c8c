#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eit/geometry.hpp"
#include "oracles.hpp"

using namespace eit;

TEST_CASE("disc map is the identity") {
  const ConformalMap m = disc_to_ellipse_map(1.0, 1.0, 12);
  CHECK(std::abs(m.map(cdouble(0.0, 0.0))) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(m.coeff[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 1; i < m.coeff.size(); ++i) CHECK(std::abs(m.coeff[i]) < 1e-10);
  for (int i = 0; i < m.table_n; i += 37) {
    CHECK(m.dpsi_table[i] == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(m.length == doctest::Approx(2.0 * M_PI).epsilon(1e-8));
  // boundary correspondence is the identity
  for (double th : {0.3, 1.7, 4.4}) CHECK(m.arc_of_angle(th) == doctest::Approx(th).epsilon(1e-10));
}

TEST_CASE("ellipse map: boundary fit, normalization, length oracle") {
  const double a = 0.85, b = 1.0;
  const ConformalMap m = disc_to_ellipse_map(a, b, 16);
  CHECK(m.fit_residual < 1e-6);
  // boundary image lies on the ellipse
  for (int i = 0; i < 64; ++i) {
    const double th = 2.0 * M_PI * i / 64.0;
    const cdouble w = m.map(cdouble(std::cos(th), std::sin(th)));
    const double r = w.real() * w.real() / (a * a) + w.imag() * w.imag() / (b * b);
    CHECK(std::abs(r - 1.0) < 2e-6);
  }
  // gauge: Psi(0) = 0 and Psi'(0) real positive
  CHECK(std::abs(m.map(cdouble(0.0, 0.0))) < 1e-15);
  CHECK(m.coeff[0] > 0.0);
  // total length against the adaptive-quadrature perimeter oracle
  const double per = oracle::ellipse_perimeter(a, b);
  CHECK(std::abs(m.length - per) / per < 1e-6);
  // s(theta) strictly increasing, wraps by L
  for (int i = 1; i < m.table_n; ++i) CHECK(m.s_table[i] > m.s_table[i - 1]);
  CHECK(m.arc_of_angle(1.0 + 2.0 * M_PI) ==
        doctest::Approx(m.arc_of_angle(1.0) + m.length).epsilon(1e-12));
}

TEST_CASE("independent boundary-correspondence oracle at doubled resolution") {
  // s_m from the tabulated correspondence vs dense trapezoid integration of
  // |Psi'| (a separate route from the Fourier antiderivative)
  const ConformalMap m = disc_to_ellipse_map(0.85, 1.0, 16);
  const int dense = 1 << 16;
  auto s_dense = [&](double theta) {
    // trapezoid from 0 to theta on the dense grid plus a partial cell
    const double step = 2.0 * M_PI / dense;
    const int full = int(theta / step);
    double acc = 0.0;
    double prev = std::abs(m.dmap(cdouble(1.0, 0.0)));
    for (int i = 1; i <= full; ++i) {
      const double th = i * step;
      const double cur = std::abs(m.dmap(cdouble(std::cos(th), std::sin(th))));
      acc += 0.5 * (prev + cur) * step;
      prev = cur;
    }
    const double rest = theta - full * step;
    const double cur = std::abs(m.dmap(cdouble(std::cos(theta), std::sin(theta))));
    acc += 0.5 * (prev + cur) * rest;
    return acc;
  };
  for (double th : {0.5, 2.0, 5.5}) CHECK(m.arc_of_angle(th) == doctest::Approx(s_dense(th)).epsilon(1e-7));
}

TEST_CASE("electrode midpoints") {
  const ConformalMap disc = disc_to_ellipse_map(1.0, 1.0, 12);
  const ElectrodeLayout lay = electrode_midpoints(disc, 65);
  CHECK(lay.M == 65);
  // identity map preserves equal spacing
  for (int mIdx = 1; mIdx < 65; ++mIdx)
    CHECK(lay.s[mIdx] - lay.s[mIdx - 1] == doctest::Approx(2.0 * M_PI / 65.0).epsilon(1e-9));

  const ConformalMap ell = disc_to_ellipse_map(0.85, 1.0, 16);
  const ElectrodeLayout le = electrode_midpoints(ell, 65);
  double min_gap = 1e9, max_gap = 0.0;
  for (int mIdx = 1; mIdx < 65; ++mIdx) {
    const double g = le.s[mIdx] - le.s[mIdx - 1];
    min_gap = std::min(min_gap, g);
    max_gap = std::max(max_gap, g);
  }
  CHECK(max_gap > min_gap * 1.01); // non-uniform arc spacing on the ellipse
  CHECK(le.s[64] == doctest::Approx(ell.length).epsilon(1e-12));

  // M=5: s_m against bisection on the tabulated correspondence
  const ElectrodeLayout l5 = electrode_midpoints(ell, 5);
  for (int mIdx = 0; mIdx < 5; ++mIdx) {
    const double target = l5.theta[mIdx];
    double lo = 0.0, hi = 2.0 * M_PI + 1e-9;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (ell.angle_of_arc(ell.arc_of_angle(mid)) < target ? lo : hi) = mid;
    }
    CHECK(ell.arc_of_angle(0.5 * (lo + hi)) == doctest::Approx(l5.s[mIdx]).epsilon(1e-8));
  }
}

TEST_CASE("gauge invariance under truncation refinement") {
  // midpoints must agree far below the FEM mesh resolution (~1e-2)
  const ElectrodeLayout a = electrode_midpoints(disc_to_ellipse_map(0.85, 1.0, 16), 65);
  const ElectrodeLayout b = electrode_midpoints(disc_to_ellipse_map(0.85, 1.0, 32), 65);
  for (int m = 0; m < 65; ++m) {
    CHECK(std::abs(a.s[m] - b.s[m]) < 1e-8);
    CHECK(std::abs(a.y[std::size_t(m)] - b.y[std::size_t(m)]) < 1e-8);
  }
}

TEST_CASE("arc parametrization") {
  const ConformalMap disc = disc_to_ellipse_map(1.0, 1.0, 12);
  const BoundaryParametrization bp = arc_parametrization(disc, 256);
  CHECK(bp.length == doctest::Approx(2.0 * M_PI).epsilon(1e-8));

  const ConformalMap ell = disc_to_ellipse_map(0.85, 1.0, 16);
  const BoundaryParametrization be = arc_parametrization(ell, 512);
  // unit speed: chord length over ds tends to 1, tangents unit
  const double ds = be.length / 512;
  for (int j = 0; j < 512; ++j) {
    CHECK(std::abs(std::abs(be.tangent[std::size_t(j)]) - 1.0) < 1e-12);
    const cdouble chord =
        be.point[std::size_t((j + 1) % 512)] - be.point[std::size_t(j)];
    CHECK(std::abs(chord) / ds == doctest::Approx(1.0).epsilon(1e-4));
  }
  // closure
  CHECK(std::abs(be.point[0] - ell.boundary_point(ell.length)) < 1e-10);
  // refinement convergence of the total length
  const ConformalMap e2 = disc_to_ellipse_map(0.85, 1.0, 16, 2048);
  CHECK(std::abs(e2.length - ell.length) < 1e-8);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS((void)disc_to_ellipse_map(0.0, 1.0, 12), std::invalid_argument);
  CHECK_THROWS_AS((void)disc_to_ellipse_map(1.0, -2.0, 12), std::invalid_argument);
  CHECK_THROWS_AS((void)disc_to_ellipse_map(1.0, 1.0, 4), std::invalid_argument);
  const ConformalMap m = disc_to_ellipse_map(1.0, 1.0, 12);
  CHECK_THROWS_AS((void)electrode_midpoints(m, 64), std::invalid_argument);
  CHECK_THROWS_AS((void)arc_parametrization(m, 100), std::invalid_argument);
}
