#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eit/phantom.hpp"
#include "eit/rng.hpp"

using namespace eit;

namespace {

bool nested(const HeadPhantom& ph) {
  for (int r = 0; r < 256; ++r) {
    const double th = 2.0 * M_PI * r / 256.0;
    double outer = ph.helmet_radius(th);
    for (std::size_t i = 0; i < ph.curves.size(); ++i) {
      const double ri = ph.curve_radius(i, th);
      if (!(ri < outer) || !(ri > 0.0)) return false;
      outer = ri;
    }
  }
  return true;
}

} // namespace

TEST_CASE("zero perturbation reproduces the reference anatomy for every seed") {
  const HeadPhantom a = sample_head_anatomy(1, 0.0);
  const HeadPhantom b = sample_head_anatomy(999, 0.0);
  for (std::size_t i = 0; i < a.curves.size(); ++i)
    for (double th : {0.0, 1.0, 2.5, 4.0})
      CHECK(a.curve_radius(i, th) == doctest::Approx(b.curve_radius(i, th)).epsilon(1e-15));
}

TEST_CASE("perturbed anatomies are distinct but nested") {
  const HeadPhantom a = sample_head_anatomy(1, 0.03);
  const HeadPhantom b = sample_head_anatomy(2, 0.03);
  CHECK(nested(a));
  CHECK(nested(b));
  double diff = 0.0;
  for (double th : {0.0, 1.0, 2.0}) diff += std::abs(a.curve_radius(0, th) - b.curve_radius(0, th));
  CHECK(diff > 1e-4);
  for (std::uint64_t seed = 10; seed < 30; ++seed) CHECK(nested(sample_head_anatomy(seed, 0.03)));
  CHECK_THROWS_AS((void)sample_head_anatomy(1, 0.2), std::invalid_argument);
}

TEST_CASE("helmet layer conductivity is exactly 1") {
  const HeadPhantom ph = sample_head_anatomy(7, 0.03);
  for (double th : {0.1, 1.3, 3.0, 5.1}) {
    const double r_scalp = ph.curve_radius(0, th);
    const double r_helmet = ph.helmet_radius(th);
    const double r = 0.5 * (r_scalp + r_helmet);
    CHECK(ph.conductivity_at({r * std::cos(th), r * std::sin(th)}) == 1.0);
  }
}

TEST_CASE("tissue draws: Table-1 means, LLN, clamping") {
  TissueDistributions zero;
  zero.scalp.stdev = zero.skull.stdev = zero.csf.stdev = zero.grey.stdev = zero.white.stdev = 0.0;
  const auto t = sample_conductivities(5, zero);
  CHECK(t[0] == doctest::Approx(1.0));
  CHECK(t[1] == doctest::Approx(0.0625));
  CHECK(t[2] == doctest::Approx(6.25));
  CHECK(t[3] == doctest::Approx(0.3063));
  CHECK(t[4] == doctest::Approx(0.1938));

  TissueDistributions d;
  double csf_sum = 0.0;
  const int N = 10000;
  for (int i = 0; i < N; ++i) csf_sum += sample_conductivities(std::uint64_t(i), d)[2];
  CHECK(std::abs(csf_sum / N - 6.25) < 3.0 * 0.2083 / 100.0);

  TissueDistributions wild;
  wild.skull = {0.01, 1000.0};
  bool clamped = false;
  for (int i = 0; i < 50 && !clamped; ++i)
    clamped = sample_conductivities(std::uint64_t(i), wild)[1] == 1e-3;
  CHECK(clamped);
}

TEST_CASE("stroke scenarios") {
  TissueDistributions dists;
  const HeadPhantom anatomy = sample_head_anatomy(3, 0.03);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto circ = sample_stroke(seed, 1, Scenario::circular, anatomy, dists);
    REQUIRE(circ.size() == 1);
    CHECK(circ[0].is_disc);
    CHECK(circ[0].r1 >= 0.1);
    CHECK(circ[0].r1 <= 0.25);
    CHECK(circ[0].center.x() > 0.05);

    const auto ell = sample_stroke(seed, 0, Scenario::elliptic, anatomy, dists);
    REQUIRE(ell.size() == 1);
    CHECK(!ell[0].is_disc);
    CHECK(ell[0].r1 >= 0.16);
    CHECK(ell[0].r1 <= 0.26);
    CHECK(ell[0].r2 >= 0.07);
    CHECK(ell[0].r2 <= 0.16);

    const auto multi = sample_stroke(seed, 1, Scenario::multiple, anatomy, dists);
    REQUIRE(multi.size() == 2);
    const double dist = (multi[0].center - multi[1].center).norm();
    CHECK(dist > std::max(multi[0].r1, multi[0].r2) + std::max(multi[1].r1, multi[1].r2));
    // both inclusions drawn from the hemorrhagic distribution
    for (const auto& inc : multi) CHECK(inc.conductivity > 1.5);
  }
}

TEST_CASE("containment: every inclusion boundary point inside the grey curve") {
  TissueDistributions dists;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const HeadPhantom ph = make_phantom(seed, int(seed % 2),
                                        seed % 3 == 0   ? Scenario::circular
                                        : seed % 3 == 1 ? Scenario::elliptic
                                                        : Scenario::multiple,
                                        dists);
    for (const auto& inc : ph.inclusions) {
      CHECK(inc.center.x() > 0.05);
      for (int i = 0; i < 64; ++i) {
        const Eigen::Vector2d p = inc.boundary_point(2.0 * M_PI * i / 64.0);
        const double th = std::atan2(p.y(), p.x());
        CHECK(p.norm() < ph.curve_radius(3, th));
      }
    }
  }
}

TEST_CASE("conductivity_at selects the innermost region") {
  TissueDistributions dists;
  const HeadPhantom ph = make_phantom(11, 1, Scenario::circular, dists);
  const auto& inc = ph.inclusions[0];
  CHECK(ph.conductivity_at(inc.center) == inc.conductivity);
  CHECK(ph.conductivity_at({0.0, 0.0}) == ph.tissue[4]); // white matter core
  CHECK_THROWS_AS((void)ph.conductivity_at({2.0, 2.0}), std::domain_error);
}

TEST_CASE("determinism: identical seeds give identical phantoms") {
  TissueDistributions dists;
  const HeadPhantom a = make_phantom(42, 1, Scenario::multiple, dists);
  const HeadPhantom b = make_phantom(42, 1, Scenario::multiple, dists);
  CHECK(a.to_json().dump() == b.to_json().dump());
  const HeadPhantom c = HeadPhantom::from_json(a.to_json());
  CHECK(c.to_json().dump() == a.to_json().dump());
}
