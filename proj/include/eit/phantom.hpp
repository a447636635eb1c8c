#pragma once
#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace eit {

enum class Scenario { circular, elliptic, multiple };
std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct TissueDist {
  double mean = 1.0, stdev = 0.0;
};

// Conductivities normalized to scalp; defaults are the atlas-derived
// distributions used throughout. The helmet layer is pinned to 1.
struct TissueDistributions {
  TissueDist scalp{1.0, 0.0333};
  TissueDist skull{0.0625, 0.0021};
  TissueDist csf{6.25, 0.2083};
  TissueDist grey{0.3063, 0.0102};
  TissueDist white{0.1938, 0.0065};
  TissueDist ischemic{0.0938, 0.0031};
  TissueDist hemorrhagic{2.1875, 0.0729};
};

struct StrokeInclusion {
  bool is_disc = true;
  Eigen::Vector2d center{0.0, 0.0};
  double r1 = 0.1;       // radius (disc) or semi-major axis (ellipse)
  double r2 = 0.1;       // semi-minor axis (= r1 for a disc)
  double rotation = 0.0; // radians
  double conductivity = 1.0;

  bool contains(const Eigen::Vector2d& p) const;
  Eigen::Vector2d boundary_point(double t) const; // t in [0, 2 pi)
};

// One compartment boundary: r(theta) = fraction * r_helmet(theta) *
// (1 + sum_n amp_n cos(n theta + phase_n)), harmonics n = 1..4.
struct CompartmentCurve {
  double fraction = 1.0;
  std::array<double, 4> amp{0, 0, 0, 0};
  std::array<double, 4> phase{0, 0, 0, 0};
  double radius(double theta, double helmet_radius) const;
};

// Region ids: 0 = helmet (sigma = 1), 1..5 = scalp, skull, CSF, grey,
// white; 6 + i = inclusion i (inclusions take precedence).
struct HeadPhantom {
  double ax = 0.85, by = 1.0;
  std::vector<CompartmentCurve> curves; // outer to inner; may be empty
  std::vector<double> tissue;           // sigma for scalp..white, aligned with curves
  std::vector<StrokeInclusion> inclusions;
  int label = -1; // 0 ischemic, 1 hemorrhagic, -1 none
  Scenario scenario = Scenario::circular;
  std::uint64_t seed = 0;

  double helmet_radius(double theta) const;
  double curve_radius(std::size_t i, double theta) const;
  int region_at(const Eigen::Vector2d& p) const;
  double conductivity_of_region(int id) const;
  double conductivity_at(const Eigen::Vector2d& p) const;
  int n_regions() const { return 6 + int(inclusions.size()); }

  nlohmann::json to_json() const;
  static HeadPhantom from_json(const nlohmann::json& j);
};

// Default reference anatomy (radial fractions of the helmet profile for
// scalp, skull, CSF, grey, white). Shipped as the config asset default.
std::array<double, 5> reference_fractions();

// Compartment geometry only; tissues are filled with the distribution means.
HeadPhantom sample_head_anatomy(std::uint64_t seed, double perturbation_amplitude,
                                double ax = 0.85, double by = 1.0);

// Gaussian draws per tissue, clamped to >= 1e-3.
std::vector<double> sample_conductivities(std::uint64_t seed, const TissueDistributions& dists);

// Stroke inclusions for the given label and scenario, placed inside the
// brain (grey/white) region on the right-hand side.
std::vector<StrokeInclusion> sample_stroke(std::uint64_t seed, int label, Scenario scenario,
                                           const HeadPhantom& anatomy,
                                           const TissueDistributions& dists);

// Full virtual patient: anatomy + tissues + stroke, all derived from one seed.
HeadPhantom make_phantom(std::uint64_t seed, int label, Scenario scenario,
                         const TissueDistributions& dists, double perturbation_amplitude = 0.03,
                         double ax = 0.85, double by = 1.0);

// Homogeneous-background phantom on a disc/ellipse with explicit inclusions;
// used by calibration tests.
HeadPhantom bare_phantom(double ax, double by, std::vector<StrokeInclusion> inclusions);

} // namespace eit
