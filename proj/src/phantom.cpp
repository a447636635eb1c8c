#include "eit/phantom.hpp"

#include <cmath>
#include <stdexcept>

#include "eit/rng.hpp"

namespace eit {

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::circular: return "circular";
    case Scenario::elliptic: return "elliptic";
    case Scenario::multiple: return "multiple";
  }
  return "circular";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "circular") return Scenario::circular;
  if (s == "elliptic") return Scenario::elliptic;
  if (s == "multiple") return Scenario::multiple;
  throw std::invalid_argument("unknown scenario: " + s);
}

bool StrokeInclusion::contains(const Eigen::Vector2d& p) const {
  const Eigen::Vector2d d = p - center;
  if (is_disc) return d.squaredNorm() <= r1 * r1;
  const double c = std::cos(rotation), s = std::sin(rotation);
  const double u = c * d.x() + s * d.y();
  const double v = -s * d.x() + c * d.y();
  return (u * u) / (r1 * r1) + (v * v) / (r2 * r2) <= 1.0;
}

Eigen::Vector2d StrokeInclusion::boundary_point(double t) const {
  const double c = std::cos(rotation), s = std::sin(rotation);
  const double u = r1 * std::cos(t), v = (is_disc ? r1 : r2) * std::sin(t);
  return center + Eigen::Vector2d(c * u - s * v, s * u + c * v);
}

double CompartmentCurve::radius(double theta, double helmet_radius) const {
  double f = 1.0;
  for (int n = 1; n <= 4; ++n) f += amp[std::size_t(n - 1)] * std::cos(n * theta + phase[std::size_t(n - 1)]);
  return fraction * helmet_radius * f;
}

double HeadPhantom::helmet_radius(double theta) const {
  const double c = std::cos(theta), s = std::sin(theta);
  return 1.0 / std::sqrt(c * c / (ax * ax) + s * s / (by * by));
}

double HeadPhantom::curve_radius(std::size_t i, double theta) const {
  return curves[i].radius(theta, helmet_radius(theta));
}

int HeadPhantom::region_at(const Eigen::Vector2d& p) const {
  const double r = p.norm();
  const double theta = std::atan2(p.y(), p.x());
  if (r > helmet_radius(theta) * (1.0 + 1e-9))
    throw std::domain_error("region_at: point outside the helmet boundary");
  for (std::size_t i = 0; i < inclusions.size(); ++i)
    if (inclusions[i].contains(p)) return 6 + int(i);
  int id = 0; // helmet
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (r <= curve_radius(i, theta))
      id = 1 + int(i);
    else
      break;
  }
  return id;
}

double HeadPhantom::conductivity_of_region(int id) const {
  if (id == 0) return 1.0;
  if (id >= 1 && id <= int(tissue.size())) return tissue[std::size_t(id - 1)];
  const int k = id - 6;
  if (k >= 0 && k < int(inclusions.size())) return inclusions[std::size_t(k)].conductivity;
  throw std::out_of_range("conductivity_of_region: bad region id");
}

double HeadPhantom::conductivity_at(const Eigen::Vector2d& p) const {
  return conductivity_of_region(region_at(p));
}

std::array<double, 5> reference_fractions() { return {0.93, 0.86, 0.79, 0.75, 0.55}; }

nlohmann::json HeadPhantom::to_json() const {
  nlohmann::json j;
  j["ax"] = ax;
  j["by"] = by;
  j["label"] = label;
  j["scenario"] = to_string(scenario);
  j["seed"] = seed;
  j["tissue"] = tissue;
  j["curves"] = nlohmann::json::array();
  for (const auto& c : curves)
    j["curves"].push_back({{"fraction", c.fraction}, {"amp", c.amp}, {"phase", c.phase}});
  j["inclusions"] = nlohmann::json::array();
  for (const auto& inc : inclusions)
    j["inclusions"].push_back({{"is_disc", inc.is_disc},
                               {"center", {inc.center.x(), inc.center.y()}},
                               {"r1", inc.r1},
                               {"r2", inc.r2},
                               {"rotation", inc.rotation},
                               {"conductivity", inc.conductivity}});
  return j;
}

HeadPhantom HeadPhantom::from_json(const nlohmann::json& j) {
  HeadPhantom ph;
  ph.ax = j.at("ax").get<double>();
  ph.by = j.at("by").get<double>();
  ph.label = j.at("label").get<int>();
  ph.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  ph.seed = j.at("seed").get<std::uint64_t>();
  ph.tissue = j.at("tissue").get<std::vector<double>>();
  for (const auto& c : j.at("curves")) {
    CompartmentCurve cc;
    cc.fraction = c.at("fraction").get<double>();
    cc.amp = c.at("amp").get<std::array<double, 4>>();
    cc.phase = c.at("phase").get<std::array<double, 4>>();
    ph.curves.push_back(cc);
  }
  for (const auto& i : j.at("inclusions")) {
    StrokeInclusion inc;
    inc.is_disc = i.at("is_disc").get<bool>();
    auto c = i.at("center").get<std::vector<double>>();
    inc.center = Eigen::Vector2d(c.at(0), c.at(1));
    inc.r1 = i.at("r1").get<double>();
    inc.r2 = i.at("r2").get<double>();
    inc.rotation = i.at("rotation").get<double>();
    inc.conductivity = i.at("conductivity").get<double>();
    ph.inclusions.push_back(inc);
  }
  return ph;
}

namespace {

bool curves_nested(const HeadPhantom& ph, int n_rays = 256, double margin = 0.01) {
  for (int r = 0; r < n_rays; ++r) {
    const double theta = 2.0 * M_PI * r / n_rays;
    double outer = ph.helmet_radius(theta);
    for (std::size_t i = 0; i < ph.curves.size(); ++i) {
      const double ri = ph.curve_radius(i, theta);
      if (!(ri < outer * (1.0 - margin)) || !(ri > 0.0)) return false;
      outer = ri;
    }
  }
  return true;
}

} // namespace

HeadPhantom sample_head_anatomy(std::uint64_t seed, double perturbation_amplitude, double ax,
                                double by) {
  if (perturbation_amplitude < 0.0 || perturbation_amplitude > 0.05)
    throw std::invalid_argument("sample_head_anatomy: amplitude must be in [0, 0.05]");
  HeadPhantom ph;
  ph.ax = ax;
  ph.by = by;
  ph.seed = seed;
  const auto frac = reference_fractions();
  TissueDistributions means;
  ph.tissue = {means.scalp.mean, means.skull.mean, means.csf.mean, means.grey.mean,
               means.white.mean};
  Rng rng(Rng::derive(seed, 0xA11A));
  for (int attempt = 0; attempt < 100; ++attempt) {
    ph.curves.clear();
    for (double f : frac) {
      CompartmentCurve c;
      c.fraction = f;
      for (int n = 0; n < 4; ++n) {
        c.amp[std::size_t(n)] = rng.uniform(-perturbation_amplitude, perturbation_amplitude);
        c.phase[std::size_t(n)] = rng.uniform(0.0, 2.0 * M_PI);
      }
      ph.curves.push_back(c);
    }
    if (curves_nested(ph)) return ph;
  }
  throw std::runtime_error(
      "sample_head_anatomy: no nested anatomy after 100 attempts (amplitude too large)");
}

std::vector<double> sample_conductivities(std::uint64_t seed, const TissueDistributions& dists) {
  Rng rng(Rng::derive(seed, 0xC04D));
  auto draw = [&](const TissueDist& d) { return std::max(rng.normal(d.mean, d.stdev), 1e-3); };
  return {draw(dists.scalp), draw(dists.skull), draw(dists.csf), draw(dists.grey),
          draw(dists.white)};
}

std::vector<StrokeInclusion> sample_stroke(std::uint64_t seed, int label, Scenario scenario,
                                           const HeadPhantom& anatomy,
                                           const TissueDistributions& dists) {
  if (label != 0 && label != 1) throw std::invalid_argument("sample_stroke: label must be 0 or 1");
  if (anatomy.curves.size() < 4)
    throw std::invalid_argument("sample_stroke: anatomy with brain compartments required");
  Rng rng(Rng::derive(seed, 0x57F0));
  const TissueDist& dist = (label == 1) ? dists.hemorrhagic : dists.ischemic;

  // inside the grey-matter curve with a safety margin, right half only
  auto inside_brain = [&](const StrokeInclusion& inc) {
    if (!(inc.center.x() > 0.05)) return false;
    for (int i = 0; i < 64; ++i) {
      const Eigen::Vector2d p = inc.boundary_point(2.0 * M_PI * i / 64.0);
      const double theta = std::atan2(p.y(), p.x());
      if (!(p.norm() < anatomy.curve_radius(3, theta) * 0.97)) return false;
    }
    return true;
  };
  auto disjoint = [&](const StrokeInclusion& a, const StrokeInclusion& b) {
    const double ra = std::max(a.r1, a.r2), rb = std::max(b.r1, b.r2);
    return (a.center - b.center).norm() > ra + rb + 0.02;
  };
  auto place = [&](StrokeInclusion inc) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      inc.center.x() = rng.uniform(0.06, 0.9 * anatomy.ax);
      inc.center.y() = rng.uniform(-0.8 * anatomy.by, 0.8 * anatomy.by);
      if (inside_brain(inc)) return inc;
    }
    throw std::runtime_error("sample_stroke: placement rejected after 200 attempts");
  };

  std::vector<StrokeInclusion> out;
  auto draw_sigma = [&] { return std::max(rng.normal(dist.mean, dist.stdev), 1e-3); };
  if (scenario == Scenario::circular) {
    StrokeInclusion d;
    d.is_disc = true;
    d.r1 = d.r2 = rng.uniform(0.1, 0.25);
    d.conductivity = draw_sigma();
    out.push_back(place(d));
  } else if (scenario == Scenario::elliptic) {
    StrokeInclusion e;
    e.is_disc = false;
    e.r1 = rng.uniform(0.16, 0.26);
    e.r2 = rng.uniform(0.07, 0.16);
    e.rotation = rng.uniform(0.0, M_PI);
    e.conductivity = draw_sigma();
    out.push_back(place(e));
  } else {
    StrokeInclusion d;
    d.is_disc = true;
    d.r1 = d.r2 = rng.uniform(0.1, 0.15);
    d.conductivity = draw_sigma();
    StrokeInclusion e;
    e.is_disc = false;
    e.r1 = rng.uniform(0.16, 0.26);
    e.r2 = rng.uniform(0.07, 0.16);
    e.rotation = rng.uniform(0.0, M_PI);
    e.conductivity = draw_sigma();
    for (int attempt = 0; attempt < 200; ++attempt) {
      StrokeInclusion d2 = place(d);
      StrokeInclusion e2 = place(e);
      if (disjoint(d2, e2)) {
        out.push_back(d2);
        out.push_back(e2);
        break;
      }
    }
    if (out.empty())
      throw std::runtime_error("sample_stroke: disjoint pair rejected after 200 attempts");
  }
  return out;
}

HeadPhantom make_phantom(std::uint64_t seed, int label, Scenario scenario,
                         const TissueDistributions& dists, double perturbation_amplitude,
                         double ax, double by) {
  HeadPhantom ph = sample_head_anatomy(Rng::derive(seed, 1), perturbation_amplitude, ax, by);
  ph.tissue = sample_conductivities(Rng::derive(seed, 2), dists);
  ph.inclusions = sample_stroke(Rng::derive(seed, 3), label, scenario, ph, dists);
  ph.label = label;
  ph.scenario = scenario;
  ph.seed = seed;
  return ph;
}

HeadPhantom bare_phantom(double ax, double by, std::vector<StrokeInclusion> inclusions) {
  HeadPhantom ph;
  ph.ax = ax;
  ph.by = by;
  ph.inclusions = std::move(inclusions);
  return ph;
}

} // namespace eit
