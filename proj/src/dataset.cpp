#include "eit/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include "eit/io.hpp"
#include "eit/parallel.hpp"
#include "eit/rng.hpp"

namespace eit {

namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
  if (n_train < 10 || n_test < 10)
    throw std::invalid_argument("config: sample counts must be >= 10");
  for (double d : noise)
    if (d < 0.0) throw std::invalid_argument("config: noise levels must be non-negative");
  if (noise.empty()) throw std::invalid_argument("config: need at least one noise level");
  if (M < 3 || M % 2 == 0) throw std::invalid_argument("config: M must be odd and >= 3");
  if (n_tau < 17 || n_tau % 2 == 0)
    throw std::invalid_argument("config: n_tau must be odd and >= 17");
  if (angle_indices.empty()) throw std::invalid_argument("config: need at least one angle");
  if (n_t < 2) throw std::invalid_argument("config: n_t must be >= 2");
  if (!(mesh_h > 0.0)) throw std::invalid_argument("config: mesh_h must be positive");
  if (!(contact_impedance > 0.0))
    throw std::invalid_argument("config: contact impedance must be positive");
  if (!(ax > 0.0 && by > 0.0)) throw std::invalid_argument("config: semi-axes must be positive");
  if (perturbation < 0.0 || perturbation > 0.05)
    throw std::invalid_argument("config: perturbation must be in [0, 0.05]");
  if (n_modes < 1 || 2 * n_modes > M - 1)
    throw std::invalid_argument("config: n_modes must be in [1, (M-1)/2]");
  if (n_boundary <= M - 1) throw std::invalid_argument("config: n_boundary too small");
  if (repetitions < 1) throw std::invalid_argument("config: repetitions must be >= 1");
  if (outdir.empty()) throw std::invalid_argument("config: outdir required");
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"n_train", n_train},
          {"n_test", n_test},
          {"noise", noise},
          {"M", M},
          {"tau_max", tau_max},
          {"n_tau", n_tau},
          {"angle_indices", angle_indices},
          {"n_t", n_t},
          {"t_lo", t_lo},
          {"t_hi", t_hi},
          {"mesh_h", mesh_h},
          {"contact_impedance", contact_impedance},
          {"ax", ax},
          {"by", by},
          {"perturbation", perturbation},
          {"n_modes", n_modes},
          {"n_boundary", n_boundary},
          {"truncation_order", truncation_order},
          {"max_epochs", max_epochs},
          {"repetitions", repetitions},
          {"master_seed", master_seed},
          {"outdir", outdir},
          {"workers", workers},
          {"scale_divisor", scale_divisor}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("n_train", c.n_train);
  get("n_test", c.n_test);
  get("noise", c.noise);
  get("M", c.M);
  get("tau_max", c.tau_max);
  get("n_tau", c.n_tau);
  get("angle_indices", c.angle_indices);
  get("n_t", c.n_t);
  get("t_lo", c.t_lo);
  get("t_hi", c.t_hi);
  get("mesh_h", c.mesh_h);
  get("contact_impedance", c.contact_impedance);
  get("ax", c.ax);
  get("by", c.by);
  get("perturbation", c.perturbation);
  get("n_modes", c.n_modes);
  get("n_boundary", c.n_boundary);
  get("truncation_order", c.truncation_order);
  get("max_epochs", c.max_epochs);
  get("repetitions", c.repetitions);
  get("master_seed", c.master_seed);
  get("outdir", c.outdir);
  get("workers", c.workers);
  get("scale_divisor", c.scale_divisor);
  return c;
}

std::vector<double> ExperimentConfig::angles() const {
  std::vector<double> out;
  for (int i : angle_indices) out.push_back(i * M_PI / 8.0);
  return out;
}

std::string ExperimentConfig::noise_tag(double delta) const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "d%g", delta);
  return buf;
}

PipelineContext PipelineContext::make(const ExperimentConfig& cfg) {
  cfg.validate();
  PipelineContext ctx;
  ctx.cfg = cfg;
  ctx.map = disc_to_ellipse_map(cfg.ax, cfg.by, cfg.truncation_order);
  ctx.layout = electrode_midpoints(ctx.map, cfg.M);
  ctx.patterns = trig_current_patterns(cfg.M, ctx.map.length, ctx.layout.s, ctx.layout.w);
  ctx.R1 = reference_nd_matrix(ctx.map, cfg.M);
  ctx.boundary = arc_parametrization(ctx.map, cfg.n_boundary);
  ctx.kgrid = build_k_grid(cfg.tau_max, cfg.n_tau, cfg.angles());
  ctx.wspec = WindowSpec::defaults(cfg.tau_max, cfg.n_t, cfg.t_lo, cfg.t_hi);
  return ctx;
}

std::uint64_t sample_seed(const ExperimentConfig& cfg, int set, int index) {
  return Rng::derive(Rng::derive(cfg.master_seed, 100 + std::uint64_t(set)),
                     std::uint64_t(index));
}

std::uint64_t noise_seed(std::uint64_t sample_seed_value, int delta_index) {
  return Rng::derive(sample_seed_value, 7000 + std::uint64_t(delta_index));
}

std::vector<SampleRef> enumerate_samples(const ExperimentConfig& cfg) {
  std::vector<SampleRef> out;
  const Scenario scen[4] = {Scenario::circular, Scenario::circular, Scenario::elliptic,
                            Scenario::multiple};
  for (int set = 0; set < 4; ++set) {
    const int n = (set == 0) ? cfg.n_train : cfg.n_test;
    for (int i = 0; i < n; ++i) {
      SampleRef r;
      r.set = set;
      r.index = i;
      r.seed = sample_seed(cfg, set, i);
      r.label = i % 2; // alternate for exact class balance
      r.scenario = scen[set];
      r.id = std::string(kSetNames[set]) + "/" + std::to_string(i);
      out.push_back(std::move(r));
    }
  }
  return out;
}

PerDeltaOutputs vhed_from_voltages(const PipelineContext& ctx, const Eigen::VectorXd& v_noisy,
                                   const Eigen::MatrixXd& U_ref, double delta) {
  const auto& cfg = ctx.cfg;
  PerDeltaOutputs out;
  const Eigen::MatrixXd Unoisy =
      Eigen::Map<const Eigen::MatrixXd>(v_noisy.data(), cfg.M, cfg.M - 1);
  const Eigen::MatrixXd Udiff = Unoisy - U_ref;
  out.dn = dn_matrix(relative_nd_matrix(Udiff, ctx.patterns), ctx.R1);
  out.dn.delta = delta;
  const CGOTraces traces = cgo_traces(out.dn, ctx.kgrid, ctx.boundary, cfg.n_modes);
  out.profile = vhed_profile(traces, ctx.wspec, ctx.boundary);
  out.profile.delta = delta;
  out.features = vhed_feature_vector(out.profile);
  return out;
}

SampleOutputs compute_sample(const PipelineContext& ctx, const HeadPhantom& phantom) {
  const auto& cfg = ctx.cfg;
  SampleOutputs out;
  auto [vs, vr] = simulate_measurements(phantom, ctx.map, ctx.layout, ctx.patterns, cfg.mesh_h,
                                        cfg.contact_impedance);
  out.volt_sigma = vs.stacked;
  out.volt_ref = vr.stacked;
  for (std::size_t di = 0; di < cfg.noise.size(); ++di) {
    const double delta = cfg.noise[di];
    const Eigen::VectorXd vnoisy =
        add_noise(out.volt_sigma, delta, noise_seed(phantom.seed, int(di)));
    out.raw.push_back(vnoisy);
    PerDeltaOutputs pd = vhed_from_voltages(ctx, vnoisy, vr.U, delta);
    out.features.push_back(std::move(pd.features));
    out.dn.push_back(std::move(pd.dn));
    out.profile.push_back(std::move(pd.profile));
  }
  return out;
}

int ensure_features(const DatasetManifest& manifest, const std::string& kind) {
  const ExperimentConfig cfg = ExperimentConfig::from_json(manifest.j.at("config"));
  if (kind != "raw" && kind != "vhed")
    throw std::invalid_argument("ensure_features: kind must be raw or vhed");
  std::vector<int> todo;
  const auto& samples = manifest.j.at("samples");
  for (int i = 0; i < int(samples.size()); ++i) {
    const auto& row = samples[std::size_t(i)];
    if (row.at("status") != "ok") continue;
    for (double d : cfg.noise) {
      const std::string tag = cfg.noise_tag(d);
      const std::string fname = (kind == "raw" ? "raw_" : "vhed_") + tag + ".f64";
      const fs::path path = manifest.root / row.at("files").at(fname).get<std::string>();
      const std::uintmax_t expect = row.at("bytes").at(fname).get<std::uintmax_t>();
      if (file_size_or_zero(path) != expect) {
        if (kind == "raw")
          throw std::runtime_error("ensure_features: raw file missing for " +
                                   row.at("id").get<std::string>() +
                                   " (re-run the generate step)");
        todo.push_back(i);
        break;
      }
    }
  }
  if (todo.empty()) return 0;
  const PipelineContext ctx = PipelineContext::make(cfg);
  parallel_for(
      int(todo.size()),
      [&](int ti) {
        const auto& row = samples[std::size_t(todo[std::size_t(ti)])];
        const fs::path dir =
            (manifest.root / row.at("files").at("phantom").get<std::string>()).parent_path();
        const Eigen::VectorXd vref = read_f64(dir / "volt_ref.f64");
        const Eigen::MatrixXd Uref =
            Eigen::Map<const Eigen::MatrixXd>(vref.data(), cfg.M, cfg.M - 1);
        for (double d : cfg.noise) {
          const std::string tag = cfg.noise_tag(d);
          const Eigen::VectorXd vnoisy = read_f64(dir / ("raw_" + tag + ".f64"));
          PerDeltaOutputs pd = vhed_from_voltages(ctx, vnoisy, Uref, d);
          write_f64(dir / ("dn_" + tag + ".f64"), pd.dn.L);
          write_f64(dir / ("vhed_" + tag + ".f64"), pd.features);
          write_c64(dir / ("profile_" + tag + ".c64"), pd.profile.Todd);
        }
      },
      cfg.workers);
  return int(todo.size());
}

namespace {

fs::path sample_dir(const fs::path& root, const SampleRef& ref) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", ref.index);
  return root / "samples" / kSetNames[ref.set] / buf;
}

struct SampleFiles {
  std::vector<std::pair<std::string, std::uintmax_t>> entries; // name, expected bytes
};

SampleFiles expected_files(const ExperimentConfig& cfg) {
  SampleFiles f;
  const std::uintmax_t nv = std::uintmax_t(cfg.M) * (cfg.M - 1) * 8;
  const std::uintmax_t ndn = std::uintmax_t(cfg.M) * cfg.M * 8;
  const std::uintmax_t nfeat = std::uintmax_t(cfg.angle_indices.size()) * 2 * cfg.n_t * 8;
  const std::uintmax_t nprof = std::uintmax_t(cfg.angle_indices.size()) * cfg.n_t * 16;
  f.entries.push_back({"volt_sigma.f64", nv});
  f.entries.push_back({"volt_ref.f64", nv});
  for (double d : cfg.noise) {
    const std::string tag = cfg.noise_tag(d);
    f.entries.push_back({"raw_" + tag + ".f64", nv});
    f.entries.push_back({"dn_" + tag + ".f64", ndn});
    f.entries.push_back({"vhed_" + tag + ".f64", nfeat});
    f.entries.push_back({"profile_" + tag + ".c64", nprof});
  }
  return f;
}

bool sample_complete(const fs::path& dir, const SampleFiles& files) {
  if (!fs::exists(dir / "phantom.json")) return false;
  for (const auto& [name, bytes] : files.entries)
    if (file_size_or_zero(dir / name) != bytes) return false;
  return true;
}

} // namespace

int DatasetManifest::count_failed() const {
  int n = 0;
  for (const auto& row : j.at("samples"))
    if (row.at("status") != "ok") ++n;
  return n;
}

int DatasetManifest::count_total() const { return int(j.at("samples").size()); }

void DatasetManifest::save() const { write_json(root / "manifest.json", j); }

DatasetManifest DatasetManifest::load(const fs::path& outdir) {
  DatasetManifest m;
  m.root = outdir;
  m.j = read_json(outdir / "manifest.json");
  return m;
}

DatasetManifest generate_dataset(const ExperimentConfig& cfg) {
  const PipelineContext ctx = PipelineContext::make(cfg);
  const fs::path root(cfg.outdir);
  fs::create_directories(root / "samples");
  const auto refs = enumerate_samples(cfg);
  const SampleFiles files = expected_files(cfg);
  const TissueDistributions dists;

  std::vector<nlohmann::json> rows(refs.size());
  std::mutex log_mutex;
  parallel_for(
      int(refs.size()),
      [&](int i) {
        const SampleRef& ref = refs[std::size_t(i)];
        const fs::path dir = sample_dir(root, ref);
        nlohmann::json row{{"id", ref.id},
                           {"set", kSetNames[ref.set]},
                           {"index", ref.index},
                           {"seed", ref.seed},
                           {"label", ref.label},
                           {"scenario", to_string(ref.scenario)}};
        try {
          fs::create_directories(dir);
          const bool resume = sample_complete(dir, files);
          if (!resume) {
            const HeadPhantom phantom =
                make_phantom(ref.seed, ref.label, ref.scenario, dists, cfg.perturbation, cfg.ax,
                             cfg.by);
            const SampleOutputs sout = compute_sample(ctx, phantom);
            write_json(dir / "phantom.json", phantom.to_json());
            write_f64(dir / "volt_sigma.f64", sout.volt_sigma);
            write_f64(dir / "volt_ref.f64", sout.volt_ref);
            nlohmann::json meta{{"M", cfg.M},
                                {"mesh_h", cfg.mesh_h},
                                {"contact_impedance", cfg.contact_impedance},
                                {"seed", ref.seed},
                                {"noise_seeds", nlohmann::json::object()},
                                {"dn_cond", nlohmann::json::object()},
                                {"dn_asym", nlohmann::json::object()}};
            for (std::size_t di = 0; di < cfg.noise.size(); ++di) {
              const std::string tag = cfg.noise_tag(cfg.noise[di]);
              write_f64(dir / ("raw_" + tag + ".f64"), sout.raw[di]);
              write_f64(dir / ("dn_" + tag + ".f64"), sout.dn[di].L);
              write_f64(dir / ("vhed_" + tag + ".f64"), sout.features[di]);
              write_c64(dir / ("profile_" + tag + ".c64"), sout.profile[di].Todd);
              meta["noise_seeds"][tag] = noise_seed(ref.seed, int(di));
              meta["dn_cond"][tag] = sout.dn[di].cond;
              meta["dn_asym"][tag] = sout.dn[di].asym;
            }
            write_json(dir / "meta.json", meta);
          }
          row["status"] = "ok";
          nlohmann::json jfiles = nlohmann::json::object();
          jfiles["phantom"] = (dir / "phantom.json").lexically_relative(root).string();
          for (const auto& [name, bytes] : files.entries) {
            jfiles[name] = (dir / name).lexically_relative(root).string();
          }
          row["files"] = jfiles;
          nlohmann::json jbytes = nlohmann::json::object();
          for (const auto& [name, bytes] : files.entries) jbytes[name] = bytes;
          row["bytes"] = jbytes;
          nlohmann::json nseeds = nlohmann::json::object();
          for (std::size_t di = 0; di < cfg.noise.size(); ++di)
            nseeds[cfg.noise_tag(cfg.noise[di])] = noise_seed(ref.seed, int(di));
          row["noise_seeds"] = nseeds;
        } catch (const std::exception& e) {
          row["status"] = "failed";
          row["error"] = e.what();
          std::lock_guard<std::mutex> lock(log_mutex);
          std::fprintf(stderr, "[generate] sample %s failed: %s\n", ref.id.c_str(), e.what());
        }
        rows[std::size_t(i)] = std::move(row);
      },
      cfg.workers);

  DatasetManifest manifest;
  manifest.root = root;
  manifest.j = {{"config", cfg.to_json()},
                {"scale_note", "desk scale: sample counts are the full-size study divided by " +
                                   std::to_string(cfg.scale_divisor) +
                                   ", repetitions reduced accordingly"},
                {"samples", rows}};
  // hemorrhagic fraction check (labels alternate, so this is structural)
  {
    int hem = 0, tot = 0;
    for (const auto& row : manifest.j.at("samples")) {
      if (row.at("status") != "ok") continue;
      hem += int(row.at("label").get<int>() == 1);
      ++tot;
    }
    if (tot >= 200) {
      const double frac = double(hem) / tot;
      if (frac < 0.45 || frac > 0.55)
        throw std::runtime_error("generate_dataset: class balance outside [0.45, 0.55]");
    }
  }
  manifest.save();
  const int failed = manifest.count_failed();
  if (failed * 50 > manifest.count_total()) // > 2%
    throw BatchFailure("generate_dataset: " + std::to_string(failed) + " of " +
                       std::to_string(manifest.count_total()) + " samples failed (> 2%)");
  return manifest;
}

FeatureSet load_features(const DatasetManifest& manifest, int set, const std::string& kind,
                         double delta) {
  const ExperimentConfig cfg = ExperimentConfig::from_json(manifest.j.at("config"));
  const std::string tag = cfg.noise_tag(delta);
  const std::string fname = (kind == "raw" ? "raw_" : "vhed_") + tag + ".f64";
  if (kind != "raw" && kind != "vhed")
    throw std::invalid_argument("load_features: kind must be raw or vhed");
  std::vector<Eigen::VectorXd> cols;
  std::vector<double> labels;
  FeatureSet fsout;
  for (const auto& row : manifest.j.at("samples")) {
    if (row.at("set").get<std::string>() != kSetNames[set]) continue;
    if (row.at("status") != "ok") continue;
    if (!row.at("files").contains(fname))
      throw std::runtime_error("load_features: missing feature file entry " + fname);
    cols.push_back(read_f64(manifest.root / row.at("files").at(fname).get<std::string>()));
    labels.push_back(double(row.at("label").get<int>()));
    fsout.ids.push_back(row.at("id").get<std::string>());
  }
  if (cols.empty()) throw std::runtime_error("load_features: no samples in set");
  fsout.X.resize(cols[0].size(), Eigen::Index(cols.size()));
  fsout.y.resize(Eigen::Index(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    fsout.X.col(Eigen::Index(i)) = cols[i];
    fsout.y[Eigen::Index(i)] = labels[i];
  }
  return fsout;
}

ReplayReport replay_check(const DatasetManifest& manifest, int count) {
  const ExperimentConfig cfg = ExperimentConfig::from_json(manifest.j.at("config"));
  const PipelineContext ctx = PipelineContext::make(cfg);
  const TissueDistributions dists;
  ReplayReport rep;
  int per_set[4] = {0, 0, 0, 0};
  for (const auto& row : manifest.j.at("samples")) {
    if (row.at("status") != "ok") continue;
    int set = 0;
    while (set < 4 && row.at("set").get<std::string>() != kSetNames[set]) ++set;
    if (set >= 4 || per_set[set] >= count) continue;
    ++per_set[set];
    ++rep.checked;
    const std::uint64_t seed = row.at("seed").get<std::uint64_t>();
    const HeadPhantom phantom =
        make_phantom(seed, row.at("label").get<int>(),
                     scenario_from_string(row.at("scenario").get<std::string>()), dists,
                     cfg.perturbation, cfg.ax, cfg.by);
    const SampleOutputs sout = compute_sample(ctx, phantom);
    auto check = [&](const std::string& fname, const Eigen::VectorXd& fresh) {
      const Eigen::VectorXd stored =
          read_f64(manifest.root / row.at("files").at(fname).get<std::string>());
      if (stored.size() != fresh.size() ||
          std::memcmp(stored.data(), fresh.data(), std::size_t(fresh.size()) * 8) != 0) {
        ++rep.mismatched;
        rep.details.push_back(row.at("id").get<std::string>() + ": " + fname + " differs");
      }
    };
    check("volt_sigma.f64", sout.volt_sigma);
    for (std::size_t di = 0; di < cfg.noise.size(); ++di) {
      const std::string tag = cfg.noise_tag(cfg.noise[di]);
      check("raw_" + tag + ".f64", sout.raw[di]);
      check("vhed_" + tag + ".f64", sout.features[di]);
    }
  }
  return rep;
}

} // namespace eit
