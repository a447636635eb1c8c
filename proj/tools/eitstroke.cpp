// Command-line front end for the stroke-EIT simulation and classification
// pipeline: dataset generation, VHED/raw feature extraction, network
// training, evaluation, reporting and profile plots.
#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "eit/dataset.hpp"
#include "eit/experiment.hpp"
#include "eit/io.hpp"

using namespace eit;

namespace {

void add_config_flags(CLI::App* cmd, ExperimentConfig& cfg, std::string& config_file) {
  cmd->add_option("--config", config_file,
                  "JSON config file; values in the file override command-line flags");
  cmd->add_option("--outdir", cfg.outdir, "output directory");
  cmd->add_option("--n-train", cfg.n_train, "training samples (circular inclusions)");
  cmd->add_option("--n-test", cfg.n_test, "samples per test set");
  cmd->add_option("--noise", cfg.noise, "relative noise levels delta");
  cmd->add_option("--electrodes", cfg.M, "number of electrodes (odd)");
  cmd->add_option("--tau-max", cfg.tau_max, "spectral cutoff");
  cmd->add_option("--n-tau", cfg.n_tau, "tau grid nodes (odd)");
  cmd->add_option("--mesh-h", cfg.mesh_h, "FEM target edge length");
  cmd->add_option("--contact-z", cfg.contact_impedance, "electrode contact impedance");
  cmd->add_option("--perturbation", cfg.perturbation, "anatomy perturbation amplitude");
  cmd->add_option("--n-modes", cfg.n_modes, "boundary harmonics in the BIE");
  cmd->add_option("--n-boundary", cfg.n_boundary, "boundary quadrature nodes");
  cmd->add_option("--max-epochs", cfg.max_epochs, "SCG epoch cap");
  cmd->add_option("--repetitions", cfg.repetitions, "training repetitions");
  cmd->add_option("--seed", cfg.master_seed, "master seed");
  cmd->add_option("--workers", cfg.workers, "worker threads (0 = hardware)");
}

ExperimentConfig resolve_config(ExperimentConfig cfg, const std::string& config_file) {
  if (!config_file.empty()) {
    const nlohmann::json j = read_json(config_file);
    const nlohmann::json base = cfg.to_json();
    nlohmann::json merged = base;
    for (auto it = j.begin(); it != j.end(); ++it) merged[it.key()] = it.value();
    cfg = ExperimentConfig::from_json(merged);
  }
  cfg.validate();
  return cfg;
}

std::vector<std::string> split_ids(const std::string& csv) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : csv) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"stroke-EIT pipeline: CEM simulation, VHED features, FCNN classification"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string config_file;

  auto* c_gen = app.add_subcommand("generate", "generate phantoms, CEM voltages and features");
  add_config_flags(c_gen, cfg, config_file);

  auto* c_feat = app.add_subcommand("features", "verify or rebuild feature files");
  std::string feat_kind = "vhed";
  std::string feat_outdir = "out";
  c_feat->add_option("--kind", feat_kind, "raw or vhed")->required();
  c_feat->add_option("--outdir", feat_outdir, "dataset directory");

  auto* c_train = app.add_subcommand("train", "train classifier repetitions");
  std::string tr_kind = "both", tr_outdir = "out", tr_delta = "all";
  int tr_reps = -1, tr_epochs = -1;
  c_train->add_option("--kind", tr_kind, "raw, vhed or both");
  c_train->add_option("--delta", tr_delta, "noise level or 'all'");
  c_train->add_option("--outdir", tr_outdir, "dataset directory");
  c_train->add_option("--repetitions", tr_reps, "override config repetitions");
  c_train->add_option("--max-epochs", tr_epochs, "override config epoch cap");

  auto* c_eval = app.add_subcommand("evaluate", "evaluate trained models on the test sets");
  std::string ev_kind = "both", ev_outdir = "out", ev_delta = "all";
  c_eval->add_option("--kind", ev_kind, "raw, vhed or both");
  c_eval->add_option("--delta", ev_delta, "noise level or 'all'");
  c_eval->add_option("--outdir", ev_outdir, "dataset directory");

  auto* c_rep = app.add_subcommand("report", "emit CSV and text summary from saved rows");
  std::string rep_outdir = "out";
  c_rep->add_option("--outdir", rep_outdir, "dataset directory");

  auto* c_plot = app.add_subcommand("plot", "SVG profile plots for selected samples");
  std::string pl_outdir = "out", pl_ids = "", pl_delta = "0";
  c_plot->add_option("--outdir", pl_outdir, "dataset directory");
  c_plot->add_option("--ids", pl_ids, "comma-separated sample ids, e.g. train/0,train/1")
      ->required();
  c_plot->add_option("--delta", pl_delta, "noise level to plot");

  auto* c_replay = app.add_subcommand("replay-check", "regenerate samples and compare bytes");
  std::string rc_outdir = "out";
  int rc_count = 3;
  c_replay->add_option("--outdir", rc_outdir, "dataset directory");
  c_replay->add_option("--count", rc_count, "samples per set to re-derive");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_gen->parsed()) {
      const ExperimentConfig rc = resolve_config(cfg, config_file);
      const DatasetManifest manifest = generate_dataset(rc);
      std::printf("generated %d samples (%d failed) under %s\n", manifest.count_total(),
                  manifest.count_failed(), rc.outdir.c_str());
      return 0;
    }
    if (c_feat->parsed()) {
      const DatasetManifest manifest = DatasetManifest::load(feat_outdir);
      const int rebuilt = ensure_features(manifest, feat_kind);
      std::printf("features '%s': %d samples rebuilt, rest verified\n", feat_kind.c_str(),
                  rebuilt);
      return 0;
    }
    auto deltas_of = [](const DatasetManifest& m, const std::string& sel) {
      const ExperimentConfig c = ExperimentConfig::from_json(m.j.at("config"));
      std::vector<double> out;
      if (sel == "all")
        out = c.noise;
      else
        out.push_back(std::stod(sel));
      return out;
    };
    auto kinds_of = [](const std::string& sel) {
      std::vector<std::string> out;
      if (sel == "both" || sel == "raw") out.push_back("raw");
      if (sel == "both" || sel == "vhed") out.push_back("vhed");
      if (out.empty()) throw std::invalid_argument("kind must be raw, vhed or both");
      return out;
    };
    if (c_train->parsed()) {
      const DatasetManifest manifest = DatasetManifest::load(tr_outdir);
      const ExperimentConfig rc = ExperimentConfig::from_json(manifest.j.at("config"));
      const int reps = tr_reps > 0 ? tr_reps : rc.repetitions;
      const int epochs = tr_epochs > 0 ? tr_epochs : rc.max_epochs;
      for (const auto& kind : kinds_of(tr_kind))
        for (double d : deltas_of(manifest, tr_delta)) {
          const TrainedModels models = train_models(manifest, kind, d, reps, epochs, rc.workers);
          save_models(models, manifest);
          std::printf("trained %s delta=%g: %d repetitions, final losses:", kind.c_str(), d, reps);
          for (const auto& r : models.reps) std::printf(" %.4g", r.final_loss);
          std::printf("\n");
        }
      return 0;
    }
    if (c_eval->parsed()) {
      const DatasetManifest manifest = DatasetManifest::load(ev_outdir);
      std::vector<ReportRow> rows;
      for (const auto& kind : kinds_of(ev_kind))
        for (double d : deltas_of(manifest, ev_delta)) {
          const TrainedModels models = load_models(manifest, kind, d);
          for (auto& row : evaluate_models(manifest, models)) rows.push_back(row);
        }
      save_rows(rows, manifest.root);
      for (const auto& r : rows)
        std::printf("%s %s delta=%g: acc %.4f sens %.4f spec %.4f\n", r.test_set.c_str(),
                    r.input_kind.c_str(), r.delta, r.acc_mean, r.sens_mean, r.spec_mean);
      return 0;
    }
    if (c_rep->parsed()) {
      const std::vector<ReportRow> rows = load_rows(rep_outdir);
      emit_report(rows, rep_outdir);
      std::printf("report written under %s/report\n", rep_outdir.c_str());
      return 0;
    }
    if (c_plot->parsed()) {
      const DatasetManifest manifest = DatasetManifest::load(pl_outdir);
      emit_profile_plots(manifest, split_ids(pl_ids), std::stod(pl_delta),
                         manifest.root / "plots");
      std::printf("plots written under %s/plots\n", pl_outdir.c_str());
      return 0;
    }
    if (c_replay->parsed()) {
      const DatasetManifest manifest = DatasetManifest::load(rc_outdir);
      const ReplayReport rep = replay_check(manifest, rc_count);
      std::printf("replay-check: %d samples re-derived, %d file mismatches\n", rep.checked,
                  rep.mismatched);
      for (const auto& d : rep.details) std::printf("  %s\n", d.c_str());
      return rep.mismatched == 0 ? 0 : 1;
    }
  } catch (const BatchFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
