#pragma once
#include <string>
#include <vector>

#include "eit/classifier.hpp"
#include "eit/dataset.hpp"

namespace eit {

struct ReportRow {
  std::string test_set;
  std::string input_kind; // "raw" or "vhed"
  double delta = 0.0;
  int repetitions = 0;
  double acc_mean = 0.0, acc_std = 0.0;
  double sens_mean = 0.0, sens_std = 0.0;
  double spec_mean = 0.0, spec_std = 0.0;
};

struct TrainedModels {
  std::string kind;
  double delta = 0.0;
  Standardizer standardizer;
  std::vector<TrainResult> reps;
};

// Trains `repetitions` networks on the circular-inclusion training set.
TrainedModels train_models(const DatasetManifest& manifest, const std::string& input_kind,
                           double delta, int repetitions, int max_epochs, int workers = 0);
void save_models(const TrainedModels& models, const DatasetManifest& manifest);
TrainedModels load_models(const DatasetManifest& manifest, const std::string& input_kind,
                          double delta);

// Evaluates trained models on all three test sets; one averaged row per set.
std::vector<ReportRow> evaluate_models(const DatasetManifest& manifest,
                                       const TrainedModels& models);

// train + save + evaluate in one call.
std::vector<ReportRow> run_experiment(const DatasetManifest& manifest,
                                      const std::string& input_kind, double delta,
                                      int repetitions, int max_epochs, int workers = 0);

// Row persistence (merged on key test_set/input/delta).
void save_rows(const std::vector<ReportRow>& rows, const std::filesystem::path& outdir);
std::vector<ReportRow> load_rows(const std::filesystem::path& outdir);

// CSV + human-readable summary (best accuracy per noise level in bold).
void emit_report(const std::vector<ReportRow>& rows, const std::filesystem::path& outdir);

// Line plots of Re/Im T_odd versus pseudo-time per angle (SVG), plus a
// paired overlay of a hemorrhagic/ischemic pair.
void emit_profile_plots(const DatasetManifest& manifest, const std::vector<std::string>& ids,
                        double delta, const std::filesystem::path& plotdir);

} // namespace eit
