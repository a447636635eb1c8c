#pragma once
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "eit/cem.hpp"
#include "eit/cgo.hpp"
#include "eit/classifier.hpp"
#include "eit/geometry.hpp"
#include "eit/mimic.hpp"
#include "eit/phantom.hpp"
#include "eit/vhed.hpp"

namespace eit {

struct ExperimentConfig {
  int n_train = 400;
  int n_test = 200; // per test set
  std::vector<double> noise = {0.0, 1e-3, 1e-2};
  int M = 65;
  double tau_max = 5.0;
  int n_tau = 33;
  std::vector<int> angle_indices = {4, 5, 6, 12, 13, 14}; // phi_i = i pi / 8
  int n_t = 256;
  double t_lo = -3.0, t_hi = 3.0;
  double mesh_h = 0.02;
  double contact_impedance = 0.01;
  double ax = 0.85, by = 1.0;
  double perturbation = 0.03;
  int n_modes = 32;
  int n_boundary = 256;
  int truncation_order = 16;
  int max_epochs = 500;
  int repetitions = 5;
  std::uint64_t master_seed = 20260811;
  std::string outdir = "out";
  int workers = 0;
  int scale_divisor = 10; // declared scale relative to the full-size study

  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);

  std::vector<double> angles() const;
  std::string noise_tag(double delta) const;
};

// Shared per-geometry state reused by every sample.
struct PipelineContext {
  ExperimentConfig cfg;
  ConformalMap map;
  ElectrodeLayout layout;
  CurrentPatternSet patterns;
  NDMatrix R1;
  BoundaryParametrization boundary;
  KGrid kgrid;
  WindowSpec wspec;

  static PipelineContext make(const ExperimentConfig& cfg);
};

inline const char* kSetNames[4] = {"train", "test_circular", "test_elliptic", "test_multiple"};

struct SampleRef {
  int set = 0;   // index into kSetNames
  int index = 0; // within the set
  std::uint64_t seed = 0;
  int label = 0;
  Scenario scenario = Scenario::circular;
  std::string id; // "<set>/<index>"
};

std::vector<SampleRef> enumerate_samples(const ExperimentConfig& cfg);
std::uint64_t sample_seed(const ExperimentConfig& cfg, int set, int index);
std::uint64_t noise_seed(std::uint64_t sample_seed_value, int delta_index);

struct SampleOutputs {
  Eigen::VectorXd volt_sigma, volt_ref; // stacked, noise free
  // per noise level:
  std::vector<Eigen::VectorXd> raw;      // V^delta
  std::vector<DNMatrix> dn;
  std::vector<VHEDProfile> profile;
  std::vector<Eigen::VectorXd> features; // VHED feature vectors
};

// DN matrix + VHED profile + feature vector from one noisy voltage vector
// and the matching noise-free reference.
struct PerDeltaOutputs {
  DNMatrix dn;
  VHEDProfile profile;
  Eigen::VectorXd features;
};
PerDeltaOutputs vhed_from_voltages(const PipelineContext& ctx, const Eigen::VectorXd& v_noisy,
                                   const Eigen::MatrixXd& U_ref, double delta);

// End-to-end computation for one phantom (no file I/O).
SampleOutputs compute_sample(const PipelineContext& ctx, const HeadPhantom& phantom);

struct DatasetManifest {
  nlohmann::json j;
  std::filesystem::path root;

  int count_failed() const;
  int count_total() const;
  void save() const;
  static DatasetManifest load(const std::filesystem::path& outdir);
};

// Generates (or resumes) the dataset on disk; returns the manifest.
// Throws BatchFailure if more than 2% of the samples fail.
struct BatchFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
DatasetManifest generate_dataset(const ExperimentConfig& cfg);

// Rebuilds missing VHED feature files from stored voltages; returns the
// number of samples recomputed. kind "raw" only validates file presence.
int ensure_features(const DatasetManifest& manifest, const std::string& kind);

// Feature loading for training/evaluation.
struct FeatureSet {
  Eigen::MatrixXd X; // n1 x N
  Eigen::VectorXd y; // labels
  std::vector<std::string> ids;
};
FeatureSet load_features(const DatasetManifest& manifest, int set, const std::string& kind,
                         double delta);

// Byte-exact regeneration check for the first `count` samples of each set.
struct ReplayReport {
  int checked = 0;
  int mismatched = 0;
  std::vector<std::string> details;
};
ReplayReport replay_check(const DatasetManifest& manifest, int count);

} // namespace eit
