#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace eit {

// One-hidden-layer network: y = sigmoid(W2 sigmoid(W1 x + b1) + b2),
// 30 hidden units.
struct MLPParams {
  Eigen::MatrixXd W1;    // 30 x n1
  Eigen::VectorXd b1;    // 30
  Eigen::RowVectorXd W2; // 1 x 30
  double b2 = 0.0;

  int n1() const { return int(W1.cols()); }
  int hidden() const { return int(W1.rows()); }
  Eigen::VectorXd flatten() const;
  static MLPParams unflatten(const Eigen::VectorXd& theta, int n1, int hidden = 30);
};

MLPParams init_params(int n1, std::uint64_t seed, int hidden = 30);

// Batched forward pass; X has one column per sample.
Eigen::VectorXd forward(const MLPParams& p, const Eigen::MatrixXd& X);

// Binary cross entropy (summed over the batch) and its exact gradient.
// Predictions are clamped to [1e-12, 1 - 1e-12] inside the logs.
std::pair<double, Eigen::VectorXd> loss_and_grad(const MLPParams& p, const Eigen::MatrixXd& X,
                                                 const Eigen::VectorXd& y);

struct TrainConfig {
  int max_epochs = 500;
  double loss_tol = 1e-8; // relative loss decrease over tol_window epochs
  int tol_window = 10;
  double validation_fraction = 0.0; // reserved; no early stopping by default
  std::uint64_t seed = 0;           // init + shuffle seed
  int repetitions = 5;
};

struct TrainLogRow {
  int epoch;
  double loss;
  double lambda; // SCG step scale
};

struct TrainResult {
  MLPParams params;
  std::vector<TrainLogRow> log;
  bool diverged = false;
  double final_loss = 0.0;
};

// Full-batch scaled conjugate gradient (trust-region-scaled CG, no line
// search). Accepted steps never increase the training loss.
TrainResult train_scg(const MLPParams& init, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const TrainConfig& cfg);

struct Metrics {
  double accuracy = 0.0, sensitivity = 0.0, specificity = 0.0;
  int tp = 0, tn = 0, fp = 0, fn = 0;
};

// Hemorrhagic (label 1) is the positive class; ties at the threshold map
// to positive.
Metrics evaluate(const MLPParams& p, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 double threshold = 0.5);

// Per-coordinate standardization fitted on training data and applied to
// both input kinds identically.
struct Standardizer {
  Eigen::VectorXd mean, scale;
  static Standardizer fit(const Eigen::MatrixXd& X);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

} // namespace eit
