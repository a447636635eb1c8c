#include "eit/classifier.hpp"

#include <cmath>
#include <stdexcept>

#include "eit/rng.hpp"

namespace eit {

Eigen::VectorXd MLPParams::flatten() const {
  Eigen::VectorXd v(W1.size() + b1.size() + W2.size() + 1);
  Eigen::Index off = 0;
  v.segment(off, W1.size()) = Eigen::Map<const Eigen::VectorXd>(W1.data(), W1.size());
  off += W1.size();
  v.segment(off, b1.size()) = b1;
  off += b1.size();
  v.segment(off, W2.size()) = W2.transpose();
  off += W2.size();
  v[off] = b2;
  return v;
}

MLPParams MLPParams::unflatten(const Eigen::VectorXd& theta, int n1, int hidden) {
  if (theta.size() != Eigen::Index(hidden) * n1 + hidden + hidden + 1)
    throw std::invalid_argument("MLPParams::unflatten: size mismatch");
  MLPParams p;
  Eigen::Index off = 0;
  p.W1 = Eigen::Map<const Eigen::MatrixXd>(theta.data(), hidden, n1);
  off += Eigen::Index(hidden) * n1;
  p.b1 = theta.segment(off, hidden);
  off += hidden;
  p.W2 = theta.segment(off, hidden).transpose();
  off += hidden;
  p.b2 = theta[off];
  return p;
}

MLPParams init_params(int n1, std::uint64_t seed, int hidden) {
  Rng rng(Rng::derive(seed, 0x1417));
  MLPParams p;
  p.W1.resize(hidden, n1);
  const double r1 = 1.0 / std::sqrt(double(n1));
  for (int j = 0; j < n1; ++j)
    for (int i = 0; i < hidden; ++i) p.W1(i, j) = rng.uniform(-r1, r1);
  p.b1 = Eigen::VectorXd::Zero(hidden);
  const double r2 = 1.0 / std::sqrt(double(hidden));
  p.W2.resize(hidden);
  for (int i = 0; i < hidden; ++i) p.W2[i] = rng.uniform(-r2, r2);
  p.b2 = 0.0;
  return p;
}

namespace {

inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

Eigen::MatrixXd hidden_activations(const MLPParams& p, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd Z = p.W1 * X;
  Z.colwise() += p.b1;
  return Z.unaryExpr([](double t) { return sigmoid(t); });
}

} // namespace

Eigen::VectorXd forward(const MLPParams& p, const Eigen::MatrixXd& X) {
  if (X.rows() != p.n1()) throw std::invalid_argument("forward: input size mismatch");
  const Eigen::MatrixXd H = hidden_activations(p, X);
  Eigen::VectorXd z2 = (p.W2 * H).transpose();
  z2.array() += p.b2;
  return z2.unaryExpr([](double t) { return sigmoid(t); });
}

std::pair<double, Eigen::VectorXd> loss_and_grad(const MLPParams& p, const Eigen::MatrixXd& X,
                                                 const Eigen::VectorXd& y) {
  const Eigen::Index N = X.cols();
  if (y.size() != N) throw std::invalid_argument("loss_and_grad: label count mismatch");
  const Eigen::MatrixXd H = hidden_activations(p, X);
  Eigen::VectorXd z2 = (p.W2 * H).transpose();
  z2.array() += p.b2;
  const Eigen::VectorXd yp = z2.unaryExpr([](double t) { return sigmoid(t); });

  constexpr double eps = 1e-12;
  double loss = 0.0;
  for (Eigen::Index j = 0; j < N; ++j) {
    const double q = std::min(std::max(yp[j], eps), 1.0 - eps);
    loss += -y[j] * std::log(q) - (1.0 - y[j]) * std::log(1.0 - q);
  }

  const Eigen::VectorXd dz2 = yp - y; // exact for the unclamped region
  MLPParams g;
  g.W2 = (H * dz2).transpose();
  g.b2 = dz2.sum();
  Eigen::MatrixXd dH = p.W2.transpose() * dz2.transpose(); // hidden x N
  Eigen::MatrixXd dZ1 = dH.array() * H.array() * (1.0 - H.array());
  g.W1 = dZ1 * X.transpose();
  g.b1 = dZ1.rowwise().sum();
  return {loss, g.flatten()};
}

TrainResult train_scg(const MLPParams& init, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const TrainConfig& cfg) {
  if (X.cols() == 0) throw std::invalid_argument("train_scg: empty training set");
  const int n1 = init.n1(), hidden = init.hidden();

  // shuffle the batch (order-invariant for full-batch loss; kept for parity
  // with the training protocol)
  Eigen::MatrixXd Xs(X.rows(), X.cols());
  Eigen::VectorXd ys(y.size());
  {
    std::vector<int> perm(static_cast<std::size_t>(X.cols()));
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = int(i);
    Rng rng(Rng::derive(cfg.seed, 0x5FF1E));
    for (int i = int(perm.size()) - 1; i > 0; --i)
      std::swap(perm[std::size_t(i)], perm[std::size_t(rng.uniform_int(i + 1))]);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      Xs.col(j) = X.col(perm[std::size_t(j)]);
      ys[j] = y[perm[std::size_t(j)]];
    }
  }

  auto eval_loss = [&](const Eigen::VectorXd& theta) {
    return loss_and_grad(MLPParams::unflatten(theta, n1, hidden), Xs, ys).first;
  };
  auto eval_grad = [&](const Eigen::VectorXd& theta) {
    return loss_and_grad(MLPParams::unflatten(theta, n1, hidden), Xs, ys).second;
  };

  TrainResult out;
  Eigen::VectorXd w = init.flatten();
  const Eigen::Index P = w.size();

  const double sigma0 = 1e-5;
  double lambda = 1e-6, lambda_bar = 0.0;
  double E = eval_loss(w);
  Eigen::VectorXd r = -eval_grad(w);
  Eigen::VectorXd pdir = r;
  bool success = true;
  double delta = 0.0;
  Eigen::VectorXd s;
  std::vector<double> accepted_losses{E};
  out.log.push_back({0, E, lambda});

  for (int k = 1; k <= cfg.max_epochs; ++k) {
    const double pnorm2 = pdir.squaredNorm();
    if (pnorm2 == 0.0 || !std::isfinite(pnorm2)) break;
    if (success) {
      const double sk = sigma0 / std::sqrt(pnorm2);
      const Eigen::VectorXd g2 = eval_grad(w + sk * pdir);
      s = (g2 - (-r)) / sk; // -r is the current gradient
      delta = pdir.dot(s);
    }
    delta += (lambda - lambda_bar) * pnorm2;
    if (delta <= 0.0) {
      lambda_bar = 2.0 * (lambda - delta / pnorm2);
      delta = -delta + lambda * pnorm2;
      lambda = lambda_bar;
    }
    const double mu = pdir.dot(r);
    const double alpha = mu / delta;
    const Eigen::VectorXd w_try = w + alpha * pdir;
    const double E_try = eval_loss(w_try);
    if (!std::isfinite(E_try)) {
      out.diverged = true;
      break;
    }
    const double Delta = 2.0 * delta * (E - E_try) / (mu * mu);
    if (Delta >= 0.0) {
      w = w_try;
      E = E_try;
      const Eigen::VectorXd r_new = -eval_grad(w);
      lambda_bar = 0.0;
      success = true;
      if (k % int(P) == 0) {
        pdir = r_new;
      } else {
        const double beta = (r_new.squaredNorm() - r_new.dot(r)) / mu;
        pdir = r_new + beta * pdir;
      }
      r = r_new;
      if (Delta >= 0.75) lambda *= 0.25;
      accepted_losses.push_back(E);
      out.log.push_back({k, E, lambda});
      // relative loss-decrease stop
      const int win = cfg.tol_window;
      const int na = int(accepted_losses.size());
      if (na > win) {
        const double drop = accepted_losses[std::size_t(na - 1 - win)] - E;
        if (drop >= 0.0 && drop < cfg.loss_tol * std::max(std::abs(E), 1.0)) break;
      }
      if (r.norm() < 1e-12) break;
    } else {
      lambda_bar = lambda;
      success = false;
    }
    if (Delta < 0.25) lambda += delta * (1.0 - Delta) / pnorm2;
    if (!std::isfinite(lambda) || lambda > 1e100) {
      out.diverged = true;
      break;
    }
  }

  out.params = MLPParams::unflatten(w, n1, hidden);
  out.final_loss = E;
  return out;
}

Metrics evaluate(const MLPParams& p, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 double threshold) {
  if (X.cols() == 0) throw std::invalid_argument("evaluate: empty test set");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("evaluate: threshold must be in (0,1)");
  const Eigen::VectorXd yp = forward(p, X);
  Metrics m;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const bool pred = yp[j] >= threshold;
    const bool truth = y[j] >= 0.5;
    if (pred && truth)
      ++m.tp;
    else if (!pred && !truth)
      ++m.tn;
    else if (pred && !truth)
      ++m.fp;
    else
      ++m.fn;
  }
  const int total = m.tp + m.tn + m.fp + m.fn;
  m.accuracy = double(m.tp + m.tn) / total;
  m.sensitivity = (m.tp + m.fn > 0) ? double(m.tp) / (m.tp + m.fn) : 0.0;
  m.specificity = (m.tn + m.fp > 0) ? double(m.tn) / (m.tn + m.fp) : 0.0;
  return m;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  Standardizer st;
  st.mean = X.rowwise().mean();
  Eigen::VectorXd var = (X.colwise() - st.mean).array().square().rowwise().mean();
  st.scale = var.array().sqrt().max(1e-12);
  return st;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
  return (X.colwise() - mean).array().colwise() / scale.array();
}

} // namespace eit
