#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "how/dataset.hpp"
#include "how/net.hpp"

namespace how {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 64;
  double learning_rate = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double loss_clamp = 1e-12;
  std::uint64_t shuffle_seed = 2;

  void validate() const;
};

// Binary cross-entropy with the probability clamped into
// [clamp, 1 - clamp] before the logs.
double bce(int y, double p, double clamp = 1e-12);

struct PairLabels {
  int y_a = 0;
  int y_b = 0;
  int y_coref = 0;
};

// Unweighted sum of the three binary cross-entropy terms.
double pair_loss(const PairPrediction& pred, const PairLabels& labels,
                 double clamp = 1e-12);

// Exact gradient of pair_loss with respect to every parameter, in the
// canonical flat layout. p_a and p_b receive gradient both from their own
// loss terms and through the coreference gate; max pooling routes gradient
// to the winning window only; ReLU uses subgradient 0 at 0.
Eigen::VectorXd backward(const ForwardCache& cache, const PairLabels& labels,
                         const ModelParams& params);

struct OptimizerState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step_count = 0;

  static OptimizerState zeros(long n);
};

// Nadam (Adam with Nesterov momentum, Dozat 2016) with a constant momentum
// factor beta1. With g the gradient and t the incremented step count:
//   m <- beta1 * m + (1 - beta1) * g
//   v <- beta2 * v + (1 - beta2) * g^2
//   m_hat = m / (1 - beta1^t),  v_hat = v / (1 - beta2^t)
//   theta <- theta - lr * (beta1 * m_hat + (1 - beta1) * g / (1 - beta1^t))
//            / (sqrt(v_hat) + epsilon)
// Throws on non-finite gradients.
void nadam_step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient,
                OptimizerState& state, const TrainConfig& config);

struct EpochRecord {
  int epoch = 0;
  double mean_train_loss = 0.0;
  std::optional<double> valid_coref_f1;
  std::optional<double> valid_mid_f1;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

std::string history_to_csv(const TrainHistory& history);

struct FitResult {
  ModelParams params;
  TrainHistory history;
};

// Seeded-shuffle epochs over mini-batches (final short batch kept), mean
// batch gradient, one Nadam step per batch. Validation metrics (threshold
// 0.5) are computed per epoch when `valid` is given, without gradient flow.
FitResult fit(const PairDataset& train, const PairDataset* valid,
              const ModelConfig& model_config, const TrainConfig& train_config,
              std::uint64_t init_seed);

// Checkpoint: JSON document {format:"how-ckpt-v1", model_config,
// train_config, params:[...]} with bit-exact parameter round-trip.
std::string checkpoint_to_json(const ModelParams& params,
                               const TrainConfig& train_config);
void save_checkpoint(const ModelParams& params, const TrainConfig& train_config,
                     const std::string& path);

struct Checkpoint {
  ModelParams params;
  TrainConfig train_config;
};

Checkpoint checkpoint_from_json(const std::string& text);
Checkpoint load_checkpoint(const std::string& path);

struct GradCheckResult {
  double max_rel_error = 0.0;
  int draws = 0;
};

// Central finite differences (step 1e-6) against backward() on randomly
// sized instances; the reported error is |g_a - g_fd| / max(1, |g_a| + |g_fd|)
// maximized over parameters and draws.
GradCheckResult gradient_check(Variant variant, std::uint64_t seed, int draws);

}  // namespace how
