#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "how/textprep.hpp"

namespace how {

// Matched carries affine maps on the dot product and on the pre-sigmoid
// product (22 non-conv parameters); StrictProse omits them (18) and applies
// the sigmoid directly to the gated product.
enum class Variant { Matched, StrictProse };

std::string to_string(Variant v);

struct ModelConfig {
  int embedding_dim = 300;
  int n_filters = 15;
  int kernel_width = 3;
  int pad_length = 32;
  Variant variant = Variant::Matched;

  void validate() const;
};

struct ParamCounts {
  long conv = 0;
  long dense = 0;
  long total = 0;
};

ParamCounts count_params(const ModelConfig& config);

// All trainable parameters. Canonical flat layout: conv_w row-major
// (filter, then kernel offset, then embedding dim), conv_b, mid_w, mid_b,
// sim_scale, sim_bias (Matched), time_scale, time_bias, out_scale, out_bias
// (Matched).
struct ModelParams {
  ModelConfig config;
  Eigen::MatrixXd conv_w;  // n_filters x (kernel_width * embedding_dim)
  Eigen::VectorXd conv_b;  // n_filters
  Eigen::VectorXd mid_w;   // n_filters
  double mid_b = 0.0;
  double sim_scale = 1.0;
  double sim_bias = 0.0;
  double time_scale = 1.0;
  double time_bias = 0.0;
  double out_scale = 1.0;
  double out_bias = 0.0;

  Eigen::VectorXd flatten() const;
  static ModelParams unflatten(const ModelConfig& config,
                               const Eigen::VectorXd& flat);
};

// Glorot-style uniform weights, zero biases, identity gates.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

// Valid 1-d convolution over the time axis (window dot product + bias),
// ReLU, then per-filter max over positions. `argmax` holds the winning
// position per filter, lowest index among ties.
struct ConvTrace {
  Eigen::VectorXd hidden;    // n_filters
  std::vector<int> argmax;   // n_filters
};

ConvTrace conv_maxpool_traced(const Eigen::MatrixXd& encoded,
                              const ModelParams& params);
Eigen::VectorXd conv_maxpool(const EncodedHeadline& encoded,
                             const ModelParams& params);

double sigmoid(double x);

// sigmoid(mid_w . hidden + mid_b)
double mid_probability(const Eigen::VectorXd& hidden, const ModelParams& params);

struct PairPrediction {
  double p_a = 0.0;
  double p_b = 0.0;
  double p_coref = 0.0;
  Eigen::VectorXd hidden_a;
  Eigen::VectorXd hidden_b;
};

// Everything backward() needs. References the encoded matrices by pointer;
// they must outlive the cache.
struct ForwardCache {
  const Eigen::MatrixXd* enc_a = nullptr;
  const Eigen::MatrixXd* enc_b = nullptr;
  ConvTrace trace_a;
  ConvTrace trace_b;
  PairPrediction pred;
  double delta = 0.0;
  double dot = 0.0;        // hidden_a . hidden_b
  double sim_gate = 0.0;   // sim_scale * dot + sim_bias (dot for StrictProse)
  double time_gate = 0.0;  // time_scale * delta + time_bias
};

// The coreference head on top of branch outputs:
//   z = out_scale * (p_a * p_b * sim_gate * time_gate) + out_bias
// with the affine maps fixed at identity for StrictProse.
struct GateValues {
  double sim_gate = 0.0;
  double time_gate = 0.0;
  double z = 0.0;
  double p_coref = 0.0;
};

GateValues coref_gate(double p_a, double p_b, double dot, double delta,
                      const ModelParams& params);

// Shared conv/mid branches, dot-product similarity, time gating, sigmoid.
ForwardCache pair_forward_cached(const EncodedHeadline& a,
                                 const EncodedHeadline& b, double delta,
                                 const ModelParams& params);
PairPrediction pair_forward(const EncodedHeadline& a, const EncodedHeadline& b,
                            double delta, const ModelParams& params);

}  // namespace how
