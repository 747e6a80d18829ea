#include "how/net.hpp"

#include <cmath>
#include <stdexcept>

#include "how/rng.hpp"

namespace how {

std::string to_string(Variant v) {
  return v == Variant::Matched ? "matched" : "strict_prose";
}

void ModelConfig::validate() const {
  if (embedding_dim < 1 || n_filters < 1 || kernel_width < 1 || pad_length < 1) {
    throw std::runtime_error("model config counts must be >= 1");
  }
  if (kernel_width > pad_length) {
    throw std::runtime_error("kernel width exceeds pad length");
  }
}

ParamCounts count_params(const ModelConfig& config) {
  config.validate();
  ParamCounts c;
  c.conv = long(config.n_filters) * config.kernel_width * config.embedding_dim +
           config.n_filters;
  c.dense = config.n_filters + 1 + 2;  // mid head + time gate
  if (config.variant == Variant::Matched) c.dense += 4;  // sim + out affine
  c.total = c.conv + c.dense;
  return c;
}

Eigen::VectorXd ModelParams::flatten() const {
  Eigen::VectorXd flat(count_params(config).total);
  long k = 0;
  for (long f = 0; f < conv_w.rows(); ++f) {
    for (long j = 0; j < conv_w.cols(); ++j) flat[k++] = conv_w(f, j);
  }
  for (long f = 0; f < conv_b.size(); ++f) flat[k++] = conv_b[f];
  for (long f = 0; f < mid_w.size(); ++f) flat[k++] = mid_w[f];
  flat[k++] = mid_b;
  if (config.variant == Variant::Matched) {
    flat[k++] = sim_scale;
    flat[k++] = sim_bias;
  }
  flat[k++] = time_scale;
  flat[k++] = time_bias;
  if (config.variant == Variant::Matched) {
    flat[k++] = out_scale;
    flat[k++] = out_bias;
  }
  return flat;
}

ModelParams ModelParams::unflatten(const ModelConfig& config,
                                   const Eigen::VectorXd& flat) {
  ParamCounts counts = count_params(config);
  if (flat.size() != counts.total) {
    throw std::runtime_error("parameter vector has " +
                             std::to_string(flat.size()) + " values, expected " +
                             std::to_string(counts.total));
  }
  ModelParams p;
  p.config = config;
  p.conv_w.resize(config.n_filters, long(config.kernel_width) * config.embedding_dim);
  p.conv_b.resize(config.n_filters);
  p.mid_w.resize(config.n_filters);
  long k = 0;
  for (long f = 0; f < p.conv_w.rows(); ++f) {
    for (long j = 0; j < p.conv_w.cols(); ++j) p.conv_w(f, j) = flat[k++];
  }
  for (long f = 0; f < p.conv_b.size(); ++f) p.conv_b[f] = flat[k++];
  for (long f = 0; f < p.mid_w.size(); ++f) p.mid_w[f] = flat[k++];
  p.mid_b = flat[k++];
  if (config.variant == Variant::Matched) {
    p.sim_scale = flat[k++];
    p.sim_bias = flat[k++];
  }
  p.time_scale = flat[k++];
  p.time_bias = flat[k++];
  if (config.variant == Variant::Matched) {
    p.out_scale = flat[k++];
    p.out_bias = flat[k++];
  }
  return p;
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Pcg32 rng(seed);
  ModelParams p;
  p.config = config;
  long fan_in = long(config.kernel_width) * config.embedding_dim;
  double conv_limit = std::sqrt(6.0 / double(fan_in + config.n_filters));
  p.conv_w.resize(config.n_filters, fan_in);
  for (long f = 0; f < p.conv_w.rows(); ++f) {
    for (long j = 0; j < p.conv_w.cols(); ++j) {
      p.conv_w(f, j) = rng.uniform(-conv_limit, conv_limit);
    }
  }
  p.conv_b = Eigen::VectorXd::Zero(config.n_filters);
  double mid_limit = std::sqrt(6.0 / double(config.n_filters + 1));
  p.mid_w.resize(config.n_filters);
  for (long f = 0; f < p.mid_w.size(); ++f) {
    p.mid_w[f] = rng.uniform(-mid_limit, mid_limit);
  }
  return p;
}

ConvTrace conv_maxpool_traced(const Eigen::MatrixXd& encoded,
                              const ModelParams& params) {
  const ModelConfig& cfg = params.config;
  if (encoded.rows() != cfg.pad_length || encoded.cols() != cfg.embedding_dim) {
    throw std::runtime_error("encoded matrix shape does not match model config");
  }
  int n_windows = cfg.pad_length - cfg.kernel_width + 1;
  // im2col: row t is the window starting at t, flattened time-major.
  Eigen::MatrixXd windows(n_windows, long(cfg.kernel_width) * cfg.embedding_dim);
  for (int t = 0; t < n_windows; ++t) {
    for (int r = 0; r < cfg.kernel_width; ++r) {
      windows.block(t, long(r) * cfg.embedding_dim, 1, cfg.embedding_dim) =
          encoded.row(t + r);
    }
  }
  Eigen::MatrixXd pre = windows * params.conv_w.transpose();  // n_windows x n_filters
  pre.rowwise() += params.conv_b.transpose();

  ConvTrace trace;
  trace.hidden.resize(cfg.n_filters);
  trace.argmax.assign(cfg.n_filters, 0);
  for (int f = 0; f < cfg.n_filters; ++f) {
    double best = 0.0;
    int best_t = 0;
    for (int t = 0; t < n_windows; ++t) {
      double v = pre(t, f) > 0.0 ? pre(t, f) : 0.0;
      if (v > best) {
        best = v;
        best_t = t;
      }
    }
    trace.hidden[f] = best;
    trace.argmax[f] = best_t;
  }
  return trace;
}

Eigen::VectorXd conv_maxpool(const EncodedHeadline& encoded,
                             const ModelParams& params) {
  return conv_maxpool_traced(encoded.matrix, params).hidden;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

double mid_probability(const Eigen::VectorXd& hidden, const ModelParams& params) {
  if (hidden.size() != params.mid_w.size()) {
    throw std::runtime_error("hidden state size does not match mid head");
  }
  return sigmoid(params.mid_w.dot(hidden) + params.mid_b);
}

GateValues coref_gate(double p_a, double p_b, double dot, double delta,
                      const ModelParams& params) {
  bool matched = params.config.variant == Variant::Matched;
  GateValues g;
  g.sim_gate = matched ? params.sim_scale * dot + params.sim_bias : dot;
  g.time_gate = params.time_scale * delta + params.time_bias;
  double product = p_a * p_b * g.sim_gate * g.time_gate;
  g.z = matched ? params.out_scale * product + params.out_bias : product;
  g.p_coref = sigmoid(g.z);
  return g;
}

ForwardCache pair_forward_cached(const EncodedHeadline& a,
                                 const EncodedHeadline& b, double delta,
                                 const ModelParams& params) {
  ForwardCache cache;
  cache.enc_a = &a.matrix;
  cache.enc_b = &b.matrix;
  cache.delta = delta;
  cache.trace_a = conv_maxpool_traced(a.matrix, params);
  cache.trace_b = conv_maxpool_traced(b.matrix, params);
  cache.pred.hidden_a = cache.trace_a.hidden;
  cache.pred.hidden_b = cache.trace_b.hidden;
  cache.pred.p_a = mid_probability(cache.trace_a.hidden, params);
  cache.pred.p_b = mid_probability(cache.trace_b.hidden, params);
  cache.dot = cache.trace_a.hidden.dot(cache.trace_b.hidden);
  GateValues g = coref_gate(cache.pred.p_a, cache.pred.p_b, cache.dot, delta,
                            params);
  cache.sim_gate = g.sim_gate;
  cache.time_gate = g.time_gate;
  cache.pred.p_coref = g.p_coref;
  return cache;
}

PairPrediction pair_forward(const EncodedHeadline& a, const EncodedHeadline& b,
                            double delta, const ModelParams& params) {
  return pair_forward_cached(a, b, delta, params).pred;
}

}  // namespace how
