#include "how/train.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "how/metrics.hpp"
#include "how/rng.hpp"

namespace how {

void TrainConfig::validate() const {
  if (epochs < 0 || batch_size < 1) {
    throw std::runtime_error("train config: epochs must be >= 0, batch >= 1");
  }
  if (learning_rate <= 0.0 || beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 ||
      beta2 >= 1.0 || epsilon <= 0.0 || loss_clamp <= 0.0) {
    throw std::runtime_error("train config: bad optimizer constants");
  }
}

double bce(int y, double p, double clamp) {
  if (p < clamp) p = clamp;
  if (p > 1.0 - clamp) p = 1.0 - clamp;
  return y ? -std::log(p) : -std::log(1.0 - p);
}

double pair_loss(const PairPrediction& pred, const PairLabels& labels,
                 double clamp) {
  return bce(labels.y_a, pred.p_a, clamp) + bce(labels.y_b, pred.p_b, clamp) +
         bce(labels.y_coref, pred.p_coref, clamp);
}

namespace {

// Routes dh back through max pooling and ReLU into the conv kernel grads.
void accumulate_conv(Eigen::MatrixXd& dw, Eigen::VectorXd& db,
                     const Eigen::MatrixXd& encoded, const ConvTrace& trace,
                     const Eigen::VectorXd& dh, const ModelConfig& cfg) {
  for (int f = 0; f < cfg.n_filters; ++f) {
    if (trace.hidden[f] <= 0.0 || dh[f] == 0.0) continue;
    int t = trace.argmax[f];
    db[f] += dh[f];
    for (int r = 0; r < cfg.kernel_width; ++r) {
      dw.block(f, long(r) * cfg.embedding_dim, 1, cfg.embedding_dim) +=
          dh[f] * encoded.row(t + r);
    }
  }
}

}  // namespace

Eigen::VectorXd backward(const ForwardCache& cache, const PairLabels& labels,
                         const ModelParams& params) {
  const ModelConfig& cfg = params.config;
  bool matched = cfg.variant == Variant::Matched;
  const PairPrediction& pred = cache.pred;

  double dz = pred.p_coref - double(labels.y_coref);
  double product = pred.p_a * pred.p_b * cache.sim_gate * cache.time_gate;
  double du = matched ? dz * params.out_scale : dz;
  double dg = du * cache.sim_gate * cache.time_gate;       // d/d(p_a*p_b)
  double dsim = du * pred.p_a * pred.p_b * cache.time_gate;  // d/d(sim_gate)
  double dtime = du * pred.p_a * pred.p_b * cache.sim_gate;  // d/d(time_gate)
  double ddot = matched ? dsim * params.sim_scale : dsim;

  // MID logits collect their own loss terms plus the coreference path.
  double dl_a = (pred.p_a - double(labels.y_a)) +
                dg * pred.p_b * pred.p_a * (1.0 - pred.p_a);
  double dl_b = (pred.p_b - double(labels.y_b)) +
                dg * pred.p_a * pred.p_b * (1.0 - pred.p_b);

  Eigen::VectorXd dh_a = ddot * cache.trace_b.hidden + dl_a * params.mid_w;
  Eigen::VectorXd dh_b = ddot * cache.trace_a.hidden + dl_b * params.mid_w;

  ModelParams grads;
  grads.config = cfg;
  grads.conv_w = Eigen::MatrixXd::Zero(params.conv_w.rows(), params.conv_w.cols());
  grads.conv_b = Eigen::VectorXd::Zero(cfg.n_filters);
  accumulate_conv(grads.conv_w, grads.conv_b, *cache.enc_a, cache.trace_a, dh_a,
                  cfg);
  accumulate_conv(grads.conv_w, grads.conv_b, *cache.enc_b, cache.trace_b, dh_b,
                  cfg);
  grads.mid_w = dl_a * cache.trace_a.hidden + dl_b * cache.trace_b.hidden;
  grads.mid_b = dl_a + dl_b;
  grads.sim_scale = dsim * cache.dot;
  grads.sim_bias = dsim;
  grads.time_scale = dtime * cache.delta;
  grads.time_bias = dtime;
  grads.out_scale = dz * product;
  grads.out_bias = dz;
  return grads.flatten();
}

OptimizerState OptimizerState::zeros(long n) {
  OptimizerState s;
  s.first_moment = Eigen::VectorXd::Zero(n);
  s.second_moment = Eigen::VectorXd::Zero(n);
  return s;
}

void nadam_step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient,
                OptimizerState& state, const TrainConfig& config) {
  if (params.size() != gradient.size() ||
      params.size() != state.first_moment.size()) {
    throw std::runtime_error("nadam_step: vector length mismatch");
  }
  if (!gradient.allFinite()) {
    throw std::runtime_error("nadam_step: non-finite gradient at step " +
                             std::to_string(state.step_count + 1));
  }
  ++state.step_count;
  double b1 = config.beta1, b2 = config.beta2;
  state.first_moment = b1 * state.first_moment + (1.0 - b1) * gradient;
  state.second_moment =
      (b2 * state.second_moment.array() + (1.0 - b2) * gradient.array().square())
          .matrix();
  double bc1 = 1.0 - std::pow(b1, double(state.step_count));
  double bc2 = 1.0 - std::pow(b2, double(state.step_count));
  Eigen::ArrayXd m_hat = state.first_moment.array() / bc1;
  Eigen::ArrayXd v_hat = state.second_moment.array() / bc2;
  Eigen::ArrayXd nesterov = b1 * m_hat + ((1.0 - b1) / bc1) * gradient.array();
  params.array() -= config.learning_rate * nesterov / (v_hat.sqrt() + config.epsilon);
}

namespace {

// Positive-class F1 for coreference over all pairs and for MID status over
// slot-a-deduplicated headlines, at threshold 0.5.
std::pair<double, double> validation_f1(const ModelParams& params,
                                        const PairDataset& valid) {
  auto rows = join_labels(score_pairs(params, valid), valid);
  std::vector<int> coref_labels, coref_preds, mid_labels, mid_preds;
  std::unordered_set<std::string> seen;
  for (const ScoredRow& row : rows) {
    coref_labels.push_back(row.y_coref);
    coref_preds.push_back(row.score.p_coref >= 0.5 ? 1 : 0);
    if (seen.insert(row.score.id_a).second) {
      mid_labels.push_back(row.y_a);
      mid_preds.push_back(row.score.p_a >= 0.5 ? 1 : 0);
    }
  }
  double coref_f1 =
      coref_labels.empty() ? 0.0 : prf1(confusion(coref_labels, coref_preds)).f1;
  double mid_f1 =
      mid_labels.empty() ? 0.0 : prf1(confusion(mid_labels, mid_preds)).f1;
  return {coref_f1, mid_f1};
}

void append_real(std::string& out, double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, r.ptr);
}

}  // namespace

FitResult fit(const PairDataset& train, const PairDataset* valid,
              const ModelConfig& model_config, const TrainConfig& train_config,
              std::uint64_t init_seed) {
  model_config.validate();
  train_config.validate();
  if (train.pairs.empty()) throw std::runtime_error("fit: empty training set");

  FitResult result;
  result.params = init_params(model_config, init_seed);
  long n_params = count_params(model_config).total;
  OptimizerState state = OptimizerState::zeros(n_params);
  Pcg32 shuffle_rng(train_config.shuffle_seed);
  std::vector<std::size_t> order(train.pairs.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t pos = 0;
    while (pos < order.size()) {
      std::size_t batch_end =
          std::min(pos + std::size_t(train_config.batch_size), order.size());
      Eigen::VectorXd grad_sum = Eigen::VectorXd::Zero(n_params);
      for (std::size_t k = pos; k < batch_end; ++k) {
        const PairDataset::Pair& pair = train.pairs[order[k]];
        ForwardCache cache =
            pair_forward_cached(train.encodings[pair.a], train.encodings[pair.b],
                                pair.delta, result.params);
        PairLabels labels{train.y_mid[pair.a], train.y_mid[pair.b], pair.y_coref};
        loss_sum += pair_loss(cache.pred, labels, train_config.loss_clamp);
        grad_sum += backward(cache, labels, result.params);
      }
      Eigen::VectorXd grad = grad_sum / double(batch_end - pos);
      Eigen::VectorXd flat = result.params.flatten();
      nadam_step(flat, grad, state, train_config);
      result.params = ModelParams::unflatten(model_config, flat);
      pos = batch_end;
    }
    double mean_loss = loss_sum / double(train.pairs.size());
    if (!std::isfinite(mean_loss)) {
      throw std::runtime_error("fit: non-finite loss at epoch " +
                               std::to_string(epoch));
    }
    EpochRecord record;
    record.epoch = epoch;
    record.mean_train_loss = mean_loss;
    if (valid && !valid->pairs.empty()) {
      auto [coref_f1, mid_f1] = validation_f1(result.params, *valid);
      record.valid_coref_f1 = coref_f1;
      record.valid_mid_f1 = mid_f1;
    }
    result.history.epochs.push_back(record);
  }
  return result;
}

std::string history_to_csv(const TrainHistory& history) {
  std::string out = "epoch,mean_train_loss,valid_coref_f1,valid_mid_f1\n";
  for (const EpochRecord& r : history.epochs) {
    out += std::to_string(r.epoch);
    out.push_back(',');
    append_real(out, r.mean_train_loss);
    out.push_back(',');
    if (r.valid_coref_f1) append_real(out, *r.valid_coref_f1);
    out.push_back(',');
    if (r.valid_mid_f1) append_real(out, *r.valid_mid_f1);
    out.push_back('\n');
  }
  return out;
}

namespace {

const char* kCheckpointFormat = "how-ckpt-v1";

nlohmann::ordered_json model_config_json(const ModelConfig& cfg) {
  return {{"embedding_dim", cfg.embedding_dim},
          {"n_filters", cfg.n_filters},
          {"kernel_width", cfg.kernel_width},
          {"pad_length", cfg.pad_length},
          {"variant", to_string(cfg.variant)}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.embedding_dim = j.at("embedding_dim").get<int>();
  cfg.n_filters = j.at("n_filters").get<int>();
  cfg.kernel_width = j.at("kernel_width").get<int>();
  cfg.pad_length = j.at("pad_length").get<int>();
  std::string variant = j.at("variant").get<std::string>();
  if (variant == "matched") {
    cfg.variant = Variant::Matched;
  } else if (variant == "strict_prose") {
    cfg.variant = Variant::StrictProse;
  } else {
    throw std::runtime_error("unknown model variant '" + variant + "'");
  }
  return cfg;
}

nlohmann::ordered_json train_config_json(const TrainConfig& cfg) {
  return {{"epochs", cfg.epochs},
          {"batch_size", cfg.batch_size},
          {"learning_rate", cfg.learning_rate},
          {"beta1", cfg.beta1},
          {"beta2", cfg.beta2},
          {"epsilon", cfg.epsilon},
          {"loss_clamp", cfg.loss_clamp},
          {"shuffle_seed", cfg.shuffle_seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  cfg.epochs = j.at("epochs").get<int>();
  cfg.batch_size = j.at("batch_size").get<int>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.beta1 = j.at("beta1").get<double>();
  cfg.beta2 = j.at("beta2").get<double>();
  cfg.epsilon = j.at("epsilon").get<double>();
  cfg.loss_clamp = j.at("loss_clamp").get<double>();
  cfg.shuffle_seed = j.at("shuffle_seed").get<std::uint64_t>();
  return cfg;
}

}  // namespace

std::string checkpoint_to_json(const ModelParams& params,
                               const TrainConfig& train_config) {
  nlohmann::ordered_json j;
  j["format"] = kCheckpointFormat;
  j["model_config"] = model_config_json(params.config);
  j["train_config"] = train_config_json(train_config);
  Eigen::VectorXd flat = params.flatten();
  nlohmann::ordered_json values = nlohmann::ordered_json::array();
  for (long i = 0; i < flat.size(); ++i) values.push_back(flat[i]);
  j["params"] = std::move(values);
  return j.dump(2) + "\n";
}

void save_checkpoint(const ModelParams& params, const TrainConfig& train_config,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  out << checkpoint_to_json(params, train_config);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("corrupt checkpoint: ") + e.what());
  }
  std::string format = j.value("format", std::string());
  if (format != kCheckpointFormat) {
    throw std::runtime_error("unsupported checkpoint format '" + format +
                             "', expected '" + kCheckpointFormat + "'");
  }
  Checkpoint ckpt;
  ModelConfig cfg = model_config_from_json(j.at("model_config"));
  ckpt.train_config = train_config_from_json(j.at("train_config"));
  const auto& values = j.at("params");
  long expected = count_params(cfg).total;
  if (long(values.size()) != expected) {
    throw std::runtime_error("checkpoint has " + std::to_string(values.size()) +
                             " parameters, config expects " +
                             std::to_string(expected));
  }
  Eigen::VectorXd flat(expected);
  for (long i = 0; i < expected; ++i) flat[i] = values[i].get<double>();
  ckpt.params = ModelParams::unflatten(cfg, flat);
  return ckpt;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return checkpoint_from_json(text);
}

namespace {

EncodedHeadline random_encoding(const ModelConfig& cfg, Pcg32& rng) {
  EncodedHeadline enc;
  enc.matrix = Eigen::MatrixXd::Zero(cfg.pad_length, cfg.embedding_dim);
  enc.n_tokens = 1 + int(rng.bounded(std::uint32_t(cfg.pad_length)));
  for (int t = 0; t < enc.n_tokens; ++t) {
    for (int d = 0; d < cfg.embedding_dim; ++d) {
      enc.matrix(t, d) = rng.uniform(-0.8, 0.8);
    }
  }
  return enc;
}

}  // namespace

GradCheckResult gradient_check(Variant variant, std::uint64_t seed, int draws) {
  Pcg32 rng(seed);
  GradCheckResult result;
  result.draws = draws;
  const double step = 1e-6;
  for (int d = 0; d < draws; ++d) {
    ModelConfig cfg;
    cfg.embedding_dim = 4 + int(rng.bounded(17));
    cfg.n_filters = 2 + int(rng.bounded(7));
    cfg.kernel_width = 2 + int(rng.bounded(3));
    cfg.pad_length = cfg.kernel_width + 1 + int(rng.bounded(8));
    cfg.variant = variant;

    Eigen::VectorXd flat = init_params(cfg, rng.next_u64()).flatten();
    for (long i = 0; i < flat.size(); ++i) flat[i] += rng.uniform(-0.2, 0.2);
    ModelParams params = ModelParams::unflatten(cfg, flat);

    EncodedHeadline enc_a = random_encoding(cfg, rng);
    EncodedHeadline enc_b = random_encoding(cfg, rng);
    double delta = 1.0 / (1.0 + double(rng.bounded(40)));
    PairLabels labels{int(rng.bounded(2)), int(rng.bounded(2)),
                      int(rng.bounded(2))};

    ForwardCache cache = pair_forward_cached(enc_a, enc_b, delta, params);
    Eigen::VectorXd analytic = backward(cache, labels, params);

    for (long i = 0; i < flat.size(); ++i) {
      Eigen::VectorXd perturbed = flat;
      perturbed[i] = flat[i] + step;
      double up = pair_loss(
          pair_forward(enc_a, enc_b, delta, ModelParams::unflatten(cfg, perturbed)),
          labels);
      perturbed[i] = flat[i] - step;
      double down = pair_loss(
          pair_forward(enc_a, enc_b, delta, ModelParams::unflatten(cfg, perturbed)),
          labels);
      double fd = (up - down) / (2.0 * step);
      double err = std::abs(analytic[i] - fd) /
                   std::max(1.0, std::abs(analytic[i]) + std::abs(fd));
      if (err > result.max_rel_error) result.max_rel_error = err;
    }
  }
  return result;
}

}  // namespace how
