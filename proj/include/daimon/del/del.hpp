#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "daimon/common/bytes.hpp"
#include "daimon/common/errors.hpp"
#include "daimon/common/rng.hpp"
#include "daimon/del/label_vector.hpp"
#include "daimon/numerics/mlp.hpp"
#include "daimon/numerics/serialize.hpp"
#include "json.hpp"

namespace daimon::del {

using Embedding = std::vector<double>;

/// Modified cosine distance: 1 - cos similarity while the dot product is
/// nonnegative, 1 otherwise. Range [0, 1].
inline double distance(std::span<const double> y1, std::span<const double> y2) {
  if (y1.size() != y2.size())
    throw ContractViolation("distance: embedding lengths differ");
  double dot = 0.0, n1 = 0.0, n2 = 0.0;
  for (std::size_t i = 0; i < y1.size(); ++i) {
    dot += y1[i] * y2[i];
    n1 += y1[i] * y1[i];
    n2 += y2[i] * y2[i];
  }
  if (dot < 0.0) return 1.0;
  double d = 1.0 - dot / std::sqrt(n1 * n2);
  return std::clamp(d, 0.0, 1.0);
}

/// Perturbation of x_t: pick v uniform in {1..m}, re-draw a uniformly chosen
/// set of v distinct positions from {1..C}. A re-drawn label may equal the
/// old one, so the realized error is at most v/m.
inline LabelVector generate_data(const LabelVector& x_t, Rng& rng) {
  const std::size_t m = x_t.labels.size();
  const auto v = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(m)));
  LabelVector x = x_t;
  // Partial Fisher-Yates: the first v entries form a uniform v-subset.
  std::vector<std::uint32_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0u);
  for (std::size_t i = 0; i < v; ++i) {
    auto j = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(m - 1)));
    std::swap(idx[i], idx[j]);
    x.labels[idx[i]] = static_cast<std::int32_t>(rng.uniform_int(1, x_t.num_classes));
  }
  return x;
}

inline constexpr int kDelModelFormatVersion = 1;
inline constexpr const char* kEncodingCenteredScalar = "centered-scalar-v1";

/// A trained distance-embedding function f: {1..C}^m -> unit sphere in R^n,
/// specific to the x_t it was trained against.
struct DelModel {
  numerics::MlpParams params;
  std::size_t label_count = 0;    // m
  std::size_t embed_dim = 0;      // n
  std::int32_t num_classes = 0;   // C
  std::string input_encoding = kEncodingCenteredScalar;
  std::uint64_t training_seed = 0;

  /// Label c -> (c - (C+1)/2) / C, a zero-centered bounded scalar.
  std::vector<double> encode(const LabelVector& x) const {
    if (x.labels.size() != label_count || x.num_classes != num_classes)
      throw ContractViolation("DelModel::encode: label vector does not match model");
    const double c = static_cast<double>(num_classes);
    const double mid = (c + 1.0) / 2.0;
    std::vector<double> v(x.labels.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = (static_cast<double>(x.labels[i]) - mid) / c;
    return v;
  }

  Embedding embed(const LabelVector& x) const {
    return numerics::mlp_forward(params, encode(x));
  }
};

struct DelTrainConfig {
  std::size_t hidden = 256;
  std::size_t epochs = 200;
  std::size_t samples_per_epoch = 512;
  std::size_t batch = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;

  void validate() const {
    if (hidden == 0 || epochs == 0 || samples_per_epoch == 0 || batch == 0 ||
        learning_rate <= 0.0)
      throw ContractViolation("DelTrainConfig: all fields must be positive");
  }
};

struct EpochLoss {
  double train_loss = 0.0;
  double test_loss = 0.0;
};

struct DelTrainResult {
  DelModel model;
  std::vector<EpochLoss> trace;
};

namespace detail {

inline double signum(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// Mean |e - d| of a sample set under the current parameters (training-mode
/// forward, so it never throws mid-run).
inline double mean_abs_dev(const numerics::MlpParams& p,
                           const std::vector<std::vector<double>>& inputs,
                           const std::vector<double>& errs,
                           std::span<const double> xt_enc) {
  auto yt = numerics::mlp_forward_train(p, xt_enc).y;
  double acc = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto y = numerics::mlp_forward_train(p, inputs[i]).y;
    acc += std::fabs(errs[i] - distance(y, yt));
  }
  return acc / static_cast<double>(inputs.size());
}

}  // namespace detail

/// Trains the DEL MLP on perturbations of x_t (plus x_t itself once per
/// epoch), minimizing |e(x, x_t) - d(f(x), f(x_t))|. The gradient flows
/// through both embeddings. The learning rate decays linearly to 10% of its
/// base value over the first 70% of the epochs, then holds; without the decay
/// the loss floor sits at the edge of the acceptance band.
inline DelTrainResult train_del(const LabelVector& x_t, std::size_t n,
                                const DelTrainConfig& cfg) {
  x_t.validate();
  cfg.validate();
  const std::size_t m = x_t.labels.size();
  if (n >= m) throw ContractViolation("train_del: embedding dimension must satisfy n < m");

  Rng root(cfg.seed);
  Rng init_rng = root.split(1);
  Rng data_rng = root.split(2);
  Rng heldout_rng = root.split(3);

  DelModel model;
  model.label_count = m;
  model.embed_dim = n;
  model.num_classes = x_t.num_classes;
  model.training_seed = cfg.seed;
  model.params = numerics::MlpParams::random({m, cfg.hidden, n}, init_rng);

  const auto xt_enc = model.encode(x_t);

  // Fixed held-out set for the per-epoch test loss.
  std::vector<std::vector<double>> ho_inputs;
  std::vector<double> ho_errs;
  for (std::size_t i = 0; i < cfg.samples_per_epoch; ++i) {
    LabelVector x = generate_data(x_t, heldout_rng);
    ho_errs.push_back(error_rate(x, x_t));
    ho_inputs.push_back(model.encode(x));
  }

  auto adam = numerics::AdamState::init(model.params.shape(), cfg.learning_rate);
  auto grads = numerics::MlpParams::zeros(model.params.shape());
  auto xt_grads = numerics::MlpParams::zeros(model.params.shape());

  std::vector<EpochLoss> trace;
  trace.reserve(cfg.epochs);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double progress = static_cast<double>(epoch) / (0.7 * static_cast<double>(cfg.epochs));
    double lr_scale = 0.1 + 0.9 * std::max(0.0, 1.0 - progress);

    std::vector<std::vector<double>> inputs;
    std::vector<double> errs;
    inputs.reserve(cfg.samples_per_epoch + 1);
    for (std::size_t i = 0; i < cfg.samples_per_epoch; ++i) {
      LabelVector x = generate_data(x_t, data_rng);
      errs.push_back(error_rate(x, x_t));
      inputs.push_back(model.encode(x));
    }
    inputs.push_back(xt_enc);  // anchor the zero-error end
    errs.push_back(0.0);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < inputs.size(); start += cfg.batch) {
      const std::size_t end = std::min(start + cfg.batch, inputs.size());
      const double bsz = static_cast<double>(end - start);

      auto xt_trace = numerics::mlp_forward_train(model.params, xt_enc);
      const auto& yt = xt_trace.y;

      std::fill(grads.w1.begin(), grads.w1.end(), 0.0);
      std::fill(grads.b1.begin(), grads.b1.end(), 0.0);
      std::fill(grads.w2.begin(), grads.w2.end(), 0.0);
      std::fill(grads.b2.begin(), grads.b2.end(), 0.0);
      std::vector<double> yt_tail(n, 0.0);
      std::vector<double> y_tail(n);

      for (std::size_t i = start; i < end; ++i) {
        auto tr = numerics::mlp_forward_train(model.params, inputs[i]);
        double dot = 0.0;
        for (std::size_t k = 0; k < n; ++k) dot += tr.y[k] * yt[k];
        double d = dot >= 0.0 ? std::clamp(1.0 - dot, 0.0, 1.0) : 1.0;
        epoch_loss += std::fabs(errs[i] - d);
        // L = |e - d|; on the cosine branch dd/dy = -y_t, dd/dy_t = -y.
        double s = detail::signum(errs[i] - d);
        if (dot >= 0.0 && s != 0.0) {
          for (std::size_t k = 0; k < n; ++k) {
            y_tail[k] = s * yt[k] / bsz;
            yt_tail[k] += s * tr.y[k] / bsz;
          }
          numerics::mlp_backward_into(model.params, inputs[i], tr, y_tail, grads);
        }
      }
      numerics::mlp_backward_into(model.params, xt_enc, xt_trace, yt_tail, grads);
      numerics::adam_step(model.params, grads, adam, lr_scale);
    }

    double train_loss = epoch_loss / static_cast<double>(inputs.size());
    if (!std::isfinite(train_loss))
      throw TrainingError("train_del: loss diverged at epoch " + std::to_string(epoch));
    trace.push_back({train_loss, detail::mean_abs_dev(model.params, ho_inputs, ho_errs, xt_enc)});
  }

  if (!model.params.all_finite())
    throw TrainingError("train_del: non-finite parameters after training");
  return {std::move(model), std::move(trace)};
}

/// Pearson correlation of (e, d) sample pairs; 0 when either side has no
/// variance.
inline double pearson(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) return 0.0;
  double me = 0.0, md = 0.0;
  for (const auto& [e, d] : pairs) {
    me += e;
    md += d;
  }
  me /= static_cast<double>(pairs.size());
  md /= static_cast<double>(pairs.size());
  double cov = 0.0, ve = 0.0, vd = 0.0;
  for (const auto& [e, d] : pairs) {
    cov += (e - me) * (d - md);
    ve += (e - me) * (e - me);
    vd += (d - md) * (d - md);
  }
  return (ve > 0.0 && vd > 0.0) ? cov / std::sqrt(ve * vd) : 0.0;
}

struct EvalReport {
  double pearson_r = 0.0;
  double mean_abs_dev = 0.0;
  std::vector<std::pair<double, double>> pairs;  // (error, distance)
};

/// Draws fresh perturbations, embeds them, and reports how well the embedding
/// distance tracks the true error.
inline EvalReport eval_del(const DelModel& model, const LabelVector& x_t,
                           std::size_t num_samples, Rng& rng) {
  if (num_samples == 0) throw ContractViolation("eval_del: num_samples must be positive");
  EvalReport rep;
  rep.pairs.reserve(num_samples);
  const Embedding yt = model.embed(x_t);
  for (std::size_t i = 0; i < num_samples; ++i) {
    LabelVector x = generate_data(x_t, rng);
    double e = error_rate(x, x_t);
    double d = distance(model.embed(x), yt);
    rep.pairs.emplace_back(e, d);
  }
  for (auto& [e, d] : rep.pairs) rep.mean_abs_dev += std::fabs(e - d);
  rep.mean_abs_dev /= static_cast<double>(num_samples);
  rep.pearson_r = pearson(rep.pairs);
  return rep;
}

// --- model file format ------------------------------------------------------

inline nlohmann::json del_model_to_json(const DelModel& m) {
  return {{"format_version", kDelModelFormatVersion},
          {"m", m.label_count},
          {"n", m.embed_dim},
          {"num_classes", m.num_classes},
          {"input_encoding", m.input_encoding},
          {"training_seed", m.training_seed},
          {"params", numerics::mlp_to_json(m.params)}};
}

inline DelModel del_model_from_json(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != kDelModelFormatVersion)
    throw std::runtime_error("del model: unsupported format version");
  DelModel m;
  m.label_count = j.at("m").get<std::size_t>();
  m.embed_dim = j.at("n").get<std::size_t>();
  m.num_classes = j.at("num_classes").get<std::int32_t>();
  m.input_encoding = j.at("input_encoding").get<std::string>();
  m.training_seed = j.at("training_seed").get<std::uint64_t>();
  if (m.input_encoding != kEncodingCenteredScalar)
    throw std::runtime_error("del model: unknown input encoding '" + m.input_encoding + "'");
  m.params = numerics::mlp_from_json(j.at("params"));
  if (m.params.in != m.label_count || m.params.out != m.embed_dim)
    throw std::runtime_error("del model: header inconsistent with parameter shapes");
  return m;
}

/// Serialized byte form used both on disk and as blob-store content; the
/// JSON dump is deterministic (sorted keys, round-trip decimal strings).
inline Bytes del_model_bytes(const DelModel& m) {
  return str_bytes(del_model_to_json(m).dump());
}

inline DelModel del_model_from_bytes(std::span<const std::uint8_t> b) {
  return del_model_from_json(nlohmann::json::parse(b.begin(), b.end()));
}

}  // namespace daimon::del
