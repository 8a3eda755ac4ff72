#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "daimon/common/errors.hpp"
#include "daimon/common/rng.hpp"
#include "daimon/del/del.hpp"
#include "daimon/numerics/mlp.hpp"

namespace daimon::attacks {

/// One (embedding, labels) training pair for the inverse net, drawn from the
/// neighborhood of x_t. This is the attacker that knows x_t is nearby.
inline std::pair<del::Embedding, del::LabelVector> generate_inverse_nearby(
    const del::LabelVector& x_t, const del::DelModel& f, Rng& rng) {
  del::LabelVector x = del::generate_data(x_t, rng);
  del::Embedding y = f.embed(x);
  return {std::move(y), std::move(x)};
}

/// Same shape of pair, but x uniform over {1..C}^m: no information about x_t
/// flows in (the signature has no x_t to leak).
inline std::pair<del::Embedding, del::LabelVector> generate_inverse_random(
    const del::DelModel& f, std::int32_t num_classes, Rng& rng) {
  del::LabelVector x = del::random_labels(f.label_count, num_classes, rng);
  del::Embedding y = f.embed(x);
  return {std::move(y), std::move(x)};
}

struct InverseAttackConfig {
  enum class Mode { nearby, random };
  Mode mode = Mode::nearby;
  std::size_t epochs = 150;
  std::size_t dataset_size = 2048;
  std::size_t batch = 64;
  std::size_t hidden = 256;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs == 0 || dataset_size == 0 || batch == 0 || hidden == 0 ||
        learning_rate <= 0.0)
      throw ContractViolation("InverseAttackConfig: all fields must be positive");
  }
};

struct InverseAttackResult {
  /// recovery_error[k] = e(decode(g(y_t)), x_t) after k epochs; index 0 is
  /// the untrained network.
  std::vector<double> recovery_error;
};

namespace detail {

/// Continuous outputs -> labels: invert the centered-scalar encoding, round
/// to the nearest class, clamp to [1, C].
inline del::LabelVector decode_labels(std::span<const double> out, std::int32_t C) {
  del::LabelVector x;
  x.num_classes = C;
  x.labels.resize(out.size());
  const double c = static_cast<double>(C);
  const double mid = (c + 1.0) / 2.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto v = static_cast<std::int32_t>(std::lround(out[i] * c + mid));
    x.labels[i] = std::clamp(v, 1, C);
  }
  return x;
}

}  // namespace detail

/// Trains an MLP to approximate f^{-1} (squared error on encoded labels) from
/// pairs produced by the configured generator, and records the recovery error
/// e(g(y_t), x_t) per epoch. The nearby generator consumes x_t (that attacker
/// knows the neighborhood); in random mode x_t is used only for scoring.
inline InverseAttackResult train_inverse_attack(const del::DelModel& f,
                                                const del::Embedding& y_t,
                                                const InverseAttackConfig& cfg,
                                                const del::LabelVector& x_t_eval) {
  cfg.validate();
  if (y_t.size() != f.embed_dim)
    throw ContractViolation("train_inverse_attack: y_t length does not match model");

  const std::size_t n = f.embed_dim;
  const std::size_t m = f.label_count;
  const std::int32_t C = f.num_classes;

  Rng root(cfg.seed);
  Rng data_rng = root.split(1);
  Rng init_rng = root.split(2);
  Rng shuffle_rng = root.split(3);

  // Fixed training dataset (inputs: embeddings, targets: encoded labels).
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> targets;
  inputs.reserve(cfg.dataset_size);
  targets.reserve(cfg.dataset_size);
  for (std::size_t i = 0; i < cfg.dataset_size; ++i) {
    auto [y, x] = cfg.mode == InverseAttackConfig::Mode::nearby
                      ? generate_inverse_nearby(x_t_eval, f, data_rng)
                      : generate_inverse_random(f, C, data_rng);
    inputs.push_back(std::move(y));
    targets.push_back(f.encode(x));
  }

  auto params = numerics::MlpParams::random({n, cfg.hidden, m}, init_rng);
  auto adam = numerics::AdamState::init(params.shape(), cfg.learning_rate);
  auto grads = numerics::MlpParams::zeros(params.shape());

  // The attacker net ends in a plain linear head (no unit normalization), so
  // it carries its own forward/backward instead of the numerics kernel.
  auto forward = [&](std::span<const double> in, std::vector<double>& hidden_pre,
                     std::vector<double>& hidden_act, std::vector<double>& out) {
    hidden_pre.resize(cfg.hidden);
    hidden_act.resize(cfg.hidden);
    for (std::size_t j = 0; j < cfg.hidden; ++j) {
      const double* row = &params.w1[j * n];
      double acc = params.b1[j];
      for (std::size_t i = 0; i < n; ++i) acc += row[i] * in[i];
      hidden_pre[j] = acc;
      hidden_act[j] = acc > 0.0 ? acc : 0.0;
    }
    out.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double* row = &params.w2[k * cfg.hidden];
      double acc = params.b2[k];
      for (std::size_t j = 0; j < cfg.hidden; ++j) acc += row[j] * hidden_act[j];
      out[k] = acc;
    }
  };

  std::vector<double> hp, ha, out, gout(m), gh(cfg.hidden);
  auto recovery = [&]() {
    forward(y_t, hp, ha, out);
    return del::error_rate(detail::decode_labels(out, C), x_t_eval);
  };

  InverseAttackResult result;
  result.recovery_error.push_back(recovery());

  std::vector<std::uint32_t> order(cfg.dataset_size);
  std::iota(order.begin(), order.end(), 0u);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = cfg.dataset_size; i > 1; --i) {
      auto j = static_cast<std::size_t>(shuffle_rng.uniform_below(i));
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t start = 0; start < cfg.dataset_size; start += cfg.batch) {
      const std::size_t end = std::min(start + cfg.batch, cfg.dataset_size);
      const double scale = 2.0 / (static_cast<double>(end - start) * static_cast<double>(m));
      std::fill(grads.w1.begin(), grads.w1.end(), 0.0);
      std::fill(grads.b1.begin(), grads.b1.end(), 0.0);
      std::fill(grads.w2.begin(), grads.w2.end(), 0.0);
      std::fill(grads.b2.begin(), grads.b2.end(), 0.0);
      for (std::size_t idx = start; idx < end; ++idx) {
        const auto& in = inputs[order[idx]];
        const auto& tgt = targets[order[idx]];
        forward(in, hp, ha, out);
        for (std::size_t k = 0; k < m; ++k) gout[k] = scale * (out[k] - tgt[k]);
        for (std::size_t k = 0; k < m; ++k) {
          double g = gout[k];
          grads.b2[k] += g;
          double* grow = &grads.w2[k * cfg.hidden];
          for (std::size_t j = 0; j < cfg.hidden; ++j) grow[j] += g * ha[j];
        }
        std::fill(gh.begin(), gh.end(), 0.0);
        for (std::size_t k = 0; k < m; ++k) {
          const double* row = &params.w2[k * cfg.hidden];
          double g = gout[k];
          for (std::size_t j = 0; j < cfg.hidden; ++j) gh[j] += g * row[j];
        }
        for (std::size_t j = 0; j < cfg.hidden; ++j) {
          if (hp[j] <= 0.0) continue;
          double g = gh[j];
          grads.b1[j] += g;
          double* grow = &grads.w1[j * n];
          for (std::size_t i = 0; i < n; ++i) grow[i] += g * in[i];
        }
      }
      numerics::adam_step(params, grads, adam);
    }
    double err = recovery();
    if (!std::isfinite(err))
      throw TrainingError("train_inverse_attack: diverged at epoch " + std::to_string(epoch));
    result.recovery_error.push_back(err);
  }
  return result;
}

}  // namespace daimon::attacks
