#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tiam/audio_io.hpp"
#include "tiam/error.hpp"
#include "tiam/metrics.hpp"
#include "tiam/model.hpp"
#include "tiam/nn.hpp"
#include "tiam/optim.hpp"
#include "tiam/random.hpp"
#include "tiam/tensor.hpp"

namespace tiam {

/// One labelled example. Feature matrices are shared and never mutated.
struct Sample {
  std::string id;
  std::shared_ptr<const Tensor> llf;        // T x D, physical units
  std::shared_ptr<const Tensor> embedding;  // T_w x D_w
  Label label = Label::Rhythmic;

  ModelInput input() const { return {llf.get(), embedding.get()}; }
};

enum class SelectionMetric { MacroF1, Accuracy };

struct TrainConfig {
  double lr = 5e-5;
  int max_epochs = 300;
  std::size_t batch_size = 256;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  int patience_epochs = 20;
  std::uint64_t seed = 0;
  std::optional<std::array<double, 2>> class_weights;
  SelectionMetric selection_metric = SelectionMetric::MacroF1;

  void validate() const {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw Error(Errc::BadConfig, "lr must be finite and >= 0");
    if (batch_size < 1) throw Error(Errc::BadConfig, "batch_size must be >= 1");
    if (max_epochs < 1) throw Error(Errc::BadConfig, "max_epochs must be >= 1");
    if (patience_epochs < 1 || patience_epochs > max_epochs)
      throw Error(Errc::BadConfig, "patience must lie in [1, max_epochs]");
  }

  AdamWConfig optimizer() const { return {lr, beta1, beta2, eps, weight_decay}; }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_accuracy = 0.0;
  double dev_macro_f1 = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  std::string stop_reason;  // "early_stopping" or "max_epochs"
};

struct TrainResult {
  TiamModel model;  // weights from the best epoch
  TrainReport report;
};

inline nlohmann::ordered_json to_json(const EpochRecord& e) {
  return {{"epoch", e.epoch},
          {"loss", e.train_loss},
          {"dev_acc", e.dev_accuracy},
          {"dev_macro_f1", e.dev_macro_f1}};
}

/// Per-column mean and (population) standard deviation over every frame of
/// every training clip. Standard deviations are floored at 1e-6.
inline LlfNorm standardize_llf(const std::vector<Sample>& train) {
  if (train.size() < 2) throw Error(Errc::EmptyDataset, "need at least 2 training records");
  const std::size_t d = train.front().llf ? train.front().llf->cols() : 0;
  if (d == 0) throw Error(Errc::MissingFeature, "training records carry no LLFs", train.front().id);
  std::vector<double> sum(d, 0.0), sq(d, 0.0);
  double count = 0.0;
  for (const auto& s : train) {
    if (!s.llf || s.llf->cols() != d)
      throw Error(Errc::MissingFeature, "missing or mis-shaped LLF matrix", s.id);
    for (std::size_t r = 0; r < s.llf->rows(); ++r) {
      const auto row = s.llf->row(r);
      for (std::size_t c = 0; c < d; ++c) sum[c] += row[c];
    }
    count += static_cast<double>(s.llf->rows());
  }
  LlfNorm n{std::vector<double>(d), std::vector<double>(d)};
  for (std::size_t c = 0; c < d; ++c) n.mean[c] = sum[c] / count;
  for (const auto& s : train)
    for (std::size_t r = 0; r < s.llf->rows(); ++r) {
      const auto row = s.llf->row(r);
      for (std::size_t c = 0; c < d; ++c) sq[c] += (row[c] - n.mean[c]) * (row[c] - n.mean[c]);
    }
  for (std::size_t c = 0; c < d; ++c) n.std[c] = std::max(std::sqrt(sq[c] / count), 1e-6);
  return n;
}

inline std::vector<int> predict_labels(const TiamModel& model, const std::vector<Sample>& samples) {
  std::vector<int> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    try {
      out[i] = model.predict(samples[i].input()).label;
    } catch (Error& e) {
      if (e.code() == Errc::VariantInputMissing)
        throw Error(Errc::MissingFeature, e.what(), samples[i].id);
      throw;
    }
  }
  return out;
}

/// Eval-mode predictions scored against the sample labels.
inline EvalResult evaluate(const TiamModel& model, const std::vector<Sample>& samples) {
  if (samples.empty()) throw Error(Errc::EmptyDataset, "nothing to evaluate");
  const auto predicted = predict_labels(model, samples);
  std::vector<int> truth(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) truth[i] = static_cast<int>(samples[i].label);
  return score(truth, predicted);
}

/// Mean Train-mode cross-entropy of one batch; accumulates gradients.
inline double accumulate_batch(TiamModel& model, const std::vector<Sample>& data,
                               std::span<const std::size_t> batch, std::uint64_t dropout_seed,
                               const TrainConfig& cfg) {
  const double n = static_cast<double>(batch.size());
  std::vector<double> weights;
  if (cfg.class_weights) weights.assign(cfg.class_weights->begin(), cfg.class_weights->end());
  double loss = 0.0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const Sample& s = data[batch[k]];
    Rng rng(mix_seed(dropout_seed, k));
    Tape tape;
    model.forward(s.input(), nn::Mode::Train, &rng, tape);
    // The mean cross-entropy separates over rows, so each example can be
    // back-propagated on its own with the 1/N factor applied here.
    const ForwardRecord rec = tape.take();
    const Tensor logits({1, rec.logits.size()}, rec.logits);
    const int y = static_cast<int>(s.label);
    const auto ce = nn::cross_entropy(logits, std::span<const int>(&y, 1), weights);
    if (!std::isfinite(ce.loss)) throw Error(Errc::NonFiniteLoss, "loss is not finite", s.id);
    loss += ce.loss / n;
    std::vector<double> d(ce.grad.values());
    for (double& v : d) v /= n;
    model.backward(rec, d);
  }
  return loss;
}

/// Minibatch AdamW on mean cross-entropy with early stopping on the dev set.
/// The returned model holds the weights of the best dev epoch (strict
/// improvement required to replace it).
inline TrainResult train(TiamModel model, const std::vector<Sample>& train_set,
                         const std::vector<Sample>& dev_set, const TrainConfig& cfg,
                         std::ostream* metrics = nullptr) {
  cfg.validate();
  if (train_set.empty()) throw Error(Errc::EmptyDataset, "training set is empty");
  if (dev_set.empty()) throw Error(Errc::EmptyDataset, "dev set is empty");

  AdamW opt(cfg.optimizer());
  auto params = model.params();
  Rng shuffle_rng(mix_seed(cfg.seed, 0x5348554646ULL));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult best{model, {}};
  double best_metric = -std::numeric_limits<double>::infinity();
  int since_best = 0;
  TrainReport& report = best.report;
  report.stop_reason = "max_epochs";

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    for (std::size_t start = 0, b = 0; start < order.size(); start += cfg.batch_size, ++b) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      model.zero_grad();
      const auto seed = mix_seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch)), b);
      const double batch_loss = accumulate_batch(model, train_set, batch, seed, cfg);
      loss_sum += batch_loss * static_cast<double>(batch.size());
      opt.step(params);
    }

    const auto dev = evaluate(model, dev_set);
    EpochRecord rec{epoch, loss_sum / static_cast<double>(order.size()), dev.accuracy, dev.macro_f1};
    report.epochs.push_back(rec);
    if (metrics) *metrics << to_json(rec).dump() << '\n';

    const double metric =
        cfg.selection_metric == SelectionMetric::MacroF1 ? dev.macro_f1 : dev.accuracy;
    if (metric > best_metric) {
      best_metric = metric;
      best.model = model;
      report.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience_epochs) {
      report.stop_reason = "early_stopping";
      break;
    }
  }
  return best;
}

}  // namespace tiam
