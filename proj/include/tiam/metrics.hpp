#pragma once

#include <array>
#include <cstdio>
#include <span>
#include <string>

#include <json.hpp>

#include "tiam/audio_io.hpp"
#include "tiam/error.hpp"

namespace tiam {

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

/// Binary classification scores. confusion[true][predicted].
struct EvalResult {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  std::array<std::array<std::size_t, 2>, 2> confusion{};
  std::array<ClassScores, 2> per_class{};
  std::size_t total = 0;
};

/// Undefined ratios (0/0) score 0.
inline EvalResult score(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size())
    throw Error(Errc::DimMismatch, "prediction and label counts differ");
  if (truth.empty()) throw Error(Errc::EmptyDataset, "no records to score");
  EvalResult r;
  r.total = truth.size();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] > 1 || predicted[i] < 0 || predicted[i] > 1)
      throw Error(Errc::LabelOutOfRange, "labels must be 0 or 1");
    ++r.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  const std::size_t correct = r.confusion[0][0] + r.confusion[1][1];
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);
  for (std::size_t c = 0; c < 2; ++c) {
    const std::size_t tp = r.confusion[c][c];
    const std::size_t fp = r.confusion[1 - c][c];
    const std::size_t fn = r.confusion[c][1 - c];
    auto& s = r.per_class[c];
    s.support = tp + fn;
    s.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    s.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    s.f1 = s.precision + s.recall > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
  }
  r.macro_f1 = 0.5 * (r.per_class[0].f1 + r.per_class[1].f1);
  r.weighted_f1 = (r.per_class[0].f1 * static_cast<double>(r.per_class[0].support) +
                   r.per_class[1].f1 * static_cast<double>(r.per_class[1].support)) /
                  static_cast<double>(r.total);
  return r;
}

inline nlohmann::ordered_json to_json(const EvalResult& r) {
  nlohmann::ordered_json j;
  j["n"] = r.total;
  j["accuracy"] = r.accuracy;
  j["macro_f1"] = r.macro_f1;
  j["weighted_f1"] = r.weighted_f1;
  j["confusion"] = {{r.confusion[0][0], r.confusion[0][1]}, {r.confusion[1][0], r.confusion[1][1]}};
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& s = r.per_class[c];
    j["per_class"][std::string(kLabelNames[c])] = {
        {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}};
  }
  return j;
}

inline std::string format_table(const EvalResult& r) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf, "records %zu\naccuracy %.4f\nmacro_f1 %.4f\nweighted_f1 %.4f\n",
                r.total, r.accuracy, r.macro_f1, r.weighted_f1);
  out += buf;
  out += "class        precision  recall  f1      support\n";
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& s = r.per_class[c];
    std::snprintf(buf, sizeof buf, "%-12s %.4f     %.4f  %.4f  %zu\n",
                  std::string(kLabelNames[c]).c_str(), s.precision, s.recall, s.f1, s.support);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "confusion    [[%zu, %zu], [%zu, %zu]] (rows = truth)\n",
                r.confusion[0][0], r.confusion[0][1], r.confusion[1][0], r.confusion[1][1]);
  out += buf;
  return out;
}

}  // namespace tiam
