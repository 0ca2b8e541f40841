#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "tiam/audio_io.hpp"
#include "tiam/error.hpp"
#include "tiam/manifest.hpp"
#include "tiam/random.hpp"
#include "tiam/tensor.hpp"
#include "tiam/tnsr.hpp"

namespace tiam::emb {

enum class Source { FileProvider, Synthetic };

/// Deep-feature sequence, T_w x D_w.
struct EmbeddingMatrix {
  Tensor data;
  Source source = Source::FileProvider;

  std::size_t frames() const { return data.rows(); }
  std::size_t dim() const { return data.cols(); }
};

inline EmbeddingMatrix from_tensor(Tensor t, Source source, const std::string& where = {}) {
  if (t.rank() != 2)
    throw Error(Errc::ShapeError, "embeddings must be 2-D, got rank " + std::to_string(t.rank()),
                where);
  if (t.rows() == 0 || t.cols() == 0) throw Error(Errc::ShapeError, "empty embedding", where);
  for (double v : t.values())
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteValue, "embedding holds NaN or Inf", where);
  return {std::move(t), source};
}

inline EmbeddingMatrix load_embedding_file(const std::filesystem::path& path) {
  return from_tensor(tnsr::read_tensor(path), Source::FileProvider, path.string());
}

inline EmbeddingMatrix load_embedding(const data::ManifestRecord& record,
                                      const std::filesystem::path& base_dir) {
  if (!record.embedding_path)
    throw Error(Errc::MissingEmbedding, "record has no embedding_path", record.id);
  const std::filesystem::path p(*record.embedding_path);
  return load_embedding_file(p.is_absolute() ? p : base_dir / p);
}

/// Per-feature class offset used by synthetic embeddings: +strength/2 on even
/// feature indices and -strength/2 on odd ones for Rhythmic, negated for
/// Unrhythmic. The class means therefore differ by `strength` in every feature.
inline std::vector<double> class_bias(std::size_t d, Label label, double strength = 1.0) {
  const double sign = label == Label::Rhythmic ? 1.0 : -1.0;
  std::vector<double> b(d);
  for (std::size_t j = 0; j < d; ++j) b[j] = sign * 0.5 * strength * (j % 2 == 0 ? 1.0 : -1.0);
  return b;
}

/// Deterministic standard-normal matrix keyed by (clip_id, seed), plus
/// class_bias on every row when a class is given.
inline EmbeddingMatrix synth_embedding(std::string_view clip_id, std::uint64_t seed,
                                       std::size_t t, std::size_t d,
                                       std::optional<Label> class_signal = std::nullopt,
                                       double strength = 1.0) {
  if (t == 0 || d == 0) throw Error(Errc::ShapeError, "t and d must be >= 1", std::string(clip_id));
  Rng rng(mix_seed(fnv1a(clip_id), seed));
  Tensor m = Tensor::matrix(t, d);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.normal();
  if (class_signal) {
    const auto bias = class_bias(d, *class_signal, strength);
    for (std::size_t r = 0; r < t; ++r)
      for (std::size_t c = 0; c < d; ++c) m(r, c) += bias[c];
  }
  return {std::move(m), Source::Synthetic};
}

/// Bounded LRU cache of loaded embedding files, keyed by path. Safe for
/// concurrent readers; returned matrices are shared and immutable.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::size_t capacity = 256) : capacity_(capacity) {}

  std::shared_ptr<const EmbeddingMatrix> get(const std::filesystem::path& path) {
    const std::string key = path.lexically_normal().string();
    {
      std::lock_guard lock(mutex_);
      if (auto it = index_.find(key); it != index_.end()) {
        order_.splice(order_.begin(), order_, it->second.second);
        return it->second.first;
      }
    }
    auto loaded = std::make_shared<const EmbeddingMatrix>(load_embedding_file(path));
    std::lock_guard lock(mutex_);
    if (auto it = index_.find(key); it != index_.end()) return it->second.first;
    order_.push_front(key);
    index_.emplace(key, std::make_pair(loaded, order_.begin()));
    while (index_.size() > capacity_) {
      index_.erase(order_.back());
      order_.pop_back();
    }
    return loaded;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return index_.size();
  }

 private:
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<std::string> order_;
  std::unordered_map<std::string,
                     std::pair<std::shared_ptr<const EmbeddingMatrix>, std::list<std::string>::iterator>>
      index_;
};

}  // namespace tiam::emb
