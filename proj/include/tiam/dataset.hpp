#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "tiam/audio_io.hpp"
#include "tiam/embeddings.hpp"
#include "tiam/error.hpp"
#include "tiam/llf.hpp"
#include "tiam/manifest.hpp"
#include "tiam/tensor.hpp"
#include "tiam/tnsr.hpp"
#include "tiam/training.hpp"

namespace tiam::data {

inline Tensor to_tensor(const llf::LlfMatrix& m) {
  return Tensor({m.rows, m.cols}, m.data);
}

struct LoadOptions {
  bool need_llf = true;
  bool need_embedding = true;
  llf::LlfConfig llf_config{};
};

/// LLF matrix of a record: read from llf_path when present, otherwise
/// extracted from audio_path.
inline Tensor load_llf(const Manifest& m, const ManifestRecord& r, const llf::Extractor& ex) {
  if (r.llf_path) {
    const auto path = m.resolve(*r.llf_path);
    Tensor t = tnsr::read_tensor(path);
    if (t.rank() != 2 || t.cols() != ex.config().dim())
      throw Error(Errc::ShapeError, "LLF file must be T x " + std::to_string(ex.config().dim()),
                  path.string());
    return t;
  }
  if (r.audio_path) {
    const auto path = m.resolve(*r.audio_path);
    try {
      return to_tensor(ex.extract(audio::read_wav(path)));
    } catch (const Error& e) {
      if (!e.where().empty()) throw;
      throw Error(e.code(), e.what(), path.string());
    }
  }
  throw Error(Errc::MissingFeature, "record has neither llf_path nor audio_path", r.id);
}

/// Materialise samples for the records selected by `split` (all records when
/// unset).
inline std::vector<Sample> load_samples(const Manifest& m, std::optional<Split> split,
                                        const LoadOptions& opts) {
  const llf::Extractor ex(opts.llf_config);
  std::vector<Sample> out;
  for (const auto& r : m.records) {
    if (split && r.split != split) continue;
    Sample s;
    s.id = r.id;
    s.label = r.label;
    if (opts.need_llf) s.llf = std::make_shared<const Tensor>(load_llf(m, r, ex));
    if (opts.need_embedding) {
      if (!r.embedding_path)
        throw Error(Errc::MissingFeature, "record has no embedding_path", r.id);
      s.embedding = std::make_shared<const Tensor>(emb::load_embedding(r, m.base_dir).data);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace tiam::data
