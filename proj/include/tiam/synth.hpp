#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "tiam/audio_io.hpp"
#include "tiam/embeddings.hpp"
#include "tiam/manifest.hpp"
#include "tiam/random.hpp"
#include "tiam/tnsr.hpp"

namespace tiam::data {

struct SynthOptions {
  std::size_t emb_frames = 749;
  std::size_t emb_dim = 768;
  double emb_strength = 1.0;  // class separation of the embedding means
  double noise_level = 0.003;
};

/// A 15 s harmonic tone. Rhythmic clips glide in pitch (about 180 +/- 60 Hz
/// at about 0.5 Hz) and pulse in loudness; Unrhythmic clips hold one pitch
/// and level. Both carry low-level Gaussian noise.
inline AudioBuffer synth_clip_audio(Label label, std::uint64_t seed, double noise_level = 0.003) {
  Rng rng(seed);
  constexpr double sr = kCanonicalRate;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  constexpr double harmonic_norm = 1.0 + 1.0 / 2 + 1.0 / 3 + 1.0 / 4;

  const bool rhythmic = label == Label::Rhythmic;
  const double base = rhythmic ? rng.uniform(170.0, 190.0) : rng.uniform(140.0, 220.0);
  const double depth = rhythmic ? rng.uniform(50.0, 70.0) : 0.0;
  const double rate = rng.uniform(0.4, 0.6);
  const double phase = rng.uniform(0.0, two_pi);
  const double am_rate = rng.uniform(2.5, 3.5);
  const double am_phase = rng.uniform(0.0, two_pi);
  const double level = rng.uniform(0.35, 0.5);

  AudioBuffer a;
  a.samples.resize(kCanonicalClipSamples);
  double theta = rng.uniform(0.0, two_pi);
  for (std::size_t n = 0; n < a.samples.size(); ++n) {
    const double t = static_cast<double>(n) / sr;
    const double f0 = base + depth * std::sin(two_pi * rate * t + phase);
    theta += two_pi * f0 / sr;
    if (theta > two_pi) theta -= two_pi;
    double v = 0.0;
    for (int h = 1; h <= 4; ++h) v += std::sin(h * theta) / h;
    const double amp = rhythmic ? level * (1.0 + 0.6 * std::sin(two_pi * am_rate * t + am_phase))
                                : level;
    a.samples[n] = amp * v / harmonic_norm + noise_level * rng.normal();
  }
  return a;
}

/// Writes <out_dir>/audio/<id>.wav, <out_dir>/emb/<id>.tnsr and
/// <out_dir>/manifest.jsonl; returns the manifest. Records alternate between
/// classes; teachers own four consecutive clips of one class each.
inline Manifest synth_corpus(std::size_t n_per_class, std::uint64_t seed,
                             const std::filesystem::path& out_dir, const SynthOptions& opts = {}) {
  if (n_per_class < 1) throw Error(Errc::BadConfig, "n_per_class must be >= 1");
  std::filesystem::create_directories(out_dir / "audio");
  std::filesystem::create_directories(out_dir / "emb");
  Manifest m;
  m.base_dir = out_dir;
  for (std::size_t i = 0; i < n_per_class; ++i) {
    for (int l = 0; l < 2; ++l) {
      const Label label = static_cast<Label>(l);
      char id[64];
      std::snprintf(id, sizeof id, "synth_%c%05zu", l == 0 ? 'r' : 'u', i);
      const std::uint64_t clip_seed = mix_seed(seed, fnv1a(id));

      ManifestRecord r;
      r.id = id;
      r.label = label;
      r.discipline = static_cast<Discipline>((2 * i + static_cast<std::size_t>(l)) % 9);
      r.teacher_id = "teacher_" + std::string(1, l == 0 ? 'r' : 'u') + std::to_string(i / 4);
      r.audio_path = "audio/" + r.id + ".wav";
      r.embedding_path = "emb/" + r.id + ".tnsr";
      audio::write_wav(out_dir / *r.audio_path, synth_clip_audio(label, clip_seed, opts.noise_level));
      const auto e = emb::synth_embedding(r.id, seed, opts.emb_frames, opts.emb_dim, label,
                                          opts.emb_strength);
      tnsr::write_tensor(out_dir / *r.embedding_path, e.data);
      m.records.push_back(std::move(r));
    }
  }
  write_manifest(out_dir / "manifest.jsonl", m.records);
  return m;
}

}  // namespace tiam::data
