#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tiam/audio_io.hpp"
#include "tiam/dsp.hpp"
#include "tiam/error.hpp"

namespace tiam::llf {

struct LlfConfig {
  int sample_rate_hz = kCanonicalRate;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  std::size_t n_fft = 512;
  std::size_t n_mels = 40;
  std::size_t n_mfcc = 20;
  double fmin_hz = 50.0;  // pitch search range
  double fmax_hz = 500.0;
  double mel_fmax_hz = 8000.0;
  double power_floor = 1e-10;
  double yin_threshold = 0.1;

  std::size_t frame_len() const {
    return static_cast<std::size_t>(std::lround(frame_ms * sample_rate_hz / 1000.0));
  }
  std::size_t hop_len() const {
    return static_cast<std::size_t>(std::lround(hop_ms * sample_rate_hz / 1000.0));
  }
  /// Shortest YIN lag (highest pitch) and longest lag (lowest pitch), in samples.
  std::size_t min_lag() const {
    return static_cast<std::size_t>(std::floor(sample_rate_hz / fmax_hz));
  }
  std::size_t max_lag() const {
    return static_cast<std::size_t>(std::ceil(sample_rate_hz / fmin_hz));
  }
  /// Pitch analysis window: two periods of the lowest searchable pitch.
  std::size_t pitch_window() const { return 2 * max_lag(); }
  std::size_t dim() const { return n_mfcc + 3; }

  void validate() const {
    if (sample_rate_hz <= 0) throw Error(Errc::BadConfig, "sample_rate_hz must be positive");
    if (!(hop_ms > 0.0) || frame_ms < hop_ms)
      throw Error(Errc::BadConfig, "need frame_ms >= hop_ms > 0");
    if (frame_len() == 0 || hop_len() == 0) throw Error(Errc::BadConfig, "empty frame or hop");
    if (n_fft < frame_len()) throw Error(Errc::BadConfig, "n_fft shorter than the frame");
    if (n_mfcc == 0 || n_mfcc > n_mels) throw Error(Errc::BadConfig, "need 0 < n_mfcc <= n_mels");
    if (!(fmin_hz > 0.0) || !(fmin_hz < fmax_hz) || fmax_hz > sample_rate_hz / 2.0)
      throw Error(Errc::BadConfig, "need 0 < fmin_hz < fmax_hz <= sample_rate/2");
    if (!(mel_fmax_hz > 0.0) || mel_fmax_hz > sample_rate_hz / 2.0)
      throw Error(Errc::BadConfig, "mel_fmax_hz must lie in (0, sample_rate/2]");
  }
};

/// Column layout of an LLF row.
struct Columns {
  std::size_t n_mfcc;
  std::size_t zcr() const { return n_mfcc; }
  std::size_t pitch() const { return n_mfcc + 1; }
  std::size_t centroid() const { return n_mfcc + 2; }
};

/// T x D frame matrix: [mfcc_0..mfcc_{n-1} | zcr | pitch Hz | centroid Hz].
struct LlfMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  std::vector<double> frame_times_s;

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

// ---------------------------------------------------------------------------
// Mel scale (Slaney: linear below 1 kHz, logarithmic above).

inline double hz_to_mel(double hz) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  constexpr double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (hz < min_log_hz) return hz / f_sp;
  return min_log_mel + std::log(hz / min_log_hz) / logstep;
}

inline double mel_to_hz(double mel) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  constexpr double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (mel < min_log_mel) return mel * f_sp;
  return min_log_hz * std::exp(logstep * (mel - min_log_mel));
}

/// n_mels x (n_fft/2 + 1) triangular filters, equally spaced in mel between
/// 0 Hz and mel_fmax_hz, each scaled by 2 / (bandwidth in Hz).
inline std::vector<std::vector<double>> mel_filterbank(const LlfConfig& cfg) {
  const std::size_t bins = cfg.n_fft / 2 + 1;
  const double mel_hi = hz_to_mel(cfg.mel_fmax_hz);
  std::vector<double> edges(cfg.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_hi * static_cast<double>(i) / static_cast<double>(cfg.n_mels + 1));

  std::vector<std::vector<double>> fb(cfg.n_mels, std::vector<double>(bins, 0.0));
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    const double norm = 2.0 / (hi - lo);
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate_hz / static_cast<double>(cfg.n_fft);
      const double rise = (f - lo) / (mid - lo);
      const double fall = (hi - f) / (hi - mid);
      fb[m][k] = std::max(0.0, std::min(rise, fall)) * norm;
    }
  }
  return fb;
}

/// Orthonormal DCT-II basis, n_out x n_in.
inline std::vector<std::vector<double>> dct_basis(std::size_t n_out, std::size_t n_in) {
  std::vector<std::vector<double>> b(n_out, std::vector<double>(n_in));
  const double n = static_cast<double>(n_in);
  for (std::size_t k = 0; k < n_out; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (std::size_t i = 0; i < n_in; ++i)
      b[k][i] = scale * std::cos(std::numbers::pi * static_cast<double>(k) *
                                 (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n));
  }
  return b;
}

inline std::vector<double> dct2(std::span<const double> x, std::size_t n_out) {
  const auto basis = dct_basis(n_out, x.size());
  std::vector<double> y(n_out, 0.0);
  for (std::size_t k = 0; k < n_out; ++k)
    for (std::size_t i = 0; i < x.size(); ++i) y[k] += basis[k][i] * x[i];
  return y;
}

/// Inverse of the orthonormal DCT-II (i.e. the orthonormal DCT-III).
inline std::vector<double> idct2(std::span<const double> c) {
  const auto basis = dct_basis(c.size(), c.size());
  std::vector<double> x(c.size(), 0.0);
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t k = 0; k < c.size(); ++k) x[i] += basis[k][i] * c[k];
  return x;
}

// ---------------------------------------------------------------------------

inline std::vector<std::span<const double>> frame_signal(const AudioBuffer& audio,
                                                         const LlfConfig& cfg) {
  const std::size_t len = cfg.frame_len();
  const std::size_t hop = cfg.hop_len();
  if (audio.samples.size() < len)
    throw Error(Errc::SignalTooShort, std::to_string(audio.samples.size()) +
                                          " samples is shorter than one " +
                                          std::to_string(len) + "-sample frame");
  const std::size_t count = dsp::frame_count(audio.samples.size(), len, hop);
  std::vector<std::span<const double>> frames;
  frames.reserve(count);
  for (std::size_t k = 0; k < count; ++k) frames.emplace_back(audio.samples.data() + k * hop, len);
  return frames;
}

inline double zero_crossing_rate(std::span<const double> frame) {
  if (frame.empty()) throw Error(Errc::EmptyFrame, "zero-length frame");
  if (frame.size() == 1) return 0.0;
  std::size_t changes = 0;
  for (std::size_t i = 1; i < frame.size(); ++i)
    changes += (frame[i - 1] >= 0.0) != (frame[i] >= 0.0);
  return static_cast<double>(changes) / static_cast<double>(frame.size() - 1);
}

/// YIN over lags [sr/fmax, sr/fmin]. Returns 0 when no lag dips below the
/// threshold.
inline double pitch_yin(std::span<const double> frame, const LlfConfig& cfg) {
  const std::size_t max_lag = cfg.max_lag();
  const std::size_t min_lag = std::max<std::size_t>(2, cfg.min_lag());
  if (frame.size() < 2 * max_lag)
    throw Error(Errc::FrameTooShortForPitch,
                std::to_string(frame.size()) + " samples; need " + std::to_string(2 * max_lag));
  const std::size_t width = frame.size() - max_lag;

  // Difference function d(tau) for tau in [0, max_lag + 1].
  std::vector<double> diff(max_lag + 2, 0.0);
  for (std::size_t tau = 1; tau < diff.size() && tau + width <= frame.size(); ++tau) {
    double acc = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      const double d = frame[j] - frame[j + tau];
      acc += d * d;
    }
    diff[tau] = acc;
  }
  const std::size_t last = std::min(diff.size() - 1, frame.size() - width);

  // Cumulative mean normalized difference.
  std::vector<double> cmnd(last + 1, 1.0);
  double running = 0.0;
  for (std::size_t tau = 1; tau <= last; ++tau) {
    running += diff[tau];
    cmnd[tau] = running > 0.0 ? diff[tau] * static_cast<double>(tau) / running : 1.0;
  }

  std::size_t best = 0;
  for (std::size_t tau = min_lag; tau <= std::min(max_lag, last); ++tau) {
    if (cmnd[tau] < cfg.yin_threshold) {
      while (tau + 1 <= std::min(max_lag, last) && cmnd[tau + 1] < cmnd[tau]) ++tau;
      best = tau;
      break;
    }
  }
  if (best == 0) return 0.0;

  double refined = static_cast<double>(best);
  if (best > 1 && best + 1 <= last) {
    const double a = cmnd[best - 1], b = cmnd[best], c = cmnd[best + 1];
    const double denom = a - 2.0 * b + c;
    if (denom > 0.0) refined += 0.5 * (a - c) / denom;
  }
  const double hz = cfg.sample_rate_hz / refined;
  return std::clamp(hz, cfg.fmin_hz, cfg.fmax_hz);
}

/// Precomputed analysis state shared across frames: window, FFT plan, mel
/// filterbank and DCT basis. Read-only after construction.
class Extractor {
 public:
  explicit Extractor(LlfConfig cfg)
      : cfg_(cfg),
        window_((cfg_.validate(), dsp::hann_window(cfg_.frame_len()))),
        plan_(cfg_.n_fft),
        filterbank_(mel_filterbank(cfg_)),
        dct_(dct_basis(cfg_.n_mfcc, cfg_.n_mels)) {}

  const LlfConfig& config() const { return cfg_; }
  const std::vector<std::vector<double>>& filterbank() const { return filterbank_; }

  std::vector<double> mfcc(std::span<const double> frame) const {
    check_frame(frame);
    return mfcc_from_spectrum(plan_.rfft_windowed(frame, window_));
  }

  double spectral_centroid(std::span<const double> frame) const {
    check_frame(frame);
    return centroid_from_spectrum(plan_.rfft_windowed(frame, window_));
  }

  double pitch(std::span<const double> frame) const { return pitch_yin(frame, cfg_); }

  LlfMatrix extract(const AudioBuffer& audio) const {
    if (audio.sample_rate_hz != cfg_.sample_rate_hz)
      throw Error(Errc::WrongSampleRate, "audio at " + std::to_string(audio.sample_rate_hz) +
                                             " Hz, extractor configured for " +
                                             std::to_string(cfg_.sample_rate_hz));
    const auto frames = frame_signal(audio, cfg_);
    const std::size_t n = audio.samples.size();
    const std::size_t pwin = cfg_.pitch_window();
    if (n < pwin)
      throw Error(Errc::FrameTooShortForPitch, std::to_string(n) +
                                                   " samples; pitch needs " +
                                                   std::to_string(pwin));
    const Columns col{cfg_.n_mfcc};
    LlfMatrix out;
    out.rows = frames.size();
    out.cols = cfg_.dim();
    out.data.resize(out.rows * out.cols);
    out.frame_times_s.resize(out.rows);
    const std::size_t hop = cfg_.hop_len();
    const std::size_t len = cfg_.frame_len();
    for (std::size_t t = 0; t < frames.size(); ++t) {
      const auto spec = plan_.rfft_windowed(frames[t], window_);
      const auto coeffs = mfcc_from_spectrum(spec);
      double* row = out.data.data() + t * out.cols;
      std::copy(coeffs.begin(), coeffs.end(), row);
      row[col.zcr()] = zero_crossing_rate(frames[t]);

      // Pitch window centred on the frame centre, clamped inside the signal.
      const std::size_t centre = t * hop + len / 2;
      const std::size_t start = std::min(centre > pwin / 2 ? centre - pwin / 2 : 0, n - pwin);
      row[col.pitch()] = pitch_yin({audio.samples.data() + start, pwin}, cfg_);
      row[col.centroid()] = centroid_from_spectrum(spec);
      out.frame_times_s[t] = static_cast<double>(t * hop) / cfg_.sample_rate_hz;
    }
    return out;
  }

 private:
  void check_frame(std::span<const double> frame) const {
    if (frame.size() != cfg_.frame_len())
      throw Error(Errc::BadFrameLength, "frame has " + std::to_string(frame.size()) +
                                            " samples; expected " +
                                            std::to_string(cfg_.frame_len()));
  }

  std::vector<double> mfcc_from_spectrum(std::span<const std::complex<double>> spec) const {
    const std::size_t bins = spec.size();
    std::vector<double> power(bins);
    for (std::size_t k = 0; k < bins; ++k) power[k] = std::norm(spec[k]);
    std::vector<double> logmel(cfg_.n_mels);
    for (std::size_t m = 0; m < cfg_.n_mels; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < bins; ++k) e += filterbank_[m][k] * power[k];
      logmel[m] = std::log(std::max(e, cfg_.power_floor));
    }
    std::vector<double> out(cfg_.n_mfcc, 0.0);
    for (std::size_t c = 0; c < cfg_.n_mfcc; ++c)
      for (std::size_t m = 0; m < cfg_.n_mels; ++m) out[c] += dct_[c][m] * logmel[m];
    return out;
  }

  double centroid_from_spectrum(std::span<const std::complex<double>> spec) const {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < spec.size(); ++k) {
      const double mag = std::abs(spec[k]);
      num += static_cast<double>(k) * cfg_.sample_rate_hz / static_cast<double>(cfg_.n_fft) * mag;
      den += mag;
    }
    return den < cfg_.power_floor ? 0.0 : num / den;
  }

  LlfConfig cfg_;
  std::vector<double> window_;
  dsp::FftPlan plan_;
  std::vector<std::vector<double>> filterbank_;
  std::vector<std::vector<double>> dct_;
};

inline std::vector<double> mfcc(std::span<const double> frame, const LlfConfig& cfg) {
  return Extractor(cfg).mfcc(frame);
}

inline double spectral_centroid(std::span<const double> frame, const LlfConfig& cfg) {
  return Extractor(cfg).spectral_centroid(frame);
}

inline LlfMatrix extract_llf(const AudioBuffer& audio, const LlfConfig& cfg = {}) {
  return Extractor(cfg).extract(audio);
}

inline LlfMatrix extract_llf(const Clip& clip, const LlfConfig& cfg = {}) {
  if (!clip.is_canonical())
    throw Error(Errc::WrongSampleRate, "clip is not 15 s at 16 kHz", clip.id);
  return extract_llf(clip.audio, cfg);
}

}  // namespace tiam::llf
