#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tiam/dsp.hpp"
#include "tiam/error.hpp"

namespace tiam {

inline constexpr int kCanonicalRate = 16000;
inline constexpr double kCanonicalClipSeconds = 15.0;
inline constexpr std::size_t kCanonicalClipSamples = 240000;

enum class Label : int { Rhythmic = 0, Unrhythmic = 1 };

inline constexpr std::array<std::string_view, 2> kLabelNames{"rhythmic", "unrhythmic"};

enum class Discipline {
  Chinese, Maths, English, Physics, Chemistry, Biology, Politics, History, Geography
};

inline constexpr std::array<std::string_view, 9> kDisciplineNames{
    "Chinese", "Maths", "English", "Physics", "Chemistry",
    "Biology", "Politics", "History", "Geography"};

inline std::string_view to_string(Label l) { return kLabelNames[static_cast<int>(l)]; }
inline std::string_view to_string(Discipline d) {
  return kDisciplineNames[static_cast<int>(d)];
}

inline std::optional<Label> parse_label(std::string_view s) {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i)
    if (s == kLabelNames[i]) return static_cast<Label>(i);
  return std::nullopt;
}

inline std::optional<Discipline> parse_discipline(std::string_view s) {
  for (std::size_t i = 0; i < kDisciplineNames.size(); ++i)
    if (s == kDisciplineNames[i]) return static_cast<Discipline>(i);
  return std::nullopt;
}

/// Mono signal with samples normalized to [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate_hz = kCanonicalRate;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

struct Clip {
  std::string id;
  AudioBuffer audio;
  std::optional<Label> label;
  std::optional<Discipline> discipline;
  std::optional<std::string> teacher_id;

  /// True when the clip has the corpus format: 16 kHz and exactly 15 s.
  bool is_canonical() const {
    return audio.sample_rate_hz == kCanonicalRate &&
           audio.samples.size() == kCanonicalClipSamples;
  }
};

namespace audio {

namespace detail {

inline std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}
inline void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace detail

struct ReadOptions {
  /// Average interleaved channels into one instead of rejecting multichannel input.
  bool downmix = false;
};

/// Parse a RIFF/WAVE PCM-16 little-endian file. Chunks other than "fmt " and
/// "data" are skipped.
inline AudioBuffer read_wav(const std::filesystem::path& path, ReadOptions opts = {}) {
  const std::string where = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open file", where);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::string_view(reinterpret_cast<const char*>(bytes.data()), 4) != "RIFF" ||
      std::string_view(reinterpret_cast<const char*>(bytes.data() + 8), 4) != "WAVE")
    throw Error(Errc::BadMagic, "not a RIFF/WAVE file", where);

  std::optional<std::uint16_t> channels;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string_view id(reinterpret_cast<const char*>(bytes.data() + pos), 4);
    const std::uint32_t size = detail::le32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + 16 > bytes.size())
        throw Error(Errc::UnsupportedEncoding, "truncated fmt chunk", where);
      const auto format = detail::le16(bytes.data() + body);
      channels = detail::le16(bytes.data() + body + 2);
      rate = detail::le32(bytes.data() + body + 4);
      const auto bits = detail::le16(bytes.data() + body + 14);
      if (format != 1)
        throw Error(Errc::UnsupportedEncoding,
                    "format tag " + std::to_string(format) + " is not PCM", where);
      if (bits != 16)
        throw Error(Errc::UnsupportedEncoding,
                    "bit depth " + std::to_string(bits) + " is not 16", where);
      if (*channels == 0) throw Error(Errc::UnsupportedEncoding, "zero channels", where);
      if (*channels > 1 && !opts.downmix)
        throw Error(Errc::ChannelsUnsupported,
                    std::to_string(*channels) + " channels; enable downmix", where);
      if (rate == 0) throw Error(Errc::UnsupportedEncoding, "zero sample rate", where);
    } else if (id == "data") {
      if (!channels) throw Error(Errc::UnsupportedEncoding, "data chunk before fmt", where);
      const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
      const std::size_t nch = *channels;
      const std::size_t frames = avail / (2 * nch);
      AudioBuffer buf;
      buf.sample_rate_hz = static_cast<int>(rate);
      buf.samples.resize(frames);
      for (std::size_t f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (std::size_t c = 0; c < nch; ++c) {
          const auto raw = static_cast<std::int16_t>(
              detail::le16(bytes.data() + body + 2 * (f * nch + c)));
          acc += raw / 32768.0;
        }
        buf.samples[f] = nch == 1 ? acc : acc / static_cast<double>(nch);
      }
      return buf;
    }
    pos = body + size + (size & 1u);
  }
  throw Error(Errc::UnsupportedEncoding, "no data chunk", where);
}

/// Encode as mono PCM-16. Samples are clamped to [-1, 1] and rounded to the
/// nearest code; +1.0 saturates at 32767.
inline std::string encode_wav(const AudioBuffer& audio) {
  const auto n = static_cast<std::uint32_t>(audio.samples.size());
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  detail::put32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  detail::put32(out, 16);
  detail::put16(out, 1);
  detail::put16(out, 1);
  detail::put32(out, static_cast<std::uint32_t>(audio.sample_rate_hz));
  detail::put32(out, static_cast<std::uint32_t>(audio.sample_rate_hz) * 2);
  detail::put16(out, 2);
  detail::put16(out, 16);
  out += "data";
  detail::put32(out, 2 * n);
  for (double s : audio.samples) {
    const double v = std::clamp(s, -1.0, 1.0) * 32768.0;
    const auto code = static_cast<std::int16_t>(std::clamp(std::lround(v), -32768L, 32767L));
    detail::put16(out, static_cast<std::uint16_t>(code));
  }
  return out;
}

inline void write_wav(const std::filesystem::path& path, const AudioBuffer& audio) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open for writing", path.string());
  const auto bytes = encode_wav(audio);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "write failed", path.string());
}

/// Split into consecutive non-overlapping windows; a trailing remainder shorter
/// than one window is dropped. Clip ids are "<source>#<k>".
inline std::vector<Clip> segment(const AudioBuffer& audio, std::string_view source,
                                 double clip_seconds = kCanonicalClipSeconds) {
  if (audio.sample_rate_hz != kCanonicalRate)
    throw Error(Errc::WrongSampleRate,
                "expected 16000 Hz, got " + std::to_string(audio.sample_rate_hz),
                std::string(source));
  if (!(clip_seconds > 0.0))
    throw Error(Errc::BadConfig, "clip_seconds must be positive", std::string(source));
  const auto window = static_cast<std::size_t>(std::llround(clip_seconds * audio.sample_rate_hz));
  std::vector<Clip> clips;
  if (window == 0) return clips;
  const std::size_t count = audio.samples.size() / window;
  clips.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Clip c;
    c.id = std::string(source) + "#" + std::to_string(k);
    c.audio.sample_rate_hz = audio.sample_rate_hz;
    const auto first = audio.samples.begin() + static_cast<std::ptrdiff_t>(k * window);
    c.audio.samples.assign(first, first + static_cast<std::ptrdiff_t>(window));
    clips.push_back(std::move(c));
  }
  return clips;
}

/// 8-bit grayscale raster, row-major, row 0 at the top.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

/// Log-magnitude STFT image: rows are frequency bins with bin 0 at the bottom,
/// columns are frames. Levels are mapped linearly onto 0..255 over the grid's
/// own [min, max]; a constant grid renders as all zeros.
inline GrayImage render_spectrogram(const AudioBuffer& audio, std::size_t n_fft = 512,
                                    std::size_t hop = 160) {
  if (audio.samples.empty()) throw Error(Errc::EmptyAudio, "no samples to render");
  if (n_fft < 2 || hop == 0) throw Error(Errc::BadConfig, "n_fft >= 2 and hop >= 1 required");
  const std::size_t frames = dsp::frame_count(audio.samples.size(), n_fft, hop);
  if (frames == 0)
    throw Error(Errc::SignalTooShort, "signal shorter than one " + std::to_string(n_fft) +
                                          "-sample frame");
  const std::size_t bins = n_fft / 2 + 1;
  const auto window = dsp::hann_window(n_fft);
  const dsp::FftPlan plan(n_fft);

  std::vector<double> level(bins * frames);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t f = 0; f < frames; ++f) {
    const std::span<const double> frame(audio.samples.data() + f * hop, n_fft);
    const auto spec = plan.rfft_windowed(frame, window);
    for (std::size_t k = 0; k < bins; ++k) {
      const double v = 20.0 * std::log10(std::max(std::abs(spec[k]), 1e-10));
      level[k * frames + f] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }

  GrayImage img{frames, bins, std::vector<std::uint8_t>(bins * frames, 0)};
  const double range = hi - lo;
  for (std::size_t k = 0; k < bins; ++k) {
    const std::size_t row = bins - 1 - k;
    for (std::size_t f = 0; f < frames; ++f) {
      const double v = range > 0.0 ? (level[k * frames + f] - lo) / range * 255.0 : 0.0;
      img.pixels[row * frames + f] = static_cast<std::uint8_t>(std::lround(v));
    }
  }
  return img;
}

/// Binary portable graymap ("P5", maxval 255).
inline void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open for writing", path.string());
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw Error(Errc::IoError, "write failed", path.string());
}

}  // namespace audio
}  // namespace tiam
