#include <gtest/gtest.h>

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tiam/audio_io.hpp"
#include "tiam/random.hpp"

using namespace tiam;

namespace {

void put16(std::string& s, std::uint16_t v) {
  s += char(v & 0xff);
  s += char(v >> 8);
}
void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s += char((v >> (8 * i)) & 0xff);
}

// Hand-assembled WAV so the reader is not tested against its own writer.
std::string wav_bytes(const std::vector<std::int16_t>& codes, std::uint16_t channels = 1,
                      std::uint32_t rate = 16000, std::uint16_t format = 1,
                      std::uint16_t bits = 16, bool extra_chunk = false) {
  std::string fmt, data, body;
  put16(fmt, format);
  put16(fmt, channels);
  put32(fmt, rate);
  put32(fmt, rate * channels * bits / 8);
  put16(fmt, channels * bits / 8);
  put16(fmt, bits);
  for (auto c : codes) put16(data, static_cast<std::uint16_t>(c));
  body = "WAVE";
  if (extra_chunk) {
    body += "LIST";
    put32(body, 3);
    body += "abc";
    body += '\0';  // pad byte
  }
  body += "fmt ";
  put32(body, 16);
  body += fmt;
  body += "data";
  put32(body, static_cast<std::uint32_t>(data.size()));
  body += data;
  std::string out = "RIFF";
  put32(out, static_cast<std::uint32_t>(body.size()));
  return out + body;
}

std::filesystem::path write_file(const std::string& name, const std::string& bytes) {
  static const auto dir = oracle::temp_dir("audio_io");
  const auto p = dir / name;
  std::ofstream(p, std::ios::binary) << bytes;
  return p;
}

AudioBuffer seconds(double s) {
  AudioBuffer a;
  a.samples.assign(static_cast<std::size_t>(s * 16000 + 0.5), 0.0);
  for (std::size_t i = 0; i < a.samples.size(); ++i) a.samples[i] = std::sin(0.001 * i);
  return a;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::IoError;
}

}  // namespace

TEST(ReadWav, FullScaleCodeMapsToJustUnderOne) {
  const auto p = write_file("full.wav", wav_bytes({32767, -32768, 0, 16384}));
  const auto a = audio::read_wav(p);
  ASSERT_EQ(a.samples.size(), 4u);
  EXPECT_EQ(a.sample_rate_hz, 16000);
  EXPECT_DOUBLE_EQ(a.samples[0], 0.999969482421875);
  EXPECT_DOUBLE_EQ(a.samples[1], -1.0);
  EXPECT_DOUBLE_EQ(a.samples[2], 0.0);
  EXPECT_DOUBLE_EQ(a.samples[3], 0.5);
}

TEST(ReadWav, SkipsUnknownChunks) {
  const auto p = write_file("list.wav", wav_bytes({100, -100}, 1, 16000, 1, 16, true));
  EXPECT_EQ(audio::read_wav(p).samples.size(), 2u);
}

TEST(ReadWav, RejectsBadInput) {
  EXPECT_EQ(code_of([] { audio::read_wav(write_file("magic.wav", "RIFX0000WAVE")); }),
            Errc::BadMagic);
  EXPECT_EQ(code_of([] { audio::read_wav(write_file("float.wav", wav_bytes({0, 0}, 1, 16000, 3))); }),
            Errc::UnsupportedEncoding);
  EXPECT_EQ(code_of([] {
              audio::read_wav(write_file("b24.wav", wav_bytes({0, 0, 0}, 1, 16000, 1, 24)));
            }),
            Errc::UnsupportedEncoding);
  EXPECT_EQ(code_of([] { audio::read_wav(write_file("stereo.wav", wav_bytes({1, 2, 3, 4}, 2))); }),
            Errc::ChannelsUnsupported);
  EXPECT_EQ(code_of([] { audio::read_wav("/nonexistent/x.wav"); }), Errc::IoError);
}

TEST(ReadWav, DownmixAveragesChannels) {
  const auto p = write_file("stereo2.wav", wav_bytes({16384, 0, -16384, -16384}, 2));
  const auto a = audio::read_wav(p, {.downmix = true});
  ASSERT_EQ(a.samples.size(), 2u);
  EXPECT_DOUBLE_EQ(a.samples[0], 0.25);
  EXPECT_DOUBLE_EQ(a.samples[1], -0.5);
}

TEST(ReadWav, ErrorCarriesPath) {
  const auto p = write_file("bad.wav", "garbage that is long enough");
  try {
    audio::read_wav(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.where(), p.string());
  }
}

TEST(WriteWav, RoundTripWithinQuantization) {
  Rng rng(7);
  AudioBuffer a;
  a.samples.resize(5000);
  for (auto& s : a.samples) s = rng.uniform(-1.0, 1.0);
  a.samples[0] = 1.0;
  a.samples[1] = -1.0;
  const auto p = write_file("rt.wav", audio::encode_wav(a));
  const auto b = audio::read_wav(p);
  ASSERT_EQ(b.samples.size(), a.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    EXPECT_LE(std::abs(a.samples[i] - b.samples[i]), 1.0 / 32768.0) << i;
}

TEST(Segment, ClipCounts) {
  EXPECT_EQ(audio::segment(seconds(37.0), "a").size(), 2u);
  EXPECT_EQ(audio::segment(seconds(15.0), "a").size(), 1u);
  EXPECT_EQ(audio::segment(seconds(14.9), "a").size(), 0u);
}

TEST(Segment, IdsAndCanonicalShape) {
  const auto clips = audio::segment(seconds(31.0), "lesson7");
  ASSERT_EQ(clips.size(), 2u);
  EXPECT_EQ(clips[0].id, "lesson7#0");
  EXPECT_EQ(clips[1].id, "lesson7#1");
  for (const auto& c : clips) EXPECT_TRUE(c.is_canonical());
}

TEST(Segment, WrongRate) {
  auto a = seconds(20.0);
  a.sample_rate_hz = 44100;
  EXPECT_EQ(code_of([&] { audio::segment(a, "x"); }), Errc::WrongSampleRate);
}

TEST(Segment, ConcatenationIsPrefixProperty) {
  Rng rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    AudioBuffer a;
    a.samples.resize(rng.index(16000 * 50));
    for (auto& s : a.samples) s = rng.uniform(-1.0, 1.0);
    const auto clips = audio::segment(a, "p");
    EXPECT_EQ(clips.size(), a.samples.size() / 240000);
    std::vector<double> joined;
    for (const auto& c : clips) joined.insert(joined.end(), c.audio.samples.begin(), c.audio.samples.end());
    ASSERT_LE(joined.size(), a.samples.size());
    EXPECT_TRUE(std::equal(joined.begin(), joined.end(), a.samples.begin()));
    EXPECT_LT(a.samples.size() - joined.size(), 240000u);
  }
}

TEST(Spectrogram, ConstantGridIsAllZero) {
  AudioBuffer a;
  a.samples.assign(4000, 0.0);
  const auto img = audio::render_spectrogram(a);
  EXPECT_EQ(img.height, 257u);
  EXPECT_TRUE(std::all_of(img.pixels.begin(), img.pixels.end(), [](auto v) { return v == 0; }));
}

TEST(Spectrogram, ToneBrightestAtItsBin) {
  AudioBuffer a;
  a.samples = oracle::sine(1000.0, 240000);
  const auto img = audio::render_spectrogram(a);
  EXPECT_EQ(img.width, 1497u);
  EXPECT_EQ(img.height, 257u);
  // 1000 Hz is bin 32 of a 512-point transform; bin 0 is the bottom row.
  for (std::size_t col : {0u, 700u, 1496u}) {
    std::size_t best_row = 0;
    for (std::size_t r = 0; r < img.height; ++r)
      if (img.at(r, col) > img.at(best_row, col)) best_row = r;
    EXPECT_EQ(img.height - 1 - best_row, 32u);
  }
}

TEST(Spectrogram, FrameCountProperty) {
  Rng rng(11);
  for (int i = 0; i < 30; ++i) {
    const std::size_t n_fft = std::size_t{1} << (4 + rng.index(6));
    const std::size_t hop = 1 + rng.index(300);
    const std::size_t len = n_fft + rng.index(5000);
    AudioBuffer a;
    a.samples.resize(len);
    for (auto& s : a.samples) s = rng.uniform(-1.0, 1.0);
    const auto img = audio::render_spectrogram(a, n_fft, hop);
    EXPECT_EQ(img.width, 1 + (len - n_fft) / hop);
    EXPECT_EQ(img.height, n_fft / 2 + 1);
    EXPECT_EQ(*std::max_element(img.pixels.begin(), img.pixels.end()), 255);
    EXPECT_EQ(*std::min_element(img.pixels.begin(), img.pixels.end()), 0);
  }
}

TEST(Spectrogram, Errors) {
  AudioBuffer empty;
  EXPECT_EQ(code_of([&] { audio::render_spectrogram(empty); }), Errc::EmptyAudio);
  AudioBuffer shorty;
  shorty.samples.assign(100, 0.1);
  EXPECT_EQ(code_of([&] { audio::render_spectrogram(shorty, 512, 160); }), Errc::SignalTooShort);
}

TEST(Spectrogram, PgmHeader) {
  AudioBuffer a;
  a.samples = oracle::sine(440.0, 2000);
  const auto img = audio::render_spectrogram(a, 256, 128);
  const auto p = oracle::temp_dir("pgm") / "s.pgm";
  audio::write_pgm(p, img);
  std::ifstream in(p, std::ios::binary);
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  in.get();
  std::vector<char> rest((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(magic, "P5");
  EXPECT_EQ(w, img.width);
  EXPECT_EQ(h, img.height);
  EXPECT_EQ(maxval, 255u);
  EXPECT_EQ(rest.size(), w * h);
}
