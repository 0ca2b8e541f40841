#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tiam/llf.hpp"
#include "tiam/random.hpp"

using namespace tiam;

namespace {

const llf::LlfConfig kCfg{};

std::vector<double> noise(std::size_t n, std::uint64_t seed, double amp = 1.0) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = amp * rng.normal();
  return x;
}

AudioBuffer buffer(std::vector<double> x) {
  AudioBuffer a;
  a.samples = std::move(x);
  return a;
}

template <class F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::IoError;
}

}  // namespace

TEST(Config, DerivedSizes) {
  EXPECT_EQ(kCfg.frame_len(), 400u);
  EXPECT_EQ(kCfg.hop_len(), 160u);
  EXPECT_EQ(kCfg.min_lag(), 32u);
  EXPECT_EQ(kCfg.max_lag(), 320u);
  EXPECT_EQ(kCfg.dim(), 23u);
}

TEST(FrameSignal, Counts) {
  EXPECT_EQ(llf::frame_signal(buffer(std::vector<double>(240000)), kCfg).size(),
            1 + (240000 - 400) / 160);
  EXPECT_EQ(llf::frame_signal(buffer(std::vector<double>(400)), kCfg).size(), 1u);
  EXPECT_EQ(code_of([] { llf::frame_signal(buffer(std::vector<double>(399)), kCfg); }),
            Errc::SignalTooShort);
}

TEST(FrameSignal, FrameKStartsAtKHop) {
  std::vector<double> x(2000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = double(i);
  const auto a = buffer(x);
  const auto frames = llf::frame_signal(a, kCfg);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    EXPECT_EQ(frames[k].size(), 400u);
    EXPECT_EQ(frames[k][0], double(k * 160));
  }
}

TEST(Mfcc, ZeroFrameOnlyCoefficientZero) {
  const auto c = llf::mfcc(std::vector<double>(400, 0.0), kCfg);
  ASSERT_EQ(c.size(), 20u);
  EXPECT_NEAR(c[0], std::sqrt(40.0) * std::log(1e-10), 1e-9);
  for (std::size_t k = 1; k < c.size(); ++k) EXPECT_NEAR(c[k], 0.0, 1e-9);
}

TEST(Mfcc, MatchesBruteForceOnSine) {
  const auto x = oracle::sine(440.0, 400);
  const auto got = llf::mfcc(x, kCfg);
  const auto want = oracle::mfcc(x);
  for (std::size_t k = 0; k < 20; ++k) EXPECT_NEAR(got[k], want[k], 1e-8) << k;
}

TEST(Mfcc, MatchesBruteForceOnRandomFrames) {
  Rng rng(2024);
  for (int i = 0; i < 20; ++i) {
    auto x = noise(400, 100 + i, rng.uniform(0.01, 1.0));
    const auto got = llf::mfcc(x, kCfg);
    const auto want = oracle::mfcc(x);
    for (std::size_t k = 0; k < 20; ++k) EXPECT_NEAR(got[k], want[k], 1e-8) << i << ":" << k;
  }
}

TEST(Mfcc, BadFrameLength) {
  EXPECT_EQ(code_of([] { llf::mfcc(std::vector<double>(399), kCfg); }), Errc::BadFrameLength);
  EXPECT_EQ(code_of([] { llf::spectral_centroid(std::vector<double>(401), kCfg); }),
            Errc::BadFrameLength);
}

TEST(Zcr, Examples) {
  EXPECT_EQ(llf::zero_crossing_rate(std::vector<double>(400, 0.5)), 0.0);
  std::vector<double> alt(400);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? -1.0 : 1.0;
  EXPECT_EQ(llf::zero_crossing_rate(alt), 1.0);
  const auto s = oracle::sine(100.0, 400);
  const int count = oracle::crossings(s);
  EXPECT_NEAR(count, 5, 1);
  EXPECT_DOUBLE_EQ(llf::zero_crossing_rate(s), count / 399.0);
  EXPECT_EQ(code_of([] { llf::zero_crossing_rate({}); }), Errc::EmptyFrame);
}

TEST(Zcr, ZeroCountsAsNonNegative) {
  EXPECT_EQ(llf::zero_crossing_rate(std::vector<double>{0.0, 1.0, 0.0, 2.0}), 0.0);
  EXPECT_DOUBLE_EQ(llf::zero_crossing_rate(std::vector<double>{0.0, -1.0, 0.0}), 1.0);
}

TEST(Yin, PureSines) {
  for (double hz : {80.0, 123.4, 220.0, 310.0, 480.0}) {
    const auto x = oracle::sine(hz, 800, 16000.0, 0.7, 0.3);
    EXPECT_NEAR(llf::pitch_yin(x, kCfg), hz, 2.0) << hz;
  }
}

TEST(Yin, UnvoicedIsZero) {
  EXPECT_EQ(llf::pitch_yin(noise(800, 12345), kCfg), 0.0);
  EXPECT_EQ(llf::pitch_yin(std::vector<double>(800, 0.0), kCfg), 0.0);
}

TEST(Yin, FrameTooShort) {
  EXPECT_EQ(code_of([] { llf::pitch_yin(std::vector<double>(639), kCfg); }),
            Errc::FrameTooShortForPitch);
}

TEST(Centroid, Tones) {
  EXPECT_EQ(llf::spectral_centroid(std::vector<double>(400, 0.0), kCfg), 0.0);
  EXPECT_NEAR(llf::spectral_centroid(oracle::sine(1000.0, 400), kCfg), 1000.0, 20.0);
  auto two = oracle::sine(500.0, 400);
  const auto hi = oracle::sine(1500.0, 400);
  for (std::size_t i = 0; i < two.size(); ++i) two[i] += hi[i];
  EXPECT_NEAR(llf::spectral_centroid(two, kCfg), 1000.0, 25.0);
}

TEST(Centroid, MatchesDirectDft) {
  const auto x = noise(400, 77);
  const auto p = oracle::hann_power(x, 512);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    num += k * 16000.0 / 512.0 * std::sqrt(p[k]);
    den += std::sqrt(p[k]);
  }
  EXPECT_NEAR(llf::spectral_centroid(x, kCfg), num / den, 1e-8);
}

TEST(Filterbank, Properties) {
  const auto fb = llf::mel_filterbank(kCfg);
  ASSERT_EQ(fb.size(), 40u);
  const double top = oracle::slaney_mel(8000.0);
  for (std::size_t m = 0; m < fb.size(); ++m) {
    ASSERT_EQ(fb[m].size(), 257u);
    const double lo = oracle::slaney_hz(top * m / 41.0);
    const double hi = oracle::slaney_hz(top * (m + 2) / 41.0);
    bool any = false;
    for (std::size_t k = 0; k < fb[m].size(); ++k) {
      const double f = k * 16000.0 / 512.0;
      EXPECT_GE(fb[m][k], 0.0);
      if (f <= lo || f >= hi) EXPECT_EQ(fb[m][k], 0.0) << m << " " << k;
      any = any || fb[m][k] > 0.0;
    }
    EXPECT_TRUE(any) << m;
  }
}

TEST(MelScale, RoundTrip) {
  for (double hz : {0.0, 250.0, 999.0, 1000.0, 1001.0, 4000.0, 8000.0}) {
    EXPECT_NEAR(llf::mel_to_hz(llf::hz_to_mel(hz)), hz, 1e-9);
    EXPECT_NEAR(llf::hz_to_mel(hz), oracle::slaney_mel(hz), 1e-9);
  }
}

TEST(Dct, InverseRecoversInput) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(40);
    for (auto& v : x) v = rng.uniform(-30.0, 5.0);
    const auto back = llf::idct2(llf::dct2(x, 40));
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1e-9);
  }
}

TEST(Dct, ConstantVectorHasOnlyDcTerm) {
  const auto c = llf::dct2(std::vector<double>(40, 2.5), 20);
  EXPECT_NEAR(c[0], 2.5 * std::sqrt(40.0), 1e-12);
  for (std::size_t k = 1; k < c.size(); ++k) EXPECT_NEAR(c[k], 0.0, 1e-12);
}

TEST(Extract, ShapeAndColumns) {
  const auto m = llf::extract_llf(buffer(oracle::sine(220.0, 240000, 16000.0, 0.5)));
  EXPECT_EQ(m.rows, 1498u);
  EXPECT_EQ(m.cols, 23u);
  ASSERT_EQ(m.frame_times_s.size(), 1498u);
  EXPECT_DOUBLE_EQ(m.frame_times_s[10], 0.1);
  const llf::Columns col{20};
  for (std::size_t r = 0; r < m.rows; ++r) EXPECT_NEAR(m.at(r, col.pitch()), 220.0, 2.0) << r;
  EXPECT_NEAR(m.at(700, col.centroid()), 220.0, 40.0);
}

TEST(Extract, ZeroClipRowsIdentical) {
  const auto m = llf::extract_llf(buffer(std::vector<double>(240000, 0.0)));
  for (std::size_t r = 1; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) ASSERT_EQ(m.at(r, c), m.at(0, c));
}

TEST(Extract, RejectsNonCanonicalClip) {
  Clip c;
  c.audio = buffer(std::vector<double>(1000));
  EXPECT_EQ(code_of([&] { llf::extract_llf(c); }), Errc::WrongSampleRate);
}

TEST(Extract, ScalingInvarianceProperty) {
  Rng rng(99);
  const llf::Extractor ex(kCfg);
  const llf::Columns col{20};
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<double> x = oracle::sine(rng.uniform(90.0, 400.0), 4000, 16000.0, 0.3);
    const auto n = noise(4000, 500 + trial, 0.05);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += n[i];
    const double alpha = rng.uniform(0.1, 3.0);
    auto y = x;
    for (auto& v : y) v *= alpha;
    const auto a = ex.extract(buffer(x));
    const auto b = ex.extract(buffer(y));
    for (std::size_t r = 0; r < a.rows; ++r) {
      EXPECT_DOUBLE_EQ(a.at(r, col.zcr()), b.at(r, col.zcr()));
      EXPECT_NEAR(a.at(r, col.pitch()), b.at(r, col.pitch()), 1e-6);
      EXPECT_NEAR(a.at(r, col.centroid()), b.at(r, col.centroid()), 1e-6);
      EXPECT_NEAR(b.at(r, 0) - a.at(r, 0), 2.0 * std::log(alpha) * std::sqrt(40.0), 1e-6);
      for (std::size_t c = 1; c < 20; ++c) EXPECT_NEAR(a.at(r, c), b.at(r, c), 1e-6);
    }
  }
}

TEST(Extract, RandomSignalInvariants) {
  Rng rng(1234);
  const llf::Extractor ex(kCfg);
  const llf::Columns col{20};
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 640 + rng.index(3000);
    std::vector<double> x(n);
    const double amp = rng.uniform(1e-3, 1.0);
    for (auto& v : x) v = amp * rng.uniform(-1.0, 1.0);
    const auto m = ex.extract(buffer(x));
    ASSERT_EQ(m.rows, 1 + (n - 400) / 160);
    ASSERT_EQ(m.cols, 23u);
    for (std::size_t r = 0; r < m.rows; ++r) {
      for (std::size_t c = 0; c < m.cols; ++c) ASSERT_TRUE(std::isfinite(m.at(r, c)));
      EXPECT_GE(m.at(r, col.zcr()), 0.0);
      EXPECT_LE(m.at(r, col.zcr()), 1.0);
      const double p = m.at(r, col.pitch());
      EXPECT_TRUE(p == 0.0 || (p >= 50.0 && p <= 500.0)) << p;
      EXPECT_GE(m.at(r, col.centroid()), 0.0);
      EXPECT_LE(m.at(r, col.centroid()), 8000.0);
    }
  }
}
