#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <algorithm>
#include <span>
#include <vector>

namespace tiam::dsp {

/// Number of full frames of `frame_len` samples at stride `hop` in a signal of
/// `n` samples, without padding. Zero when the signal is shorter than a frame.
constexpr std::size_t frame_count(std::size_t n, std::size_t frame_len,
                                  std::size_t hop) {
  if (n < frame_len || hop == 0) return 0;
  return 1 + (n - frame_len) / hop;
}

/// Periodic Hann window (the DFT-even form used for spectral analysis).
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  return w;
}

constexpr bool is_power_of_two(std::size_t n) { return n && !(n & (n - 1)); }

/// Precomputed radix-2 FFT of a fixed length. Non-power-of-two lengths fall
/// back to a direct DFT. Immutable after construction, so one plan can be
/// shared across threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n), twiddle_(n / 2 + 1) {
    for (std::size_t k = 0; k < twiddle_.size(); ++k) {
      const double th = -2.0 * std::numbers::pi * static_cast<double>(k) /
                        static_cast<double>(n);
      twiddle_[k] = {std::cos(th), std::sin(th)};
    }
  }

  std::size_t size() const { return n_; }

  void forward(std::vector<std::complex<double>>& a) const {
    const std::size_t n = n_;
    a.resize(n);
    if (n <= 1) return;
    if (!is_power_of_two(n)) {
      std::vector<std::complex<double>> out(n);
      for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc{};
        for (std::size_t t = 0; t < n; ++t) {
          const double ang = -2.0 * std::numbers::pi *
                             static_cast<double>((k * t) % n) / static_cast<double>(n);
          acc += a[t] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
      }
      a.swap(out);
      return;
    }
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n / len;
      for (std::size_t i = 0; i < n; i += len) {
        for (std::size_t k = 0; k < half; ++k) {
          const auto u = a[i + k];
          const auto v = a[i + k + half] * twiddle_[k * stride];
          a[i + k] = u + v;
          a[i + k + half] = u - v;
        }
      }
    }
  }

  /// Windowed, zero-padded one-sided spectrum: bins 0..n/2.
  std::vector<std::complex<double>> rfft_windowed(std::span<const double> frame,
                                                  std::span<const double> window) const {
    std::vector<std::complex<double>> buf(n_);
    const std::size_t m = std::min(frame.size(), n_);
    for (std::size_t i = 0; i < m; ++i) buf[i] = frame[i] * window[i];
    forward(buf);
    buf.resize(n_ / 2 + 1);
    return buf;
  }

 private:
  std::size_t n_;
  std::vector<std::complex<double>> twiddle_;
};

inline std::vector<double> power_spectrum(std::span<const std::complex<double>> spec) {
  std::vector<double> p(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) p[k] = std::norm(spec[k]);
  return p;
}

inline std::vector<double> magnitude_spectrum(std::span<const std::complex<double>> spec) {
  std::vector<double> m(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) m[k] = std::abs(spec[k]);
  return m;
}

}  // namespace tiam::dsp
