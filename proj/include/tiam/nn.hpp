#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tiam/error.hpp"
#include "tiam/random.hpp"
#include "tiam/tensor.hpp"

namespace tiam::nn {

enum class Mode { Train, Eval };

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  Param() = default;
  Param(std::string n, std::vector<std::size_t> shape)
      : name(std::move(n)), value(shape), grad(std::move(shape)) {}

  void zero_grad() { grad.fill(0.0); }
};

inline void init_uniform(Param& p, Rng& rng, std::size_t fan_in) {
  const double k = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] = rng.uniform(-k, k);
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Numerically stable softmax (max subtracted before exponentiation).
inline void softmax_inplace(std::span<double> x) {
  if (x.empty()) return;
  const double m = *std::max_element(x.begin(), x.end());
  double sum = 0.0;
  for (double& v : x) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : x) v /= sum;
}

inline std::vector<double> softmax(std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  softmax_inplace(y);
  return y;
}

// ---------------------------------------------------------------------------

enum class Activation { None, ReLU, Tanh, Softmax };

/// y = act(W x + b), W is out x in.
class LinearLayer {
 public:
  LinearLayer() = default;
  LinearLayer(const std::string& name, std::size_t in, std::size_t out, Activation act)
      : weight(name + ".weight", {out, in}), bias(name + ".bias", {out}), activation(act) {}

  void init(Rng& rng) {
    init_uniform(weight, rng, in_dim());
    bias.value.fill(0.0);
  }

  std::size_t in_dim() const { return weight.value.cols(); }
  std::size_t out_dim() const { return weight.value.rows(); }

  std::vector<double> forward(std::span<const double> x) const {
    if (x.size() != in_dim())
      throw Error(Errc::DimMismatch, weight.name + ": input has " + std::to_string(x.size()) +
                                         " features, expected " + std::to_string(in_dim()));
    std::vector<double> y(out_dim());
    for (std::size_t o = 0; o < y.size(); ++o) {
      const auto w = weight.value.row(o);
      double acc = bias.value[o];
      for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * x[i];
      y[o] = acc;
    }
    apply(y);
    return y;
  }

  /// Row-wise application to a matrix (rows are independent inputs).
  Tensor forward(const Tensor& x) const {
    if (x.rank() != 2)
      throw Error(Errc::DimMismatch, weight.name + ": matrix input must be rank 2");
    Tensor y = Tensor::matrix(x.rows(), out_dim());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto out = forward(x.row(r));
      std::copy(out.begin(), out.end(), y.row(r).begin());
    }
    return y;
  }

  /// Given the input `x`, the forward output `y` and dL/dy, accumulate
  /// parameter gradients and return dL/dx.
  std::vector<double> backward(std::span<const double> x, std::span<const double> y,
                               std::span<const double> dy) {
    const std::size_t out = out_dim();
    std::vector<double> dz(out);
    switch (activation) {
      case Activation::None:
        std::copy(dy.begin(), dy.end(), dz.begin());
        break;
      case Activation::ReLU:
        for (std::size_t o = 0; o < out; ++o) dz[o] = y[o] > 0.0 ? dy[o] : 0.0;
        break;
      case Activation::Tanh:
        for (std::size_t o = 0; o < out; ++o) dz[o] = dy[o] * (1.0 - y[o] * y[o]);
        break;
      case Activation::Softmax: {
        double dot = 0.0;
        for (std::size_t o = 0; o < out; ++o) dot += dy[o] * y[o];
        for (std::size_t o = 0; o < out; ++o) dz[o] = y[o] * (dy[o] - dot);
        break;
      }
    }
    std::vector<double> dx(in_dim(), 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double g = dz[o];
      if (g == 0.0) continue;
      bias.grad[o] += g;
      auto gw = weight.grad.row(o);
      const auto w = weight.value.row(o);
      for (std::size_t i = 0; i < x.size(); ++i) {
        gw[i] += g * x[i];
        dx[i] += g * w[i];
      }
    }
    return dx;
  }

  Param weight;
  Param bias;
  Activation activation = Activation::None;

 private:
  void apply(std::span<double> y) const {
    switch (activation) {
      case Activation::None: break;
      case Activation::ReLU:
        for (double& v : y) v = std::max(0.0, v);
        break;
      case Activation::Tanh:
        for (double& v : y) v = std::tanh(v);
        break;
      case Activation::Softmax: softmax_inplace(y); break;
    }
  }
};

// ---------------------------------------------------------------------------

/// Inverted dropout: in Train mode each entry is zeroed with probability
/// `rate` and survivors are scaled by 1/(1-rate); Eval mode is the identity.
struct Dropout {
  double rate = 0.0;

  /// Returns the multiplicative mask that was applied (all ones when inactive).
  std::vector<double> forward(std::span<double> x, Mode mode, Rng* rng) const {
    std::vector<double> mask(x.size(), 1.0);
    if (mode == Mode::Eval || rate <= 0.0 || rng == nullptr) return mask;
    const double keep = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < x.size(); ++i) {
      mask[i] = rng->uniform() < rate ? 0.0 : keep;
      x[i] *= mask[i];
    }
    return mask;
  }
};

// ---------------------------------------------------------------------------

struct CrossEntropy {
  double loss = 0.0;
  Tensor grad;  // dL/dlogits, N x C
};

/// Mean over rows of -log softmax(logits)[label], optionally multiplying each
/// row's term by its class weight.
inline CrossEntropy cross_entropy(const Tensor& logits, std::span<const int> labels,
                                  std::span<const double> class_weights = {}) {
  if (logits.rank() != 2 || logits.rows() != labels.size())
    throw Error(Errc::DimMismatch, "logits rows must match label count");
  const std::size_t n = logits.rows();
  const std::size_t c = logits.cols();
  if (!class_weights.empty() && class_weights.size() != c)
    throw Error(Errc::DimMismatch, "one class weight per class required");
  CrossEntropy out{0.0, Tensor::matrix(n, c)};
  if (n == 0) return out;
  for (std::size_t r = 0; r < n; ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= c)
      throw Error(Errc::LabelOutOfRange, "label " + std::to_string(y) + " outside [0, " +
                                             std::to_string(c) + ")");
    const auto row = logits.row(r);
    const double m = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - m);
    const double log_z = m + std::log(sum);
    const double w = class_weights.empty() ? 1.0 : class_weights[static_cast<std::size_t>(y)];
    out.loss += w * (log_z - row[static_cast<std::size_t>(y)]);
    auto g = out.grad.row(r);
    for (std::size_t k = 0; k < c; ++k) {
      const double p = std::exp(row[k] - log_z);
      g[k] = w * (p - (static_cast<int>(k) == y ? 1.0 : 0.0)) / static_cast<double>(n);
    }
  }
  out.loss /= static_cast<double>(n);
  return out;
}

// ---------------------------------------------------------------------------
// Bidirectional LSTM.
//
// Gate layout inside the 4H pre-activation vector: [input | forget | cell | output].
//   z_t = W_ih x_t + W_hh h_{t-1} + b
//   i = sigmoid(z_i), f = sigmoid(z_f), g = tanh(z_g), o = sigmoid(z_o)
//   c_t = f * c_{t-1} + i * g
//   h_t = o * tanh(c_t)
// The backward direction runs the same recurrence over the reversed sequence.

struct LstmDirection {
  Param w_ih;  // 4H x D
  Param w_hh;  // 4H x H
  Param bias;  // 4H

  LstmDirection() = default;
  LstmDirection(const std::string& prefix, std::size_t input, std::size_t hidden)
      : w_ih(prefix + ".w_ih", {4 * hidden, input}),
        w_hh(prefix + ".w_hh", {4 * hidden, hidden}),
        bias(prefix + ".bias", {4 * hidden}) {}
};

/// Per-direction activations kept for backpropagation, indexed by step
/// (step s of the backward direction is time T-1-s).
struct LstmTrace {
  Tensor gates;  // T x 4H, post-activation
  Tensor cells;  // T x H
  Tensor hidden; // T x H
};

struct BiLstmOutput {
  Tensor sequence;              // T x 2H, [forward_t | backward_t]
  std::vector<double> final_fwd;  // forward hidden at t = T-1
  std::vector<double> final_bwd;  // backward hidden at t = 0 (last reversed step)
  LstmTrace fwd_trace;
  LstmTrace bwd_trace;
};

class BiLstmLayer {
 public:
  BiLstmLayer() = default;
  BiLstmLayer(const std::string& name, std::size_t input_dim, std::size_t hidden_dim)
      : fwd(name + ".fwd", input_dim, hidden_dim),
        bwd(name + ".bwd", input_dim, hidden_dim),
        input_dim_(input_dim),
        hidden_dim_(hidden_dim) {}

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_dim() const { return hidden_dim_; }

  void init(Rng& rng) {
    for (auto* d : {&fwd, &bwd}) {
      init_uniform(d->w_ih, rng, input_dim_);
      init_uniform(d->w_hh, rng, hidden_dim_);
      d->bias.value.fill(0.0);
      for (std::size_t j = 0; j < hidden_dim_; ++j) d->bias.value[hidden_dim_ + j] = 1.0;
    }
  }

  BiLstmOutput forward(const Tensor& x) const {
    if (x.rank() != 2 || x.cols() != input_dim_)
      throw Error(Errc::DimMismatch, "BiLSTM input has " + std::to_string(x.cols()) +
                                         " features, expected " + std::to_string(input_dim_));
    if (x.rows() == 0) throw Error(Errc::DimMismatch, "BiLSTM input has no time steps");
    const std::size_t T = x.rows(), H = hidden_dim_;
    BiLstmOutput out;
    out.sequence = Tensor::matrix(T, 2 * H);
    out.fwd_trace = run(fwd, x, false);
    out.bwd_trace = run(bwd, x, true);
    for (std::size_t s = 0; s < T; ++s) {
      auto dst_f = out.sequence.row(s);
      auto dst_b = out.sequence.row(T - 1 - s);
      const auto hf = out.fwd_trace.hidden.row(s);
      const auto hb = out.bwd_trace.hidden.row(s);
      std::copy(hf.begin(), hf.end(), dst_f.begin());
      std::copy(hb.begin(), hb.end(), dst_b.begin() + static_cast<std::ptrdiff_t>(H));
    }
    const auto lf = out.fwd_trace.hidden.row(T - 1);
    const auto lb = out.bwd_trace.hidden.row(T - 1);
    out.final_fwd.assign(lf.begin(), lf.end());
    out.final_bwd.assign(lb.begin(), lb.end());
    return out;
  }

  /// Backpropagate dL/d(sequence) (T x 2H, may be empty for "no sequence
  /// gradient") plus gradients on the two final states. Accumulates parameter
  /// gradients and returns dL/dx.
  Tensor backward(const Tensor& x, const BiLstmOutput& out, const Tensor& d_sequence,
                  std::span<const double> d_final_fwd, std::span<const double> d_final_bwd) {
    const std::size_t T = x.rows();
    Tensor dx = Tensor::matrix(T, input_dim_);
    backprop(fwd, x, out.fwd_trace, d_sequence, 0, d_final_fwd, false, dx);
    backprop(bwd, x, out.bwd_trace, d_sequence, hidden_dim_, d_final_bwd, true, dx);
    return dx;
  }

  LstmDirection fwd;
  LstmDirection bwd;

 private:
  LstmTrace run(const LstmDirection& p, const Tensor& x, bool reverse) const {
    const std::size_t T = x.rows(), D = input_dim_, H = hidden_dim_, G = 4 * H;
    LstmTrace tr{Tensor::matrix(T, G), Tensor::matrix(T, H), Tensor::matrix(T, H)};
    std::vector<double> h(H, 0.0), c(H, 0.0), z(G);
    for (std::size_t s = 0; s < T; ++s) {
      const auto xt = x.row(reverse ? T - 1 - s : s);
      for (std::size_t r = 0; r < G; ++r) {
        double acc = p.bias.value[r];
        const double* wi = p.w_ih.value.row(r).data();
        for (std::size_t k = 0; k < D; ++k) acc += wi[k] * xt[k];
        const double* wh = p.w_hh.value.row(r).data();
        for (std::size_t k = 0; k < H; ++k) acc += wh[k] * h[k];
        z[r] = acc;
      }
      auto gates = tr.gates.row(s);
      auto cell = tr.cells.row(s);
      auto hid = tr.hidden.row(s);
      for (std::size_t j = 0; j < H; ++j) {
        const double i = sigmoid(z[j]);
        const double f = sigmoid(z[H + j]);
        const double g = std::tanh(z[2 * H + j]);
        const double o = sigmoid(z[3 * H + j]);
        gates[j] = i;
        gates[H + j] = f;
        gates[2 * H + j] = g;
        gates[3 * H + j] = o;
        c[j] = f * c[j] + i * g;
        h[j] = o * std::tanh(c[j]);
        cell[j] = c[j];
        hid[j] = h[j];
      }
    }
    return tr;
  }

  void backprop(LstmDirection& p, const Tensor& x, const LstmTrace& tr, const Tensor& d_seq,
                std::size_t col_offset, std::span<const double> d_final, bool reverse,
                Tensor& dx) const {
    const std::size_t T = x.rows(), D = input_dim_, H = hidden_dim_, G = 4 * H;
    std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), dz(G), dh(H);
    for (std::size_t s = T; s-- > 0;) {
      const std::size_t t = reverse ? T - 1 - s : s;
      for (std::size_t j = 0; j < H; ++j) {
        dh[j] = dh_next[j];
        if (d_seq.size() != 0) dh[j] += d_seq(t, col_offset + j);
        if (s == T - 1 && !d_final.empty()) dh[j] += d_final[j];
      }
      const auto gates = tr.gates.row(s);
      const auto cell = tr.cells.row(s);
      for (std::size_t j = 0; j < H; ++j) {
        const double i = gates[j], f = gates[H + j], g = gates[2 * H + j], o = gates[3 * H + j];
        const double tc = std::tanh(cell[j]);
        const double c_prev = s > 0 ? tr.cells(s - 1, j) : 0.0;
        const double d_o = dh[j] * tc;
        const double dc = dc_next[j] + dh[j] * o * (1.0 - tc * tc);
        dz[j] = dc * g * i * (1.0 - i);
        dz[H + j] = dc * c_prev * f * (1.0 - f);
        dz[2 * H + j] = dc * i * (1.0 - g * g);
        dz[3 * H + j] = d_o * o * (1.0 - o);
        dc_next[j] = dc * f;
      }
      const auto xt = x.row(t);
      auto dxt = dx.row(t);
      std::fill(dh_next.begin(), dh_next.end(), 0.0);
      for (std::size_t r = 0; r < G; ++r) {
        const double g = dz[r];
        if (g == 0.0) continue;
        p.bias.grad[r] += g;
        double* gi = &p.w_ih.grad(r, 0);
        const double* wi = &p.w_ih.value(r, 0);
        for (std::size_t k = 0; k < D; ++k) {
          gi[k] += g * xt[k];
          dxt[k] += g * wi[k];
        }
        if (s > 0) {
          double* gh = &p.w_hh.grad(r, 0);
          const double* wh = &p.w_hh.value(r, 0);
          const auto h_prev = tr.hidden.row(s - 1);
          for (std::size_t k = 0; k < H; ++k) {
            gh[k] += g * h_prev[k];
            dh_next[k] += g * wh[k];
          }
        }
      }
    }
  }

  std::size_t input_dim_ = 0;
  std::size_t hidden_dim_ = 0;
};

}  // namespace tiam::nn
