#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tiam/audio_io.hpp"
#include "tiam/error.hpp"
#include "tiam/nn.hpp"
#include "tiam/random.hpp"
#include "tiam/tensor.hpp"

namespace tiam {

/// Which branches feed the classifier.
enum class Variant { LlfOnly, W2eOnly, ConcatNoAttention, Full };

inline constexpr std::array<std::string_view, 4> kVariantNames{"llf", "w2e", "concat", "full"};

inline std::string_view to_string(Variant v) { return kVariantNames[static_cast<int>(v)]; }
inline std::optional<Variant> parse_variant(std::string_view s) {
  for (std::size_t i = 0; i < kVariantNames.size(); ++i)
    if (s == kVariantNames[i]) return static_cast<Variant>(i);
  return std::nullopt;
}

inline bool uses_llf(Variant v) { return v != Variant::W2eOnly; }
inline bool uses_embedding(Variant v) { return v != Variant::LlfOnly; }

struct TiamConfig {
  std::size_t llf_dim = 23;
  std::size_t lstm_hidden = 128;  // per direction
  std::size_t fl_out = 256;
  std::size_t emb_dim = 768;
  std::size_t fw_out = 256;
  std::size_t n_classes = 2;
  double dropout_lstm = 0.1;
  double dropout_w = 0.5;
  Variant variant = Variant::Full;

  std::size_t classifier_in() const {
    switch (variant) {
      case Variant::LlfOnly: return fl_out;
      case Variant::W2eOnly: return fw_out;
      default: return fl_out + fw_out;
    }
  }

  void validate() const {
    if (!llf_dim || !lstm_hidden || !fl_out || !emb_dim || !fw_out || n_classes < 2)
      throw Error(Errc::BadConfig, "model dimensions must be positive (n_classes >= 2)");
    for (double r : {dropout_lstm, dropout_w})
      if (!(r >= 0.0 && r < 1.0)) throw Error(Errc::BadConfig, "dropout rate must lie in [0, 1)");
  }
};

/// Per-column LLF standardization applied inside the model.
struct LlfNorm {
  std::vector<double> mean;
  std::vector<double> std;

  static LlfNorm identity(std::size_t dim) {
    return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
  }

  Tensor apply(const Tensor& x) const {
    Tensor y = x;
    for (std::size_t r = 0; r < y.rows(); ++r) {
      auto row = y.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mean[c]) / std[c];
    }
    return y;
  }
};

/// Inputs for one clip. Either pointer may be null when the variant does not
/// use that branch.
struct ModelInput {
  const Tensor* llf = nullptr;        // T x llf_dim, physical units
  const Tensor* embedding = nullptr;  // T_w x emb_dim
};

struct Prediction {
  std::vector<double> logits;
  std::vector<double> probabilities;
  int label = 0;
};

/// Index of the largest value; the lowest index wins ties.
inline int argmax(std::span<const double> v) {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

/// Everything a backward pass needs from one forward pass.
struct ForwardRecord {
  // LLF branch
  Tensor llf_std;
  nn::BiLstmOutput lstm;
  std::vector<double> pooled;      // before dropout
  std::vector<double> pooled_drop; // after dropout (input of f_l)
  std::vector<double> mask_lstm;
  std::vector<double> x_l_prime;
  // embedding branch
  std::size_t emb_frames = 0;
  std::vector<double> emb_mean;
  std::vector<double> attention;
  std::vector<double> x_w_prime;       // gated (or plain) pooled embedding
  std::vector<double> x_w_prime_drop;  // input of f_w
  std::vector<double> mask_w;
  std::vector<double> x_w_dprime;
  // head
  std::vector<double> classifier_in;
  std::vector<double> logits;
};

/// Holds at most one pending forward record; backward consumes it.
class Tape {
 public:
  void record(ForwardRecord r) { record_ = std::move(r); }
  bool has_record() const { return record_.has_value(); }
  ForwardRecord take() {
    if (!record_) throw Error(Errc::NoForwardRecorded, "backward called without a forward pass");
    ForwardRecord r = std::move(*record_);
    record_.reset();
    return r;
  }

 private:
  std::optional<ForwardRecord> record_;
};

/// The intonation classifier:
///   x_l'  = ReLU(W_l drop(pool(BiLSTM(x_l))) + b_l)
///   x_att = softmax(W_att x_l' + b_att)            (over the D_w features)
///   x_w'  = x_att * mean_t(x_w)
///   x_w'' = ReLU(W_w drop(x_w') + b_w)
///   logits = W_c [x_l' | x_w''] + b_c
class TiamModel {
 public:
  TiamModel() = default;
  TiamModel(TiamConfig cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    norm_ = LlfNorm::identity(cfg_.llf_dim);
    const Variant v = cfg_.variant;
    if (uses_llf(v)) {
      bilstm_ = nn::BiLstmLayer("bilstm", cfg_.llf_dim, cfg_.lstm_hidden);
      f_l_ = nn::LinearLayer("f_l", 2 * cfg_.lstm_hidden, cfg_.fl_out, nn::Activation::ReLU);
    }
    if (v == Variant::Full)
      f_att_ = nn::LinearLayer("f_att", cfg_.fl_out, cfg_.emb_dim, nn::Activation::Softmax);
    if (uses_embedding(v))
      f_w_ = nn::LinearLayer("f_w", cfg_.emb_dim, cfg_.fw_out, nn::Activation::ReLU);
    classifier_ = nn::LinearLayer("classifier", cfg_.classifier_in(), cfg_.n_classes,
                                  nn::Activation::None);
    Rng rng(seed);
    if (uses_llf(v)) {
      bilstm_.init(rng);
      f_l_.init(rng);
    }
    if (v == Variant::Full) f_att_.init(rng);
    if (uses_embedding(v)) f_w_.init(rng);
    classifier_.init(rng);
  }

  const TiamConfig& config() const { return cfg_; }
  const LlfNorm& llf_norm() const { return norm_; }
  void set_llf_norm(LlfNorm n) {
    if (n.mean.size() != cfg_.llf_dim || n.std.size() != cfg_.llf_dim)
      throw Error(Errc::DimMismatch, "normalization stats do not match llf_dim");
    norm_ = std::move(n);
  }

  /// Trainable parameters of the active variant, in a fixed order.
  std::vector<nn::Param*> params() {
    std::vector<nn::Param*> ps;
    const Variant v = cfg_.variant;
    if (uses_llf(v)) {
      for (auto* d : {&bilstm_.fwd, &bilstm_.bwd}) {
        ps.push_back(&d->w_ih);
        ps.push_back(&d->w_hh);
        ps.push_back(&d->bias);
      }
      ps.push_back(&f_l_.weight);
      ps.push_back(&f_l_.bias);
    }
    if (v == Variant::Full) {
      ps.push_back(&f_att_.weight);
      ps.push_back(&f_att_.bias);
    }
    if (uses_embedding(v)) {
      ps.push_back(&f_w_.weight);
      ps.push_back(&f_w_.bias);
    }
    ps.push_back(&classifier_.weight);
    ps.push_back(&classifier_.bias);
    return ps;
  }

  std::vector<const nn::Param*> params() const {
    auto ps = const_cast<TiamModel*>(this)->params();
    return {ps.begin(), ps.end()};
  }

  void zero_grad() {
    for (auto* p : params()) p->zero_grad();
  }

  // -- individual stages (Eval mode unless a generator is supplied) --------

  /// Final forward hidden state followed by final backward hidden state.
  static std::vector<double> pool_llf_encoding(const nn::BiLstmOutput& out) {
    std::vector<double> v(out.final_fwd);
    v.insert(v.end(), out.final_bwd.begin(), out.final_bwd.end());
    return v;
  }

  std::vector<double> encode_llf(const Tensor& llf) const {
    require(uses_llf(cfg_.variant), "variant has no LLF branch");
    check_llf(llf);
    const auto out = bilstm_.forward(norm_.apply(llf));
    return f_l_.forward(pool_llf_encoding(out));
  }

  std::vector<double> attention_weights(std::span<const double> x_l_prime) const {
    require(cfg_.variant == Variant::Full, "variant has no attention layer");
    return f_att_.forward(x_l_prime);
  }

  static std::vector<double> mean_pool(const Tensor& emb) {
    std::vector<double> m(emb.cols(), 0.0);
    for (std::size_t r = 0; r < emb.rows(); ++r) {
      const auto row = emb.row(r);
      for (std::size_t c = 0; c < m.size(); ++c) m[c] += row[c];
    }
    for (double& v : m) v /= static_cast<double>(emb.rows());
    return m;
  }

  std::vector<double> fuse_weighted_embedding(std::span<const double> attention,
                                              const Tensor& emb) const {
    require(uses_embedding(cfg_.variant), "variant has no embedding branch");
    check_embedding(emb);
    if (attention.size() != cfg_.emb_dim)
      throw Error(Errc::DimMismatch, "attention length differs from emb_dim");
    auto x = mean_pool(emb);
    for (std::size_t c = 0; c < x.size(); ++c) x[c] *= attention[c];
    return f_w_.forward(x);
  }

  Prediction predict(const ModelInput& in) const {
    auto rec = forward(in, nn::Mode::Eval, nullptr);
    Prediction p;
    p.logits = rec.logits;
    p.probabilities = nn::softmax(p.logits);
    p.label = argmax(p.logits);
    return p;
  }

  // -- training path --------------------------------------------------------

  ForwardRecord forward(const ModelInput& in, nn::Mode mode, Rng* rng) const {
    const Variant v = cfg_.variant;
    if (uses_llf(v) && in.llf == nullptr)
      throw Error(Errc::VariantInputMissing, std::string(to_string(v)) + " variant needs LLFs");
    if (uses_embedding(v) && in.embedding == nullptr)
      throw Error(Errc::VariantInputMissing,
                  std::string(to_string(v)) + " variant needs an embedding");
    ForwardRecord r;
    if (uses_llf(v)) {
      check_llf(*in.llf);
      r.llf_std = norm_.apply(*in.llf);
      r.lstm = bilstm_.forward(r.llf_std);
      r.pooled = pool_llf_encoding(r.lstm);
      r.pooled_drop = r.pooled;
      r.mask_lstm = nn::Dropout{cfg_.dropout_lstm}.forward(r.pooled_drop, mode, rng);
      r.x_l_prime = f_l_.forward(r.pooled_drop);
    }
    if (uses_embedding(v)) {
      check_embedding(*in.embedding);
      r.emb_frames = in.embedding->rows();
      r.emb_mean = mean_pool(*in.embedding);
      r.x_w_prime = r.emb_mean;
      if (v == Variant::Full) {
        r.attention = f_att_.forward(r.x_l_prime);
        for (std::size_t c = 0; c < r.x_w_prime.size(); ++c) r.x_w_prime[c] *= r.attention[c];
      }
      r.x_w_prime_drop = r.x_w_prime;
      r.mask_w = nn::Dropout{cfg_.dropout_w}.forward(r.x_w_prime_drop, mode, rng);
      r.x_w_dprime = f_w_.forward(r.x_w_prime_drop);
    }
    r.classifier_in = r.x_l_prime;
    r.classifier_in.insert(r.classifier_in.end(), r.x_w_dprime.begin(), r.x_w_dprime.end());
    r.logits = classifier_.forward(r.classifier_in);
    return r;
  }

  void forward(const ModelInput& in, nn::Mode mode, Rng* rng, Tape& tape) const {
    tape.record(forward(in, mode, rng));
  }

  /// Accumulate dL/dparams for the recorded pass, given dL/dlogits.
  void backward(Tape& tape, std::span<const double> d_logits) { backward(tape.take(), d_logits); }

  void backward(const ForwardRecord& r, std::span<const double> d_logits) {
    const Variant v = cfg_.variant;
    const auto d_in = classifier_.backward(r.classifier_in, r.logits, d_logits);
    const std::size_t nl = r.x_l_prime.size();
    std::vector<double> d_xl(d_in.begin(), d_in.begin() + static_cast<std::ptrdiff_t>(nl));

    if (uses_embedding(v)) {
      const std::span<const double> d_xwpp(d_in.data() + nl, d_in.size() - nl);
      auto d_xwp = f_w_.backward(r.x_w_prime_drop, r.x_w_dprime, d_xwpp);
      for (std::size_t c = 0; c < d_xwp.size(); ++c) d_xwp[c] *= r.mask_w[c];
      if (v == Variant::Full) {
        std::vector<double> d_att(d_xwp.size());
        for (std::size_t c = 0; c < d_att.size(); ++c) d_att[c] = d_xwp[c] * r.emb_mean[c];
        const auto d_from_att = f_att_.backward(r.x_l_prime, r.attention, d_att);
        for (std::size_t k = 0; k < nl; ++k) d_xl[k] += d_from_att[k];
      }
    }
    if (uses_llf(v)) {
      auto d_pool = f_l_.backward(r.pooled_drop, r.x_l_prime, d_xl);
      for (std::size_t k = 0; k < d_pool.size(); ++k) d_pool[k] *= r.mask_lstm[k];
      const std::size_t H = cfg_.lstm_hidden;
      const std::span<const double> d_fwd(d_pool.data(), H);
      const std::span<const double> d_bwd(d_pool.data() + H, H);
      bilstm_.backward(r.llf_std, r.lstm, Tensor{}, d_fwd, d_bwd);
    }
  }

  nn::BiLstmLayer& bilstm() { return bilstm_; }
  const nn::BiLstmLayer& bilstm() const { return bilstm_; }
  nn::LinearLayer& f_l() { return f_l_; }
  nn::LinearLayer& f_att() { return f_att_; }
  nn::LinearLayer& f_w() { return f_w_; }
  nn::LinearLayer& classifier() { return classifier_; }
  const nn::LinearLayer& f_l() const { return f_l_; }
  const nn::LinearLayer& f_att() const { return f_att_; }
  const nn::LinearLayer& f_w() const { return f_w_; }
  const nn::LinearLayer& classifier() const { return classifier_; }

 private:
  static void require(bool ok, const char* what) {
    if (!ok) throw Error(Errc::VariantInputMissing, what);
  }
  void check_llf(const Tensor& llf) const {
    if (llf.rank() != 2 || llf.cols() != cfg_.llf_dim || llf.rows() == 0)
      throw Error(Errc::DimMismatch, "LLF matrix must be T x " + std::to_string(cfg_.llf_dim));
  }
  void check_embedding(const Tensor& emb) const {
    if (emb.rank() != 2 || emb.cols() != cfg_.emb_dim || emb.rows() == 0)
      throw Error(Errc::DimMismatch, "embedding must be T_w x " + std::to_string(cfg_.emb_dim) +
                                         ", got " + std::to_string(emb.cols()) + " columns");
  }

  TiamConfig cfg_;
  LlfNorm norm_;
  nn::BiLstmLayer bilstm_;
  nn::LinearLayer f_l_;
  nn::LinearLayer f_att_;
  nn::LinearLayer f_w_;
  nn::LinearLayer classifier_;
};

}  // namespace tiam
