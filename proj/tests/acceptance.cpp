#include <bit>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "tiam/dataset.hpp"
#include "tiam/llf.hpp"
#include "tiam/metrics.hpp"
#include "tiam/synth.hpp"
#include "tiam/training.hpp"

using namespace tiam;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void criterion(const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome o;
  o.detail << std::setprecision(6);
  const auto t0 = Clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << ":" << o.detail.str() << " (" << std::fixed
            << std::setprecision(1) << seconds_since(t0) << " s)" << std::endl;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Synthetic corpus shared by the end-to-end, ablation and determinism checks.
constexpr std::uint64_t kCorpusSeed = 1;
constexpr std::size_t kEmbFrames = 50;
constexpr std::size_t kEmbDim = 64;
constexpr double kAblationEmbStrength = 0.03;

struct Corpus {
  fs::path dir;
  std::vector<data::ManifestRecord> records;  // llf_path filled
  double build_seconds = 0.0;
};

Corpus& corpus() {
  static Corpus c = [] {
    const auto t0 = Clock::now();
    Corpus out;
    out.dir = oracle::temp_dir("acceptance_corpus");
    data::SynthOptions so;
    so.emb_frames = kEmbFrames;
    so.emb_dim = kEmbDim;
    auto m = data::synth_corpus(100, kCorpusSeed, out.dir, so);
    fs::create_directories(out.dir / "llf");
    const llf::Extractor ex{llf::LlfConfig{}};
    for (auto& r : m.records) {
      const auto feats = ex.extract(audio::read_wav(m.resolve(*r.audio_path)));
      r.llf_path = "llf/" + r.id + ".tnsr";
      tnsr::write_tensor(out.dir / *r.llf_path, data::to_tensor(feats));
    }
    out.records = std::move(m.records);
    out.build_seconds = seconds_since(t0);
    return out;
  }();
  return c;
}

data::Manifest split_corpus(const data::SplitRatios& ratios, const std::string& name) {
  auto& c = corpus();
  data::Manifest m;
  m.base_dir = c.dir;
  m.records = data::stratified_split(c.records, ratios, kCorpusSeed);
  data::write_manifest(c.dir / name, m.records);
  return m;
}

TiamConfig reduced_model(Variant v) {
  TiamConfig mc;
  mc.variant = v;
  mc.lstm_hidden = 8;
  mc.fl_out = 16;
  mc.fw_out = 16;
  mc.emb_dim = kEmbDim;
  return mc;
}

TrainConfig reduced_training(std::uint64_t seed, int max_epochs) {
  TrainConfig tc;
  tc.lr = 3e-3;
  tc.batch_size = 16;
  tc.max_epochs = max_epochs;
  tc.patience_epochs = 10;
  tc.seed = seed;
  tc.selection_metric = SelectionMetric::Accuracy;
  return tc;
}

double train_dev_accuracy(Variant v, std::uint64_t seed, int max_epochs,
                          const std::vector<Sample>& train_set, const std::vector<Sample>& dev_set,
                          int* epochs_run = nullptr) {
  TiamModel model(reduced_model(v), mix_seed(seed, 0x494e4954ULL));
  if (uses_llf(v)) model.set_llf_norm(standardize_llf(train_set));
  const auto r = train(std::move(model), train_set, dev_set, reduced_training(seed, max_epochs));
  if (epochs_run) *epochs_run = static_cast<int>(r.report.epochs.size());
  return evaluate(r.model, dev_set).accuracy;
}

void dsp_oracles(Outcome& o) {
  const auto t0 = Clock::now();
  const llf::LlfConfig cfg;

  const auto tone = oracle::sine(220.0, cfg.pitch_window(), 16000.0, 0.7);
  const double f0 = llf::pitch_yin(tone, cfg);
  o.detail << " pitch(220 Hz)=" << f0;
  o.require(std::abs(f0 - 220.0) <= 2.0, "pitch within 2 Hz");

  const double c = llf::spectral_centroid(oracle::sine(1000.0, 400), cfg);
  o.detail << " centroid(1 kHz)=" << c;
  o.require(std::abs(c - 1000.0) <= 20.0, "centroid within 20 Hz");

  const double crossings = llf::zero_crossing_rate(oracle::sine(100.0, 400)) * 399.0;
  o.detail << " crossings(100 Hz)=" << crossings;
  o.require(std::abs(crossings - 5.0) <= 1.0, "crossings within 1 of 5");

  Rng rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> x(400);
    const double amp = rng.uniform(0.01, 1.0);
    for (auto& v : x) v = amp * rng.normal();
    const auto got = llf::mfcc(x, cfg);
    const auto want = oracle::mfcc(x);
    for (std::size_t k = 0; k < want.size(); ++k) worst = std::max(worst, std::abs(got[k] - want[k]));
  }
  o.detail << " mfcc max abs diff=" << worst;
  o.require(worst <= 1e-8, "MFCC within 1e-8");
  o.require(seconds_since(t0) < 30.0, "runtime < 30 s");
}

void gradient_check(Outcome& o) {
  const auto t0 = Clock::now();
  TiamModel m(gradcheck::tiny_config(Variant::Full), 41);
  Rng rng(42);
  const auto llf_in = gradcheck::random_matrix(5, 3, rng);
  const auto emb_in = gradcheck::random_matrix(5, 8, rng);
  double worst = 0.0;
  std::size_t checked = 0;
  std::string where;
  auto track = [&](const gradcheck::Result& r) {
    checked += r.checked;
    if (r.max_rel_err >= worst) {
      worst = r.max_rel_err;
      where = r.worst;
    }
  };
  for (int label : {0, 1}) track(gradcheck::check_model(m, llf_in, emb_in, label, nn::Mode::Eval));
  for (std::uint64_t seed : {1u, 2u}) track(gradcheck::check_model(m, llf_in, emb_in, 1, nn::Mode::Train, seed));
  o.detail << " checked=" << checked << " max rel err=" << worst << " at " << where;
  o.require(worst < 1e-4, "relative error < 1e-4");
  o.require(seconds_since(t0) < 60.0, "runtime < 1 min");
}

void end_to_end(Outcome& o) {
  const auto t0 = Clock::now();
  const auto m = split_corpus({0.8, 0.1, 0.1}, "e2e.jsonl");
  const auto train_set = data::load_samples(m, data::Split::Train, {});
  const auto dev_set = data::load_samples(m, data::Split::Dev, {});
  int epochs = 0;
  const double acc = train_dev_accuracy(Variant::Full, 7, 50, train_set, dev_set, &epochs);
  const double total = corpus().build_seconds + seconds_since(t0);
  o.detail << " train=" << train_set.size() << " dev=" << dev_set.size() << " epochs=" << epochs
           << " dev acc=" << acc << " wall incl. synthesis+extraction=" << total << " s";
  o.require(acc >= 0.95, "dev accuracy >= 0.95");
  o.require(epochs <= 50, "within 50 epochs");
  o.require(total < 600.0, "runtime < 10 min");
}

void ablation(Outcome& o) {
  const auto m = split_corpus({0.5, 0.4, 0.1}, "ablation.jsonl");
  auto train_set = data::load_samples(m, data::Split::Train, {});
  auto dev_set = data::load_samples(m, data::Split::Dev, {});
  // Weak embedding signal so neither branch alone is trivially perfect.
  for (auto* set : {&train_set, &dev_set})
    for (auto& s : *set)
      s.embedding = std::make_shared<const Tensor>(
          emb::synth_embedding(s.id, kCorpusSeed, kEmbFrames, kEmbDim, s.label, kAblationEmbStrength).data);
  o.detail << " train=" << train_set.size() << " dev=" << dev_set.size();

  std::map<Variant, double> mean;
  for (auto v : {Variant::LlfOnly, Variant::W2eOnly, Variant::ConcatNoAttention, Variant::Full}) {
    double sum = 0.0;
    for (std::uint64_t seed : {1u, 2u, 3u}) sum += train_dev_accuracy(v, seed, 30, train_set, dev_set);
    mean[v] = sum / 3.0;
    o.detail << " " << to_string(v) << "=" << mean[v];
  }
  constexpr double tie = 0.01;
  o.require(mean[Variant::Full] + tie >= mean[Variant::ConcatNoAttention], "full >= concat");
  o.require(mean[Variant::ConcatNoAttention] + tie >=
                std::max(mean[Variant::LlfOnly], mean[Variant::W2eOnly]),
            "concat >= max(llf, w2e)");
}

void determinism(Outcome& o) {
  split_corpus({0.8, 0.1, 0.1}, "determinism.jsonl");
  const auto dir = corpus().dir;
  auto run = [&](const std::string& out) {
    const std::string cmd = std::string("\"") + TIAM_CLI + "\" train --manifest \"" +
                            (dir / "determinism.jsonl").string() + "\" --out-dir \"" + (dir / out).string() +
                            "\" --seed 11 --epochs 3 --batch-size 16 --lr 3e-3 --lstm-hidden 4"
                            " --fl-out 8 --fw-out 8 > /dev/null";
    return std::system(cmd.c_str());
  };
  o.require(run("run_a") == 0, "first train run exits 0");
  o.require(run("run_b") == 0, "second train run exits 0");
  std::size_t compared = 0;
  std::vector<fs::path> files{"metrics.jsonl", "report.json"};
  for (const auto& e : fs::recursive_directory_iterator(dir / "run_a" / "checkpoint"))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), dir / "run_a"));
  for (const auto& f : files) {
    const auto a = slurp(dir / "run_a" / f), b = slurp(dir / "run_b" / f);
    o.require(!a.empty() && a == b, f.string() + " identical");
    ++compared;
  }
  o.detail << " files compared=" << compared;
  o.require(compared >= 3, "checkpoint files present");
}

void format_round_trips(Outcome& o) {
  const auto dir = oracle::temp_dir("acceptance_formats");
  Rng rng(17);
  int exact = 0;
  for (int i = 0; i < 100; ++i) {
    tnsr::FloatTensor t;
    t.dims = {static_cast<std::uint32_t>(1 + rng.index(64)), static_cast<std::uint32_t>(1 + rng.index(64))};
    for (std::size_t k = 0; k < std::size_t{t.dims[0]} * t.dims[1]; ++k) {
      std::uint32_t bits;
      do bits = static_cast<std::uint32_t>(rng.next_u64()); while (((bits >> 23) & 0xff) == 0xff);
      t.values.push_back(std::bit_cast<float>(bits));
    }
    const auto path = dir / "m.tnsr";
    tnsr::write(path, t);
    const auto back = tnsr::read(path);
    if (back.dims == t.dims && std::memcmp(back.values.data(), t.values.data(), t.values.size() * 4) == 0)
      ++exact;
  }
  o.detail << " tnsr bit-exact=" << exact << "/100";
  o.require(exact == 100, "100 TNSR round trips bit-exact");

  AudioBuffer a;
  a.samples.assign(37 * 16000, 0.0);
  for (std::size_t n = 0; n < a.samples.size(); ++n) a.samples[n] = 0.25 * std::sin(0.01 * n);
  audio::write_wav(dir / "long.wav", a);
  const auto clips = audio::segment(audio::read_wav(dir / "long.wav"), "long");
  o.detail << " 37 s clips=" << clips.size();
  o.require(clips.size() == 2, "37 s file gives 2 clips");

  const auto golden = tnsr::read(fs::path(TIAM_TEST_DATA) / "golden_2x3.tnsr");
  const std::vector<float> want{1.0f, -2.5f, 0.125f, 3.0f, 0.0f, -0.75f};
  const bool match = golden.dims == std::vector<std::uint32_t>{2, 3} && golden.values == want;
  o.detail << " golden=" << (match ? "match" : "mismatch");
  o.require(match, "golden fixture parses to the committed matrix");
}

void metric_values(Outcome& o) {
  std::vector<int> truth(8507, 0);
  truth.resize(8507 + 2937, 1);
  const auto r = score(truth, std::vector<int>(truth.size(), 0));
  o.detail << " accuracy=" << r.accuracy << " macro_f1=" << r.macro_f1;
  o.require(std::abs(r.accuracy - 0.7434) <= 1e-4, "accuracy 0.7434");
  o.require(std::abs(r.macro_f1 - 0.4264) <= 1e-4, "macro-F1 0.4264");
}

}  // namespace

int main() {
  criterion("dsp-oracles", dsp_oracles);
  criterion("gradient-check", gradient_check);
  criterion("format-round-trips", format_round_trips);
  criterion("metric-correctness", metric_values);
  criterion("end-to-end-synthetic", end_to_end);
  criterion("ablation-ordering", ablation);
  criterion("determinism", determinism);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
