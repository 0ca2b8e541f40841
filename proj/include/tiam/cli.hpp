#pragma once

// Command-line front end. `run` is the whole program; tools/tiam_main.cpp only
// forwards argv. Exit codes: 0 success, 1 runtime failure, 2 usage error.
// Runtime failures print one line to the error stream:
//   error code=<Errc> where="<file or record>" message="<text>"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tiam/audio_io.hpp"
#include "tiam/checkpoint.hpp"
#include "tiam/dataset.hpp"
#include "tiam/embeddings.hpp"
#include "tiam/error.hpp"
#include "tiam/llf.hpp"
#include "tiam/manifest.hpp"
#include "tiam/metrics.hpp"
#include "tiam/model.hpp"
#include "tiam/synth.hpp"
#include "tiam/tnsr.hpp"
#include "tiam/training.hpp"

namespace tiam::cli {

namespace fs = std::filesystem;

inline constexpr std::array<std::string_view, 9> kSubcommands{
    "extract-llf", "spectrogram",   "synth-corpus", "synth-embeddings", "split",
    "validate-manifest", "train", "evaluate", "predict"};

/// Flag values for every subcommand. Defaults here are the built-in layer of
/// the defaults < config file < command line precedence.
struct Options {
  std::string config;

  // shared
  std::string manifest;
  std::string out_dir;
  std::string out;
  std::string wav;
  std::string checkpoint;
  std::string embedding;
  std::string llf;
  std::uint64_t seed = 0;
  bool downmix = false;

  // extract-llf
  int workers = 1;

  // spectrogram
  std::size_t n_fft = 512;
  std::size_t hop = 160;

  // synth-corpus / synth-embeddings
  std::size_t n_per_class = 50;
  std::size_t emb_frames = 749;
  std::size_t emb_dim = 768;
  double emb_strength = 1.0;
  bool class_signal = false;

  // split
  std::string ratios = "0.8,0.1,0.1";
  bool group_by_teacher = false;

  // validate-manifest / evaluate
  bool json = false;
  std::string split = "all";
  std::string report;

  // train
  std::string variant = "full";
  double lr = 5e-5;
  int epochs = 300;
  std::size_t batch_size = 256;
  int patience = 20;
  double weight_decay = 0.01;
  std::size_t lstm_hidden = 128;
  std::size_t fl_out = 256;
  std::size_t fw_out = 256;
  double dropout_lstm = 0.1;
  double dropout_w = 0.5;
  std::string selection = "macro_f1";
  std::string class_weights;
};

namespace detail {

inline std::string safe_name(const std::string& id) {
  std::string s = id;
  for (char& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  return s;
}

inline std::vector<double> parse_list(const std::string& text, std::size_t expected,
                                      const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError(what, "'" + text + "' is not a comma-separated list of numbers");
    }
  }
  if (out.size() != expected)
    throw CLI::ValidationError(what, "expected " + std::to_string(expected) + " values");
  return out;
}

/// Key/value config file: `key = value` lines, `#` comments. Keys are flag
/// names without the leading dashes.
inline std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open config file", path);
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::BadConfig, "expected key = value", path + ":" + std::to_string(lineno));
    auto key = trim(line.substr(0, eq));
    while (!key.empty() && key.front() == '-') key.erase(0, 1);
    kv.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return kv;
}

/// Splice config-file entries into the argument list right after the
/// subcommand, skipping keys the command line already sets.
inline std::vector<std::string> apply_config(const std::vector<std::string>& args) {
  std::optional<std::string> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
  }
  if (!config || args.empty()) return args;
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  std::vector<std::string> out{args.front()};
  for (const auto& [k, v] : read_config(*config)) {
    if (k == "config") continue;
    if (!given(k)) out.push_back("--" + k + "=" + v);
  }
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open for writing", path.string());
  out << text;
  if (!out) throw Error(Errc::IoError, "write failed", path.string());
}

inline std::string quote(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') q += '\\';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

}  // namespace detail

/// Builds the CLI11 application. Exposed so tests can inspect the flag
/// registry.
class App {
 public:
  App() : app_("Teaching-intonation assessment toolkit", "tiam") {
    app_.require_subcommand(1);
    app_.fallthrough(false);

    auto* s = add("extract-llf", "Extract per-frame low-level features to TNSR files");
    s->add_option("--manifest", o_.manifest, "Input manifest (JSON Lines)");
    s->add_option("--wav", o_.wav, "Single WAV file instead of a manifest");
    s->add_option("--out", o_.out, "Output TNSR path (with --wav)");
    s->add_option("--out-dir", o_.out_dir, "Output directory (with --manifest)");
    s->add_option("--workers", o_.workers, "Parallel extraction workers")->check(CLI::Range(1, 256));
    s->add_flag("--downmix", o_.downmix, "Average multichannel input instead of rejecting it");

    s = add("spectrogram", "Render a log-magnitude spectrogram as a binary PGM");
    s->add_option("--wav", o_.wav, "Input WAV file")->required();
    s->add_option("--out", o_.out, "Output .pgm path")->required();
    s->add_option("--n-fft", o_.n_fft, "FFT size")->check(CLI::Range(2, 1 << 16));
    s->add_option("--hop", o_.hop, "Hop in samples")->check(CLI::Range(1, 1 << 16));
    s->add_flag("--downmix", o_.downmix, "Average multichannel input instead of rejecting it");

    s = add("synth-corpus", "Generate a synthetic labelled corpus (WAV + embeddings + manifest)");
    s->add_option("--out-dir", o_.out_dir, "Output directory")->required();
    s->add_option("--n-per-class", o_.n_per_class, "Clips per class")->check(CLI::PositiveNumber);
    s->add_option("--seed", o_.seed, "Generator seed");
    s->add_option("--emb-frames", o_.emb_frames, "Embedding frames per clip")->check(CLI::PositiveNumber);
    s->add_option("--emb-dim", o_.emb_dim, "Embedding dimension")->check(CLI::PositiveNumber);
    s->add_option("--emb-strength", o_.emb_strength, "Class separation of embedding means");

    s = add("synth-embeddings", "Write synthetic embedding files for every manifest record");
    s->add_option("--manifest", o_.manifest, "Input manifest")->required();
    s->add_option("--out-dir", o_.out_dir, "Output directory")->required();
    s->add_option("--seed", o_.seed, "Generator seed");
    s->add_option("--emb-frames", o_.emb_frames, "Frames per clip")->check(CLI::PositiveNumber);
    s->add_option("--emb-dim", o_.emb_dim, "Embedding dimension")->check(CLI::PositiveNumber);
    s->add_option("--emb-strength", o_.emb_strength, "Class separation (with --class-signal)");
    s->add_flag("--class-signal", o_.class_signal, "Add the label-dependent bias vector");

    s = add("split", "Assign stratified train/dev/test splits");
    s->add_option("--manifest", o_.manifest, "Input manifest")->required();
    s->add_option("--out", o_.out, "Output manifest path")->required();
    s->add_option("--ratios", o_.ratios, "train,dev,test ratios summing to 1");
    s->add_option("--seed", o_.seed, "Shuffle seed");
    s->add_flag("--group-by-teacher", o_.group_by_teacher, "Keep each teacher in one split");

    s = add("validate-manifest", "Check a manifest and print label/discipline counts");
    s->add_option("--manifest", o_.manifest, "Manifest to check")->required();
    s->add_flag("--json", o_.json, "Print the summary as JSON");

    s = add("train", "Train a model with AdamW and early stopping");
    s->add_option("--manifest", o_.manifest, "Manifest with train and dev splits")->required();
    s->add_option("--out-dir", o_.out_dir, "Output directory (checkpoint/, metrics.jsonl)")->required();
    s->add_option("--variant", o_.variant, "Model variant")
        ->check(CLI::IsMember({"llf", "w2e", "concat", "full"}));
    s->add_option("--seed", o_.seed, "Initialization, shuffling and dropout seed");
    s->add_option("--lr", o_.lr, "AdamW learning rate")->check(CLI::NonNegativeNumber);
    s->add_option("--epochs", o_.epochs, "Maximum epochs")->check(CLI::PositiveNumber);
    s->add_option("--batch-size", o_.batch_size, "Batch size")->check(CLI::PositiveNumber);
    s->add_option("--patience", o_.patience, "Early-stopping patience in epochs")->check(CLI::PositiveNumber);
    s->add_option("--weight-decay", o_.weight_decay, "Decoupled weight decay")->check(CLI::NonNegativeNumber);
    s->add_option("--lstm-hidden", o_.lstm_hidden, "BiLSTM hidden units per direction")->check(CLI::PositiveNumber);
    s->add_option("--fl-out", o_.fl_out, "LLF branch output size")->check(CLI::PositiveNumber);
    s->add_option("--fw-out", o_.fw_out, "Embedding branch output size")->check(CLI::PositiveNumber);
    s->add_option("--dropout-lstm", o_.dropout_lstm, "Dropout after the BiLSTM")->check(CLI::Range(0.0, 0.999999));
    s->add_option("--dropout-w", o_.dropout_w, "Dropout before the embedding layer")->check(CLI::Range(0.0, 0.999999));
    s->add_option("--selection", o_.selection, "Early-stopping metric")
        ->check(CLI::IsMember({"macro_f1", "accuracy"}));
    s->add_option("--class-weights", o_.class_weights, "Loss weights 'w_rhythmic,w_unrhythmic'");

    s = add("evaluate", "Score a checkpoint on manifest records");
    s->add_option("--checkpoint", o_.checkpoint, "Checkpoint directory")->required();
    s->add_option("--manifest", o_.manifest, "Manifest to evaluate")->required();
    s->add_option("--split", o_.split, "Records to use")
        ->check(CLI::IsMember({"train", "dev", "test", "all"}));
    s->add_option("--report", o_.report, "Also write the result as JSON to this path");

    s = add("predict", "Classify one clip");
    s->add_option("--checkpoint", o_.checkpoint, "Checkpoint directory")->required();
    s->add_option("--wav", o_.wav, "Clip audio (LLFs are extracted from it)");
    s->add_option("--llf", o_.llf, "Precomputed LLF TNSR instead of --wav");
    s->add_option("--embedding", o_.embedding, "Embedding TNSR");
    s->add_flag("--downmix", o_.downmix, "Average multichannel input instead of rejecting it");
  }

  CLI::App& cli() { return app_; }
  const Options& options() const { return o_; }

  int run(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    try {
      args = detail::apply_config(raw);
    } catch (const Error& e) {
      return report(e, err);
    }
    try {
      std::vector<std::string> rev(args.rbegin(), args.rend());
      app_.parse(rev);
    } catch (const CLI::CallForHelp& e) {
      return app_.exit(e, out, err) == 0 ? 0 : 2;
    } catch (const CLI::ParseError& e) {
      err << "usage error: " << e.what() << "\n";
      err << "run with --help for usage\n";
      return 2;
    }
    const std::string name = app_.get_subcommands().front()->get_name();
    try {
      return dispatch(name, out);
    } catch (const CLI::ValidationError& e) {
      err << "usage error: " << e.what() << "\n";
      return 2;
    } catch (const Error& e) {
      return report(e, err);
    } catch (const std::exception& e) {
      err << "error code=Internal where=\"\" message=" << detail::quote(e.what()) << "\n";
      return 1;
    }
  }

 private:
  CLI::App* add(const std::string& name, const std::string& desc) {
    auto* s = app_.add_subcommand(name, desc);
    s->add_option("--config", o_.config, "key=value file of flag defaults (flags override)");
    return s;
  }

  static int report(const Error& e, std::ostream& err) {
    err << "error code=" << to_string(e.code()) << " where=" << detail::quote(e.where())
        << " message=" << detail::quote(e.what()) << "\n";
    return 1;
  }

  int dispatch(const std::string& name, std::ostream& out) {
    if (name == "extract-llf") return extract_llf(out);
    if (name == "spectrogram") return spectrogram(out);
    if (name == "synth-corpus") return synth_corpus(out);
    if (name == "synth-embeddings") return synth_embeddings(out);
    if (name == "split") return split(out);
    if (name == "validate-manifest") return validate(out);
    if (name == "train") return train(out);
    if (name == "evaluate") return evaluate(out);
    return predict(out);
  }

  int extract_llf(std::ostream& out) {
    const llf::Extractor ex{llf::LlfConfig{}};
    const audio::ReadOptions ropt{o_.downmix};
    if (!o_.wav.empty()) {
      if (o_.out.empty()) throw CLI::ValidationError("--out", "required with --wav");
      const auto m = ex.extract(audio::read_wav(o_.wav, ropt));
      tnsr::write_tensor(o_.out, data::to_tensor(m));
      out << "wrote " << o_.out << " (" << m.rows << " x " << m.cols << ")\n";
      return 0;
    }
    if (o_.manifest.empty() || o_.out_dir.empty())
      throw CLI::ValidationError("extract-llf", "give --manifest with --out-dir, or --wav with --out");

    const auto manifest = data::read_manifest(o_.manifest);
    const fs::path dir(o_.out_dir);
    fs::create_directories(dir / "llf");
    auto records = data::rebase(manifest, dir);
    std::vector<std::string> failures(records.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < records.size();) {
        const auto& src = manifest.records[i];
        try {
          if (!src.audio_path) throw Error(Errc::MissingFeature, "record has no audio_path", src.id);
          const auto path = manifest.resolve(*src.audio_path);
          const auto m = ex.extract(audio::read_wav(path, ropt));
          const std::string rel = "llf/" + detail::safe_name(src.id) + ".tnsr";
          tnsr::write_tensor(dir / rel, data::to_tensor(m));
          records[i].llf_path = rel;
        } catch (const Error& e) {
          failures[i] = e.what();
        }
      }
    };
    std::vector<std::jthread> pool;
    for (int w = 1; w < o_.workers; ++w) pool.emplace_back(work);
    work();
    pool.clear();
    for (std::size_t i = 0; i < records.size(); ++i)
      if (!failures[i].empty()) throw Error(Errc::IoError, failures[i], records[i].id);
    data::write_manifest(dir / "manifest.jsonl", records);
    out << "extracted " << records.size() << " records into " << (dir / "llf").string() << "\n";
    return 0;
  }

  int spectrogram(std::ostream& out) {
    const auto a = audio::read_wav(o_.wav, {o_.downmix});
    const auto img = audio::render_spectrogram(a, o_.n_fft, o_.hop);
    audio::write_pgm(o_.out, img);
    out << "wrote " << o_.out << " (" << img.width << " x " << img.height << ")\n";
    return 0;
  }

  int synth_corpus(std::ostream& out) {
    data::SynthOptions so;
    so.emb_frames = o_.emb_frames;
    so.emb_dim = o_.emb_dim;
    so.emb_strength = o_.emb_strength;
    const auto m = data::synth_corpus(o_.n_per_class, o_.seed, o_.out_dir, so);
    out << "wrote " << m.records.size() << " clips to " << o_.out_dir << "\n";
    return 0;
  }

  int synth_embeddings(std::ostream& out) {
    const auto manifest = data::read_manifest(o_.manifest);
    const fs::path dir(o_.out_dir);
    fs::create_directories(dir / "emb");
    auto records = data::rebase(manifest, dir);
    for (auto& r : records) {
      std::optional<Label> cls;
      if (o_.class_signal) cls = r.label;
      const auto e = emb::synth_embedding(r.id, o_.seed, o_.emb_frames, o_.emb_dim, cls, o_.emb_strength);
      const std::string rel = "emb/" + detail::safe_name(r.id) + ".tnsr";
      tnsr::write_tensor(dir / rel, e.data);
      r.embedding_path = rel;
    }
    data::write_manifest(dir / "manifest.jsonl", records);
    out << "wrote " << records.size() << " embeddings to " << (dir / "emb").string() << "\n";
    return 0;
  }

  int split(std::ostream& out) {
    const auto r = detail::parse_list(o_.ratios, 3, "--ratios");
    const auto manifest = data::read_manifest(o_.manifest);
    const fs::path dest(o_.out);
    if (dest.has_parent_path()) fs::create_directories(dest.parent_path());
    const fs::path dest_dir = dest.has_parent_path() ? dest.parent_path() : fs::path(".");
    auto records = data::rebase(manifest, dest_dir);
    records = data::stratified_split(std::move(records), {r[0], r[1], r[2]}, o_.seed,
                                     o_.group_by_teacher);
    data::write_manifest(dest, records);
    const auto s = data::summarize(records);
    out << "train " << s.per_split[0] << " dev " << s.per_split[1] << " test " << s.per_split[2]
        << "\n";
    return 0;
  }

  int validate(std::ostream& out) {
    const auto s = data::validate_manifest(o_.manifest);
    if (o_.json) {
      nlohmann::ordered_json j;
      j["total"] = s.total;
      for (std::size_t l = 0; l < 2; ++l) j["labels"][std::string(kLabelNames[l])] = s.per_label[l];
      for (std::size_t d = 0; d < 9; ++d)
        j["disciplines"][std::string(kDisciplineNames[d])] = s.per_discipline[d];
      j["disciplines"]["(none)"] = s.without_discipline;
      for (std::size_t k = 0; k < 3; ++k) j["splits"][std::string(data::kSplitNames[k])] = s.per_split[k];
      j["splits"]["(none)"] = s.without_split;
      out << j.dump() << "\n";
      return 0;
    }
    out << "records " << s.total << "\n";
    for (std::size_t l = 0; l < 2; ++l) out << "label " << kLabelNames[l] << " " << s.per_label[l] << "\n";
    for (std::size_t d = 0; d < 9; ++d)
      out << "discipline " << kDisciplineNames[d] << " " << s.per_discipline[d] << "\n";
    out << "discipline (none) " << s.without_discipline << "\n";
    for (std::size_t k = 0; k < 3; ++k) out << "split " << data::kSplitNames[k] << " " << s.per_split[k] << "\n";
    out << "split (none) " << s.without_split << "\n";
    return 0;
  }

  int train(std::ostream& out) {
    TiamConfig mc;
    mc.variant = *parse_variant(o_.variant);
    mc.lstm_hidden = o_.lstm_hidden;
    mc.fl_out = o_.fl_out;
    mc.fw_out = o_.fw_out;
    mc.dropout_lstm = o_.dropout_lstm;
    mc.dropout_w = o_.dropout_w;

    TrainConfig tc;
    tc.lr = o_.lr;
    tc.max_epochs = o_.epochs;
    tc.batch_size = o_.batch_size;
    tc.patience_epochs = std::min(o_.patience, o_.epochs);
    tc.weight_decay = o_.weight_decay;
    tc.seed = o_.seed;
    tc.selection_metric = o_.selection == "accuracy" ? SelectionMetric::Accuracy : SelectionMetric::MacroF1;
    if (!o_.class_weights.empty()) {
      const auto w = detail::parse_list(o_.class_weights, 2, "--class-weights");
      tc.class_weights = std::array<double, 2>{w[0], w[1]};
    }

    const auto manifest = data::read_manifest(o_.manifest);
    const data::LoadOptions lo{uses_llf(mc.variant), uses_embedding(mc.variant), {}};
    auto train_set = data::load_samples(manifest, data::Split::Train, lo);
    auto dev_set = data::load_samples(manifest, data::Split::Dev, lo);
    if (train_set.empty() || dev_set.empty())
      throw Error(Errc::InsufficientRecords, "manifest needs train and dev records (run split)",
                  o_.manifest);
    if (lo.need_embedding) mc.emb_dim = train_set.front().embedding->cols();

    TiamModel model(mc, mix_seed(o_.seed, 0x494e4954ULL));
    if (lo.need_llf) model.set_llf_norm(standardize_llf(train_set));

    const fs::path dir(o_.out_dir);
    fs::create_directories(dir);
    std::ofstream metrics(dir / "metrics.jsonl", std::ios::binary | std::ios::trunc);
    if (!metrics) throw Error(Errc::IoError, "cannot open metrics file", (dir / "metrics.jsonl").string());
    auto result = tiam::train(std::move(model), train_set, dev_set, tc, &metrics);
    metrics.close();
    save_checkpoint(dir / "checkpoint", result.model);

    nlohmann::ordered_json rep;
    rep["variant"] = o_.variant;
    rep["seed"] = o_.seed;
    rep["epochs_run"] = result.report.epochs.size();
    rep["best_epoch"] = result.report.best_epoch;
    rep["stop_reason"] = result.report.stop_reason;
    const auto& best = result.report.epochs[static_cast<std::size_t>(result.report.best_epoch - 1)];
    rep["best_dev_acc"] = best.dev_accuracy;
    rep["best_dev_macro_f1"] = best.dev_macro_f1;
    detail::write_text(dir / "report.json", rep.dump(2) + "\n");

    out << "epochs " << result.report.epochs.size() << " best_epoch " << result.report.best_epoch
        << " dev_acc " << std::fixed << std::setprecision(4) << best.dev_accuracy
        << " dev_macro_f1 " << best.dev_macro_f1 << " stop " << result.report.stop_reason << "\n";
    return 0;
  }

  int evaluate(std::ostream& out) {
    const auto model = load_checkpoint(o_.checkpoint);
    const auto manifest = data::read_manifest(o_.manifest);
    std::optional<data::Split> split;
    if (o_.split != "all") split = data::parse_split(o_.split);
    const auto v = model.config().variant;
    const auto samples = data::load_samples(manifest, split, {uses_llf(v), uses_embedding(v), {}});
    const auto result = tiam::evaluate(model, samples);
    out << format_table(result);
    if (!o_.report.empty()) detail::write_text(o_.report, to_json(result).dump(2) + "\n");
    return 0;
  }

  int predict(std::ostream& out) {
    const auto model = load_checkpoint(o_.checkpoint);
    std::optional<Tensor> llf_m, emb_m;
    if (!o_.llf.empty()) {
      llf_m = tnsr::read_tensor(o_.llf);
    } else if (!o_.wav.empty()) {
      llf_m = data::to_tensor(llf::extract_llf(audio::read_wav(o_.wav, {o_.downmix})));
    }
    if (!o_.embedding.empty()) emb_m = emb::load_embedding_file(o_.embedding).data;
    const auto p = model.predict({llf_m ? &*llf_m : nullptr, emb_m ? &*emb_m : nullptr});
    out << "label " << kLabelNames[static_cast<std::size_t>(p.label)] << "\n";
    out << std::setprecision(6) << std::fixed;
    for (std::size_t c = 0; c < p.probabilities.size(); ++c)
      out << "p_" << kLabelNames[c] << " " << p.probabilities[c] << "\n";
    return 0;
  }

  CLI::App app_;
  Options o_;
};

/// Program entry: `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  App app;
  return app.run(args, out, err);
}

}  // namespace tiam::cli
