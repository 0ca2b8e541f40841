#pragma once

// Manifest: one JSON object per line (JSON Lines), UTF-8. Recognised keys are
// id, audio_path, label, discipline, teacher_id, split, llf_path and
// embedding_path; any other keys are carried through unchanged. Paths are
// relative to the manifest file's directory unless absolute.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tiam/audio_io.hpp"
#include "tiam/error.hpp"
#include "tiam/random.hpp"

namespace tiam::data {

enum class Split { Train, Dev, Test };
inline constexpr std::array<std::string_view, 3> kSplitNames{"train", "dev", "test"};

inline std::string_view to_string(Split s) { return kSplitNames[static_cast<int>(s)]; }
inline std::optional<Split> parse_split(std::string_view s) {
  for (std::size_t i = 0; i < kSplitNames.size(); ++i)
    if (s == kSplitNames[i]) return static_cast<Split>(i);
  return std::nullopt;
}

struct ManifestRecord {
  std::string id;
  std::optional<std::string> audio_path;
  Label label = Label::Rhythmic;
  std::optional<Discipline> discipline;
  std::optional<std::string> teacher_id;
  std::optional<Split> split;
  std::optional<std::string> llf_path;
  std::optional<std::string> embedding_path;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  bool operator==(const ManifestRecord&) const = default;
};

struct Manifest {
  std::filesystem::path base_dir;  // directory the relative paths resolve against
  std::vector<ManifestRecord> records;

  std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }
};

inline nlohmann::ordered_json to_json(const ManifestRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  if (r.audio_path) j["audio_path"] = *r.audio_path;
  j["label"] = std::string(to_string(r.label));
  if (r.discipline) j["discipline"] = std::string(to_string(*r.discipline));
  if (r.teacher_id) j["teacher_id"] = *r.teacher_id;
  if (r.split) j["split"] = std::string(to_string(*r.split));
  if (r.llf_path) j["llf_path"] = *r.llf_path;
  if (r.embedding_path) j["embedding_path"] = *r.embedding_path;
  for (const auto& [k, v] : r.extra.items()) j[k] = v;
  return j;
}

/// Parse one manifest line. `where` should identify file and line number.
inline ManifestRecord parse_record(std::string_view line, const std::string& where) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::MalformedRecord, std::string("invalid JSON: ") + e.what(), where);
  }
  if (!j.is_object()) throw Error(Errc::MalformedRecord, "record is not an object", where);

  auto str = [&](const char* key) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string())
      throw Error(Errc::MalformedRecord, std::string("field '") + key + "' must be a string", where);
    return it->get<std::string>();
  };

  ManifestRecord r;
  auto id = str("id");
  if (!id || id->empty()) throw Error(Errc::MalformedRecord, "missing id", where);
  r.id = *id;
  auto label = str("label");
  if (!label) throw Error(Errc::MalformedRecord, "missing label", where);
  auto parsed = parse_label(*label);
  if (!parsed) throw Error(Errc::MalformedRecord, "unknown label '" + *label + "'", where);
  r.label = *parsed;
  if (auto d = str("discipline")) {
    auto disc = parse_discipline(*d);
    if (!disc) throw Error(Errc::UnknownDiscipline, "unknown discipline '" + *d + "'", where);
    r.discipline = *disc;
  }
  if (auto s = str("split")) {
    auto sp = parse_split(*s);
    if (!sp) throw Error(Errc::MalformedRecord, "unknown split '" + *s + "'", where);
    r.split = *sp;
  }
  r.audio_path = str("audio_path");
  r.teacher_id = str("teacher_id");
  r.llf_path = str("llf_path");
  r.embedding_path = str("embedding_path");

  static const std::set<std::string> known{"id", "audio_path", "label", "discipline",
                                           "teacher_id", "split", "llf_path", "embedding_path"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) r.extra[k] = v;
  return r;
}

inline Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open manifest", path.string());
  Manifest m;
  m.base_dir = path.parent_path();
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    auto rec = parse_record(line, where);
    if (!seen.insert(rec.id).second)
      throw Error(Errc::DuplicateId, "id '" + rec.id + "' already used", where);
    m.records.push_back(std::move(rec));
  }
  return m;
}

inline std::string encode_manifest(const std::vector<ManifestRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

inline void write_manifest(const std::filesystem::path& path,
                           const std::vector<ManifestRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open for writing", path.string());
  out << encode_manifest(records);
  if (!out) throw Error(Errc::IoError, "write failed", path.string());
}

/// Rewrite relative paths of `records` (resolved against `from`) so they are
/// relative to `to_dir`.
inline std::vector<ManifestRecord> rebase(const Manifest& from, const std::filesystem::path& to_dir) {
  auto fix = [&](std::optional<std::string>& p) {
    if (!p) return;
    const auto abs = std::filesystem::absolute(from.resolve(*p));
    p = std::filesystem::relative(abs, std::filesystem::absolute(to_dir)).generic_string();
  };
  auto out = from.records;
  for (auto& r : out) {
    fix(r.audio_path);
    fix(r.llf_path);
    fix(r.embedding_path);
  }
  return out;
}

struct ManifestSummary {
  std::size_t total = 0;
  std::array<std::size_t, 2> per_label{};
  std::array<std::size_t, 9> per_discipline{};
  std::size_t without_discipline = 0;
  std::array<std::size_t, 3> per_split{};
  std::size_t without_split = 0;
};

inline ManifestSummary summarize(const std::vector<ManifestRecord>& records) {
  ManifestSummary s;
  for (const auto& r : records) {
    ++s.total;
    ++s.per_label[static_cast<int>(r.label)];
    if (r.discipline) ++s.per_discipline[static_cast<int>(*r.discipline)];
    else ++s.without_discipline;
    if (r.split) ++s.per_split[static_cast<int>(*r.split)];
    else ++s.without_split;
  }
  return s;
}

/// Parse and check a manifest (unique ids, known disciplines and labels).
inline ManifestSummary validate_manifest(const std::filesystem::path& path) {
  return summarize(read_manifest(path).records);
}

// ---------------------------------------------------------------------------

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;

  void validate() const {
    if (!(train > 0.0 && dev > 0.0 && test > 0.0))
      throw Error(Errc::BadRatios, "every ratio must be positive");
    if (std::abs(train + dev + test - 1.0) > 1e-9)
      throw Error(Errc::BadRatios, "ratios must sum to 1");
  }
};

namespace detail {

/// Split `n` items into three counts proportional to the ratios using the
/// largest-remainder rule (ties go to the earlier split).
inline std::array<std::size_t, 3> apportion(std::size_t n, const SplitRatios& r) {
  const std::array<double, 3> q{n * r.train, n * r.dev, n * r.test};
  std::array<std::size_t, 3> c{};
  std::size_t used = 0;
  for (int i = 0; i < 3; ++i) {
    c[i] = static_cast<std::size_t>(std::floor(q[i]));
    used += c[i];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return q[a] - c[a] > q[b] - c[b]; });
  for (int k = 0; used < n; ++k, ++used) ++c[order[k % 3]];
  return c;
}

}  // namespace detail

/// Assign splits stratified by label. With `group_by_teacher`, all records
/// sharing a teacher_id land in the same split (records without one form
/// singleton groups) and stratification becomes a greedy best effort.
inline std::vector<ManifestRecord> stratified_split(std::vector<ManifestRecord> records,
                                                    const SplitRatios& ratios, std::uint64_t seed,
                                                    bool group_by_teacher = false) {
  ratios.validate();
  std::array<std::vector<std::size_t>, 2> by_label;
  for (std::size_t i = 0; i < records.size(); ++i)
    by_label[static_cast<int>(records[i].label)].push_back(i);
  if (by_label[0].empty() || by_label[1].empty())
    throw Error(Errc::InsufficientRecords, "each label needs at least one record");

  if (!group_by_teacher) {
    for (int l = 0; l < 2; ++l) {
      auto idx = by_label[l];
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(l)));
      rng.shuffle(idx.begin(), idx.end());
      const auto counts = detail::apportion(idx.size(), ratios);
      std::size_t k = 0;
      for (int s = 0; s < 3; ++s)
        for (std::size_t n = 0; n < counts[s]; ++n) records[idx[k++]].split = static_cast<Split>(s);
    }
    return records;
  }

  // Groups in first-appearance order, then shuffled.
  std::map<std::string, std::size_t> group_of;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].teacher_id) {
      auto [it, inserted] = group_of.emplace(*records[i].teacher_id, groups.size());
      if (inserted) groups.emplace_back();
      groups[it->second].push_back(i);
    } else {
      groups.push_back({i});
    }
  }
  Rng rng(seed);
  rng.shuffle(groups.begin(), groups.end());
  std::stable_sort(groups.begin(), groups.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });

  std::array<std::array<double, 2>, 3> target{};
  const std::array<double, 3> rv{ratios.train, ratios.dev, ratios.test};
  for (int s = 0; s < 3; ++s)
    for (int l = 0; l < 2; ++l) target[s][l] = rv[s] * static_cast<double>(by_label[l].size());
  std::array<std::array<double, 2>, 3> have{};

  for (const auto& g : groups) {
    std::array<double, 2> gl{};
    for (auto i : g) gl[static_cast<int>(records[i].label)] += 1.0;
    int best = 0;
    double best_score = -1e300;
    for (int s = 0; s < 3; ++s) {
      double score = 0.0;
      for (int l = 0; l < 2; ++l)
        if (gl[l] > 0) score += gl[l] * (target[s][l] - have[s][l]) / std::max(1.0, target[s][l]);
      if (score > best_score) {
        best_score = score;
        best = s;
      }
    }
    for (int l = 0; l < 2; ++l) have[best][l] += gl[l];
    for (auto i : g) records[i].split = static_cast<Split>(best);
  }
  return records;
}

}  // namespace tiam::data
