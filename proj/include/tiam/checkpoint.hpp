#pragma once

// Checkpoint directory layout:
//   meta.json        format version, model config, class names, LLF
//                    normalization statistics and the parameter list
//   <param>.tnsr     one float32 TNSR file per named parameter

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "tiam/error.hpp"
#include "tiam/model.hpp"
#include "tiam/tnsr.hpp"

namespace tiam {

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::ordered_json config_to_json(const TiamConfig& c) {
  nlohmann::ordered_json j;
  j["llf_dim"] = c.llf_dim;
  j["lstm_hidden"] = c.lstm_hidden;
  j["fl_out"] = c.fl_out;
  j["emb_dim"] = c.emb_dim;
  j["fw_out"] = c.fw_out;
  j["n_classes"] = c.n_classes;
  j["dropout_lstm"] = c.dropout_lstm;
  j["dropout_w"] = c.dropout_w;
  j["variant"] = std::string(to_string(c.variant));
  return j;
}

inline TiamConfig config_from_json(const nlohmann::ordered_json& j, const std::string& where) {
  try {
    TiamConfig c;
    c.llf_dim = j.at("llf_dim").get<std::size_t>();
    c.lstm_hidden = j.at("lstm_hidden").get<std::size_t>();
    c.fl_out = j.at("fl_out").get<std::size_t>();
    c.emb_dim = j.at("emb_dim").get<std::size_t>();
    c.fw_out = j.at("fw_out").get<std::size_t>();
    c.n_classes = j.at("n_classes").get<std::size_t>();
    c.dropout_lstm = j.at("dropout_lstm").get<double>();
    c.dropout_w = j.at("dropout_w").get<double>();
    const auto v = parse_variant(j.at("variant").get<std::string>());
    if (!v) throw Error(Errc::BadConfig, "unknown variant", where);
    c.variant = *v;
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadConfig, std::string("bad model config: ") + e.what(), where);
  }
}

inline void save_checkpoint(const std::filesystem::path& dir, const TiamModel& model) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json meta;
  meta["format_version"] = kCheckpointVersion;
  meta["config"] = config_to_json(model.config());
  meta["class_names"] = {std::string(kLabelNames[0]), std::string(kLabelNames[1])};
  meta["llf_norm"] = {{"mean", model.llf_norm().mean}, {"std", model.llf_norm().std}};
  auto& plist = meta["params"] = nlohmann::ordered_json::array();
  for (const auto* p : model.params()) {
    const std::string file = p->name + ".tnsr";
    tnsr::write_tensor(dir / file, p->value);
    plist.push_back({{"name", p->name}, {"file", file}, {"shape", p->value.shape()}});
  }
  std::ofstream out(dir / "meta.json", std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write meta.json", dir.string());
  out << meta.dump(2) << '\n';
}

inline TiamModel load_checkpoint(const std::filesystem::path& dir) {
  const auto meta_path = dir / "meta.json";
  std::ifstream in(meta_path);
  if (!in) throw Error(Errc::IoError, "cannot open meta.json", meta_path.string());
  nlohmann::ordered_json meta;
  try {
    meta = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedRecord, e.what(), meta_path.string());
  }
  if (meta.value("format_version", 0) != kCheckpointVersion)
    throw Error(Errc::UnsupportedVersion, "unsupported checkpoint format", meta_path.string());

  TiamModel model(config_from_json(meta.at("config"), meta_path.string()), 0);
  try {
    LlfNorm norm{meta.at("llf_norm").at("mean").get<std::vector<double>>(),
                 meta.at("llf_norm").at("std").get<std::vector<double>>()};
    model.set_llf_norm(std::move(norm));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedRecord, std::string("bad llf_norm: ") + e.what(),
                meta_path.string());
  }

  std::map<std::string, std::string> files;
  for (const auto& p : meta.at("params"))
    files[p.at("name").get<std::string>()] = p.at("file").get<std::string>();
  for (auto* p : model.params()) {
    auto it = files.find(p->name);
    if (it == files.end())
      throw Error(Errc::ShapeError, "checkpoint lacks parameter " + p->name, dir.string());
    Tensor t = tnsr::read_tensor(dir / it->second);
    if (t.shape() != p->value.shape())
      throw Error(Errc::ShapeError, "shape mismatch for " + p->name, (dir / it->second).string());
    p->value = std::move(t);
  }
  return model;
}

}  // namespace tiam
