#include "universa/data/manifest.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <unordered_map>

#include <json.hpp>

#include "universa/metrics/registry.hpp"
#include "universa/rng.hpp"

namespace universa {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

const std::vector<std::string> kAllowedKeys = {
    "id", "audio", "ref_audio", "text", "pseudo_text", "features", "metrics"};

std::string resolve(const std::string& path, const fs::path& base) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (base / path).lexically_normal().string();
}

std::optional<std::string> opt_string(const Json& obj, const char* key,
                                      int line_no) {
  if (!obj.contains(key)) return std::nullopt;
  if (!obj[key].is_string()) {
    throw ValidationError("manifest line " + std::to_string(line_no) + ": '" +
                          key + "' must be a string");
  }
  return obj[key].get<std::string>();
}

}  // namespace

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest: " + path);
  const fs::path base = fs::path(path).parent_path();
  const MetricRegistry registry = MetricRegistry::defaults();

  Manifest manifest;
  std::unordered_map<std::string, int> id_lines;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ValidationError("manifest line " + std::to_string(line_no) + ": " +
                            e.what());
    }
    if (!obj.is_object()) {
      throw ValidationError("manifest line " + std::to_string(line_no) +
                            ": expected a JSON object");
    }
    for (const auto& [key, _] : obj.items()) {
      if (std::find(kAllowedKeys.begin(), kAllowedKeys.end(), key) ==
          kAllowedKeys.end()) {
        throw ValidationError("manifest line " + std::to_string(line_no) +
                              ": unknown key '" + key + "'");
      }
    }

    UtteranceRecord rec;
    auto id = opt_string(obj, "id", line_no);
    if (!id || id->empty()) {
      throw ValidationError("manifest line " + std::to_string(line_no) +
                            ": missing 'id'");
    }
    rec.id = *id;
    rec.audio = opt_string(obj, "audio", line_no).value_or("");
    rec.ref_audio = opt_string(obj, "ref_audio", line_no);
    rec.text = opt_string(obj, "text", line_no);
    rec.pseudo_text = opt_string(obj, "pseudo_text", line_no);
    rec.features = opt_string(obj, "features", line_no);
    if (rec.audio.empty() && !rec.features) {
      throw ValidationError("manifest line " + std::to_string(line_no) +
                            ": record needs 'audio' or 'features'");
    }
    if (obj.contains("metrics")) {
      if (!obj["metrics"].is_object()) {
        throw ValidationError("manifest line " + std::to_string(line_no) +
                              ": 'metrics' must be an object");
      }
      for (const auto& [key, value] : obj["metrics"].items()) {
        if (!registry.has(key)) {
          throw ValidationError("manifest line " + std::to_string(line_no) +
                                ": unknown metric id '" + key + "'");
        }
        if (!value.is_number()) {
          throw ValidationError("manifest line " + std::to_string(line_no) +
                                ": metric '" + key + "' must be a number");
        }
        const double v = value.get<double>();
        if (!std::isfinite(v)) {
          throw ValidationError("manifest line " + std::to_string(line_no) +
                                ": metric '" + key + "' is not finite");
        }
        rec.metrics[key] = v;
      }
    }

    auto [it, inserted] = id_lines.emplace(rec.id, line_no);
    if (!inserted) {
      throw ValidationError("duplicate id '" + rec.id + "' on lines " +
                            std::to_string(it->second) + " and " +
                            std::to_string(line_no));
    }

    rec.audio = resolve(rec.audio, base);
    if (rec.ref_audio) rec.ref_audio = resolve(*rec.ref_audio, base);
    if (rec.features) rec.features = resolve(*rec.features, base);
    manifest.records.push_back(std::move(rec));
  }
  if (manifest.records.empty()) {
    throw ValidationError("manifest is empty: " + path);
  }
  return manifest;
}

void save_manifest(const Manifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  for (const auto& rec : manifest.records) {
    Json obj;
    obj["id"] = rec.id;
    if (!rec.audio.empty()) obj["audio"] = rec.audio;
    if (rec.ref_audio) obj["ref_audio"] = *rec.ref_audio;
    if (rec.text) obj["text"] = *rec.text;
    if (rec.pseudo_text) obj["pseudo_text"] = *rec.pseudo_text;
    if (rec.features) obj["features"] = *rec.features;
    if (!rec.metrics.empty()) {
      Json m = Json::object();
      for (const auto& [key, value] : rec.metrics) m[key] = value;
      obj["metrics"] = m;
    }
    out << obj.dump() << '\n';
  }
}

SplitResult split_manifest(const Manifest& manifest, const SplitRatios& ratios,
                           uint64_t seed) {
  if (ratios.train <= 0 || ratios.dev <= 0 || ratios.test <= 0 ||
      ratios.train + ratios.dev + ratios.test != 100) {
    throw ValidationError("split ratios must be positive and sum to 100");
  }
  const size_t n = manifest.records.size();
  if (n < 3) throw ValidationError("manifest too small to split (need >= 3 records)");

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const size_t n_dev = n * static_cast<size_t>(ratios.dev) / 100;
  const size_t n_test = n * static_cast<size_t>(ratios.test) / 100;
  const size_t n_train = n - n_dev - n_test;  // remainder goes to train

  SplitResult out;
  out.train.split_tag = "train";
  out.dev.split_tag = "dev";
  out.test.split_tag = "test";
  for (size_t i = 0; i < n; ++i) {
    const auto& rec = manifest.records[order[i]];
    if (i < n_train) {
      out.train.records.push_back(rec);
    } else if (i < n_train + n_dev) {
      out.dev.records.push_back(rec);
    } else {
      out.test.records.push_back(rec);
    }
  }
  if (out.dev.records.empty()) {
    std::cerr << "warning: dev split is empty (" << n << " records)\n";
  }
  if (out.test.records.empty()) {
    std::cerr << "warning: test split is empty (" << n << " records)\n";
  }
  return out;
}

}  // namespace universa
