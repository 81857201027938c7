#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "universa/common.hpp"

namespace universa {

/// One dataset row. Paths are stored as written in the manifest file and
/// resolved against the manifest's directory at load time.
struct UtteranceRecord {
  std::string id;
  std::string audio;
  std::optional<std::string> ref_audio;
  std::optional<std::string> text;
  std::optional<std::string> pseudo_text;
  std::optional<std::string> features;
  std::map<std::string, double> metrics;

  bool operator==(const UtteranceRecord&) const = default;
};

struct Manifest {
  std::vector<UtteranceRecord> records;
  std::string split_tag;  // in-memory only; not part of the file schema

  size_t size() const { return records.size(); }
};

/// Strict JSONL reader: one object per line with keys exactly
/// {id, audio, ref_audio?, text?, pseudo_text?, features?, metrics?}.
/// Unknown keys, unknown metric ids, and duplicate ids are errors that
/// name the offending line(s). Relative paths are resolved against the
/// manifest's directory.
Manifest load_manifest(const std::string& path);

void save_manifest(const Manifest& manifest, const std::string& path);

struct SplitRatios {
  int train = 85;
  int dev = 5;
  int test = 10;
};

/// Seeded shuffle then contiguous train/dev/test cuts. Sizes are
/// floor-based with the remainder going to train; an empty dev or test
/// split triggers a warning on stderr.
struct SplitResult {
  Manifest train;
  Manifest dev;
  Manifest test;
};
SplitResult split_manifest(const Manifest& manifest, const SplitRatios& ratios,
                           uint64_t seed);

}  // namespace universa
