#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "universa/common.hpp"

namespace universa {

/// Byte-pair-encoding tokenizer trained by greedy highest-frequency pair
/// merging. Word-initial pieces carry the "▁" marker; ties break on
/// lexicographic pair order so training is fully deterministic.
class BpeModel {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBlank = 2;
  static constexpr int kNumSpecials = 3;

  /// Trains on raw text lines (lowercased and whitespace-normalized
  /// internally). vocab_size bounds the non-special vocabulary; merging
  /// halts early once no pair occurs twice.
  static BpeModel train(const std::vector<std::string>& corpus_lines,
                        int vocab_size = 500);

  /// Applies the merge sequence. Unknown characters map to UNK; empty or
  /// whitespace-only text maps to the single BLANK token.
  std::vector<int> encode(const std::string& text) const;

  /// Inverse of encode on in-alphabet text: concatenates pieces, maps the
  /// word marker to a space, strips PAD/BLANK, renders UNK as U+FFFD.
  std::string decode(const std::vector<int>& ids) const;

  int vocab_size() const { return static_cast<int>(id_to_token_.size()); }
  const std::vector<std::pair<std::string, std::string>>& merges() const {
    return merges_;
  }
  const std::vector<std::string>& id_to_token() const { return id_to_token_; }

  /// Text format: one merge per line ("left right"), then vocab entries
  /// ("token<TAB>id").
  std::string serialize() const;
  static BpeModel deserialize(const std::string& text);
  void save(const std::string& path) const;
  static BpeModel load(const std::string& path);

  /// Lowercase + collapse whitespace runs + trim.
  static std::string normalize(const std::string& text);

 private:
  int token_id(const std::string& token) const;

  std::vector<std::pair<std::string, std::string>> merges_;
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

}  // namespace universa
