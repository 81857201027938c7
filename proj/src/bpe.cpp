#include "universa/text/bpe.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace universa {

namespace {

const std::string kWordMarker = "\xe2\x96\x81";  // "▁" U+2581
const std::string kReplacement = "\xef\xbf\xbd";  // U+FFFD

const char* kSpecialNames[] = {"<pad>", "<unk>", "<blank>"};

// Splits normalized text into words and each word into its initial symbol
// sequence: the word marker followed by one symbol per character.
std::vector<std::vector<std::string>> to_symbol_words(const std::string& text) {
  std::vector<std::vector<std::string>> words;
  std::istringstream iss(text);
  std::string word;
  while (iss >> word) {
    std::vector<std::string> syms;
    syms.push_back(kWordMarker);
    for (char c : word) syms.emplace_back(1, c);
    words.push_back(std::move(syms));
  }
  return words;
}

void apply_merge(std::vector<std::string>& syms, const std::string& left,
                 const std::string& right) {
  size_t w = 0;
  for (size_t r = 0; r < syms.size();) {
    if (r + 1 < syms.size() && syms[r] == left && syms[r + 1] == right) {
      syms[w++] = left + right;
      r += 2;
    } else {
      if (w != r) syms[w] = std::move(syms[r]);
      ++w;
      ++r;
    }
  }
  syms.resize(w);
}

}  // namespace

std::string BpeModel::normalize(const std::string& text) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  return out;
}

int BpeModel::token_id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

BpeModel BpeModel::train(const std::vector<std::string>& corpus_lines,
                         int vocab_size) {
  // Unique words with frequencies.
  std::map<std::string, int64_t> word_freq;
  for (const auto& line : corpus_lines) {
    std::istringstream iss(normalize(line));
    std::string word;
    while (iss >> word) ++word_freq[word];
  }
  if (word_freq.empty()) throw ValidationError("train_bpe: empty corpus");

  std::vector<std::vector<std::string>> words;
  std::vector<int64_t> freqs;
  std::set<std::string> alphabet;
  alphabet.insert(kWordMarker);
  for (const auto& [word, freq] : word_freq) {
    std::vector<std::string> syms;
    syms.push_back(kWordMarker);
    for (char c : word) {
      syms.emplace_back(1, c);
      alphabet.insert(std::string(1, c));
    }
    words.push_back(std::move(syms));
    freqs.push_back(freq);
  }

  BpeModel model;
  for (const char* s : kSpecialNames) {
    model.token_to_id_.emplace(s, static_cast<int>(model.id_to_token_.size()));
    model.id_to_token_.emplace_back(s);
  }
  for (const auto& sym : alphabet) {
    model.token_to_id_.emplace(sym, static_cast<int>(model.id_to_token_.size()));
    model.id_to_token_.push_back(sym);
  }

  while (model.vocab_size() - kNumSpecials < vocab_size) {
    std::map<std::pair<std::string, std::string>, int64_t> pair_freq;
    for (size_t i = 0; i < words.size(); ++i) {
      const auto& syms = words[i];
      for (size_t j = 0; j + 1 < syms.size(); ++j) {
        pair_freq[{syms[j], syms[j + 1]}] += freqs[i];
      }
    }
    // Highest count wins; ties go to the lexicographically smallest pair.
    const std::pair<std::string, std::string>* best = nullptr;
    int64_t best_count = 1;  // a pair must occur at least twice
    for (const auto& [pair, count] : pair_freq) {
      if (count > best_count) {
        best_count = count;
        best = &pair;
      }
    }
    if (best == nullptr) break;  // no pair repeats

    const auto [left, right] = *best;
    model.merges_.emplace_back(left, right);
    const std::string merged = left + right;
    if (!model.token_to_id_.count(merged)) {
      model.token_to_id_.emplace(merged,
                                 static_cast<int>(model.id_to_token_.size()));
      model.id_to_token_.push_back(merged);
    }
    for (auto& syms : words) apply_merge(syms, left, right);
  }
  return model;
}

std::vector<int> BpeModel::encode(const std::string& text) const {
  auto words = to_symbol_words(normalize(text));
  if (words.empty()) return {kBlank};
  std::vector<int> ids;
  for (auto& syms : words) {
    for (const auto& [left, right] : merges_) apply_merge(syms, left, right);
    for (const auto& sym : syms) ids.push_back(token_id(sym));
  }
  return ids;
}

std::string BpeModel::decode(const std::vector<int>& ids) const {
  std::string pieces;
  for (int id : ids) {
    if (id < 0 || id >= vocab_size()) {
      throw ValidationError("decode: token id " + std::to_string(id) +
                            " out of range");
    }
    if (id == kPad || id == kBlank) continue;
    if (id == kUnk) {
      pieces += kReplacement;
      continue;
    }
    pieces += id_to_token_[static_cast<size_t>(id)];
  }
  // Word markers become spaces; the leading one is an artifact.
  std::string out;
  size_t i = 0;
  while (i < pieces.size()) {
    if (pieces.compare(i, kWordMarker.size(), kWordMarker) == 0) {
      if (!out.empty()) out.push_back(' ');
      i += kWordMarker.size();
    } else {
      out.push_back(pieces[i]);
      ++i;
    }
  }
  return out;
}

std::string BpeModel::serialize() const {
  std::ostringstream out;
  for (const auto& [left, right] : merges_) out << left << ' ' << right << '\n';
  for (size_t id = 0; id < id_to_token_.size(); ++id) {
    out << id_to_token_[id] << '\t' << id << '\n';
  }
  return out.str();
}

BpeModel BpeModel::deserialize(const std::string& text) {
  BpeModel model;
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<std::string, int>> vocab;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      const auto space = line.find(' ');
      if (space == std::string::npos || space + 1 >= line.size()) {
        throw ValidationError("bpe model line " + std::to_string(line_no) +
                              ": malformed merge");
      }
      model.merges_.emplace_back(line.substr(0, space), line.substr(space + 1));
    } else {
      try {
        vocab.emplace_back(line.substr(0, tab), std::stoi(line.substr(tab + 1)));
      } catch (const std::exception&) {
        throw ValidationError("bpe model line " + std::to_string(line_no) +
                              ": malformed vocab id");
      }
    }
  }
  if (vocab.empty()) throw ValidationError("bpe model has no vocabulary");
  std::sort(vocab.begin(), vocab.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  for (const auto& [token, id] : vocab) {
    if (id != static_cast<int>(model.id_to_token_.size())) {
      throw ValidationError("bpe vocabulary ids are not dense from 0");
    }
    model.token_to_id_.emplace(token, id);
    model.id_to_token_.push_back(token);
  }
  if (model.vocab_size() < kNumSpecials) {
    throw ValidationError("bpe vocabulary missing special tokens");
  }
  return model;
}

void BpeModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write bpe model: " + path);
  out << serialize();
}

BpeModel BpeModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open bpe model: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

}  // namespace universa
