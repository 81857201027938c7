#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "universa/rng.hpp"
#include "universa/text/bpe.hpp"

using namespace universa;

namespace {
const std::string kMarker = "\xe2\x96\x81";  // ▁
}

TEST_CASE("bpe: first merge is the strictly most frequent pair") {
  // "abab abab": within each word the pairs are (marker,a):1, (a,b):2,
  // (b,a):1; two word occurrences double the counts, so (a,b) wins at 4.
  const BpeModel model = BpeModel::train({"abab abab"}, 10);
  REQUIRE_FALSE(model.merges().empty());
  CHECK(model.merges()[0].first == "a");
  CHECK(model.merges()[0].second == "b");
}

TEST_CASE("bpe: repeated single character halts early with the tiny vocab") {
  const BpeModel model = BpeModel::train({"a a a a"}, 100);
  // specials + marker + "a" + the one merge output "marker+a"
  CHECK(model.vocab_size() == BpeModel::kNumSpecials + 3);
  REQUIRE(model.merges().size() == 1);
  CHECK(model.merges()[0].first == kMarker);
  CHECK(model.merges()[0].second == "a");
  const auto& tokens = model.id_to_token();
  CHECK(std::find(tokens.begin(), tokens.end(), kMarker) != tokens.end());
  CHECK(std::find(tokens.begin(), tokens.end(), "a") != tokens.end());
  CHECK(std::find(tokens.begin(), tokens.end(), kMarker + "a") != tokens.end());
}

TEST_CASE("bpe: training is deterministic") {
  const std::vector<std::string> corpus = {"the cat sat on the mat",
                                           "the dog sat on the log"};
  const BpeModel a = BpeModel::train(corpus, 50);
  const BpeModel b = BpeModel::train(corpus, 50);
  CHECK(a.merges() == b.merges());
  CHECK(a.id_to_token() == b.id_to_token());
}

TEST_CASE("bpe: empty text encodes to BLANK and decodes to empty") {
  const BpeModel model = BpeModel::train({"hello world"}, 50);
  CHECK(model.encode("") == std::vector<int>{BpeModel::kBlank});
  CHECK(model.encode("   ") == std::vector<int>{BpeModel::kBlank});
  CHECK(model.decode({BpeModel::kBlank}) == "");
}

TEST_CASE("bpe: round trip on in-alphabet text") {
  const std::vector<std::string> corpus = {"speech quality assessment",
                                           "quality of speech varies"};
  const BpeModel model = BpeModel::train(corpus, 200);
  for (const std::string text :
       {"speech quality", "Quality   ASSESSMENT", "varies of speech"}) {
    CHECK(model.decode(model.encode(text)) == BpeModel::normalize(text));
  }
}

TEST_CASE("bpe: unknown characters map to UNK and render as U+FFFD") {
  const BpeModel model = BpeModel::train({"abc abc"}, 20);
  const auto ids = model.encode("abz");
  CHECK(std::find(ids.begin(), ids.end(), BpeModel::kUnk) != ids.end());
  const std::string decoded = model.decode(ids);
  CHECK(decoded.find("\xef\xbf\xbd") != std::string::npos);
}

TEST_CASE("bpe: decode rejects out-of-range ids") {
  const BpeModel model = BpeModel::train({"ab"}, 10);
  CHECK_THROWS_AS(model.decode({model.vocab_size()}), ValidationError);
}

TEST_CASE("bpe: merges only shrink and the vocab is bounded") {
  // Random syllable corpus; for every line, the token count never exceeds
  // the initial symbol count (chars + one word marker per word).
  Rng rng(17);
  const char* syl[] = {"ka", "to", "mi", "ra", "su", "ne"};
  std::vector<std::string> corpus;
  for (int i = 0; i < 60; ++i) {
    std::string line;
    const int words = 2 + static_cast<int>(rng.below(5));
    for (int w = 0; w < words; ++w) {
      if (w) line += ' ';
      const int sylls = 1 + static_cast<int>(rng.below(3));
      for (int s = 0; s < sylls; ++s) line += syl[rng.below(6)];
    }
    corpus.push_back(line);
  }
  const int vocab_budget = 120;
  const BpeModel model = BpeModel::train(corpus, vocab_budget);
  CHECK(model.vocab_size() <= vocab_budget + BpeModel::kNumSpecials);
  for (const auto& line : corpus) {
    const std::string norm = BpeModel::normalize(line);
    size_t chars = 0, words = 1;
    for (char c : norm) {
      if (c == ' ') ++words;
      else ++chars;
    }
    CHECK(model.encode(line).size() <= chars + words);
    CHECK(model.decode(model.encode(line)) == norm);
  }
}

TEST_CASE("bpe: serialize/deserialize round trip") {
  const BpeModel model = BpeModel::train({"wav to text", "text to wav"}, 64);
  const std::string blob = model.serialize();
  const BpeModel reloaded = BpeModel::deserialize(blob);
  CHECK(reloaded.merges() == model.merges());
  CHECK(reloaded.id_to_token() == model.id_to_token());
  CHECK(reloaded.serialize() == blob);
  CHECK(reloaded.encode("wav text") == model.encode("wav text"));

  const auto path =
      (std::filesystem::temp_directory_path() / "universa_bpe.model").string();
  model.save(path);
  CHECK(BpeModel::load(path).serialize() == blob);
}
