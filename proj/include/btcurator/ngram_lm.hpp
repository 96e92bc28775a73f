#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "btcurator/corpus.hpp"

namespace btcurator {

inline constexpr int kMaxLmOrder = 6;
inline constexpr std::string_view kUnk = "<unk>";
inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";

enum class Smoothing {
  kModifiedKneserNey,  // interpolated, three discounts per order
  kNone,               // relative frequencies; test mode only
};

struct LmConfig {
  int order = 5;
  Smoothing smoothing = Smoothing::kModifiedKneserNey;
  // Wrap each sentence in <s> ... </s>. Only kNone may turn this off.
  bool pad_sentences = true;
};

/// Discounts for one order, indexed by adjusted count 1, 2 and 3+.
struct Discounts {
  std::array<double, 3> d{0.0, 0.0, 0.0};
  bool fallback = false;  // absolute discounting at 0.75

  double for_count(std::uint64_t count) const {
    return count == 0 ? 0.0 : d[std::min<std::uint64_t>(count, 3) - 1];
  }
};

/// Modified Kneser-Ney discounts from count-of-counts n[0..3] = n1..n4.
/// Falls back to absolute discounting (0.75 everywhere) when the estimate is
/// undefined or leaves the [0, k] range.
Discounts estimate_discounts(const std::array<std::uint64_t, 4>& count_of_counts);

/// Order-n language model. Probabilities are kept in interpolated form with
/// per-context backoff weights, so lookup is the usual longest-match walk and
/// the tables map one-to-one onto ARPA sections. All scores are natural logs.
class NGramLM {
 public:
  using WordId = std::uint32_t;
  using Key = std::array<WordId, kMaxLmOrder>;

  struct KeyHash {
    std::size_t operator()(const Key& key) const noexcept;
  };

  struct Entry {
    double prob = 0.0;
    double backoff = 1.0;
  };

  struct SentenceScore {
    double log_prob = 0.0;
    std::size_t positions = 0;
  };

  static NGramLM train(const Corpus& corpus, const LmConfig& config = {});
  static NGramLM train(std::span<const Tokens> sentences, const LmConfig& config = {});

  static NGramLM read_arpa(std::istream& in);
  static NGramLM load_arpa(const std::filesystem::path& path);
  void write_arpa(std::ostream& out) const;
  void save_arpa(const std::filesystem::path& path) const;

  int order() const { return order_; }
  bool padded() const { return padded_; }

  /// Includes <unk> and </s>, excludes <s>.
  std::vector<std::string> predictable_words() const;
  std::size_t vocabulary_size() const { return words_.size(); }
  bool contains(std::string_view word) const { return ids_.count(std::string(word)) > 0; }

  /// P(word | context), context given oldest first; only the last order-1
  /// tokens are used. Unknown words map to <unk>.
  double prob(std::span<const std::string> context, std::string_view word) const;
  double log_prob(std::span<const std::string> context, std::string_view word) const;

  SentenceScore score_sentence(const Tokens& tokens) const;

  /// Mean natural-log probability per scored position; the end-of-sentence
  /// prediction counts as a position. Throws DataError on empty input.
  double sentence_logprob_avg(const Tokens& tokens) const;

  /// Per-order discounts (empty for models read from ARPA).
  const std::vector<Discounts>& discounts() const { return discounts_; }

  std::size_t ngram_count(int n) const { return tables_.at(n - 1).size(); }

 private:
  NGramLM() = default;

  WordId intern(std::string_view word);
  WordId lookup(std::string_view word) const;
  double log_prob_ids(std::span<const WordId> context, WordId word) const;
  const Entry* find(int n, std::span<const WordId> ngram) const;

  int order_ = 0;
  bool padded_ = true;
  std::unordered_map<std::string, WordId> ids_;
  std::vector<std::string> words_;
  std::vector<std::unordered_map<Key, Entry, KeyHash>> tables_;
  std::vector<Discounts> discounts_;
};

/// exp(-(total log prob) / (total scored positions)) over the corpus.
double perplexity(const NGramLM& lm, const Corpus& corpus);

}  // namespace btcurator
