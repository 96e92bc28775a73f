#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "btcurator/corpus.hpp"

namespace btcurator {

/// Direction of a translation model, or of the synthetic pairs it trains.
/// kFE pairs are (synthetic F source, genuine E target): they come from
/// back-translating E monolingual text with the E->F model.
enum class Direction { kFE, kEF };

std::string_view to_string(Direction d);
Direction parse_direction(std::string_view text);
inline Direction reverse(Direction d) { return d == Direction::kFE ? Direction::kEF : Direction::kFE; }

inline constexpr double kProbabilityFloor = 1e-10;

class Translator {
 public:
  virtual ~Translator() = default;

  virtual Tokens translate(const Sentence& source) const = 0;

  /// Length-normalized negative conditional log-likelihood of `target`
  /// given `source`, in nats per target token. Never negative.
  virtual double cond_nll(const Tokens& target, const Tokens& source) const = 0;
};

/// Word translation table t(target | source).
class LexiconModel {
 public:
  using Row = std::map<std::string, double>;

  static LexiconModel identity(const std::vector<std::string>& vocabulary);

  void set(const std::string& source, const std::string& target, double prob);

  double prob(std::string_view target, std::string_view source) const;
  const Row* row(std::string_view source) const;
  bool has_source(std::string_view source) const { return row(source) != nullptr; }

  /// argmax_y t(y|x); ties go to the lexicographically smallest target.
  std::optional<std::string> best_translation(std::string_view source) const;

  std::size_t source_size() const { return table_.size(); }
  /// best_translation() for every source word.
  std::unordered_map<std::string, std::string> argmax_map() const;
  /// Sorted target vocabulary.
  std::vector<std::string> target_vocabulary() const;

  /// Largest |sum_y t(y|x) - 1| over all source rows.
  double max_row_deviation() const;

  void save(const std::filesystem::path& path) const;
  static LexiconModel load(const std::filesystem::path& path);

  bool operator==(const LexiconModel&) const = default;

 private:
  std::unordered_map<std::string, Row> table_;
};

/// EM for IBM Model 1 without a NULL source word. Rows start uniform over
/// co-occurring target words. When `log_likelihood` is given it receives the
/// training log-likelihood before the first sweep and after each sweep.
LexiconModel train_model1(const ParallelCorpus& corpus, int iterations,
                          std::vector<double>* log_likelihood = nullptr);

/// sum over pairs of sum_j log((1/|x|) sum_i t(y_j|x_i)), floored at 1e-10.
double model1_log_likelihood(const LexiconModel& model, const ParallelCorpus& corpus);

/// Word-by-word argmax; unknown source words are copied through.
Tokens translate(const LexiconModel& model, const Tokens& source);

/// -(1/|y|) sum_j log(max((1/|x|) sum_i t(y_j|x_i), 1e-10)).
double cond_nll(const LexiconModel& model, const Tokens& target, const Tokens& source);

/// translate(), then each output token is independently replaced with
/// probability `noise_rate` by a uniformly drawn target-vocabulary word. The
/// random stream depends only on (seed, sentence id).
Tokens noisy_translate(const LexiconModel& model, const Sentence& source, double noise_rate,
                       std::uint64_t seed);

class LexiconTranslator final : public Translator {
 public:
  explicit LexiconTranslator(LexiconModel model, double noise_rate = 0.0, std::uint64_t seed = 0)
      : model_(std::move(model)), noise_rate_(noise_rate), seed_(seed) {}

  Tokens translate(const Sentence& source) const override;
  double cond_nll(const Tokens& target, const Tokens& source) const override;

  const LexiconModel& model() const { return model_; }

 private:
  LexiconModel model_;
  double noise_rate_;
  std::uint64_t seed_;
};

/// Copies its input; cond_nll behaves like an identity lexicon.
class IdentityTranslator final : public Translator {
 public:
  Tokens translate(const Sentence& source) const override { return source.tokens; }
  double cond_nll(const Tokens& target, const Tokens& source) const override;
};

/// Translations and scores produced by an external system.
///
/// Translation file rows: "<id>\t<translated tokens>\t<nll>". When the
/// source corpus is supplied, each row also registers its nll as the score
/// of (source sentence, translation). Extra score files use
/// "<source tokens>\t<target tokens>\t<nll>" rows.
class OfflineTranslator final : public Translator {
 public:
  OfflineTranslator(const std::filesystem::path& translations, const Corpus* source_corpus);

  void add_scores(const std::filesystem::path& scores);

  Tokens translate(const Sentence& source) const override;
  double cond_nll(const Tokens& target, const Tokens& source) const override;

 private:
  std::unordered_map<SentenceId, Tokens> translations_;
  std::unordered_map<std::string, double> scores_;
};

}  // namespace btcurator
