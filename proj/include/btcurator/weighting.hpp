#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "btcurator/corpus.hpp"
#include "btcurator/embedding.hpp"
#include "btcurator/translator.hpp"

namespace btcurator {

enum class QualityMetric {
  kEnc,    // cosine of pooled source/target representations
  kAgree,  // agreement of forward and backward conditional NLLs
  kNone,   // every pair has quality 1
};

/// How the improvement factor enters the final weight.
enum class Composition {
  kProduct,  // quality * imp
  kImpOnly,  // imp alone; quality only feeds the improvement ratio
};

std::string_view to_string(QualityMetric m);
QualityMetric parse_quality_metric(std::string_view text);
std::string_view to_string(Composition c);
Composition parse_composition(std::string_view text);

struct WeightConfig {
  QualityMetric quality = QualityMetric::kEnc;
  bool improvement = true;
  double w_low = 0.5;
  double w_high = 2.0;
  Composition composition = Composition::kProduct;
  // Final weights are floored here so every emitted weight stays positive.
  double min_weight = 1e-6;

  void validate() const;
};

/// cosine(src.embed(x), tgt.embed(y)) clamped below at 0.
double enc_weight(const Sentence& x, const Sentence& y, const SentenceEmbedder& src,
                  const SentenceEmbedder& tgt);

/// exp(-|forward.cond_nll(y|x) - backward.cond_nll(x|y)|). `forward` maps
/// x's language to y's.
double agree_weight(const Tokens& x, const Tokens& y, const Translator& forward,
                    const Translator& backward);

/// clip(current / previous, w_low, w_high); 1 when there is no previous
/// score or the previous score is zero (warned).
double imp_factor(double current, std::optional<double> previous, const WeightConfig& config);

double final_weight(double quality, double imp, const WeightConfig& config);

/// Last observed quality per (direction, sentence id).
class QualityStore {
 public:
  std::optional<double> get(Direction d, SentenceId id) const;
  void update(Direction d, SentenceId id, double quality);
  std::size_t size(Direction d) const { return table(d).size(); }

  /// "<id>\t<score>" lines sorted by id; scores round-trip exactly.
  std::string serialize(Direction d) const;
  void deserialize(Direction d, std::string_view text);

  void save(const std::filesystem::path& dir) const;
  static QualityStore load(const std::filesystem::path& dir);
  static std::filesystem::path file_name(Direction d);

  bool operator==(const QualityStore&) const = default;

 private:
  const std::map<SentenceId, double>& table(Direction d) const {
    return d == Direction::kFE ? fe_ : ef_;
  }
  std::map<SentenceId, double>& table(Direction d) { return d == Direction::kFE ? fe_ : ef_; }

  std::map<SentenceId, double> fe_;
  std::map<SentenceId, double> ef_;
};

/// Reads the previous score, returns the improvement factor and records
/// `current`. Use only where no batching is needed.
double observe_quality(QualityStore& store, Direction d, SentenceId id, double current,
                       const WeightConfig& config);

struct WeightedPair {
  SentenceId id = 0;
  int epoch = 0;
  Direction direction = Direction::kFE;
  Tokens source;  // synthetic side
  Tokens target;  // genuine monolingual side
  double quality = 1.0;
  double imp = 1.0;
  double weight = 1.0;
  double repr = 0.0;
  double simp = 0.0;
  double combined = 0.0;
};

}  // namespace btcurator
