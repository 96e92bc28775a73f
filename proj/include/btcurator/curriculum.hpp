#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "btcurator/corpus.hpp"
#include "btcurator/scoring.hpp"

namespace btcurator {

struct ScheduleConfig {
  double c0 = 0.1;  // initial balance, in [0, 1)
  int T = 5;        // epochs until selection is purely by representativeness

  void validate() const;
};

struct SelectionConfig {
  double p = 30.0;  // percent of the corpus selected per epoch, in (0, 100]

  void validate() const;
  /// floor(p * n / 100), at least 1 for nonempty corpora.
  std::size_t count(std::size_t n) const;
};

/// Square-root schedule: min(1, sqrt(t (1 - c0^2) / T) + c0^2).
double lambda_at(int t, const ScheduleConfig& config);

/// lambda * repr + (1 - lambda) * simp.
double combined_score(double norm_repr, double norm_simp, double lambda);

enum class TieRule { kLowerId, kHigherId };

struct SelectionEpoch {
  int epoch = 0;
  double lambda = 0.0;
  std::vector<SentenceId> selected;  // best first
  std::vector<double> combined;      // indexed by sentence id, whole corpus
};

/// Top floor(p N / 100) (at least 1) sentences by combined score, equal
/// scores ordered by the tie rule. Throws DataError on empty or NaN input.
SelectionEpoch select_top(std::span<const double> combined, const SelectionConfig& config,
                          TieRule tie_rule = TieRule::kLowerId);

/// Combines normalized scores with lambda_at(epoch) and selects.
SelectionEpoch select_epoch(const NormalizedScores& scores, int epoch,
                            const ScheduleConfig& schedule, const SelectionConfig& selection,
                            TieRule tie_rule = TieRule::kLowerId);

struct ReplacementStats {
  // replaced[k] = |S(k+1) \ S(k)| / |S(k+1)|; empty for a single epoch.
  std::vector<double> replaced;
  // coverage[k] = |S(0) u ... u S(k)| / N.
  std::vector<double> coverage;

  double final_coverage() const { return coverage.empty() ? 0.0 : coverage.back(); }
};

ReplacementStats replacement_stats(std::span<const SelectionEpoch> history, std::size_t corpus_size);

/// Same statistics from bare id lists.
ReplacementStats replacement_stats(std::span<const std::vector<SentenceId>> history,
                                   std::size_t corpus_size);

}  // namespace btcurator
