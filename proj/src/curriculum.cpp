#include "btcurator/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "btcurator/error.hpp"

namespace btcurator {

void ScheduleConfig::validate() const {
  if (!(c0 >= 0.0 && c0 < 1.0)) throw ConfigError("c0 must be in [0, 1)");
  if (T < 1) throw ConfigError("T must be a positive integer");
}

void SelectionConfig::validate() const {
  if (!(p > 0.0 && p <= 100.0)) throw ConfigError("p must be in (0, 100]");
}

std::size_t SelectionConfig::count(std::size_t n) const {
  if (n == 0) return 0;
  // The small slack keeps exact products like 30 * 10 / 100 from rounding down.
  const long double exact = static_cast<long double>(p) * static_cast<long double>(n) / 100.0L;
  const auto k = static_cast<std::size_t>(std::floor(exact + 1e-9L));
  return std::clamp<std::size_t>(k, 1, n);
}

double lambda_at(int t, const ScheduleConfig& config) {
  config.validate();
  if (t < 0) throw ConfigError("epoch index must be nonnegative");
  const double c0sq = config.c0 * config.c0;
  return std::min(1.0, std::sqrt(t * (1.0 - c0sq) / config.T) + c0sq);
}

double combined_score(double norm_repr, double norm_simp, double lambda) {
  if (lambda == 1.0) return norm_repr;
  if (lambda == 0.0) return norm_simp;
  return lambda * norm_repr + (1.0 - lambda) * norm_simp;
}

SelectionEpoch select_top(std::span<const double> combined, const SelectionConfig& config,
                          TieRule tie_rule) {
  config.validate();
  if (combined.empty()) throw DataError("cannot select from an empty score table");
  for (double v : combined)
    if (std::isnan(v)) throw DataError("NaN in combined scores");

  const std::size_t k = config.count(combined.size());
  std::vector<SentenceId> order(combined.size());
  std::iota(order.begin(), order.end(), SentenceId{0});
  const auto better = [&](SentenceId a, SentenceId b) {
    if (combined[a] != combined[b]) return combined[a] > combined[b];
    return tie_rule == TieRule::kLowerId ? a < b : a > b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);
  order.resize(k);

  SelectionEpoch out;
  out.selected = std::move(order);
  out.combined.assign(combined.begin(), combined.end());
  return out;
}

SelectionEpoch select_epoch(const NormalizedScores& scores, int epoch,
                            const ScheduleConfig& schedule, const SelectionConfig& selection,
                            TieRule tie_rule) {
  if (scores.repr.size() != scores.simp.size())
    throw DataError("representativeness and simplicity tables differ in size");
  const double lambda = lambda_at(epoch, schedule);
  std::vector<double> combined(scores.size());
  for (std::size_t i = 0; i < combined.size(); ++i)
    combined[i] = combined_score(scores.repr[i], scores.simp[i], lambda);
  auto out = select_top(combined, selection, tie_rule);
  out.epoch = epoch;
  out.lambda = lambda;
  return out;
}

ReplacementStats replacement_stats(std::span<const std::vector<SentenceId>> history,
                                   std::size_t corpus_size) {
  if (corpus_size == 0) throw DataError("replacement statistics need a nonempty corpus");
  ReplacementStats stats;
  std::unordered_set<SentenceId> seen;
  for (std::size_t t = 0; t < history.size(); ++t) {
    const auto& current = history[t];
    if (t > 0) {
      const std::unordered_set<SentenceId> previous(history[t - 1].begin(), history[t - 1].end());
      std::size_t fresh = 0;
      for (auto id : current)
        if (!previous.count(id)) ++fresh;
      stats.replaced.push_back(current.empty() ? 0.0
                                               : static_cast<double>(fresh) /
                                                     static_cast<double>(current.size()));
    }
    seen.insert(current.begin(), current.end());
    stats.coverage.push_back(static_cast<double>(seen.size()) / static_cast<double>(corpus_size));
  }
  return stats;
}

ReplacementStats replacement_stats(std::span<const SelectionEpoch> history, std::size_t corpus_size) {
  std::vector<std::vector<SentenceId>> ids;
  ids.reserve(history.size());
  for (const auto& e : history) ids.push_back(e.selected);
  return replacement_stats(std::span<const std::vector<SentenceId>>(ids), corpus_size);
}

}  // namespace btcurator
