#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "btcurator/corpus.hpp"

namespace btcurator {

enum class BleuSmoothing {
  kNone,  // any zero precision gives 0
  kAdd1,  // (matches+1)/(total+1) for orders >= 2
};

BleuSmoothing parse_bleu_smoothing(std::string_view text);

struct BleuStats {
  std::vector<double> matches;  // clipped n-gram matches per order
  std::vector<double> totals;   // hypothesis n-grams per order
  double hyp_length = 0.0;
  double ref_length = 0.0;
};

BleuStats bleu_stats(std::span<const Tokens> hypotheses, std::span<const Tokens> references,
                     int max_order = 4);

double bleu_from_stats(const BleuStats& stats, BleuSmoothing smoothing);

/// Corpus BLEU in [0, 1] with brevity penalty exp(min(0, 1 - r/h)).
double bleu(std::span<const Tokens> hypotheses, std::span<const Tokens> references,
            int max_order = 4, BleuSmoothing smoothing = BleuSmoothing::kNone);

double sentence_bleu(const Tokens& hypothesis, const Tokens& reference, int max_order = 4,
                     BleuSmoothing smoothing = BleuSmoothing::kAdd1);

/// Relative token frequencies.
struct UnigramDist {
  std::map<std::string, double> probs;
  std::size_t vocabulary_size() const { return probs.size(); }
};

UnigramDist unigram_dist(std::span<const Tokens> sentences);
UnigramDist unigram_dist(const Corpus& corpus);

/// (1/sqrt 2) * sqrt(sum_i (sqrt p_i - sqrt q_i)^2) over the union
/// vocabulary. Throws DataError when either input does not sum to 1.
double hellinger(const UnigramDist& p, const UnigramDist& q);

}  // namespace btcurator
