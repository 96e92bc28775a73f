#include "btcurator/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "btcurator/error.hpp"

namespace btcurator {

namespace {

std::unordered_map<std::string, int> ngram_counts(const Tokens& tokens, int n) {
  std::unordered_map<std::string, int> counts;
  if (tokens.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (int k = 0; k < n; ++k) {
      if (k) key += '\x1f';
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

void check_distribution(const UnigramDist& d) {
  double sum = 0.0;
  for (const auto& [w, p] : d.probs) {
    if (!(p >= 0.0)) throw DataError("invalid distribution: negative probability for '" + w + "'");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw DataError("invalid distribution: probabilities sum to " + std::to_string(sum));
}

}  // namespace

BleuSmoothing parse_bleu_smoothing(std::string_view text) {
  if (text == "none") return BleuSmoothing::kNone;
  if (text == "add1") return BleuSmoothing::kAdd1;
  throw ConfigError("unknown BLEU smoothing '" + std::string(text) + "' (expected none or add1)");
}

BleuStats bleu_stats(std::span<const Tokens> hypotheses, std::span<const Tokens> references,
                     int max_order) {
  if (hypotheses.empty()) throw DataError("BLEU of an empty hypothesis set");
  if (hypotheses.size() != references.size())
    throw DataError("BLEU needs one reference per hypothesis");
  if (max_order < 1) throw ConfigError("BLEU max order must be positive");
  BleuStats stats;
  stats.matches.assign(max_order, 0.0);
  stats.totals.assign(max_order, 0.0);
  for (std::size_t k = 0; k < hypotheses.size(); ++k) {
    const auto& hyp = hypotheses[k];
    const auto& ref = references[k];
    stats.hyp_length += static_cast<double>(hyp.size());
    stats.ref_length += static_cast<double>(ref.size());
    for (int n = 1; n <= max_order; ++n) {
      const auto h = ngram_counts(hyp, n);
      const auto r = ngram_counts(ref, n);
      for (const auto& [g, c] : h) {
        stats.totals[n - 1] += c;
        const auto it = r.find(g);
        if (it != r.end()) stats.matches[n - 1] += std::min(c, it->second);
      }
    }
  }
  return stats;
}

double bleu_from_stats(const BleuStats& stats, BleuSmoothing smoothing) {
  if (stats.hyp_length == 0.0) return 0.0;
  const auto orders = stats.matches.size();
  double log_precision = 0.0;
  for (std::size_t n = 0; n < orders; ++n) {
    double m = stats.matches[n];
    double t = stats.totals[n];
    if (smoothing == BleuSmoothing::kAdd1 && n >= 1) {
      m += 1.0;
      t += 1.0;
    }
    if (m == 0.0 || t == 0.0) return 0.0;
    log_precision += std::log(m / t);
  }
  const double bp = std::min(0.0, 1.0 - stats.ref_length / stats.hyp_length);
  return std::exp(log_precision / static_cast<double>(orders) + bp);
}

double bleu(std::span<const Tokens> hypotheses, std::span<const Tokens> references, int max_order,
            BleuSmoothing smoothing) {
  return bleu_from_stats(bleu_stats(hypotheses, references, max_order), smoothing);
}

double sentence_bleu(const Tokens& hypothesis, const Tokens& reference, int max_order,
                     BleuSmoothing smoothing) {
  return bleu(std::span<const Tokens>(&hypothesis, 1), std::span<const Tokens>(&reference, 1),
              max_order, smoothing);
}

UnigramDist unigram_dist(std::span<const Tokens> sentences) {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& s : sentences)
    for (const auto& t : s) {
      ++counts[t];
      ++total;
    }
  if (total == 0) throw DataError("unigram distribution of an empty sentence set");
  UnigramDist d;
  for (const auto& [w, c] : counts)
    d.probs.emplace(w, static_cast<double>(c) / static_cast<double>(total));
  return d;
}

UnigramDist unigram_dist(const Corpus& corpus) {
  std::vector<Tokens> sentences;
  sentences.reserve(corpus.size());
  for (const auto& s : corpus) sentences.push_back(s.tokens);
  return unigram_dist(std::span<const Tokens>(sentences));
}

double hellinger(const UnigramDist& p, const UnigramDist& q) {
  check_distribution(p);
  check_distribution(q);
  double sum = 0.0;
  bool shared = false;
  auto a = p.probs.begin();
  auto b = q.probs.begin();
  while (a != p.probs.end() || b != q.probs.end()) {
    double pa = 0.0, qb = 0.0;
    if (b == q.probs.end() || (a != p.probs.end() && a->first < b->first)) {
      pa = (a++)->second;
    } else if (a == p.probs.end() || b->first < a->first) {
      qb = (b++)->second;
    } else {
      pa = (a++)->second;
      qb = (b++)->second;
      shared = shared || (pa > 0.0 && qb > 0.0);
    }
    const double d = std::sqrt(pa) - std::sqrt(qb);
    sum += d * d;
  }
  // Disjoint supports are at distance exactly 1.
  if (!shared) return 1.0;
  return std::clamp(std::sqrt(sum) / std::sqrt(2.0), 0.0, 1.0);
}

}  // namespace btcurator
