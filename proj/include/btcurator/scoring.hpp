#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "btcurator/corpus.hpp"
#include "btcurator/embedding.hpp"
#include "btcurator/metrics.hpp"
#include "btcurator/ngram_lm.hpp"
#include "btcurator/translator.hpp"

namespace btcurator {

enum class ReprMetric { kLmIn, kTfIdf, kEmbed, kLmDiff };
enum class SimpMetric { kLmGen, kRoundTripBleu };

std::string_view to_string(ReprMetric m);
std::string_view to_string(SimpMetric m);
ReprMetric parse_repr_metric(std::string_view text);
SimpMetric parse_simp_metric(std::string_view text);

// All LM-based scores are mean log-probabilities (negative cross-entropy),
// so "higher" always means "select first".

double repr_lm_in(const NGramLM& lm_in, const Tokens& sentence);
double simp_lm_gen(const NGramLM& lm_gen, const Tokens& sentence);

/// In-domain minus general-domain mean log-probability.
double moore_lewis(const NGramLM& lm_in, const NGramLM& lm_gen, const Tokens& sentence);

/// TF-IDF vectors of an in-domain reference set with an inverted index.
///
/// tf is the raw in-sentence count; idf = ln((1 + N) / (1 + df)) + 1 with
/// document frequencies taken over the N sentences of the monolingual corpus.
class TfIdfIndex {
 public:
  static TfIdfIndex build(const Corpus& monolingual, std::span<const Tokens> in_domain);
  static TfIdfIndex build(const Corpus& monolingual, const Corpus& in_domain);

  double idf(const std::string& term) const;
  std::size_t document_count() const { return document_count_; }
  std::size_t in_domain_size() const { return doc_norm2_.size(); }

  /// Sparse TF-IDF vector with terms in sorted order.
  std::vector<std::pair<std::string, double>> vectorize(const Tokens& sentence) const;

  /// max over in-domain sentences of cosine(tfidf(s), tfidf(s_in)); only
  /// sentences sharing a term with s are visited. 0 when none do.
  double max_cosine(const Tokens& sentence) const;

 private:
  struct Posting {
    std::uint32_t doc;
    double weight;
  };

  std::size_t document_count_ = 0;
  std::unordered_map<std::string, std::size_t> df_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::vector<double> doc_norm2_;
};

double repr_tfidf(const Tokens& sentence, const TfIdfIndex& index);

/// max cosine between embedder.embed(s) and each in-domain vector.
double repr_embed(const Sentence& sentence, const SentenceEmbedder& embedder,
                  std::span<const Vector> in_domain);

/// Sentence BLEU of bwd(fwd(s)) against s.
double simp_round_trip(const Sentence& sentence, const Translator& fwd, const Translator& bwd,
                       BleuSmoothing smoothing = BleuSmoothing::kAdd1);

/// (x - min) / (max - min). Degenerate input (all equal) maps to 0.5 with a
/// warning. Throws DataError on empty input or non-finite values.
std::vector<double> minmax_normalize(std::span<const double> raw);

/// Raw per-sentence scores indexed by sentence id.
struct RawScores {
  ReprMetric repr_metric = ReprMetric::kTfIdf;
  SimpMetric simp_metric = SimpMetric::kRoundTripBleu;
  std::vector<double> repr;
  std::vector<double> simp;
};

/// Min-max normalized scores indexed by sentence id.
struct NormalizedScores {
  std::vector<double> repr;
  std::vector<double> simp;

  std::size_t size() const { return repr.size(); }
};

NormalizedScores normalize(const RawScores& raw);

/// Everything a metric may need. Unused members may stay null.
struct ScoringResources {
  const NGramLM* lm_in = nullptr;
  const NGramLM* lm_gen = nullptr;
  const TfIdfIndex* tfidf = nullptr;
  const SentenceEmbedder* embedder = nullptr;
  std::span<const Vector> in_domain_embeddings;
  // Round trip: s -> round_trip_forward -> round_trip_backward.
  const Translator* round_trip_forward = nullptr;
  const Translator* round_trip_backward = nullptr;
  BleuSmoothing round_trip_smoothing = BleuSmoothing::kAdd1;
};

/// Throws ConfigError when a metric lacks its resource.
void check_resources(ReprMetric repr, SimpMetric simp, const ScoringResources& res);

/// Thread-safe store of static scores keyed by (metric, model version, id).
class ScoreCache {
 public:
  std::optional<double> get(std::string_view metric, std::string_view version, SentenceId id) const;
  void put(std::string_view metric, std::string_view version, SentenceId id, double value);
  std::size_t size() const;

 private:
  static std::string key(std::string_view metric, std::string_view version);

  mutable std::shared_mutex mutex_;
  std::map<std::string, std::unordered_map<SentenceId, double>> entries_;
};

double score_repr(ReprMetric metric, const Sentence& s, const ScoringResources& res);
double score_simp(SimpMetric metric, const Sentence& s, const ScoringResources& res);

/// Scores every sentence of `corpus` in parallel. With a cache, existing
/// entries under (metric, version) are reused and new ones stored.
RawScores compute_raw_scores(const Corpus& corpus, ReprMetric repr, SimpMetric simp,
                             const ScoringResources& res, unsigned threads = 1,
                             ScoreCache* cache = nullptr, std::string_view repr_version = "",
                             std::string_view simp_version = "");

}  // namespace btcurator
