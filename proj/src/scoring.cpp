#include "btcurator/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "btcurator/error.hpp"
#include "btcurator/log.hpp"
#include "btcurator/parallel.hpp"

namespace btcurator {

namespace {

// Distinct terms of a sentence in sorted order with their counts.
std::vector<std::pair<std::string, std::size_t>> term_counts(const Tokens& sentence) {
  Tokens sorted = sentence;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<std::string, std::size_t>> out;
  for (auto& t : sorted) {
    if (!out.empty() && out.back().first == t) ++out.back().second;
    else out.emplace_back(std::move(t), 1);
  }
  return out;
}

}  // namespace

std::string_view to_string(ReprMetric m) {
  switch (m) {
    case ReprMetric::kLmIn: return "lm_in";
    case ReprMetric::kTfIdf: return "tfidf";
    case ReprMetric::kEmbed: return "embed";
    case ReprMetric::kLmDiff: return "lm_diff";
  }
  return "?";
}

std::string_view to_string(SimpMetric m) {
  switch (m) {
    case SimpMetric::kLmGen: return "lm_gen";
    case SimpMetric::kRoundTripBleu: return "rbleu";
  }
  return "?";
}

ReprMetric parse_repr_metric(std::string_view text) {
  for (auto m : {ReprMetric::kLmIn, ReprMetric::kTfIdf, ReprMetric::kEmbed, ReprMetric::kLmDiff})
    if (text == to_string(m)) return m;
  throw ConfigError("unknown representativeness metric '" + std::string(text) +
                    "' (expected lm_in, tfidf, embed or lm_diff)");
}

SimpMetric parse_simp_metric(std::string_view text) {
  for (auto m : {SimpMetric::kLmGen, SimpMetric::kRoundTripBleu})
    if (text == to_string(m)) return m;
  throw ConfigError("unknown simplicity metric '" + std::string(text) +
                    "' (expected lm_gen or rbleu)");
}

double repr_lm_in(const NGramLM& lm_in, const Tokens& sentence) {
  return lm_in.sentence_logprob_avg(sentence);
}

double simp_lm_gen(const NGramLM& lm_gen, const Tokens& sentence) {
  return lm_gen.sentence_logprob_avg(sentence);
}

double moore_lewis(const NGramLM& lm_in, const NGramLM& lm_gen, const Tokens& sentence) {
  return repr_lm_in(lm_in, sentence) - simp_lm_gen(lm_gen, sentence);
}

TfIdfIndex TfIdfIndex::build(const Corpus& monolingual, std::span<const Tokens> in_domain) {
  TfIdfIndex index;
  index.document_count_ = monolingual.size();
  for (const auto& s : monolingual)
    for (const auto& [term, count] : term_counts(s.tokens)) ++index.df_[term];

  index.doc_norm2_.reserve(in_domain.size());
  for (std::size_t d = 0; d < in_domain.size(); ++d) {
    double norm2 = 0.0;
    for (const auto& [term, weight] : index.vectorize(in_domain[d])) {
      norm2 += weight * weight;
      index.postings_[term].push_back({static_cast<std::uint32_t>(d), weight});
    }
    index.doc_norm2_.push_back(norm2);
  }
  return index;
}

TfIdfIndex TfIdfIndex::build(const Corpus& monolingual, const Corpus& in_domain) {
  std::vector<Tokens> docs;
  docs.reserve(in_domain.size());
  for (const auto& s : in_domain) docs.push_back(s.tokens);
  return build(monolingual, std::span<const Tokens>(docs));
}

double TfIdfIndex::idf(const std::string& term) const {
  const auto it = df_.find(term);
  const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((1.0 + static_cast<double>(document_count_)) / (1.0 + df)) + 1.0;
}

std::vector<std::pair<std::string, double>> TfIdfIndex::vectorize(const Tokens& sentence) const {
  std::vector<std::pair<std::string, double>> out;
  for (auto& [term, count] : term_counts(sentence)) {
    const double w = static_cast<double>(count) * idf(term);
    out.emplace_back(std::move(term), w);
  }
  return out;
}

double TfIdfIndex::max_cosine(const Tokens& sentence) const {
  const auto query = vectorize(sentence);
  double query_norm2 = 0.0;
  for (const auto& [term, w] : query) query_norm2 += w * w;
  if (query_norm2 == 0.0) return 0.0;

  std::vector<double> dot(doc_norm2_.size(), 0.0);
  std::vector<std::uint32_t> touched;
  for (const auto& [term, wq] : query) {
    const auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    for (const auto& p : it->second) {
      if (dot[p.doc] == 0.0) touched.push_back(p.doc);
      dot[p.doc] += wq * p.weight;
    }
  }
  double best = 0.0;
  for (auto d : touched) {
    if (doc_norm2_[d] == 0.0) continue;
    best = std::max(best, dot[d] / std::sqrt(query_norm2 * doc_norm2_[d]));
  }
  return std::min(best, 1.0);
}

double repr_tfidf(const Tokens& sentence, const TfIdfIndex& index) {
  return index.max_cosine(sentence);
}

double repr_embed(const Sentence& sentence, const SentenceEmbedder& embedder,
                  std::span<const Vector> in_domain) {
  if (in_domain.empty()) throw ConfigError("embedding representativeness needs an in-domain set");
  const auto v = embedder.embed(sentence);
  double best = -1.0;
  for (const auto& ref : in_domain) best = std::max(best, cosine(v, ref));
  return best;
}

double simp_round_trip(const Sentence& sentence, const Translator& fwd, const Translator& bwd,
                       BleuSmoothing smoothing) {
  Sentence there{sentence.id, fwd.translate(sentence), {}};
  const Tokens back = bwd.translate(there);
  return sentence_bleu(back, sentence.tokens, 4, smoothing);
}

std::vector<double> minmax_normalize(std::span<const double> raw) {
  if (raw.empty()) throw DataError("cannot normalize an empty score list");
  for (double v : raw)
    if (!std::isfinite(v)) throw DataError("cannot normalize non-finite scores");
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double min = *lo, max = *hi;
  std::vector<double> out(raw.size());
  if (max == min) {
    log::warn("degenerate metric: all scores equal; normalizing to 0.5");
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  const double range = max - min;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == max) out[i] = 1.0;
    else out[i] = std::clamp((raw[i] - min) / range, 0.0, 1.0);
  }
  return out;
}

NormalizedScores normalize(const RawScores& raw) {
  return {minmax_normalize(raw.repr), minmax_normalize(raw.simp)};
}

void check_resources(ReprMetric repr, SimpMetric simp, const ScoringResources& res) {
  switch (repr) {
    case ReprMetric::kLmIn:
      if (!res.lm_in) throw ConfigError("lm_in representativeness needs an in-domain LM");
      break;
    case ReprMetric::kTfIdf:
      if (!res.tfidf) throw ConfigError("tfidf representativeness needs a TF-IDF index");
      break;
    case ReprMetric::kEmbed:
      if (!res.embedder || res.in_domain_embeddings.empty())
        throw ConfigError("embed representativeness needs an embedder and in-domain vectors");
      break;
    case ReprMetric::kLmDiff:
      if (!res.lm_in || !res.lm_gen) throw ConfigError("lm_diff needs in-domain and general LMs");
      break;
  }
  switch (simp) {
    case SimpMetric::kLmGen:
      if (!res.lm_gen) throw ConfigError("lm_gen simplicity needs a general-domain LM");
      break;
    case SimpMetric::kRoundTripBleu:
      if (!res.round_trip_forward || !res.round_trip_backward)
        throw ConfigError("rbleu simplicity needs translators in both directions");
      break;
  }
}

double score_repr(ReprMetric metric, const Sentence& s, const ScoringResources& res) {
  switch (metric) {
    case ReprMetric::kLmIn: return repr_lm_in(*res.lm_in, s.tokens);
    case ReprMetric::kTfIdf: return repr_tfidf(s.tokens, *res.tfidf);
    case ReprMetric::kEmbed: return repr_embed(s, *res.embedder, res.in_domain_embeddings);
    case ReprMetric::kLmDiff: return moore_lewis(*res.lm_in, *res.lm_gen, s.tokens);
  }
  return 0.0;
}

double score_simp(SimpMetric metric, const Sentence& s, const ScoringResources& res) {
  switch (metric) {
    case SimpMetric::kLmGen: return simp_lm_gen(*res.lm_gen, s.tokens);
    case SimpMetric::kRoundTripBleu:
      return simp_round_trip(s, *res.round_trip_forward, *res.round_trip_backward,
                             res.round_trip_smoothing);
  }
  return 0.0;
}

std::string ScoreCache::key(std::string_view metric, std::string_view version) {
  std::string k(metric);
  k += '\x1f';
  k += version;
  return k;
}

std::optional<double> ScoreCache::get(std::string_view metric, std::string_view version,
                                      SentenceId id) const {
  std::shared_lock lock(mutex_);
  const auto bucket = entries_.find(key(metric, version));
  if (bucket == entries_.end()) return std::nullopt;
  const auto it = bucket->second.find(id);
  if (it == bucket->second.end()) return std::nullopt;
  return it->second;
}

void ScoreCache::put(std::string_view metric, std::string_view version, SentenceId id, double value) {
  std::unique_lock lock(mutex_);
  entries_[key(metric, version)][id] = value;
}

std::size_t ScoreCache::size() const {
  std::shared_lock lock(mutex_);
  std::size_t n = 0;
  for (const auto& [k, bucket] : entries_) n += bucket.size();
  return n;
}

RawScores compute_raw_scores(const Corpus& corpus, ReprMetric repr, SimpMetric simp,
                             const ScoringResources& res, unsigned threads, ScoreCache* cache,
                             std::string_view repr_version, std::string_view simp_version) {
  check_resources(repr, simp, res);
  RawScores out;
  out.repr_metric = repr;
  out.simp_metric = simp;
  out.repr.assign(corpus.size(), 0.0);
  out.simp.assign(corpus.size(), 0.0);
  const auto repr_name = to_string(repr);
  const auto simp_name = to_string(simp);
  parallel_for(corpus.size(), threads, [&](std::size_t i) {
    const auto& s = corpus[i];
    const auto cached_repr = cache ? cache->get(repr_name, repr_version, s.id) : std::nullopt;
    out.repr[i] = cached_repr ? *cached_repr : score_repr(repr, s, res);
    const auto cached_simp = cache ? cache->get(simp_name, simp_version, s.id) : std::nullopt;
    out.simp[i] = cached_simp ? *cached_simp : score_simp(simp, s, res);
    if (cache) {
      if (!cached_repr) cache->put(repr_name, repr_version, s.id, out.repr[i]);
      if (!cached_simp) cache->put(simp_name, simp_version, s.id, out.simp[i]);
    }
  });
  return out;
}

}  // namespace btcurator
