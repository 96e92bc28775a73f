#include "btcurator/translator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "btcurator/error.hpp"
#include "btcurator/io.hpp"

namespace btcurator {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double parse_nll(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v) || v < 0.0) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw DataError(where + ": bad nll value '" + text + "'");
  }
}

std::string pair_key(const Tokens& source, const Tokens& target) {
  return join(source) + '\t' + join(target);
}

}  // namespace

std::string_view to_string(Direction d) { return d == Direction::kFE ? "fe" : "ef"; }

Direction parse_direction(std::string_view text) {
  if (text == "fe") return Direction::kFE;
  if (text == "ef") return Direction::kEF;
  throw ConfigError("unknown direction '" + std::string(text) + "' (expected fe or ef)");
}

LexiconModel LexiconModel::identity(const std::vector<std::string>& vocabulary) {
  LexiconModel m;
  for (const auto& w : vocabulary) m.set(w, w, 1.0);
  return m;
}

void LexiconModel::set(const std::string& source, const std::string& target, double prob) {
  table_[source][target] = prob;
}

const LexiconModel::Row* LexiconModel::row(std::string_view source) const {
  const auto it = table_.find(std::string(source));
  return it == table_.end() ? nullptr : &it->second;
}

double LexiconModel::prob(std::string_view target, std::string_view source) const {
  const Row* r = row(source);
  if (!r) return 0.0;
  const auto it = r->find(std::string(target));
  return it == r->end() ? 0.0 : it->second;
}

std::optional<std::string> LexiconModel::best_translation(std::string_view source) const {
  const Row* r = row(source);
  if (!r || r->empty()) return std::nullopt;
  // std::map iterates in lexicographic order, so strict > keeps the smallest on ties.
  auto best = r->begin();
  for (auto it = r->begin(); it != r->end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

std::unordered_map<std::string, std::string> LexiconModel::argmax_map() const {
  std::unordered_map<std::string, std::string> out;
  for (const auto& [src, r] : table_)
    if (auto best = best_translation(src)) out.emplace(src, std::move(*best));
  return out;
}

std::vector<std::string> LexiconModel::target_vocabulary() const {
  std::vector<std::string> out;
  for (const auto& [src, r] : table_)
    for (const auto& [tgt, p] : r) out.push_back(tgt);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double LexiconModel::max_row_deviation() const {
  double worst = 0.0;
  for (const auto& [src, r] : table_) {
    double sum = 0.0;
    for (const auto& [tgt, p] : r) sum += p;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

void LexiconModel::save(const std::filesystem::path& path) const {
  std::vector<std::string> sources;
  for (const auto& [src, r] : table_) sources.push_back(src);
  std::sort(sources.begin(), sources.end());
  std::string out;
  for (const auto& src : sources)
    for (const auto& [tgt, p] : table_.at(src)) out += src + '\t' + tgt + '\t' + io::format_double(p) + '\n';
  io::write_atomic(path, out);
}

LexiconModel LexiconModel::load(const std::filesystem::path& path) {
  LexiconModel m;
  std::size_t line_no = 0;
  for (const auto& line : io::read_lines(path)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = io::split(line, '\t');
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != 3) throw DataError(where + ": expected source<TAB>target<TAB>prob");
    double p = 0.0;
    try {
      p = std::stod(fields[2]);
    } catch (const std::exception&) {
      throw DataError(where + ": bad probability");
    }
    if (!(p >= 0.0 && p <= 1.0)) throw DataError(where + ": probability out of range");
    m.set(fields[0], fields[1], p);
  }
  return m;
}

LexiconModel train_model1(const ParallelCorpus& corpus, int iterations,
                          std::vector<double>* log_likelihood) {
  if (corpus.size() == 0) throw DataError("cannot train Model 1 on an empty parallel corpus");
  if (iterations < 1) throw ConfigError("Model 1 needs at least one EM iteration");

  // Dense ids for the sweep; the result is converted back to strings.
  std::unordered_map<std::string, std::uint32_t> src_ids, tgt_ids;
  std::vector<std::string> src_words, tgt_words;
  const auto intern = [](auto& ids, auto& words, const std::string& w) {
    auto [it, inserted] = ids.try_emplace(w, static_cast<std::uint32_t>(words.size()));
    if (inserted) words.push_back(w);
    return it->second;
  };
  std::vector<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>> pairs;
  pairs.reserve(corpus.size());
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    std::vector<std::uint32_t> x, y;
    for (const auto& w : corpus.source[k].tokens) x.push_back(intern(src_ids, src_words, w));
    for (const auto& w : corpus.target[k].tokens) y.push_back(intern(tgt_ids, tgt_words, w));
    pairs.emplace_back(std::move(x), std::move(y));
  }

  // Sparse table over co-occurring pairs: rows[x] maps y -> t(y|x).
  std::vector<std::unordered_map<std::uint32_t, double>> rows(src_words.size());
  for (const auto& [x, y] : pairs)
    for (auto xi : x)
      for (auto yj : y) rows[xi].try_emplace(yj, 0.0);
  for (auto& r : rows) {
    const double u = 1.0 / static_cast<double>(r.size());
    for (auto& [yj, t] : r) t = u;
  }

  const auto likelihood = [&] {
    double ll = 0.0;
    for (const auto& [x, y] : pairs) {
      for (auto yj : y) {
        double s = 0.0;
        for (auto xi : x) s += rows[xi].at(yj);
        ll += std::log(std::max(s / static_cast<double>(x.size()), kProbabilityFloor));
      }
    }
    return ll;
  };
  if (log_likelihood) {
    log_likelihood->clear();
    log_likelihood->push_back(likelihood());
  }

  std::vector<std::unordered_map<std::uint32_t, double>> expected(src_words.size());
  std::vector<double> totals(src_words.size());
  std::vector<double> row_cache;
  for (int it = 0; it < iterations; ++it) {
    for (auto& e : expected) e.clear();
    std::fill(totals.begin(), totals.end(), 0.0);
    for (const auto& [x, y] : pairs) {
      row_cache.resize(x.size());
      for (auto yj : y) {
        double denom = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          row_cache[i] = rows[x[i]].at(yj);
          denom += row_cache[i];
        }
        if (denom <= 0.0) continue;
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double c = row_cache[i] / denom;
          expected[x[i]][yj] += c;
          totals[x[i]] += c;
        }
      }
    }
    for (std::size_t xi = 0; xi < rows.size(); ++xi) {
      if (totals[xi] <= 0.0) continue;
      for (auto& [yj, t] : rows[xi]) {
        const auto found = expected[xi].find(yj);
        t = found == expected[xi].end() ? 0.0 : found->second / totals[xi];
      }
    }
    if (log_likelihood) log_likelihood->push_back(likelihood());
  }

  LexiconModel model;
  for (std::size_t xi = 0; xi < rows.size(); ++xi)
    for (const auto& [yj, t] : rows[xi]) model.set(src_words[xi], tgt_words[yj], t);
  return model;
}

double model1_log_likelihood(const LexiconModel& model, const ParallelCorpus& corpus) {
  double ll = 0.0;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    const auto& x = corpus.source[k].tokens;
    for (const auto& yj : corpus.target[k].tokens) {
      double s = 0.0;
      for (const auto& xi : x) s += model.prob(yj, xi);
      ll += std::log(std::max(s / static_cast<double>(x.size()), kProbabilityFloor));
    }
  }
  return ll;
}

Tokens translate(const LexiconModel& model, const Tokens& source) {
  Tokens out;
  out.reserve(source.size());
  for (const auto& w : source) {
    auto best = model.best_translation(w);
    out.push_back(best ? std::move(*best) : w);
  }
  return out;
}

double cond_nll(const LexiconModel& model, const Tokens& target, const Tokens& source) {
  if (target.empty() || source.empty()) throw DataError("cond_nll needs nonempty sentences");
  double total = 0.0;
  for (const auto& yj : target) {
    double s = 0.0;
    for (const auto& xi : source) s += model.prob(yj, xi);
    total += std::log(std::max(s / static_cast<double>(source.size()), kProbabilityFloor));
  }
  return -total / static_cast<double>(target.size());
}

Tokens noisy_translate(const LexiconModel& model, const Sentence& source, double noise_rate,
                       std::uint64_t seed) {
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0))
    throw ConfigError("noise rate must be in [0, 1]");
  Tokens out = translate(model, source.tokens);
  if (noise_rate == 0.0) return out;
  const auto vocab = model.target_vocabulary();
  if (vocab.empty()) return out;
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(source.id)));
  for (auto& tok : out) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const std::uint64_t pick = rng();
    if (u < noise_rate) tok = vocab[pick % vocab.size()];
  }
  return out;
}

Tokens LexiconTranslator::translate(const Sentence& source) const {
  if (noise_rate_ > 0.0) return noisy_translate(model_, source, noise_rate_, seed_);
  return btcurator::translate(model_, source.tokens);
}

double LexiconTranslator::cond_nll(const Tokens& target, const Tokens& source) const {
  return btcurator::cond_nll(model_, target, source);
}

double IdentityTranslator::cond_nll(const Tokens& target, const Tokens& source) const {
  if (target.empty() || source.empty()) throw DataError("cond_nll needs nonempty sentences");
  double total = 0.0;
  for (const auto& yj : target) {
    const auto hits = std::count(source.begin(), source.end(), yj);
    total += std::log(std::max(static_cast<double>(hits) / static_cast<double>(source.size()),
                               kProbabilityFloor));
  }
  return -total / static_cast<double>(target.size());
}

OfflineTranslator::OfflineTranslator(const std::filesystem::path& translations,
                                     const Corpus* source_corpus) {
  std::size_t line_no = 0;
  for (const auto& line : io::read_lines(translations)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = translations.string() + ":" + std::to_string(line_no);
    const auto fields = io::split(line, '\t');
    if (fields.size() != 3) throw DataError(where + ": expected id<TAB>tokens<TAB>nll");
    SentenceId id = 0;
    try {
      std::size_t used = 0;
      const auto v = std::stoull(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument(fields[0]);
      id = static_cast<SentenceId>(v);
    } catch (const std::exception&) {
      throw DataError(where + ": bad sentence id '" + fields[0] + "'");
    }
    auto tokens = tokenize(fields[1], {TokenizerConfig::Mode::kPassThrough, false});
    const double nll = parse_nll(fields[2], where);
    if (source_corpus && id < source_corpus->size())
      scores_[pair_key(source_corpus->at(id).tokens, tokens)] = nll;
    translations_[id] = std::move(tokens);
  }
}

void OfflineTranslator::add_scores(const std::filesystem::path& scores) {
  std::size_t line_no = 0;
  for (const auto& line : io::read_lines(scores)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = scores.string() + ":" + std::to_string(line_no);
    const auto fields = io::split(line, '\t');
    if (fields.size() != 3) throw DataError(where + ": expected source<TAB>target<TAB>nll");
    const TokenizerConfig pass{TokenizerConfig::Mode::kPassThrough, false};
    scores_[pair_key(tokenize(fields[0], pass), tokenize(fields[1], pass))] =
        parse_nll(fields[2], where);
  }
}

Tokens OfflineTranslator::translate(const Sentence& source) const {
  const auto it = translations_.find(source.id);
  if (it == translations_.end())
    throw ProviderError("offline translator has no translation for sentence " +
                        std::to_string(source.id));
  return it->second;
}

double OfflineTranslator::cond_nll(const Tokens& target, const Tokens& source) const {
  const auto it = scores_.find(pair_key(source, target));
  if (it == scores_.end()) throw ProviderError("offline translator has no score for pair '" + join(source) + "' -> '" + join(target) + "'");
  return it->second;
}

}  // namespace btcurator
