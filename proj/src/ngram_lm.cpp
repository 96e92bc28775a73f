#include "btcurator/ngram_lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "btcurator/error.hpp"
#include "btcurator/io.hpp"
#include "btcurator/log.hpp"

namespace btcurator {

namespace {

using WordId = NGramLM::WordId;
using Key = NGramLM::Key;

constexpr WordId kUnkId = 0;
constexpr WordId kBosId = 1;
constexpr WordId kEosId = 2;
constexpr WordId kNoWord = std::numeric_limits<WordId>::max();
constexpr double kArpaZero = -99.0;

Key make_key(std::span<const WordId> ngram) {
  Key key;
  key.fill(kNoWord);
  std::copy(ngram.begin(), ngram.end(), key.begin());
  return key;
}

struct ContextStats {
  std::uint64_t total = 0;
  std::array<std::uint64_t, 3> by_count{0, 0, 0};  // continuations with count 1, 2, 3+
};

double to_log10(double p) { return p > 0.0 ? std::log10(p) : kArpaZero; }
double from_log10(double v) { return v <= kArpaZero ? 0.0 : std::pow(10.0, v); }

}  // namespace

std::size_t NGramLM::KeyHash::operator()(const Key& key) const noexcept {
  std::uint64_t h = 0x9E3779B97F4A7C15ull;
  for (WordId w : key) {
    h ^= w + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    h *= 0xBF58476D1CE4E5B9ull;
  }
  return static_cast<std::size_t>(h ^ (h >> 31));
}

Discounts estimate_discounts(const std::array<std::uint64_t, 4>& n) {
  Discounts out;
  bool ok = n[0] > 0 && n[1] > 0 && n[2] > 0;
  if (ok) {
    const double y = static_cast<double>(n[0]) / (static_cast<double>(n[0]) + 2.0 * n[1]);
    for (int k = 1; k <= 3; ++k) {
      const double d = k - (k + 1) * y * static_cast<double>(n[k]) / static_cast<double>(n[k - 1]);
      if (!std::isfinite(d) || d <= 0.0 || d > k) ok = false;
      out.d[k - 1] = d;
    }
  }
  if (!ok) {
    out.d = {0.75, 0.75, 0.75};
    out.fallback = true;
  }
  return out;
}

NGramLM::WordId NGramLM::intern(std::string_view word) {
  auto [it, inserted] = ids_.try_emplace(std::string(word), static_cast<WordId>(words_.size()));
  if (inserted) words_.emplace_back(word);
  return it->second;
}

NGramLM::WordId NGramLM::lookup(std::string_view word) const {
  const auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnkId : it->second;
}

const NGramLM::Entry* NGramLM::find(int n, std::span<const WordId> ngram) const {
  const auto& table = tables_[n - 1];
  const auto it = table.find(make_key(ngram));
  return it == table.end() ? nullptr : &it->second;
}

NGramLM NGramLM::train(const Corpus& corpus, const LmConfig& config) {
  std::vector<Tokens> sentences;
  sentences.reserve(corpus.size());
  for (const auto& s : corpus) sentences.push_back(s.tokens);
  return train(std::span<const Tokens>(sentences), config);
}

NGramLM NGramLM::train(std::span<const Tokens> sentences, const LmConfig& config) {
  if (config.order < 1 || config.order > kMaxLmOrder)
    throw ConfigError("language model order must be in [1, " + std::to_string(kMaxLmOrder) +
                      "], got " + std::to_string(config.order));
  if (!config.pad_sentences && config.smoothing != Smoothing::kNone)
    throw ConfigError("unpadded sentences are only supported without smoothing");

  NGramLM lm;
  lm.order_ = config.order;
  lm.padded_ = config.pad_sentences;
  lm.intern(kUnk);
  lm.intern(kBos);
  lm.intern(kEos);

  const int order = config.order;
  const bool kn = config.smoothing == Smoothing::kModifiedKneserNey;

  std::vector<std::vector<WordId>> padded;
  padded.reserve(sentences.size());
  for (const auto& tokens : sentences) {
    if (tokens.empty()) continue;
    std::vector<WordId> seq;
    seq.reserve(tokens.size() + 2);
    if (lm.padded_) seq.push_back(kBosId);
    for (const auto& t : tokens) seq.push_back(lm.intern(t));
    if (lm.padded_) seq.push_back(kEosId);
    padded.push_back(std::move(seq));
  }
  if (padded.empty()) throw DataError("cannot train a language model on an empty corpus");

  // counts[n-1] holds raw counts (top order, <s>-initial and all orders when
  // unsmoothed) or continuation counts (lower orders under KN).
  std::vector<std::unordered_map<Key, std::uint64_t, KeyHash>> counts(order);
  const std::size_t first_predicted = lm.padded_ ? 1 : 0;
  for (const auto& seq : padded) {
    for (std::size_t i = first_predicted; i < seq.size(); ++i) {
      const int longest = static_cast<int>(std::min<std::size_t>(order, i + 1));
      const int shortest = kn ? longest : 1;
      for (int len = shortest; len <= longest; ++len) {
        const auto ngram = std::span<const WordId>(seq).subspan(i + 1 - len, len);
        ++counts[len - 1][make_key(ngram)];
      }
    }
  }
  if (kn) {
    for (int n = order - 1; n >= 1; --n) {
      for (const auto& [key, count] : counts[n]) {
        (void)count;
        // Each distinct n-gram adds one distinct predecessor to its suffix;
        // <s> counts as a predecessor.
        Key suffix;
        suffix.fill(kNoWord);
        std::copy(key.begin() + 1, key.begin() + n + 1, suffix.begin());
        ++counts[n - 1][suffix];
      }
    }
  }

  // Every predictable word gets a unigram entry; <unk> has count zero.
  for (WordId w = 0; w < lm.words_.size(); ++w) {
    if (w == kBosId) continue;
    if (!lm.padded_ && w == kEosId) continue;
    counts[0].try_emplace(make_key(std::span<const WordId>(&w, 1)), 0);
  }

  lm.discounts_.assign(order, Discounts{});
  if (kn) {
    for (int n = 1; n <= order; ++n) {
      std::array<std::uint64_t, 4> coc{0, 0, 0, 0};
      for (const auto& [key, count] : counts[n - 1])
        if (count >= 1 && count <= 4) ++coc[count - 1];
      lm.discounts_[n - 1] = estimate_discounts(coc);
      if (lm.discounts_[n - 1].fallback)
        log::warn("degenerate count-of-counts at order " + std::to_string(n) +
                  "; using absolute discounting with D=0.75");
    }
  }

  lm.tables_.assign(order, {});
  for (int n = 1; n <= order; ++n) {
    const auto& level = counts[n - 1];
    const auto& disc = lm.discounts_[n - 1];
    std::unordered_map<Key, ContextStats, KeyHash> contexts;
    for (const auto& [key, count] : level) {
      Key ctx;
      ctx.fill(kNoWord);
      std::copy(key.begin(), key.begin() + n - 1, ctx.begin());
      auto& stats = contexts[ctx];
      stats.total += count;
      if (count > 0) ++stats.by_count[std::min<std::uint64_t>(count, 3) - 1];
    }
    const auto gamma = [&](const ContextStats& stats) {
      if (!kn) return 0.0;
      double mass = 0.0;
      for (int k = 0; k < 3; ++k) mass += disc.d[k] * static_cast<double>(stats.by_count[k]);
      return mass / static_cast<double>(stats.total);
    };

    auto& table = lm.tables_[n - 1];
    table.reserve(level.size());
    const double uniform = 1.0 / static_cast<double>(level.size());
    for (const auto& [key, count] : level) {
      Key ctx;
      ctx.fill(kNoWord);
      std::copy(key.begin(), key.begin() + n - 1, ctx.begin());
      const auto& stats = contexts.at(ctx);
      const double own =
          stats.total == 0
              ? 0.0
              : std::max(static_cast<double>(count) - (kn ? disc.for_count(count) : 0.0), 0.0) /
                    static_cast<double>(stats.total);
      double lower = uniform;
      if (n > 1) {
        const Entry* e = lm.find(n - 1, std::span<const WordId>(key.data() + 1, n - 1));
        lower = e ? e->prob : 0.0;
      }
      const double g = stats.total == 0 ? 1.0 : gamma(stats);
      table[key].prob = own + g * lower;
    }
    if (n > 1) {
      auto& lower_table = lm.tables_[n - 2];
      for (const auto& [ctx, stats] : contexts) {
        // [<s>] is a context but never a predicted unigram.
        auto& entry = lower_table[ctx];
        entry.backoff = gamma(stats);
      }
    }
  }
  return lm;
}

double NGramLM::log_prob_ids(std::span<const WordId> context, WordId word) const {
  if (context.size() > static_cast<std::size_t>(order_ - 1))
    context = context.last(order_ - 1);
  std::array<WordId, kMaxLmOrder> buf{};
  double log_backoff = 0.0;
  for (std::size_t m = context.size() + 1; m-- > 0;) {
    const auto ctx = context.last(m);
    std::copy(ctx.begin(), ctx.end(), buf.begin());
    buf[m] = word;
    if (const Entry* e = find(static_cast<int>(m) + 1, std::span<const WordId>(buf.data(), m + 1)))
      return std::log(e->prob) + log_backoff;
    if (m > 0) {
      if (const Entry* c = find(static_cast<int>(m), ctx)) log_backoff += std::log(c->backoff);
    }
  }
  return -std::numeric_limits<double>::infinity();
}

double NGramLM::log_prob(std::span<const std::string> context, std::string_view word) const {
  std::vector<WordId> ids;
  ids.reserve(context.size());
  for (const auto& w : context) ids.push_back(lookup(w));
  return log_prob_ids(ids, lookup(word));
}

double NGramLM::prob(std::span<const std::string> context, std::string_view word) const {
  return std::exp(log_prob(context, word));
}

std::vector<std::string> NGramLM::predictable_words() const {
  std::vector<std::string> out;
  for (WordId w = 0; w < words_.size(); ++w) {
    if (w == kBosId) continue;
    if (!padded_ && w == kEosId) continue;
    out.push_back(words_[w]);
  }
  return out;
}

NGramLM::SentenceScore NGramLM::score_sentence(const Tokens& tokens) const {
  std::vector<WordId> seq;
  seq.reserve(tokens.size() + 2);
  if (padded_) seq.push_back(kBosId);
  for (const auto& t : tokens) seq.push_back(lookup(t));
  if (padded_) seq.push_back(kEosId);
  SentenceScore score;
  const std::size_t first = padded_ ? 1 : 0;
  for (std::size_t i = first; i < seq.size(); ++i) {
    const auto history = std::span<const WordId>(seq).first(i);
    score.log_prob += log_prob_ids(history, seq[i]);
    ++score.positions;
  }
  return score;
}

double NGramLM::sentence_logprob_avg(const Tokens& tokens) const {
  if (tokens.empty()) throw DataError("cannot score an empty sentence");
  const auto score = score_sentence(tokens);
  return score.log_prob / static_cast<double>(score.positions);
}

double perplexity(const NGramLM& lm, const Corpus& corpus) {
  if (corpus.empty()) throw DataError("perplexity of an empty corpus");
  double total = 0.0;
  std::size_t positions = 0;
  for (const auto& s : corpus) {
    const auto score = lm.score_sentence(s.tokens);
    total += score.log_prob;
    positions += score.positions;
  }
  return std::exp(-total / static_cast<double>(positions));
}

void NGramLM::write_arpa(std::ostream& out) const {
  struct Row {
    std::string words;
    const Entry* entry;
  };
  out << "\n\\data\\\n";
  for (int n = 1; n <= order_; ++n) out << "ngram " << n << '=' << tables_[n - 1].size() << '\n';
  char buf[64];
  for (int n = 1; n <= order_; ++n) {
    std::vector<Row> rows;
    rows.reserve(tables_[n - 1].size());
    for (const auto& [key, entry] : tables_[n - 1]) {
      std::string words;
      for (int i = 0; i < n; ++i) {
        if (i) words += ' ';
        words += words_[key[i]];
      }
      rows.push_back({std::move(words), &entry});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.words < b.words; });
    out << "\n\\" << n << "-grams:\n";
    for (const auto& row : rows) {
      std::snprintf(buf, sizeof(buf), "%.17g", to_log10(row.entry->prob));
      out << buf << '\t' << row.words;
      if (n < order_) {
        std::snprintf(buf, sizeof(buf), "%.17g", to_log10(row.entry->backoff));
        out << '\t' << buf;
      }
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

void NGramLM::save_arpa(const std::filesystem::path& path) const {
  std::ostringstream out;
  write_arpa(out);
  io::write_atomic(path, out.str());
}

NGramLM NGramLM::read_arpa(std::istream& in) {
  NGramLM lm;
  lm.intern(kUnk);
  lm.intern(kBos);
  lm.intern(kEos);

  std::string line;
  std::vector<std::size_t> declared;
  int section = -1;  // -1 before \data\, 0 inside \data\, n inside \n-grams:
  bool ended = false;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& msg) {
    throw DataError("ARPA line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "\\data\\") {
      section = 0;
      continue;
    }
    if (line == "\\end\\") {
      ended = true;
      break;
    }
    if (line.front() == '\\') {
      int n = 0;
      if (std::sscanf(line.c_str(), "\\%d-grams:", &n) != 1 || n < 1 ||
          n > static_cast<int>(declared.size()))
        fail("unexpected section header '" + line + "'");
      section = n;
      continue;
    }
    if (section == 0) {
      std::size_t n = 0, count = 0;
      if (std::sscanf(line.c_str(), "ngram %zu=%zu", &n, &count) != 2 || n < 1 ||
          n > static_cast<std::size_t>(kMaxLmOrder))
        fail("bad count line '" + line + "'");
      if (declared.size() < n) declared.resize(n, 0);
      declared[n - 1] = count;
      continue;
    }
    if (section < 1) continue;
    const auto fields = tokenize(line);
    const auto n = static_cast<std::size_t>(section);
    if (fields.size() != n + 1 && fields.size() != n + 2) fail("bad n-gram line '" + line + "'");
    if (lm.tables_.size() < declared.size()) lm.tables_.resize(declared.size());
    Key key;
    key.fill(kNoWord);
    for (std::size_t i = 0; i < n; ++i) key[i] = lm.intern(fields[i + 1]);
    Entry entry;
    try {
      entry.prob = from_log10(std::stod(fields[0]));
      if (fields.size() == n + 2) entry.backoff = from_log10(std::stod(fields[n + 1]));
    } catch (const std::exception&) {
      fail("unparseable number in '" + line + "'");
    }
    lm.tables_[n - 1][key] = entry;
  }
  if (!ended) throw DataError("ARPA input missing \\end\\ marker");
  if (declared.empty()) throw DataError("ARPA input has no \\data\\ section");
  lm.order_ = static_cast<int>(declared.size());
  lm.tables_.resize(declared.size());
  for (std::size_t n = 0; n < declared.size(); ++n)
    if (lm.tables_[n].size() != declared[n])
      throw DataError("ARPA " + std::to_string(n + 1) + "-gram count mismatch: declared " +
                      std::to_string(declared[n]) + ", found " +
                      std::to_string(lm.tables_[n].size()));
  // Words that never appear as unigrams (e.g. a missing <unk>) are unscorable.
  for (WordId w = 0; w < lm.words_.size(); ++w)
    lm.tables_[0].try_emplace(make_key(std::span<const WordId>(&w, 1)), Entry{0.0, 1.0});
  return lm;
}

NGramLM NGramLM::load_arpa(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_arpa(in);
}

}  // namespace btcurator
