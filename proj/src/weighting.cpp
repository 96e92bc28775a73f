#include "btcurator/weighting.hpp"

#include <algorithm>
#include <cmath>

#include "btcurator/error.hpp"
#include "btcurator/io.hpp"
#include "btcurator/log.hpp"

namespace btcurator {

std::string_view to_string(QualityMetric m) {
  switch (m) {
    case QualityMetric::kEnc: return "enc";
    case QualityMetric::kAgree: return "agree";
    case QualityMetric::kNone: return "none";
  }
  return "?";
}

QualityMetric parse_quality_metric(std::string_view text) {
  for (auto m : {QualityMetric::kEnc, QualityMetric::kAgree, QualityMetric::kNone})
    if (text == to_string(m)) return m;
  throw ConfigError("unknown quality metric '" + std::string(text) + "' (expected enc, agree or none)");
}

std::string_view to_string(Composition c) {
  return c == Composition::kProduct ? "product" : "imp_only";
}

Composition parse_composition(std::string_view text) {
  if (text == "product") return Composition::kProduct;
  if (text == "imp_only") return Composition::kImpOnly;
  throw ConfigError("unknown weight composition '" + std::string(text) +
                    "' (expected product or imp_only)");
}

void WeightConfig::validate() const {
  if (!(w_low > 0.0 && w_low <= 1.0 && w_high >= 1.0 && std::isfinite(w_high)))
    throw ConfigError("clip bounds must satisfy 0 < w_low <= 1 <= w_high");
  if (!(min_weight > 0.0)) throw ConfigError("min_weight must be positive");
}

double enc_weight(const Sentence& x, const Sentence& y, const SentenceEmbedder& src,
                  const SentenceEmbedder& tgt) {
  if (x.tokens.empty() || y.tokens.empty()) throw DataError("enc weight needs nonempty sentences");
  if (src.dimension() != tgt.dimension())
    throw ProviderError("encoder dimensions differ: " + std::to_string(src.dimension()) + " vs " +
                        std::to_string(tgt.dimension()));
  return std::max(0.0, cosine(src.embed(x), tgt.embed(y)));
}

double agree_weight(const Tokens& x, const Tokens& y, const Translator& forward,
                    const Translator& backward) {
  const double fwd = forward.cond_nll(y, x);
  const double bwd = backward.cond_nll(x, y);
  if (fwd == bwd) return 1.0;
  return std::exp(-std::abs(fwd - bwd));
}

double imp_factor(double current, std::optional<double> previous, const WeightConfig& config) {
  if (!previous) return 1.0;
  if (*previous == 0.0) {
    log::warn("previous quality is zero; treating sentence as first seen");
    return 1.0;
  }
  return std::clamp(current / *previous, config.w_low, config.w_high);
}

double final_weight(double quality, double imp, const WeightConfig& config) {
  double w = quality;
  if (config.improvement) w = config.composition == Composition::kProduct ? quality * imp : imp;
  return std::max(w, config.min_weight);
}

std::optional<double> QualityStore::get(Direction d, SentenceId id) const {
  const auto& t = table(d);
  const auto it = t.find(id);
  if (it == t.end()) return std::nullopt;
  return it->second;
}

void QualityStore::update(Direction d, SentenceId id, double quality) { table(d)[id] = quality; }

std::string QualityStore::serialize(Direction d) const {
  std::string out;
  for (const auto& [id, q] : table(d)) out += std::to_string(id) + '\t' + io::format_double(q) + '\n';
  return out;
}

void QualityStore::deserialize(Direction d, std::string_view text) {
  auto& t = table(d);
  t.clear();
  std::size_t line_no = 0;
  for (const auto& line : io::split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = io::split(line, '\t');
    try {
      if (fields.size() != 2) throw std::invalid_argument("fields");
      std::size_t used = 0;
      const auto id = std::stoull(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument("id");
      const double q = std::stod(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("score");
      t[static_cast<SentenceId>(id)] = q;
    } catch (const std::exception&) {
      throw DataError("quality store line " + std::to_string(line_no) + ": expected id<TAB>score");
    }
  }
}

std::filesystem::path QualityStore::file_name(Direction d) {
  return std::string("quality_") + std::string(to_string(d)) + ".tsv";
}

void QualityStore::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (auto d : {Direction::kFE, Direction::kEF}) io::write_atomic(dir / file_name(d), serialize(d));
}

QualityStore QualityStore::load(const std::filesystem::path& dir) {
  QualityStore store;
  for (auto d : {Direction::kFE, Direction::kEF}) {
    const auto path = dir / file_name(d);
    if (std::filesystem::exists(path)) store.deserialize(d, io::read_file(path));
  }
  return store;
}

double observe_quality(QualityStore& store, Direction d, SentenceId id, double current,
                       const WeightConfig& config) {
  const double imp = imp_factor(current, store.get(d, id), config);
  store.update(d, id, current);
  return imp;
}

}  // namespace btcurator
