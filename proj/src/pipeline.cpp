#include "btcurator/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "btcurator/error.hpp"
#include "btcurator/io.hpp"
#include "btcurator/log.hpp"
#include "btcurator/parallel.hpp"

namespace btcurator {

namespace {

using ordered_json = nlohmann::ordered_json;

std::optional<Corpus> maybe_load(const std::filesystem::path& path, const std::string& language,
                                 const LoadOptions& options) {
  if (path.empty()) return std::nullopt;
  return load_corpus(path, language, options);
}

std::string lang_of_target(Direction d) { return d == Direction::kFE ? "e" : "f"; }

std::string na_or(const std::optional<double>& v) { return v ? io::format_double(*v) : "NA"; }

}  // namespace

CorpusSet load_corpora(const RunConfig& config) {
  CorpusSet set;
  const auto& c = config.corpora;
  set.mono_f = maybe_load(c.mono_f, config.language_f, config.load);
  set.mono_e = maybe_load(c.mono_e, config.language_e, config.load);
  set.in_domain_f = maybe_load(c.in_domain_f, config.language_f, config.load);
  set.in_domain_e = maybe_load(c.in_domain_e, config.language_e, config.load);
  if (!c.parallel_f.empty() && !c.parallel_e.empty())
    set.parallel = load_parallel(c.parallel_f, c.parallel_e, config.language_f, config.language_e,
                                 config.load);
  return set;
}

struct Pipeline::DirectionContext {
  Direction direction = Direction::kFE;
  const Corpus* mono = nullptr;
  const Corpus* in_domain = nullptr;
  // model: synthetic language -> genuine language; generator: the reverse.
  const Translator* model = nullptr;
  const Translator* generator = nullptr;
  const Translator* back_model = nullptr;  // generator without noise
  std::optional<NGramLM> lm_in, lm_gen;
  std::optional<TfIdfIndex> tfidf;
  std::shared_ptr<const SentenceEmbedder> repr_embedder;
  std::vector<Vector> in_domain_vectors;
  std::shared_ptr<const SentenceEmbedder> enc_source, enc_target;
  std::optional<UnigramDist> reference;
  ScoringResources scoring;
  std::string selection_log;
};

Pipeline::Pipeline(RunConfig config, CorpusSet corpora, Providers providers)
    : config_(std::move(config)), corpora_(std::move(corpora)), providers_(std::move(providers)) {
  config_.validate();
  const auto& tc = config_.translators;

  if (!providers_.fe || !providers_.ef) {
    switch (tc.type) {
      case TranslatorConfig::Type::kModel1: {
        if (!corpora_.parallel) throw ConfigError("model1 translators need a parallel corpus");
        const auto& par = *corpora_.parallel;
        if (!providers_.lexicon_fe)
          providers_.lexicon_fe =
              std::make_shared<LexiconModel>(train_model1(par, tc.em_iterations));
        if (!providers_.lexicon_ef) {
          ParallelCorpus swapped{par.target, par.source};
          providers_.lexicon_ef =
              std::make_shared<LexiconModel>(train_model1(swapped, tc.em_iterations));
        }
        break;
      }
      case TranslatorConfig::Type::kLexicon:
        if (!providers_.lexicon_fe)
          providers_.lexicon_fe = std::make_shared<LexiconModel>(LexiconModel::load(tc.lexicon_fe));
        if (!providers_.lexicon_ef)
          providers_.lexicon_ef = std::make_shared<LexiconModel>(LexiconModel::load(tc.lexicon_ef));
        break;
      case TranslatorConfig::Type::kIdentity:
        if (!providers_.fe) providers_.fe = std::make_shared<IdentityTranslator>();
        if (!providers_.ef) providers_.ef = std::make_shared<IdentityTranslator>();
        break;
      case TranslatorConfig::Type::kOffline: {
        auto make = [&](const std::filesystem::path& file, const std::optional<Corpus>& src,
                        const std::vector<std::filesystem::path>& scores) {
          auto t = std::make_shared<OfflineTranslator>(file, src ? &*src : nullptr);
          for (const auto& s : scores) t->add_scores(s);
          return t;
        };
        if (!providers_.fe) providers_.fe = make(tc.offline_fe, corpora_.mono_f, tc.scores_fe);
        if (!providers_.ef) providers_.ef = make(tc.offline_ef, corpora_.mono_e, tc.scores_ef);
        break;
      }
    }
    if (!providers_.fe && providers_.lexicon_fe)
      providers_.fe = std::make_shared<LexiconTranslator>(*providers_.lexicon_fe);
    if (!providers_.ef && providers_.lexicon_ef)
      providers_.ef = std::make_shared<LexiconTranslator>(*providers_.lexicon_ef);
  }
  if (tc.noise_rate > 0.0) {
    if (!providers_.generator_fe && providers_.lexicon_fe)
      providers_.generator_fe =
          std::make_shared<LexiconTranslator>(*providers_.lexicon_fe, tc.noise_rate, config_.seed + 2);
    if (!providers_.generator_ef && providers_.lexicon_ef)
      providers_.generator_ef =
          std::make_shared<LexiconTranslator>(*providers_.lexicon_ef, tc.noise_rate, config_.seed + 1);
  }
  if (!providers_.generator_fe) providers_.generator_fe = providers_.fe;
  if (!providers_.generator_ef) providers_.generator_ef = providers_.ef;

  std::set<Direction> dirs(config_.directions.begin(), config_.directions.end());
  for (auto d : dirs) build_context(d);
}

Pipeline::~Pipeline() = default;
Pipeline::Pipeline(Pipeline&&) noexcept = default;

Pipeline Pipeline::from_config(const RunConfig& config) {
  config.validate();
  return Pipeline(config, load_corpora(config));
}

void Pipeline::build_context(Direction d) {
  auto ctx = std::make_unique<DirectionContext>();
  ctx->direction = d;
  const bool target_e = d == Direction::kFE;
  const std::string lang = lang_of_target(d);
  const auto& mono = target_e ? corpora_.mono_e : corpora_.mono_f;
  const auto& in_domain = target_e ? corpora_.in_domain_e : corpora_.in_domain_f;
  if (!mono) throw ConfigError("direction " + std::string(to_string(d)) + " has no monolingual corpus");
  ctx->mono = &*mono;
  ctx->in_domain = in_domain ? &*in_domain : nullptr;

  ctx->model = (target_e ? providers_.fe : providers_.ef).get();
  ctx->generator = (target_e ? providers_.generator_ef : providers_.generator_fe).get();
  const Translator* back_clean = (target_e ? providers_.ef : providers_.fe).get();
  if (!ctx->model || !ctx->generator || !back_clean)
    throw ConfigError("missing translator for direction " + std::string(to_string(d)));
  ctx->back_model = back_clean;

  const auto repr = config_.repr;
  const auto simp = config_.simp;
  LmConfig lm_cfg;
  lm_cfg.order = config_.lm.order;
  if (repr == ReprMetric::kLmIn || repr == ReprMetric::kLmDiff) {
    if (auto it = config_.lm.arpa.find("in_" + lang); it != config_.lm.arpa.end())
      ctx->lm_in = NGramLM::load_arpa(it->second);
    else if (ctx->in_domain)
      ctx->lm_in = NGramLM::train(*ctx->in_domain, lm_cfg);
  }
  if (simp == SimpMetric::kLmGen || repr == ReprMetric::kLmDiff) {
    if (auto it = config_.lm.arpa.find("gen_" + lang); it != config_.lm.arpa.end())
      ctx->lm_gen = NGramLM::load_arpa(it->second);
    else if (corpora_.parallel)
      ctx->lm_gen = NGramLM::train(target_e ? corpora_.parallel->target : corpora_.parallel->source, lm_cfg);
  }
  if (repr == ReprMetric::kTfIdf && ctx->in_domain)
    ctx->tfidf = TfIdfIndex::build(*ctx->mono, *ctx->in_domain);

  const auto& ec = config_.embeddings;
  const std::uint64_t emb_seed = ec.seed.value_or(config_.seed);
  auto file_embedder = [&](const std::string& key) -> std::shared_ptr<const SentenceEmbedder> {
    if (auto it = providers_.embedders.find(key); it != providers_.embedders.end()) return it->second;
    auto f = ec.files.find(key);
    if (f == ec.files.end()) throw ConfigError("embeddings.files." + key + " is required");
    auto table = std::make_shared<EmbeddingTable>(load_embedding_file(f->second));
    providers_.embedders[key] = table;
    return table;
  };
  const bool need_repr_emb = repr == ReprMetric::kEmbed;
  const bool need_enc = config_.weighting.quality == QualityMetric::kEnc;
  if (ec.type == EmbeddingConfig::Type::kBag) {
    auto plain = std::make_shared<BagEmbedder>(ec.dim, emb_seed);
    if (need_repr_emb) {
      ctx->repr_embedder = plain;
      if (ctx->in_domain)
        for (const auto& s : *ctx->in_domain) ctx->in_domain_vectors.push_back(plain->embed(s));
    }
    if (need_enc) {
      ctx->enc_target = plain;
      const auto& lex = target_e ? providers_.lexicon_fe : providers_.lexicon_ef;
      if (ec.cross_lingual_map && lex)
        ctx->enc_source = std::make_shared<BagEmbedder>(ec.dim, emb_seed, lex->argmax_map());
      else
        ctx->enc_source = plain;
    }
  } else {
    if (need_repr_emb) {
      ctx->repr_embedder = file_embedder("mono_" + lang);
      auto ref = file_embedder("in_domain_" + lang);
      auto table = std::dynamic_pointer_cast<const EmbeddingTable>(ref);
      if (!table) throw ConfigError("in-domain embeddings must be a table");
      ctx->in_domain_vectors = table->vectors();
    }
    if (need_enc) {
      ctx->enc_target = file_embedder("mono_" + lang);
      ctx->enc_source = file_embedder("synthetic_" + std::string(to_string(d)));
    }
  }

  if (ctx->in_domain) ctx->reference = unigram_dist(*ctx->in_domain);

  auto& res = ctx->scoring;
  res.lm_in = ctx->lm_in ? &*ctx->lm_in : nullptr;
  res.lm_gen = ctx->lm_gen ? &*ctx->lm_gen : nullptr;
  res.tfidf = ctx->tfidf ? &*ctx->tfidf : nullptr;
  res.embedder = ctx->repr_embedder.get();
  res.in_domain_embeddings = ctx->in_domain_vectors;
  // Round trip starts in the genuine language: genuine -> synthetic -> genuine.
  res.round_trip_forward = back_clean;
  res.round_trip_backward = ctx->model;
  res.round_trip_smoothing = config_.rbleu_smoothing;
  check_resources(repr, simp, res);

  contexts_.push_back(std::move(ctx));
}

RawScores Pipeline::raw_scores(Direction d, int epoch) {
  for (auto& ctx : contexts_) {
    if (ctx->direction != d) continue;
    const std::string prefix = std::string(to_string(d)) + ":";
    const bool refresh = config_.translators.refresh_rbleu && config_.simp == SimpMetric::kRoundTripBleu;
    const std::string simp_version = refresh ? "epoch-" + std::to_string(epoch) : "static";
    // both corpora share the id space
    return compute_raw_scores(*ctx->mono, config_.repr, config_.simp, ctx->scoring,
                              config_.threads, config_.cache_scores ? state_.cache.get() : nullptr,
                              prefix + "static", prefix + simp_version);
  }
  throw ConfigError("direction " + std::string(to_string(d)) + " is not configured");
}

const std::vector<WeightedPair>& Pipeline::last_pairs(Direction d) const {
  static const std::vector<WeightedPair> empty;
  auto it = last_pairs_.find(d);
  return it == last_pairs_.end() ? empty : it->second;
}

void Pipeline::weigh(const DirectionContext& ctx, WeightedPair& wp) const {
  double quality = 1.0;
  switch (config_.weighting.quality) {
    case QualityMetric::kEnc:
      quality = enc_weight(Sentence{wp.id, wp.source, {}}, Sentence{wp.id, wp.target, {}},
                           *ctx.enc_source, *ctx.enc_target);
      break;
    case QualityMetric::kAgree:
      quality = agree_weight(wp.source, wp.target, *ctx.model, *ctx.back_model);
      break;
    case QualityMetric::kNone:
      break;
  }
  wp.quality = quality;
  wp.imp = imp_factor(quality, state_.store.get(ctx.direction, wp.id), config_.weighting);
  wp.weight = final_weight(quality, wp.imp, config_.weighting);
}

const Pipeline::DirectionContext& Pipeline::context(Direction d) const {
  for (const auto& ctx : contexts_)
    if (ctx->direction == d) return *ctx;
  throw ConfigError("direction " + std::string(to_string(d)) + " is not configured");
}

std::vector<WeightedPair> Pipeline::weight_pairs(Direction d, std::vector<WeightedPair> pairs) const {
  const auto& ctx = context(d);
  parallel_for(pairs.size(), config_.threads, [&](std::size_t k) {
    pairs[k].direction = d;
    weigh(ctx, pairs[k]);
  });
  return pairs;
}

EpochReport Pipeline::run_epoch() {
  const int t = state_.epoch;
  EpochReport report;
  report.epoch = t;
  report.lambda = config_.strategy == Strategy::kStatic ? 1.0 : lambda_at(t, config_.schedule);

  struct Pending {
    DirectionContext* ctx;
    std::vector<SentenceId> selected;
    std::vector<WeightedPair> pairs;
    DirectionReport report;
    std::string selection_rows;
  };
  std::vector<Pending> pending;

  for (auto& ctx_ptr : contexts_) {
    auto& ctx = *ctx_ptr;
    const Direction d = ctx.direction;
    const RawScores raw = raw_scores(d, t);
    const NormalizedScores norm = normalize(raw);
    const std::size_t n = norm.size();

    std::vector<double> combined(n);
    for (std::size_t i = 0; i < n; ++i)
      combined[i] = combined_score(norm.repr[i], norm.simp[i], report.lambda);
    SelectionEpoch sel = select_top(combined, config_.selection, config_.tie_rule);

    Pending p;
    p.ctx = &ctx;
    p.selected = sel.selected;
    p.pairs.resize(sel.selected.size());
    parallel_for(sel.selected.size(), config_.threads, [&](std::size_t k) {
      const SentenceId id = sel.selected[k];
      const Sentence& y = ctx.mono->at(id);
      auto& wp = p.pairs[k];
      wp.id = id;
      wp.epoch = t;
      wp.direction = d;
      wp.source = ctx.generator->translate(y);
      if (wp.source.empty())
        throw ProviderError("empty translation for sentence " + std::to_string(id));
      wp.target = y.tokens;
      weigh(ctx, wp);
      wp.repr = norm.repr[id];
      wp.simp = norm.simp[id];
      wp.combined = combined[id];
    });

    auto& r = p.report;
    r.direction = d;
    r.corpus_size = n;
    r.selected = p.selected.size();
    r.pairs = p.pairs.size();
    r.min_weight = std::numeric_limits<double>::infinity();
    r.max_weight = -std::numeric_limits<double>::infinity();
    std::vector<Tokens> chosen;
    chosen.reserve(p.pairs.size());
    for (const auto& wp : p.pairs) {
      r.mean_repr += wp.repr;
      r.mean_simp += wp.simp;
      r.mean_length += static_cast<double>(wp.target.size());
      r.mean_weight += wp.weight;
      r.min_weight = std::min(r.min_weight, wp.weight);
      r.max_weight = std::max(r.max_weight, wp.weight);
      chosen.push_back(wp.target);
    }
    const double k = static_cast<double>(p.pairs.size());
    r.mean_repr /= k;
    r.mean_simp /= k;
    r.mean_length /= k;
    r.mean_weight /= k;
    if (ctx.reference) r.hellinger = hellinger(unigram_dist(chosen), *ctx.reference);

    auto history = state_.history[d];
    history.push_back(p.selected);
    const auto stats = replacement_stats(std::span<const std::vector<SentenceId>>(history), n);
    if (!stats.replaced.empty()) r.replaced = stats.replaced.back();
    r.coverage = stats.coverage.back();

    for (std::size_t rank = 0; rank < p.selected.size(); ++rank) {
      const SentenceId id = p.selected[rank];
      p.selection_rows += std::to_string(t) + "\t" + std::to_string(rank) + "\t" + std::to_string(id) +
                          "\t" + io::format_double(combined[id]) + "\n";
    }
    pending.push_back(std::move(p));
  }

  // Everything is computed; commit state.
  for (auto& p : pending) {
    const Direction d = p.ctx->direction;
    for (const auto& wp : p.pairs) state_.store.update(d, wp.id, wp.quality);
    state_.history[d].push_back(std::move(p.selected));
    p.ctx->selection_log += p.selection_rows;
    report.directions.push_back(p.report);
    last_pairs_[d] = std::move(p.pairs);
  }
  reports_.push_back(report);
  if (write_outputs_) write_epoch(report);
  if (trainer_)
    for (auto& ctx : contexts_) trainer_(ctx->direction, t, last_pairs_[ctx->direction]);
  log::info("epoch " + std::to_string(t) + " done, lambda " + io::format_double(report.lambda));
  ++state_.epoch;
  return report;
}

void Pipeline::prepare_output_dir() {
  if (output_prepared_) return;
  const auto& dir = config_.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
  // Remove artifacts of an earlier run so the directory describes this one only.
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    const bool epoch_file = name.rfind("epoch_", 0) == 0 && entry.path().extension() == ".jsonl";
    if (epoch_file || name == "summary.tsv") std::filesystem::remove(entry.path());
  }
  io::write_atomic(dir / "config.json", dump_run_config(config_));
  output_prepared_ = true;
}

void Pipeline::write_epoch(const EpochReport& report) {
  prepare_output_dir();
  const auto& dir = config_.output_dir;
  std::string jsonl;
  for (auto& ctx : contexts_) jsonl += pairs_to_jsonl(last_pairs_[ctx->direction]);
  io::write_atomic(dir / epoch_file_name(report.epoch), jsonl);
  for (auto& ctx : contexts_) {
    const std::string tag(to_string(ctx->direction));
    io::write_atomic(dir / ("selection_" + tag + ".tsv"), "epoch\trank\tid\tcombined\n" + ctx->selection_log);
  }
  io::write_atomic(dir / "reports.tsv", reports_to_tsv(reports_));
  state_.store.save(dir);
}

RunSummary Pipeline::run() {
  RunSummary summary;
  for (int i = 0; i < config_.epochs; ++i) summary.reports.push_back(run_epoch());
  for (auto& ctx : contexts_) {
    const auto& h = state_.history[ctx->direction];
    if (h.empty()) continue;
    summary.replacement[ctx->direction] =
        replacement_stats(std::span<const std::vector<SentenceId>>(h), ctx->mono->size());
  }
  if (write_outputs_ && config_.epochs > 0)
    io::write_atomic(config_.output_dir / "summary.tsv", summary_to_tsv(summary));
  return summary;
}

std::string epoch_file_name(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%03d.jsonl", epoch);
  return buf;
}

std::string reports_to_tsv(std::span<const EpochReport> reports) {
  std::string out =
      "epoch\tlambda\tdirection\tcorpus_size\tselected\tmean_repr\tmean_simp\tmean_length\tpairs\t"
      "mean_weight\tmin_weight\tmax_weight\treplaced\tcoverage\thellinger\n";
  for (const auto& e : reports) {
    for (const auto& r : e.directions) {
      out += std::to_string(e.epoch) + "\t" + io::format_double(e.lambda) + "\t" +
             std::string(to_string(r.direction)) + "\t" + std::to_string(r.corpus_size) + "\t" +
             std::to_string(r.selected) + "\t" + io::format_double(r.mean_repr) + "\t" +
             io::format_double(r.mean_simp) + "\t" + io::format_double(r.mean_length) + "\t" +
             std::to_string(r.pairs) + "\t" + io::format_double(r.mean_weight) + "\t" +
             io::format_double(r.min_weight) + "\t" + io::format_double(r.max_weight) + "\t" +
             na_or(r.replaced) + "\t" + io::format_double(r.coverage) + "\t" + na_or(r.hellinger) + "\n";
    }
  }
  return out;
}

std::string summary_to_tsv(const RunSummary& summary) {
  std::string out = "direction\tepoch\treplaced\tcoverage\n";
  for (const auto& [d, stats] : summary.replacement) {
    for (std::size_t k = 0; k < stats.coverage.size(); ++k) {
      std::optional<double> rep;
      if (k > 0) rep = stats.replaced[k - 1];
      out += std::string(to_string(d)) + "\t" + std::to_string(k) + "\t" + na_or(rep) + "\t" +
             io::format_double(stats.coverage[k]) + "\n";
    }
  }
  return out;
}

std::string pairs_to_jsonl(std::span<const WeightedPair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    ordered_json j;
    j["id"] = p.id;
    j["epoch"] = p.epoch;
    j["direction"] = std::string(to_string(p.direction));
    j["src_tokens"] = p.source;
    j["tgt_tokens"] = p.target;
    j["quality"] = p.quality;
    j["imp"] = p.imp;
    j["weight"] = p.weight;
    j["repr"] = p.repr;
    j["simp"] = p.simp;
    j["combined"] = p.combined;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<WeightedPair> parse_pairs_jsonl(std::string_view text) {
  std::vector<WeightedPair> out;
  std::size_t line_no = 0;
  for (const auto& line : io::split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      WeightedPair p;
      p.id = j.at("id").get<SentenceId>();
      p.epoch = j.at("epoch").get<int>();
      p.direction = parse_direction(j.at("direction").get<std::string>());
      p.source = j.at("src_tokens").get<Tokens>();
      p.target = j.at("tgt_tokens").get<Tokens>();
      p.quality = j.at("quality").get<double>();
      p.imp = j.at("imp").get<double>();
      p.weight = j.at("weight").get<double>();
      p.repr = j.at("repr").get<double>();
      p.simp = j.at("simp").get<double>();
      p.combined = j.at("combined").get<double>();
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("bad pair record on line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace btcurator
