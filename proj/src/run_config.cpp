#include "btcurator/run_config.hpp"

#include <set>

#include <json.hpp>

#include "btcurator/error.hpp"
#include "btcurator/io.hpp"

namespace btcurator {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  const std::set<std::string_view> ok(allowed);
  for (const auto& [key, value] : obj.items())
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, std::string_view where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + " has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

std::filesystem::path get_path(const json& obj, const char* key, const std::filesystem::path& base,
                               std::string_view where) {
  return resolve(base, get_or<std::string>(obj, key, "", where));
}

std::string_view to_string(TokenizerConfig::Mode m) {
  return m == TokenizerConfig::Mode::kWhitespace ? "whitespace" : "passthrough";
}

std::string_view to_string(TranslatorConfig::Type t) {
  switch (t) {
    case TranslatorConfig::Type::kModel1: return "model1";
    case TranslatorConfig::Type::kLexicon: return "lexicon";
    case TranslatorConfig::Type::kIdentity: return "identity";
    case TranslatorConfig::Type::kOffline: return "offline";
  }
  return "?";
}

std::string_view to_string(TieRule r) { return r == TieRule::kLowerId ? "lower_id" : "higher_id"; }

}  // namespace

std::string_view to_string(Strategy s) { return s == Strategy::kCurriculum ? "curriculum" : "static"; }

void RunConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be nonnegative");
  if (directions.empty()) throw ConfigError("at least one direction is required");
  schedule.validate();
  selection.validate();
  weighting.validate();
  if (lm.order < 1 || lm.order > kMaxLmOrder) throw ConfigError("lm.order must be in [1, 6]");
  if (!(translators.noise_rate >= 0.0 && translators.noise_rate <= 1.0))
    throw ConfigError("translators.noise_rate must be in [0, 1]");
  if (translators.em_iterations < 1) throw ConfigError("translators.em_iterations must be >= 1");
  if (embeddings.dim == 0) throw ConfigError("embeddings.dim must be positive");

  const bool has_parallel = !corpora.parallel_f.empty() && !corpora.parallel_e.empty();
  if (corpora.parallel_f.empty() != corpora.parallel_e.empty())
    throw ConfigError("parallel_f and parallel_e must be given together");

  for (auto d : directions) {
    // FE pairs select from mono_e; EF pairs from mono_f.
    const bool target_is_e = d == Direction::kFE;
    const auto& mono = target_is_e ? corpora.mono_e : corpora.mono_f;
    const auto& in_domain = target_is_e ? corpora.in_domain_e : corpora.in_domain_f;
    const std::string lang = target_is_e ? "e" : "f";
    if (mono.empty()) throw ConfigError("direction " + std::string(to_string(d)) + " needs corpora.mono_" + lang);
    const bool needs_in_domain_lm = (repr == ReprMetric::kLmIn || repr == ReprMetric::kLmDiff) &&
                                    !lm.arpa.count("in_" + lang);
    if ((repr == ReprMetric::kTfIdf || needs_in_domain_lm) && in_domain.empty())
      throw ConfigError(std::string(to_string(repr)) + " needs corpora.in_domain_" + lang);
    if (repr == ReprMetric::kEmbed) {
      if (embeddings.type == EmbeddingConfig::Type::kBag && in_domain.empty())
        throw ConfigError("embed needs corpora.in_domain_" + lang);
      if (embeddings.type == EmbeddingConfig::Type::kFile &&
          (!embeddings.files.count("mono_" + lang) || !embeddings.files.count("in_domain_" + lang)))
        throw ConfigError("embed with file embeddings needs files.mono_" + lang + " and files.in_domain_" + lang);
    }
    const bool needs_gen_lm = simp == SimpMetric::kLmGen || repr == ReprMetric::kLmDiff;
    if (needs_gen_lm && !lm.arpa.count("gen_" + lang) && !has_parallel)
      throw ConfigError("general-domain LM for language " + lang + " needs a parallel corpus or lm.arpa.gen_" + lang);
    if (weighting.quality == QualityMetric::kEnc && embeddings.type == EmbeddingConfig::Type::kFile) {
      const std::string synth = "synthetic_" + std::string(to_string(d));
      if (!embeddings.files.count("mono_" + lang) || !embeddings.files.count(synth))
        throw ConfigError("enc weighting with file embeddings needs files.mono_" + lang + " and files." + synth);
    }
  }
  switch (translators.type) {
    case TranslatorConfig::Type::kModel1:
      if (!has_parallel) throw ConfigError("model1 translators need a parallel corpus");
      break;
    case TranslatorConfig::Type::kLexicon:
      if (translators.lexicon_fe.empty() || translators.lexicon_ef.empty())
        throw ConfigError("lexicon translators need translators.fe and translators.ef");
      break;
    case TranslatorConfig::Type::kOffline:
      if (translators.offline_fe.empty() || translators.offline_ef.empty())
        throw ConfigError("offline translators need translators.fe.translations and translators.ef.translations");
      // Offline output is keyed by monolingual sentence id; a second hop has no entry.
      if (simp == SimpMetric::kRoundTripBleu)
        throw ConfigError("rbleu cannot be computed with offline translators");
      break;
    case TranslatorConfig::Type::kIdentity:
      break;
  }
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("run config is not valid JSON: ") + e.what());
  }
  check_keys(root, "config", {"output_dir", "epochs", "seed", "threads", "cache_scores", "languages",
                              "directions", "tokenizer", "dedup", "corpora", "selection", "lm",
                              "translators", "embeddings", "weighting"});
  RunConfig c;
  c.output_dir = resolve(base_dir, get_or<std::string>(root, "output_dir", "run", "config"));
  c.epochs = get_or<int>(root, "epochs", c.epochs, "config");
  c.seed = get_or<std::uint64_t>(root, "seed", c.seed, "config");
  c.threads = get_or<unsigned>(root, "threads", c.threads, "config");
  c.cache_scores = get_or<bool>(root, "cache_scores", c.cache_scores, "config");
  c.load.dedup = get_or<bool>(root, "dedup", false, "config");

  if (root.contains("languages")) {
    const auto& l = root["languages"];
    check_keys(l, "languages", {"f", "e"});
    c.language_f = get_or<std::string>(l, "f", c.language_f, "languages");
    c.language_e = get_or<std::string>(l, "e", c.language_e, "languages");
  }
  if (root.contains("directions")) {
    c.directions.clear();
    for (const auto& d : get_or<std::vector<std::string>>(root, "directions", {}, "config"))
      c.directions.push_back(parse_direction(d));
  }
  if (root.contains("tokenizer")) {
    const auto& t = root["tokenizer"];
    check_keys(t, "tokenizer", {"mode", "lowercase"});
    const auto mode = get_or<std::string>(t, "mode", "whitespace", "tokenizer");
    if (mode == "whitespace") c.load.tokenizer.mode = TokenizerConfig::Mode::kWhitespace;
    else if (mode == "passthrough") c.load.tokenizer.mode = TokenizerConfig::Mode::kPassThrough;
    else throw ConfigError("tokenizer.mode must be whitespace or passthrough");
    c.load.tokenizer.lowercase = get_or<bool>(t, "lowercase", false, "tokenizer");
  }
  if (root.contains("corpora")) {
    const auto& k = root["corpora"];
    check_keys(k, "corpora", {"mono_f", "mono_e", "parallel_f", "parallel_e", "in_domain_f", "in_domain_e"});
    c.corpora.mono_f = get_path(k, "mono_f", base_dir, "corpora");
    c.corpora.mono_e = get_path(k, "mono_e", base_dir, "corpora");
    c.corpora.parallel_f = get_path(k, "parallel_f", base_dir, "corpora");
    c.corpora.parallel_e = get_path(k, "parallel_e", base_dir, "corpora");
    c.corpora.in_domain_f = get_path(k, "in_domain_f", base_dir, "corpora");
    c.corpora.in_domain_e = get_path(k, "in_domain_e", base_dir, "corpora");
  }
  if (root.contains("selection")) {
    const auto& s = root["selection"];
    check_keys(s, "selection", {"strategy", "repr", "simp", "p", "c0", "T", "tie_rule", "rbleu_smoothing"});
    const auto strategy = get_or<std::string>(s, "strategy", "curriculum", "selection");
    if (strategy == "curriculum") c.strategy = Strategy::kCurriculum;
    else if (strategy == "static") c.strategy = Strategy::kStatic;
    else throw ConfigError("selection.strategy must be curriculum or static");
    c.repr = parse_repr_metric(get_or<std::string>(s, "repr", "tfidf", "selection"));
    c.simp = parse_simp_metric(get_or<std::string>(s, "simp", "rbleu", "selection"));
    c.rbleu_smoothing = parse_bleu_smoothing(get_or<std::string>(s, "rbleu_smoothing", "add1", "selection"));
    c.selection.p = get_or<double>(s, "p", c.selection.p, "selection");
    c.schedule.c0 = get_or<double>(s, "c0", c.schedule.c0, "selection");
    c.schedule.T = get_or<int>(s, "T", c.schedule.T, "selection");
    const auto tie = get_or<std::string>(s, "tie_rule", "lower_id", "selection");
    if (tie == "lower_id") c.tie_rule = TieRule::kLowerId;
    else if (tie == "higher_id") c.tie_rule = TieRule::kHigherId;
    else throw ConfigError("selection.tie_rule must be lower_id or higher_id");
  }
  if (root.contains("lm")) {
    const auto& l = root["lm"];
    check_keys(l, "lm", {"order", "arpa"});
    c.lm.order = get_or<int>(l, "order", c.lm.order, "lm");
    if (l.contains("arpa")) {
      check_keys(l["arpa"], "lm.arpa", {"in_f", "in_e", "gen_f", "gen_e"});
      for (const auto& [key, value] : l["arpa"].items())
        c.lm.arpa[key] = get_path(l["arpa"], key.c_str(), base_dir, "lm.arpa");
    }
  }
  if (root.contains("translators")) {
    const auto& t = root["translators"];
    check_keys(t, "translators", {"type", "em_iterations", "noise_rate", "refresh_rbleu", "fe", "ef"});
    const auto type = get_or<std::string>(t, "type", "model1", "translators");
    if (type == "model1") c.translators.type = TranslatorConfig::Type::kModel1;
    else if (type == "lexicon") c.translators.type = TranslatorConfig::Type::kLexicon;
    else if (type == "identity") c.translators.type = TranslatorConfig::Type::kIdentity;
    else if (type == "offline") c.translators.type = TranslatorConfig::Type::kOffline;
    else throw ConfigError("translators.type must be model1, lexicon, identity or offline");
    c.translators.em_iterations = get_or<int>(t, "em_iterations", c.translators.em_iterations, "translators");
    c.translators.noise_rate = get_or<double>(t, "noise_rate", 0.0, "translators");
    c.translators.refresh_rbleu = get_or<bool>(t, "refresh_rbleu", false, "translators");
    for (const char* dir : {"fe", "ef"}) {
      if (!t.contains(dir)) continue;
      const auto& d = t[dir];
      const bool fe = std::string_view(dir) == "fe";
      if (d.is_string()) {
        (fe ? c.translators.lexicon_fe : c.translators.lexicon_ef) = resolve(base_dir, d.get<std::string>());
        continue;
      }
      const std::string where = std::string("translators.") + dir;
      check_keys(d, where, {"translations", "scores"});
      (fe ? c.translators.offline_fe : c.translators.offline_ef) = get_path(d, "translations", base_dir, where);
      for (const auto& s : get_or<std::vector<std::string>>(d, "scores", {}, where))
        (fe ? c.translators.scores_fe : c.translators.scores_ef).push_back(resolve(base_dir, s));
    }
  }
  if (root.contains("embeddings")) {
    const auto& e = root["embeddings"];
    check_keys(e, "embeddings", {"type", "dim", "seed", "cross_lingual_map", "files"});
    const auto type = get_or<std::string>(e, "type", "bag", "embeddings");
    if (type == "bag") c.embeddings.type = EmbeddingConfig::Type::kBag;
    else if (type == "file") c.embeddings.type = EmbeddingConfig::Type::kFile;
    else throw ConfigError("embeddings.type must be bag or file");
    c.embeddings.dim = get_or<std::size_t>(e, "dim", c.embeddings.dim, "embeddings");
    if (e.contains("seed")) c.embeddings.seed = get_or<std::uint64_t>(e, "seed", 0, "embeddings");
    c.embeddings.cross_lingual_map = get_or<bool>(e, "cross_lingual_map", true, "embeddings");
    if (e.contains("files")) {
      check_keys(e["files"], "embeddings.files",
                 {"mono_f", "mono_e", "in_domain_f", "in_domain_e", "synthetic_fe", "synthetic_ef"});
      for (const auto& [key, value] : e["files"].items())
        c.embeddings.files[key] = get_path(e["files"], key.c_str(), base_dir, "embeddings.files");
    }
  }
  if (root.contains("weighting")) {
    const auto& w = root["weighting"];
    check_keys(w, "weighting", {"quality", "improvement", "w_low", "w_high", "composition", "min_weight"});
    c.weighting.quality = parse_quality_metric(get_or<std::string>(w, "quality", "enc", "weighting"));
    c.weighting.improvement = get_or<bool>(w, "improvement", true, "weighting");
    c.weighting.w_low = get_or<double>(w, "w_low", c.weighting.w_low, "weighting");
    c.weighting.w_high = get_or<double>(w, "w_high", c.weighting.w_high, "weighting");
    c.weighting.composition = parse_composition(get_or<std::string>(w, "composition", "product", "weighting"));
    c.weighting.min_weight = get_or<double>(w, "min_weight", c.weighting.min_weight, "weighting");
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse_run_config(text, path.parent_path());
}

std::string dump_run_config(const RunConfig& c) {
  ordered_json root;
  root["output_dir"] = c.output_dir.string();
  root["epochs"] = c.epochs;
  root["seed"] = c.seed;
  root["threads"] = c.threads;
  root["cache_scores"] = c.cache_scores;
  root["languages"] = {{"f", c.language_f}, {"e", c.language_e}};
  root["directions"] = ordered_json::array();
  for (auto d : c.directions) root["directions"].push_back(std::string(to_string(d)));
  root["tokenizer"] = {{"mode", std::string(to_string(c.load.tokenizer.mode))},
                       {"lowercase", c.load.tokenizer.lowercase}};
  root["dedup"] = c.load.dedup;
  ordered_json corpora = ordered_json::object();
  const auto put = [](ordered_json& obj, const char* key, const std::filesystem::path& p) {
    if (!p.empty()) obj[key] = p.string();
  };
  put(corpora, "mono_f", c.corpora.mono_f);
  put(corpora, "mono_e", c.corpora.mono_e);
  put(corpora, "parallel_f", c.corpora.parallel_f);
  put(corpora, "parallel_e", c.corpora.parallel_e);
  put(corpora, "in_domain_f", c.corpora.in_domain_f);
  put(corpora, "in_domain_e", c.corpora.in_domain_e);
  root["corpora"] = corpora;
  root["selection"] = {{"strategy", std::string(to_string(c.strategy))},
                       {"repr", std::string(to_string(c.repr))},
                       {"simp", std::string(to_string(c.simp))},
                       {"rbleu_smoothing", c.rbleu_smoothing == BleuSmoothing::kAdd1 ? "add1" : "none"},
                       {"p", c.selection.p},
                       {"c0", c.schedule.c0},
                       {"T", c.schedule.T},
                       {"tie_rule", std::string(to_string(c.tie_rule))}};
  ordered_json lm = {{"order", c.lm.order}};
  if (!c.lm.arpa.empty()) {
    lm["arpa"] = ordered_json::object();
    for (const auto& [k, p] : c.lm.arpa) lm["arpa"][k] = p.string();
  }
  root["lm"] = lm;
  ordered_json tr = {{"type", std::string(to_string(c.translators.type))},
                     {"em_iterations", c.translators.em_iterations},
                     {"noise_rate", c.translators.noise_rate},
                     {"refresh_rbleu", c.translators.refresh_rbleu}};
  if (c.translators.type == TranslatorConfig::Type::kLexicon) {
    tr["fe"] = c.translators.lexicon_fe.string();
    tr["ef"] = c.translators.lexicon_ef.string();
  } else if (c.translators.type == TranslatorConfig::Type::kOffline) {
    for (auto d : {Direction::kFE, Direction::kEF}) {
      const bool fe = d == Direction::kFE;
      ordered_json entry = {{"translations", (fe ? c.translators.offline_fe : c.translators.offline_ef).string()}};
      entry["scores"] = ordered_json::array();
      for (const auto& s : fe ? c.translators.scores_fe : c.translators.scores_ef) entry["scores"].push_back(s.string());
      tr[std::string(to_string(d))] = entry;
    }
  }
  root["translators"] = tr;
  ordered_json emb = {{"type", c.embeddings.type == EmbeddingConfig::Type::kBag ? "bag" : "file"},
                      {"dim", c.embeddings.dim},
                      {"cross_lingual_map", c.embeddings.cross_lingual_map}};
  if (c.embeddings.seed) emb["seed"] = *c.embeddings.seed;
  if (!c.embeddings.files.empty()) {
    emb["files"] = ordered_json::object();
    for (const auto& [k, p] : c.embeddings.files) emb["files"][k] = p.string();
  }
  root["embeddings"] = emb;
  root["weighting"] = {{"quality", std::string(to_string(c.weighting.quality))},
                       {"improvement", c.weighting.improvement},
                       {"w_low", c.weighting.w_low},
                       {"w_high", c.weighting.w_high},
                       {"composition", std::string(to_string(c.weighting.composition))},
                       {"min_weight", c.weighting.min_weight}};
  return root.dump(2) + "\n";
}

}  // namespace btcurator
