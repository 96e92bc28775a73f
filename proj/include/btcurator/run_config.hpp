#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "btcurator/corpus.hpp"
#include "btcurator/curriculum.hpp"
#include "btcurator/metrics.hpp"
#include "btcurator/scoring.hpp"
#include "btcurator/translator.hpp"
#include "btcurator/weighting.hpp"

namespace btcurator {

enum class Strategy {
  kCurriculum,  // lambda follows the square-root schedule
  kStatic,      // lambda fixed at 1: representativeness only
};

struct CorpusPaths {
  std::filesystem::path mono_f, mono_e;
  std::filesystem::path parallel_f, parallel_e;    // optional bitext
  std::filesystem::path in_domain_f, in_domain_e;  // optional reference sets
};

struct TranslatorConfig {
  enum class Type { kModel1, kLexicon, kIdentity, kOffline };
  Type type = Type::kModel1;
  int em_iterations = 10;
  double noise_rate = 0.0;  // applied to back-translation output only
  bool refresh_rbleu = false;
  // kLexicon: saved tables; kOffline: translation files and extra scores.
  std::filesystem::path lexicon_fe, lexicon_ef;
  std::filesystem::path offline_fe, offline_ef;
  std::vector<std::filesystem::path> scores_fe, scores_ef;
};

struct EmbeddingConfig {
  enum class Type { kBag, kFile };
  Type type = Type::kBag;
  std::size_t dim = 64;
  std::optional<std::uint64_t> seed;  // defaults to the run seed
  // Map synthetic-side tokens through the lexicon before bag embedding.
  bool cross_lingual_map = true;
  // kFile tables: mono_f, mono_e, in_domain_f, in_domain_e, synthetic_fe, synthetic_ef.
  std::map<std::string, std::filesystem::path> files;
};

struct LmSettings {
  int order = 5;
  // Optional ARPA files: in_f, in_e, gen_f, gen_e.
  std::map<std::string, std::filesystem::path> arpa;
};

struct RunConfig {
  std::filesystem::path output_dir = "run";
  int epochs = 6;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool cache_scores = true;
  std::string language_f = "f";
  std::string language_e = "e";
  std::vector<Direction> directions{Direction::kFE, Direction::kEF};
  LoadOptions load;
  CorpusPaths corpora;

  Strategy strategy = Strategy::kCurriculum;
  ReprMetric repr = ReprMetric::kTfIdf;
  SimpMetric simp = SimpMetric::kRoundTripBleu;
  BleuSmoothing rbleu_smoothing = BleuSmoothing::kAdd1;
  ScheduleConfig schedule;
  SelectionConfig selection;
  TieRule tie_rule = TieRule::kLowerId;

  LmSettings lm;
  TranslatorConfig translators;
  EmbeddingConfig embeddings;
  WeightConfig weighting;

  /// Checks ranges and that every chosen metric has the corpora it needs.
  void validate() const;
};

/// Relative paths are resolved against `base_dir`. Unknown keys are errors.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
std::string dump_run_config(const RunConfig& config);

std::string_view to_string(Strategy s);

}  // namespace btcurator
