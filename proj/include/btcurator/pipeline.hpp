#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "btcurator/corpus.hpp"
#include "btcurator/curriculum.hpp"
#include "btcurator/embedding.hpp"
#include "btcurator/metrics.hpp"
#include "btcurator/ngram_lm.hpp"
#include "btcurator/run_config.hpp"
#include "btcurator/scoring.hpp"
#include "btcurator/translator.hpp"
#include "btcurator/weighting.hpp"

namespace btcurator {

/// Corpora of one run. Roles follow the config: the parallel corpus has F
/// as source and E as target.
struct CorpusSet {
  std::optional<Corpus> mono_f, mono_e;
  std::optional<ParallelCorpus> parallel;
  std::optional<Corpus> in_domain_f, in_domain_e;
};

CorpusSet load_corpora(const RunConfig& config);

/// Translation models and embedders. `fe` translates F into E and `ef` E
/// into F. Generators produce the synthetic side and default to the models
/// themselves. Missing members are built from the config.
struct Providers {
  std::shared_ptr<const Translator> fe, ef;
  std::shared_ptr<const Translator> generator_fe, generator_ef;
  std::shared_ptr<const LexiconModel> lexicon_fe, lexicon_ef;
  // Keys as in EmbeddingConfig::files.
  std::map<std::string, std::shared_ptr<const SentenceEmbedder>> embedders;
};

struct DirectionReport {
  Direction direction = Direction::kFE;
  std::size_t corpus_size = 0;
  std::size_t selected = 0;
  double mean_repr = 0.0;
  double mean_simp = 0.0;
  double mean_length = 0.0;
  std::size_t pairs = 0;
  double mean_weight = 0.0;
  double min_weight = 0.0;
  double max_weight = 0.0;
  std::optional<double> replaced;  // absent at the first epoch
  double coverage = 0.0;
  std::optional<double> hellinger;  // absent without an in-domain reference
};

struct EpochReport {
  int epoch = 0;
  double lambda = 0.0;
  std::vector<DirectionReport> directions;
};

struct RunSummary {
  std::vector<EpochReport> reports;
  std::map<Direction, ReplacementStats> replacement;
};

/// Receives each direction's weighted pairs once the epoch is complete.
using TrainerHook = std::function<void(Direction, int epoch, std::span<const WeightedPair>)>;

struct RunState {
  int epoch = 0;
  QualityStore store;
  std::map<Direction, std::vector<std::vector<SentenceId>>> history;
  std::unique_ptr<ScoreCache> cache = std::make_unique<ScoreCache>();
};

/// Curriculum-selected, weighted iterative back-translation.
///
/// Each epoch, for every configured direction: score the target-language
/// monolingual corpus (static scores are cached), combine the normalized
/// scores with lambda(t), select the top p%, back-translate the selection,
/// weight every synthetic pair against the quality store, and emit the
/// pairs. lambda advances once per epoch, after all directions.
///
/// Output directory layout: config.json, epoch_NNN.jsonl, reports.tsv,
/// selection_<dir>.tsv, quality_<dir>.tsv and, after run(), summary.tsv.
/// An epoch is computed fully in memory before any file is written, and
/// every file is replaced atomically.
class Pipeline {
 public:
  Pipeline(RunConfig config, CorpusSet corpora, Providers providers = {});
  ~Pipeline();
  Pipeline(Pipeline&&) noexcept;

  static Pipeline from_config(const RunConfig& config);

  void set_trainer(TrainerHook hook) { trainer_ = std::move(hook); }
  /// Disable all file output (scores and reports are still returned).
  void set_write_outputs(bool enabled) { write_outputs_ = enabled; }

  EpochReport run_epoch();
  RunSummary run();

  const RunState& state() const { return state_; }
  const RunConfig& config() const { return config_; }
  const std::vector<WeightedPair>& last_pairs(Direction d) const;

  /// Raw scores for one direction's monolingual corpus.
  RawScores raw_scores(Direction d, int epoch = 0);

  /// Fills quality, imp and weight of given (id, source, target) pairs
  /// against the current quality store. The store is not modified.
  std::vector<WeightedPair> weight_pairs(Direction d, std::vector<WeightedPair> pairs) const;

  /// Replaces the quality store, e.g. with one loaded from disk.
  void set_quality_store(QualityStore store) { state_.store = std::move(store); }

 private:
  struct DirectionContext;

  void build_context(Direction d);
  const DirectionContext& context(Direction d) const;
  void weigh(const DirectionContext& ctx, WeightedPair& pair) const;
  void write_epoch(const EpochReport& report);
  void prepare_output_dir();

  RunConfig config_;
  CorpusSet corpora_;
  Providers providers_;
  std::vector<std::unique_ptr<DirectionContext>> contexts_;
  RunState state_;
  std::vector<EpochReport> reports_;
  std::map<Direction, std::vector<WeightedPair>> last_pairs_;
  TrainerHook trainer_;
  bool write_outputs_ = true;
  bool output_prepared_ = false;
};

std::string epoch_file_name(int epoch);
std::string reports_to_tsv(std::span<const EpochReport> reports);
std::string summary_to_tsv(const RunSummary& summary);

/// One JSON object per line with fields id, epoch, direction, src_tokens,
/// tgt_tokens, quality, imp, weight, repr, simp, combined.
std::string pairs_to_jsonl(std::span<const WeightedPair> pairs);
std::vector<WeightedPair> parse_pairs_jsonl(std::string_view text);

struct DiagRow {
  int epoch = 0;
  Direction direction = Direction::kFE;
  std::size_t selected = 0;
  double mean_length = 0.0;
  std::optional<double> hellinger;
  std::optional<double> replaced;
  double coverage = 0.0;
};

struct Diagnostics {
  std::vector<DiagRow> rows;

  /// Four TSV tables (lengths, hellinger, replacement, coverage), each
  /// introduced by a "# name" line.
  std::string to_tsv() const;
};

/// Recomputes selection diagnostics from a run directory alone.
Diagnostics diag(const std::filesystem::path& run_dir);

}  // namespace btcurator
