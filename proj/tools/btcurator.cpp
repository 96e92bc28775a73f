#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "btcurator/curriculum.hpp"
#include "btcurator/error.hpp"
#include "btcurator/io.hpp"
#include "btcurator/log.hpp"
#include "btcurator/ngram_lm.hpp"
#include "btcurator/pipeline.hpp"
#include "btcurator/run_config.hpp"

using namespace btcurator;

namespace {

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    io::write_atomic(out_path, text);
  }
}

// BLEU lives in [0, 1] internally and is shown on the usual 0-100 scale.
double display_simp(SimpMetric m, double v) { return m == SimpMetric::kRoundTripBleu ? 100.0 * v : v; }

int cmd_run(const std::string& config_path) {
  const RunConfig config = load_run_config(config_path);
  auto pipeline = Pipeline::from_config(config);
  const auto summary = pipeline.run();
  std::cout << reports_to_tsv(summary.reports);
  return 0;
}

int cmd_score(const std::string& config_path, const std::string& direction, const std::string& out) {
  RunConfig config = load_run_config(config_path);
  const Direction d = parse_direction(direction);
  config.directions = {d};
  auto pipeline = Pipeline::from_config(config);
  const RawScores raw = pipeline.raw_scores(d);
  const NormalizedScores norm = normalize(raw);
  std::string text = "id\traw_repr\traw_simp\tnorm_repr\tnorm_simp\trepr_metric\tsimp_metric\n";
  const std::string names = std::string(to_string(raw.repr_metric)) + "\t" + std::string(to_string(raw.simp_metric));
  for (std::size_t i = 0; i < norm.size(); ++i) {
    text += std::to_string(i) + "\t" + io::format_double(raw.repr[i]) + "\t" +
            io::format_double(display_simp(raw.simp_metric, raw.simp[i])) + "\t" +
            io::format_double(norm.repr[i]) + "\t" + io::format_double(norm.simp[i]) + "\t" + names + "\n";
  }
  emit(text, out);
  return 0;
}

int cmd_select(const std::string& scores_path, double c0, int T, double p, int epoch,
               const std::string& tie, const std::string& out) {
  ScheduleConfig schedule{c0, T};
  schedule.validate();
  SelectionConfig selection{p};
  selection.validate();
  if (epoch < 0) throw ConfigError("--epoch must be nonnegative");
  TieRule rule;
  if (tie == "lower") rule = TieRule::kLowerId;
  else if (tie == "higher") rule = TieRule::kHigherId;
  else throw ConfigError("--tie must be lower or higher");

  const auto lines = io::read_lines(scores_path);
  if (lines.empty()) throw DataError("empty score file " + scores_path);
  const auto header = io::split(lines[0], '\t');
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw DataError("score file lacks column " + name);
  };
  const auto c_id = column("id"), c_r = column("norm_repr"), c_s = column("norm_simp");
  NormalizedScores scores;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto f = io::split(lines[ln], '\t');
    if (f.size() < header.size()) throw DataError("short row on line " + std::to_string(ln + 1));
    if (std::stoul(f[c_id]) != scores.size())
      throw DataError("score ids must be dense and ordered (line " + std::to_string(ln + 1) + ")");
    try {
      scores.repr.push_back(std::stod(f[c_r]));
      scores.simp.push_back(std::stod(f[c_s]));
    } catch (const std::exception&) {
      throw DataError("unparseable score on line " + std::to_string(ln + 1));
    }
  }
  const auto sel = select_epoch(scores, epoch, schedule, selection, rule);
  std::string text = "rank\tid\tcombined\tlambda\n";
  for (std::size_t r = 0; r < sel.selected.size(); ++r) {
    const auto id = sel.selected[r];
    text += std::to_string(r) + "\t" + std::to_string(id) + "\t" + io::format_double(sel.combined[id]) +
            "\t" + io::format_double(sel.lambda) + "\n";
  }
  emit(text, out);
  return 0;
}

int cmd_weight(const std::string& config_path, const std::string& direction, const std::string& pairs_path,
               const std::string& store_dir, const std::string& out) {
  RunConfig config = load_run_config(config_path);
  const Direction d = parse_direction(direction);
  config.directions = {d};
  auto pipeline = Pipeline::from_config(config);
  QualityStore store;
  if (!store_dir.empty() && std::filesystem::exists(std::filesystem::path(store_dir) / QualityStore::file_name(d)))
    store = QualityStore::load(store_dir);
  pipeline.set_quality_store(store);

  std::vector<WeightedPair> pairs;
  const auto lines = io::read_lines(pairs_path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto f = io::split(lines[ln], '\t');
    if (f.size() != 3) throw DataError("pair rows are id<TAB>source<TAB>target (line " + std::to_string(ln + 1) + ")");
    WeightedPair wp;
    try {
      wp.id = static_cast<SentenceId>(std::stoul(f[0]));
    } catch (const std::exception&) {
      throw DataError("bad id on line " + std::to_string(ln + 1));
    }
    wp.source = tokenize(f[1], config.load.tokenizer);
    wp.target = tokenize(f[2], config.load.tokenizer);
    if (wp.source.empty() || wp.target.empty()) throw DataError("blank pair on line " + std::to_string(ln + 1));
    pairs.push_back(std::move(wp));
  }
  pairs = pipeline.weight_pairs(d, std::move(pairs));
  std::string text = "id\tquality\timp\tweight\n";
  for (const auto& wp : pairs) {
    text += std::to_string(wp.id) + "\t" + io::format_double(wp.quality) + "\t" + io::format_double(wp.imp) +
            "\t" + io::format_double(wp.weight) + "\n";
    store.update(d, wp.id, wp.quality);
  }
  if (!store_dir.empty()) {
    std::filesystem::create_directories(store_dir);
    store.save(store_dir);
  }
  emit(text, out);
  return 0;
}

int cmd_train_lm(const std::string& input, int order, const std::string& arpa, const std::string& eval,
                 bool lowercase) {
  LoadOptions opts;
  opts.tokenizer.lowercase = lowercase;
  const Corpus corpus = load_corpus(input, "", opts);
  LmConfig cfg;
  cfg.order = order;
  if (order < 1 || order > kMaxLmOrder) throw ConfigError("--order must be in [1, 6]");
  const NGramLM lm = NGramLM::train(corpus, cfg);
  lm.save_arpa(arpa);
  if (!eval.empty()) {
    const Corpus held = load_corpus(eval, "", opts);
    std::cout << "perplexity\t" << io::format_double(perplexity(lm, held)) << "\n";
  }
  return 0;
}

int cmd_diag(const std::string& run_dir, const std::string& out) {
  emit(diag(run_dir).to_tsv(), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curriculum data selection and quality weighting for iterative back-translation"};
  app.require_subcommand(1);
  bool quiet = false, verbose = false;
  app.add_flag("-q,--quiet", quiet, "Suppress warnings");
  app.add_flag("-v,--verbose", verbose, "Progress messages");

  std::string config_path, direction = "fe", out, scores_path, tie = "lower", pairs_path, store_dir;
  std::string input, arpa, eval, run_dir;
  double c0 = 0.1, p = 30.0;
  int T = 5, epoch = 0, order = 5;
  bool lowercase = false;

  auto* run = app.add_subcommand("run", "Run the full selection and weighting loop");
  run->add_option("--config", config_path, "Run config (JSON)")->required();

  auto* score = app.add_subcommand("score", "Score a monolingual corpus");
  score->add_option("--config", config_path, "Run config (JSON)")->required();
  score->add_option("--direction", direction, "fe scores mono_e, ef scores mono_f");
  score->add_option("--out", out, "Output TSV (default stdout)");

  auto* select = app.add_subcommand("select", "Select the top sentences for one epoch");
  select->add_option("--scores", scores_path, "TSV written by score")->required();
  select->add_option("--c0", c0, "Initial balance");
  select->add_option("--T", T, "Schedule length");
  select->add_option("--p", p, "Percent selected");
  select->add_option("--epoch", epoch, "Epoch index, starting at 0");
  select->add_option("--tie", tie, "Tie rule: lower or higher id first");
  select->add_option("--out", out, "Output TSV (default stdout)");

  auto* weight = app.add_subcommand("weight", "Weight synthetic pairs");
  weight->add_option("--config", config_path, "Run config (JSON)")->required();
  weight->add_option("--direction", direction, "Pair direction");
  weight->add_option("--pairs", pairs_path, "id<TAB>synthetic source<TAB>genuine target")->required();
  weight->add_option("--store", store_dir, "Quality store directory (read and updated)");
  weight->add_option("--out", out, "Output TSV (default stdout)");

  auto* train_lm = app.add_subcommand("train-lm", "Train a Kneser-Ney n-gram model");
  train_lm->add_option("--input", input, "Training text, one sentence per line")->required();
  train_lm->add_option("--order", order, "N-gram order");
  train_lm->add_option("--arpa", arpa, "Output ARPA file")->required();
  train_lm->add_option("--eval", eval, "Held-out text for perplexity");
  train_lm->add_flag("--lowercase", lowercase, "ASCII case folding");

  auto* dg = app.add_subcommand("diag", "Selection diagnostics for a run directory");
  dg->add_option("--run-dir", run_dir, "Output directory of a run")->required();
  dg->add_option("--out", out, "Output TSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  log::set_level(quiet ? log::Level::kQuiet : verbose ? log::Level::kInfo : log::Level::kWarn);

  try {
    if (*run) return cmd_run(config_path);
    if (*score) return cmd_score(config_path, direction, out);
    if (*select) return cmd_select(scores_path, c0, T, p, epoch, tie, out);
    if (*weight) return cmd_weight(config_path, direction, pairs_path, store_dir, out);
    if (*train_lm) return cmd_train_lm(input, order, arpa, eval, lowercase);
    if (*dg) return cmd_diag(run_dir, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const ProviderError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
