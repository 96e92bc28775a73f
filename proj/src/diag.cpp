#include <map>

#include "btcurator/error.hpp"
#include "btcurator/io.hpp"
#include "btcurator/pipeline.hpp"

namespace btcurator {

namespace {

std::string na_or(const std::optional<double>& v) { return v ? io::format_double(*v) : "NA"; }

}  // namespace

Diagnostics diag(const std::filesystem::path& run_dir) {
  const auto config_path = run_dir / "config.json";
  if (!std::filesystem::exists(config_path))
    throw DataError("no config.json in " + run_dir.string());
  const RunConfig config = load_run_config(config_path);

  std::map<Direction, std::vector<std::vector<SentenceId>>> history;
  std::map<Direction, std::size_t> corpus_size;
  std::map<Direction, std::optional<UnigramDist>> reference;
  for (auto d : config.directions) {
    const bool target_e = d == Direction::kFE;
    const auto& mono = target_e ? config.corpora.mono_e : config.corpora.mono_f;
    const auto& lang = target_e ? config.language_e : config.language_f;
    corpus_size[d] = load_corpus(mono, lang, config.load).size();
    const auto& in = target_e ? config.corpora.in_domain_e : config.corpora.in_domain_f;
    reference[d] = in.empty() ? std::nullopt
                              : std::optional<UnigramDist>(unigram_dist(load_corpus(in, lang, config.load)));
  }

  Diagnostics out;
  for (int t = 0;; ++t) {
    const auto path = run_dir / epoch_file_name(t);
    if (!std::filesystem::exists(path)) break;
    const auto pairs = parse_pairs_jsonl(io::read_file(path));
    std::map<Direction, std::vector<const WeightedPair*>> by_dir;
    for (const auto& p : pairs) by_dir[p.direction].push_back(&p);
    for (auto& [d, list] : by_dir) {
      if (!corpus_size.count(d))
        throw DataError("epoch file has direction " + std::string(to_string(d)) + " not in config");
      DiagRow row;
      row.epoch = t;
      row.direction = d;
      row.selected = list.size();
      std::vector<Tokens> chosen;
      std::vector<SentenceId> ids;
      for (const auto* p : list) {
        row.mean_length += static_cast<double>(p->target.size());
        chosen.push_back(p->target);
        ids.push_back(p->id);
      }
      row.mean_length /= static_cast<double>(list.size());
      if (reference[d]) row.hellinger = hellinger(unigram_dist(chosen), *reference[d]);
      auto& h = history[d];
      h.push_back(std::move(ids));
      const auto stats = replacement_stats(std::span<const std::vector<SentenceId>>(h), corpus_size[d]);
      if (!stats.replaced.empty()) row.replaced = stats.replaced.back();
      row.coverage = stats.coverage.back();
      out.rows.push_back(row);
    }
  }
  if (out.rows.empty()) throw DataError("no epoch files in " + run_dir.string());
  return out;
}

std::string Diagnostics::to_tsv() const {
  std::string lengths = "# lengths\nepoch\tdirection\tselected\tmean_length\n";
  std::string hell = "# hellinger\nepoch\tdirection\thellinger\n";
  std::string repl = "# replacement\nepoch\tdirection\treplaced\n";
  std::string cov = "# coverage\nepoch\tdirection\tcoverage\n";
  for (const auto& r : rows) {
    const std::string head = std::to_string(r.epoch) + "\t" + std::string(to_string(r.direction)) + "\t";
    lengths += head + std::to_string(r.selected) + "\t" + io::format_double(r.mean_length) + "\n";
    hell += head + na_or(r.hellinger) + "\n";
    if (r.replaced) repl += head + io::format_double(*r.replaced) + "\n";
    cov += head + io::format_double(r.coverage) + "\n";
  }
  return lengths + "\n" + hell + "\n" + repl + "\n" + cov;
}

}  // namespace btcurator
