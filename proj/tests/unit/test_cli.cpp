#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>

#include <json.hpp>

#include "btcurator/io.hpp"
#include "tempdir.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path kData = BTCURATOR_TEST_DATA;

struct Result {
  int code;
  std::string out, err;
};

Result cli(const TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string(BTCURATOR_BIN) + " " + args + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, btcurator::io::read_file(out),
          btcurator::io::read_file(err)};
}

json base_config(const TempDir& dir, const std::string& out) {
  return json{{"output_dir", (dir / out).string()},
              {"epochs", 3},
              {"seed", 9},
              {"corpora",
               {{"mono_e", (kData / "mono.e").string()},
                {"mono_f", (kData / "mono.f").string()},
                {"in_domain_e", (kData / "in.e").string()},
                {"in_domain_f", (kData / "in.f").string()},
                {"parallel_e", (kData / "par.e").string()},
                {"parallel_f", (kData / "par.f").string()}}},
              {"lm", {{"order", 3}}},
              {"translators", {{"type", "model1"}, {"em_iterations", 5}}}};
}

std::string write_config(const TempDir& dir, const std::string& name, const json& j) {
  return dir.write(name, j.dump(2)).string();
}

}  // namespace

TEST_CASE("usage errors") {
  TempDir dir("cli");
  CHECK(cli(dir, "--help").code == 0);
  CHECK(cli(dir, "").code == 1);
  CHECK(cli(dir, "frobnicate").code == 1);
  CHECK(cli(dir, "run").code == 1);
  CHECK(cli(dir, "run --config " + (dir / "absent.json").string()).code == 1);
  auto j = base_config(dir, "x");
  j["selection"] = {{"p", 150}};
  const auto r = cli(dir, "run --config " + write_config(dir, "bad.json", j));
  CHECK(r.code == 1);
  CHECK(r.err.find("p must be") != std::string::npos);
}

TEST_CASE("run is reproducible") {
  TempDir dir("cli");
  const auto a = cli(dir, "-q run --config " + write_config(dir, "a.json", base_config(dir, "ra")));
  REQUIRE(a.code == 0);
  const auto b = cli(dir, "-q run --config " + write_config(dir, "b.json", base_config(dir, "rb")));
  REQUIRE(b.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("epoch\tlambda\tdirection\t", 0) == 0);
  for (const char* f : {"epoch_000.jsonl", "epoch_001.jsonl", "epoch_002.jsonl", "reports.tsv", "summary.tsv",
                        "selection_fe.tsv", "quality_ef.tsv"})
    CHECK(btcurator::io::read_file(dir / "ra" / f) == btcurator::io::read_file(dir / "rb" / f));

  const auto d = cli(dir, "diag --run-dir " + (dir / "ra").string());
  CHECK(d.code == 0);
  CHECK(d.out.rfind("# lengths\n", 0) == 0);
  CHECK(cli(dir, "diag --run-dir " + (dir / "none").string()).code == 2);
}

TEST_CASE("data and provider errors") {
  TempDir dir("cli");
  auto j = base_config(dir, "x");
  j["corpora"]["mono_e"] = (dir / "missing.e").string();
  CHECK(cli(dir, "-q run --config " + write_config(dir, "d.json", j)).code == 2);

  dir.write("empty.e", "\n\n");
  j["corpora"]["mono_e"] = (dir / "empty.e").string();
  CHECK(cli(dir, "-q run --config " + write_config(dir, "e.json", j)).code == 2);

  j = base_config(dir, "y");
  j["directions"] = {"fe"};
  j["selection"] = {{"simp", "lm_gen"}};
  j["weighting"] = {{"quality", "none"}};
  j["translators"] = {{"type", "offline"},
                      {"fe", {{"translations", dir.write("t.fe", "0\tle chien\t1.0\n").string()}}},
                      {"ef", {{"translations", dir.write("t.ef", "0\tthe dog\t1.0\n").string()}}}};
  const auto r = cli(dir, "-q run --config " + write_config(dir, "p.json", j));
  CHECK(r.code == 3);
  CHECK(r.err.find("no translation") != std::string::npos);
}

TEST_CASE("score then select") {
  TempDir dir("cli");
  const auto cfg = write_config(dir, "c.json", base_config(dir, "s"));
  const auto s = cli(dir, "-q score --config " + cfg + " --direction fe --out " + (dir / "scores.tsv").string());
  REQUIRE(s.code == 0);
  const auto lines = btcurator::io::split(btcurator::io::read_file(dir / "scores.tsv"), '\n');
  CHECK(lines[0] == "id\traw_repr\traw_simp\tnorm_repr\tnorm_simp\trepr_metric\tsimp_metric");
  CHECK(lines.size() >= 81);

  const auto sel = cli(dir, "select --scores " + (dir / "scores.tsv").string() + " --p 25 --epoch 0");
  REQUIRE(sel.code == 0);
  const auto rows = btcurator::io::split(sel.out, '\n');
  CHECK(rows[0] == "rank\tid\tcombined\tlambda");
  std::size_t n = 0;
  for (const auto& r : rows)
    if (!r.empty()) ++n;
  CHECK(n == 1 + 20);
  CHECK(std::abs(std::stod(rows[1].substr(rows[1].rfind('\t') + 1)) - 0.01) < 1e-12);
  CHECK(cli(dir, "select --scores " + (dir / "scores.tsv").string() + " --c0 1.5").code == 1);
  CHECK(cli(dir, "select --scores " + (dir / "nope.tsv").string()).code == 2);
}

TEST_CASE("weight with a persistent store") {
  TempDir dir("cli");
  const auto cfg = write_config(dir, "c.json", base_config(dir, "w"));
  const auto pairs = dir.write("pairs.tsv", "0\tle chien voit\tthe dog sees\n4\tchat\tprotein cell\n").string();
  const std::string args = "-q weight --config " + cfg + " --direction fe --pairs " + pairs + " --store " + (dir / "store").string();
  const auto first = cli(dir, args);
  REQUIRE(first.code == 0);
  CHECK(first.out.rfind("id\tquality\timp\tweight\n", 0) == 0);
  CHECK(fs::exists(dir / "store" / "quality_fe.tsv"));
  const auto rows = btcurator::io::split(first.out, '\n');
  CHECK(btcurator::io::split(rows[1], '\t')[2] == "1");
  const auto second = cli(dir, args);
  REQUIRE(second.code == 0);
  // same qualities again, so every ratio is exactly one
  CHECK(second.out == first.out);

  dir.write("bad.tsv", "0\tonly two\n");
  CHECK(cli(dir, "-q weight --config " + cfg + " --pairs " + (dir / "bad.tsv").string()).code == 2);
}

TEST_CASE("train-lm") {
  TempDir dir("cli");
  const auto r = cli(dir, "train-lm --input " + (kData / "par.e").string() + " --order 3 --arpa " +
                             (dir / "lm.arpa").string() + " --eval " + (kData / "mono.e").string());
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("perplexity\t", 0) == 0);
  CHECK(btcurator::io::read_file(dir / "lm.arpa").find("\\data\\\nngram 1=") != std::string::npos);
  CHECK(cli(dir, "train-lm --input " + (kData / "par.e").string() + " --order 9 --arpa x").code == 1);
}
