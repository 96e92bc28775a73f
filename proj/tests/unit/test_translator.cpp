#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "btcurator/embedding.hpp"
#include "btcurator/error.hpp"
#include "btcurator/translator.hpp"
#include "tempdir.hpp"

using namespace btcurator;

namespace {

ParallelCorpus bitext(const std::vector<std::string>& f, const std::vector<std::string>& e) {
  return make_parallel(f, e, "f", "e");
}

ParallelCorpus house() { return bitext({"the house", "the"}, {"das haus", "das"}); }

}  // namespace

TEST_CASE("single pair: the only alignment gets probability one") {
  for (int it : {1, 5, 30}) {
    const auto m = train_model1(bitext({"a"}, {"x"}), it);
    CHECK(m.prob("x", "a") == 1.0);
  }
}

TEST_CASE("house corpus converges and decodes") {
  std::vector<double> ll;
  const auto m = train_model1(house(), 20, &ll);
  CHECK(m.prob("das", "the") > 0.9);
  CHECK(translate(m, Tokens{"the", "house"}) == Tokens{"das", "haus"});
  REQUIRE(ll.size() == 21);
  for (std::size_t i = 1; i < ll.size(); ++i) CHECK(ll[i] >= ll[i - 1] - 1e-12);
  CHECK(ll.back() == doctest::Approx(model1_log_likelihood(m, house())).epsilon(1e-12));
}

TEST_CASE("rows sum to one after every sweep") {
  std::mt19937_64 rng(3);
  std::vector<std::string> f, e;
  for (int i = 0; i < 40; ++i) {
    std::string a, b;
    for (int k = 0; k < 1 + static_cast<int>(rng() % 6); ++k) {
      const auto w = rng() % 12;
      a += (k ? " f" : "f") + std::to_string(w);
      b += (k ? " e" : "e") + std::to_string((w * 5) % 12);
    }
    f.push_back(a);
    e.push_back(b);
  }
  const auto par = bitext(f, e);
  std::vector<double> ll;
  for (int it = 1; it <= 12; ++it) CHECK(train_model1(par, it).max_row_deviation() < 1e-9);
  train_model1(par, 12, &ll);
  for (std::size_t i = 1; i < ll.size(); ++i) CHECK(ll[i] >= ll[i - 1] - 1e-9);
}

TEST_CASE("duplicated pairs give the same model") {
  const auto once = train_model1(bitext({"the house", "the"}, {"das haus", "das"}), 10);
  const auto twice = train_model1(bitext({"the house", "the house", "the", "the"},
                                         {"das haus", "das haus", "das", "das"}), 10);
  for (const auto* s : {"the", "house"})
    for (const auto* t : {"das", "haus"}) CHECK(std::abs(once.prob(t, s) - twice.prob(t, s)) < 1e-12);
}

TEST_CASE("training errors") {
  ParallelCorpus empty;
  CHECK_THROWS_AS(train_model1(empty, 3), DataError);
  CHECK_THROWS_AS(train_model1(house(), 0), ConfigError);
}

TEST_CASE("translate: identity, OOV copy-through, length, ties") {
  const auto id = LexiconModel::identity({"a", "b", "c"});
  CHECK(translate(id, Tokens{"a", "c", "b"}) == Tokens{"a", "c", "b"});
  CHECK(translate(id, Tokens{"zz", "yy"}) == Tokens{"zz", "yy"});
  LexiconModel tie;
  tie.set("x", "q", 0.5);
  tie.set("x", "p", 0.5);
  CHECK(tie.best_translation("x") == std::optional<std::string>("p"));
  CHECK(translate(tie, Tokens{"x", "w", "x"}).size() == 3);
}

TEST_CASE("cond_nll formula") {
  const auto id = LexiconModel::identity({"a", "b"});
  CHECK(cond_nll(id, {"a"}, {"a"}) == 0.0);
  CHECK(cond_nll(id, {"a", "b"}, {"a", "b"}) == doctest::Approx(std::log(2.0)));
  LexiconModel empty;
  CHECK(cond_nll(empty, {"a", "b"}, {"c"}) == doctest::Approx(-std::log(1e-10)));

  LexiconModel m;
  m.set("x1", "y1", 0.7);
  m.set("x1", "y2", 0.3);
  m.set("x2", "y1", 0.2);
  m.set("x2", "y2", 0.8);
  const double expected = -0.5 * (std::log(0.45) + std::log(0.55));
  CHECK(cond_nll(m, {"y1", "y2"}, {"x1", "x2"}) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(cond_nll(m, {"y1", "y2"}, {"x1", "x2"}) >= 0);
  CHECK_THROWS_AS(cond_nll(m, {}, {"x1"}), DataError);
  CHECK_THROWS_AS(cond_nll(m, {"y1"}, {}), DataError);
}

TEST_CASE("noisy translation") {
  std::vector<std::string> vocab;
  for (int i = 0; i < 1000; ++i) vocab.push_back("w" + std::to_string(i));
  const auto id = LexiconModel::identity(vocab);
  const Sentence s{42, vocab, ""};

  CHECK(noisy_translate(id, s, 0.0, 9) == translate(id, s.tokens));

  const auto full = noisy_translate(id, s, 1.0, 9);
  CHECK(full == noisy_translate(id, s, 1.0, 9));
  std::size_t kept = 0;
  for (std::size_t i = 0; i < full.size(); ++i) kept += full[i] == s.tokens[i];
  CHECK(kept < 10);

  const auto half = noisy_translate(id, s, 0.5, 9);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < half.size(); ++i) changed += half[i] != s.tokens[i];
  CHECK(changed >= 450);
  CHECK(changed <= 550);

  // stream depends on (seed, id) only
  Sentence other = s;
  other.id = 43;
  CHECK(noisy_translate(id, other, 0.5, 9) != half);
  CHECK(noisy_translate(id, s, 0.5, 10) != half);
  CHECK_THROWS_AS(noisy_translate(id, s, 1.5, 9), ConfigError);

  const LexiconTranslator t(id, 0.5, 9);
  CHECK(t.translate(s) == half);
}

TEST_CASE("bag embeddings") {
  const Tokens s{"the", "cat", "sat", "the"};
  const auto a = bag_embed(s, 32, 1);
  CHECK(a.size() == 32);
  CHECK(a == bag_embed(s, 32, 1));
  CHECK(a == bag_embed({"sat", "the", "the", "cat"}, 32, 1));
  CHECK(cosine(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a != bag_embed(s, 32, 2));
  double n2 = 0;
  for (double x : a) n2 += x * x;
  CHECK(n2 == doctest::Approx(1.0));

  const BagEmbedder plain(16, 4);
  const BagEmbedder mapped(16, 4, {{"katze", "cat"}});
  CHECK(mapped.embed_tokens({"katze"}) == plain.embed_tokens({"cat"}));
  CHECK(plain.dimension() == 16);
  CHECK_THROWS_AS(BagEmbedder(0, 1), ConfigError);
  CHECK_THROWS_AS(cosine(bag_embed(s, 4, 1), bag_embed(s, 5, 1)), ProviderError);
  CHECK(cosine(Vector{0, 0}, Vector{1, 0}) == 0.0);
}

TEST_CASE("embedding files") {
  TempDir dir;
  const auto good = dir.write("e.txt", "dim 4\n0 1 0 0 0\n1 0 1 0 0\n2 0.5 0.5 0.5 0.5\n");
  const auto table = load_embedding_file(good);
  CHECK(table.dimension() == 4);
  CHECK(table.size() == 3);
  for (SentenceId id : {0u, 1u, 2u}) CHECK(table.contains(id));
  CHECK(table.embed(Sentence{2, {"x"}, ""}) == Vector{0.5, 0.5, 0.5, 0.5});
  CHECK_THROWS_WITH_AS(table.lookup(7), doctest::Contains("missing embedding"), ProviderError);
  CHECK(table.vectors().size() == 3);

  CHECK_THROWS_AS(load_embedding_file(dir.write("s.txt", "dim 4\n0 1 0 0 0\n1 1 1 1\n")), DataError);
  CHECK_THROWS_AS(load_embedding_file(dir.write("p.txt", "dim 2\n0 1 x\n")), DataError);
  CHECK_THROWS_AS(load_embedding_file(dir.write("h.txt", "0 1 2\n")), DataError);
  CHECK_THROWS_AS(load_embedding_file(dir.write("d.txt", "dim 1\n0 1\n0 2\n")), DataError);
}

TEST_CASE("lexicon save and load round trip") {
  TempDir dir;
  const auto m = train_model1(house(), 7);
  m.save(dir / "lex.tsv");
  CHECK(LexiconModel::load(dir / "lex.tsv") == m);
  CHECK_THROWS_AS(LexiconModel::load(dir.write("bad.tsv", "a\tb\n")), DataError);
  CHECK_THROWS_AS(LexiconModel::load(dir.write("bad2.tsv", "a\tb\t1.5\n")), DataError);
}

TEST_CASE("identity translator") {
  const IdentityTranslator t;
  const Sentence s{0, {"a", "b"}, ""};
  CHECK(t.translate(s) == s.tokens);
  CHECK(t.cond_nll({"a"}, {"a"}) == 0.0);
  CHECK(t.cond_nll({"a", "b"}, {"a", "b"}) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("offline translator") {
  TempDir dir;
  const Corpus src = Corpus::from_lines({"ein haus", "das auto"}, "f");
  const auto file = dir.write("t.tsv", "0\ta house\t0.5\n1\tthe car\t0.25\n");
  OfflineTranslator t(file, &src);
  CHECK(t.translate(src[1]) == Tokens{"the", "car"});
  CHECK(t.cond_nll({"a", "house"}, {"ein", "haus"}) == 0.5);
  CHECK_THROWS_AS(t.translate(Sentence{5, {"x"}, ""}), ProviderError);
  CHECK_THROWS_AS(t.cond_nll({"x"}, {"y"}), ProviderError);
  t.add_scores(dir.write("s.tsv", "y\tx\t1.5\n"));
  CHECK(t.cond_nll({"x"}, {"y"}) == 1.5);
  CHECK_THROWS_AS(OfflineTranslator(dir.write("b.tsv", "zero\tx\t1\n"), nullptr), DataError);
  CHECK_THROWS_AS(OfflineTranslator(dir.write("n.tsv", "0\tx\t-1\n"), nullptr), DataError);
}

TEST_CASE("direction names") {
  CHECK(to_string(Direction::kFE) == "fe");
  CHECK(parse_direction("ef") == Direction::kEF);
  CHECK(reverse(Direction::kFE) == Direction::kEF);
  CHECK_THROWS_AS(parse_direction("xx"), ConfigError);
}
