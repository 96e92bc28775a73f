#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "btcurator/error.hpp"
#include "btcurator/log.hpp"
#include "btcurator/weighting.hpp"
#include "tempdir.hpp"

using namespace btcurator;

namespace {

// fixed per-call nll, for agree tests
class FixedNll final : public Translator {
 public:
  explicit FixedNll(double v) : v_(v) {}
  Tokens translate(const Sentence& s) const override { return s.tokens; }
  double cond_nll(const Tokens&, const Tokens&) const override { return v_; }

 private:
  double v_;
};

}  // namespace

TEST_CASE("enc weight") {
  EmbeddingTable a(2), b(2);
  a.insert(0, {1.0, 0.0});
  b.insert(0, {2.0, 0.0});
  b.insert(1, {0.0, 1.0});
  b.insert(2, {0.5, std::sqrt(3.0) / 2});
  b.insert(3, {-1.0, 0.1});
  const Sentence x{0, {"x"}, ""};
  CHECK(enc_weight(x, Sentence{0, {"y"}, ""}, a, b) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(enc_weight(x, Sentence{1, {"y"}, ""}, a, b) == 0.0);
  CHECK(enc_weight(x, Sentence{2, {"y"}, ""}, a, b) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(enc_weight(x, Sentence{3, {"y"}, ""}, a, b) == 0.0);

  const BagEmbedder bag(16, 3);
  CHECK(enc_weight(Sentence{0, {"p", "q"}, ""}, Sentence{9, {"q", "p"}, ""}, bag, bag) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(enc_weight(Sentence{0, {}, ""}, x, bag, bag), DataError);
  CHECK_THROWS_AS(enc_weight(x, x, a, bag), ProviderError);
}

TEST_CASE("agree weight") {
  CHECK(agree_weight({"a"}, {"b"}, FixedNll(2.5), FixedNll(2.5)) == 1.0);
  CHECK(agree_weight({"a"}, {"b"}, FixedNll(1.0), FixedNll(1.0 + std::log(2.0))) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(agree_weight({"a"}, {"b"}, FixedNll(1.0 + std::log(2.0)), FixedNll(1.0)) == doctest::Approx(0.5).epsilon(1e-15));

  LexiconModel fwd, bwd;
  fwd.set("x", "a", 0.7);
  fwd.set("x", "b", 0.3);
  fwd.set("w", "a", 0.2);
  fwd.set("w", "b", 0.8);
  bwd.set("a", "x", 0.6);
  bwd.set("a", "w", 0.4);
  bwd.set("b", "x", 0.1);
  bwd.set("b", "w", 0.9);
  const double h_fwd = -0.5 * (std::log(0.45) + std::log(0.55));
  const double h_bwd = -0.5 * (std::log(0.35) + std::log(0.65));
  const double want = std::exp(-std::abs(h_fwd - h_bwd));
  const double got = agree_weight({"x", "w"}, {"a", "b"}, LexiconTranslator(fwd), LexiconTranslator(bwd));
  CHECK(std::abs(got - want) < 1e-12);
  CHECK(got > 0.0);
  CHECK(got < 1.0);
}

TEST_CASE("improvement factor") {
  log::set_level(log::Level::kQuiet);
  const WeightConfig c;
  CHECK(imp_factor(0.4, 0.4, c) == 1.0);
  CHECK(imp_factor(0.5, 0.1, c) == 2.0);
  CHECK(imp_factor(0.01, 0.1, c) == 0.5);
  CHECK(imp_factor(0.6, 0.5, c) == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(imp_factor(0.3, std::nullopt, c) == 1.0);
  const auto before = log::warning_count();
  CHECK(imp_factor(0.3, 0.0, c) == 1.0);
  CHECK(log::warning_count() == before + 1);
}

TEST_CASE("final weight composition") {
  WeightConfig c;
  CHECK(final_weight(0.8, 1.0, c) == 0.8);
  CHECK(final_weight(0.5, 2.0, c) == 1.0);
  CHECK(final_weight(0.0, 2.0, c) == c.min_weight);
  c.improvement = false;
  CHECK(final_weight(0.3, 2.0, c) == 0.3);
  c.improvement = true;
  c.composition = Composition::kImpOnly;
  CHECK(final_weight(0.3, 2.0, c) == 2.0);
}

TEST_CASE("weight config validation and names") {
  WeightConfig c;
  CHECK_NOTHROW(c.validate());
  c.w_low = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = WeightConfig{};
  c.w_high = 0.9;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = WeightConfig{};
  c.min_weight = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_quality_metric("agree") == QualityMetric::kAgree);
  CHECK(to_string(QualityMetric::kEnc) == "enc");
  CHECK_THROWS_AS(parse_quality_metric("bleu"), ConfigError);
  CHECK(parse_composition("imp_only") == Composition::kImpOnly);
  CHECK_THROWS_AS(parse_composition("sum"), ConfigError);
}

TEST_CASE("weights stay in bounds on random pairs") {
  std::mt19937_64 rng(31);
  std::vector<std::string> vocab;
  for (int i = 0; i < 40; ++i) vocab.push_back("v" + std::to_string(i));
  LexiconModel fwd, bwd;
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 40; j += 3) {
      fwd.set(vocab[i], vocab[(i + j) % 40], u(rng));
      bwd.set(vocab[i], vocab[(i * 7 + j) % 40], u(rng));
    }
  const LexiconTranslator tf(fwd), tb(bwd);
  const BagEmbedder e1(24, 1), e2(24, 2);
  const WeightConfig c;
  auto sentence = [&] {
    Tokens t(1 + rng() % 10);
    for (auto& w : t) w = vocab[rng() % vocab.size()];
    return t;
  };
  for (int k = 0; k < 2000; ++k) {
    const auto x = sentence(), y = sentence();
    const double enc = enc_weight(Sentence{0, x, ""}, Sentence{0, y, ""}, e1, e2);
    CHECK((enc >= 0.0 && enc <= 1.0));
    const double ag = agree_weight(x, y, tf, tb);
    CHECK((ag > 0.0 && ag <= 1.0));
    const double imp = imp_factor(u(rng), u(rng) + 1e-3, c);
    CHECK((imp >= 0.5 && imp <= 2.0));
  }
}

TEST_CASE("quality store") {
  log::set_level(log::Level::kQuiet);
  QualityStore store;
  const WeightConfig c;
  CHECK_FALSE(store.get(Direction::kFE, 3).has_value());
  CHECK(observe_quality(store, Direction::kFE, 3, 0.2, c) == 1.0);
  CHECK(observe_quality(store, Direction::kFE, 3, 0.4, c) == 2.0);
  CHECK(store.get(Direction::kFE, 3) == 0.4);
  CHECK_FALSE(store.get(Direction::kEF, 3).has_value());
  CHECK(observe_quality(store, Direction::kEF, 3, 0.1, c) == 1.0);
  store.update(Direction::kFE, 3, 0.3);
  CHECK(store.size(Direction::kFE) == 1);
  CHECK(store.get(Direction::kFE, 3) == 0.3);

  store.update(Direction::kFE, 10, 1.0 / 3.0);
  store.update(Direction::kEF, 7, std::exp(-1.2345678901234567));
  TempDir dir("store");
  store.save(dir.path());
  const auto loaded = QualityStore::load(dir.path());
  CHECK(loaded == store);
  CHECK(loaded.serialize(Direction::kFE) == store.serialize(Direction::kFE));
  for (auto d : {Direction::kFE, Direction::kEF})
    for (SentenceId id : {3u, 7u, 10u})
      CHECK(imp_factor(0.25, loaded.get(d, id), c) == imp_factor(0.25, store.get(d, id), c));

  QualityStore other;
  CHECK_THROWS_AS(other.deserialize(Direction::kFE, "1\tx\n"), DataError);
  CHECK_THROWS_AS(other.deserialize(Direction::kFE, "1 0.5\n"), DataError);
  CHECK(QualityStore::load(dir / "missing").size(Direction::kFE) == 0);
}
