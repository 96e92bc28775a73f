#include "synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <stdexcept>

namespace synth {

namespace {

struct Concept {
  std::vector<std::string> e, f;
};

struct Lexicon {
  std::vector<Concept> general;  // general-only and shared, alternating
  std::vector<Concept> domain;   // domain-only and shared, alternating
};

Lexicon build(const Params& p) {
  Lexicon lex;
  std::vector<Concept> shared;
  for (std::size_t i = 0; i < p.shared; ++i)
    shared.push_back({{"s" + std::to_string(i)}, {"S" + std::to_string(i)}});
  for (std::size_t i = 0; i < p.general_only; ++i)
    lex.general.push_back({{"g" + std::to_string(i)}, {"G" + std::to_string(i)}});
  for (std::size_t i = 0; i < p.domain_only; ++i) {
    const std::string k = std::to_string(i);
    if (i % 2 == 0)
      lex.domain.push_back({{"d" + k + "a", "d" + k + "b"}, {"D" + k}});
    else
      lex.domain.push_back({{"d" + k}, {"D" + k + "a", "D" + k + "b"}});
  }
  // Interleave so shared and domain-specific words are both frequent.
  auto interleave = [&](std::vector<Concept>& own) {
    std::vector<Concept> out;
    for (std::size_t i = 0; i < std::max(own.size(), shared.size()); ++i) {
      if (i < own.size()) out.push_back(own[i]);
      if (i < shared.size()) out.push_back(shared[i]);
    }
    own = std::move(out);
  };
  interleave(lex.general);
  interleave(lex.domain);
  return lex;
}

class Generator {
 public:
  Generator(const Params& p, const Lexicon& lex, std::uint64_t seed)
      : p_(p), lex_(lex), rng_(seed), general_(zipf(lex.general.size())), domain_(zipf(lex.domain.size())) {}

  std::vector<const Concept*> sentence(double mix) {
    std::uniform_int_distribution<std::size_t> len(p_.min_len, p_.max_len);
    std::bernoulli_distribution from_domain(mix);
    std::vector<const Concept*> out(len(rng_));
    for (auto& c : out) c = from_domain(rng_) ? &lex_.domain[domain_(rng_)] : &lex_.general[general_(rng_)];
    return out;
  }

  std::string realize(const std::vector<const Concept*>& s, bool e) {
    std::string line;
    for (const auto* c : s) {
      const auto& forms = e ? c->e : c->f;
      std::uniform_int_distribution<std::size_t> pick(0, forms.size() - 1);
      if (!line.empty()) line += ' ';
      line += forms[pick(rng_)];
    }
    return line;
  }

  double uniform(double hi) { return std::uniform_real_distribution<double>(0.0, hi)(rng_); }

 private:
  static std::discrete_distribution<std::size_t> zipf(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t r = 0; r < n; ++r) w[r] = 1.0 / static_cast<double>(r + 2);
    return {w.begin(), w.end()};
  }

  const Params& p_;
  const Lexicon& lex_;
  std::mt19937_64 rng_;
  std::discrete_distribution<std::size_t> general_, domain_;
};

}  // namespace

Data generate(const Params& params) {
  const Lexicon lex = build(params);
  Generator gen(params, lex, params.seed);
  Data data;
  for (std::size_t i = 0; i < params.mono; ++i) {
    const double m = gen.uniform(1.0);
    data.mono_e.push_back(gen.realize(gen.sentence(m), true));
    data.mono_e_mix.push_back(m);
  }
  for (std::size_t i = 0; i < params.mono; ++i) {
    const double m = gen.uniform(1.0);
    data.mono_f.push_back(gen.realize(gen.sentence(m), false));
    data.mono_f_mix.push_back(m);
  }
  for (std::size_t i = 0; i < params.in_domain; ++i) {
    const auto s = gen.sentence(1.0);
    data.in_domain_e.push_back(gen.realize(s, true));
    data.in_domain_f.push_back(gen.realize(s, false));
  }
  for (std::size_t i = 0; i < params.parallel; ++i) {
    const auto s = gen.sentence(gen.uniform(params.parallel_mix));
    data.parallel_e.push_back(gen.realize(s, true));
    data.parallel_f.push_back(gen.realize(s, false));
  }
  return data;
}

void write(const Data& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto dump = [&](const std::string& name, const std::vector<std::string>& lines) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    for (const auto& l : lines) out << l << '\n';
  };
  dump("mono.e", data.mono_e);
  dump("mono.f", data.mono_f);
  dump("in.e", data.in_domain_e);
  dump("in.f", data.in_domain_f);
  dump("par.e", data.parallel_e);
  dump("par.f", data.parallel_f);
}

}  // namespace synth
