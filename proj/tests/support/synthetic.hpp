#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace synth {

// Two toy domains over shared "concepts". Each concept has surface forms in
// E and F. General and shared concepts have one form per language; half of
// the in-domain-only concepts have two E forms for one F form and the other
// half the reverse, so word-by-word round trips lose information on
// in-domain text in both directions.
struct Params {
  std::size_t shared = 80;
  std::size_t general_only = 60;
  std::size_t domain_only = 60;
  std::size_t mono = 5000;
  std::size_t in_domain = 500;
  std::size_t parallel = 1000;
  std::size_t min_len = 6;
  std::size_t max_len = 14;
  double parallel_mix = 0.3;  // upper bound of the in-domain share in bitext
  std::uint64_t seed = 7;
};

struct Data {
  std::vector<std::string> mono_e, mono_f;
  std::vector<double> mono_e_mix, mono_f_mix;  // in-domain share per sentence
  std::vector<std::string> in_domain_e, in_domain_f;
  std::vector<std::string> parallel_e, parallel_f;
};

Data generate(const Params& params);

// Writes the corpora as <dir>/{mono,in,par}.{e,f}.
void write(const Data& data, const std::filesystem::path& dir);

}  // namespace synth
