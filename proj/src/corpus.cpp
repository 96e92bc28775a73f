#include "btcurator/corpus.hpp"

#include <unordered_set>

#include "btcurator/error.hpp"
#include "btcurator/io.hpp"
#include "btcurator/log.hpp"

namespace btcurator {

namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

// Byte length of a multi-byte UTF-8 whitespace sequence starting at pos, or 0.
std::size_t utf8_space_length(std::string_view s, std::size_t pos) {
  const auto byte = [&](std::size_t k) -> unsigned char {
    return pos + k < s.size() ? static_cast<unsigned char>(s[pos + k]) : 0;
  };
  const unsigned char b0 = byte(0);
  if (b0 == 0xC2) {
    const unsigned char b1 = byte(1);
    if (b1 == 0x85 || b1 == 0xA0) return 2;  // NEL, NBSP
    return 0;
  }
  if (b0 == 0xE1 && byte(1) == 0x9A && byte(2) == 0x80) return 3;  // U+1680
  if (b0 == 0xE2) {
    const unsigned char b1 = byte(1), b2 = byte(2);
    if (b1 == 0x80 && ((b2 >= 0x80 && b2 <= 0x8A) || b2 == 0xA8 || b2 == 0xA9 || b2 == 0xAF))
      return 3;  // U+2000..U+200A, U+2028, U+2029, U+202F
    if (b1 == 0x81 && b2 == 0x9F) return 3;  // U+205F
    return 0;
  }
  if (b0 == 0xE3 && byte(1) == 0x80 && byte(2) == 0x80) return 3;  // U+3000
  return 0;
}

}  // namespace

Tokens tokenize(std::string_view raw, const TokenizerConfig& config) {
  Tokens tokens;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };

  if (config.mode == TokenizerConfig::Mode::kPassThrough) {
    for (char c : raw) {
      if (c == ' ') flush();
      else current.push_back(c);
    }
    flush();
    return tokens;
  }

  std::size_t i = 0;
  while (i < raw.size()) {
    const auto c = static_cast<unsigned char>(raw[i]);
    if (is_ascii_space(c)) {
      flush();
      ++i;
      continue;
    }
    if (c >= 0x80) {
      if (const auto len = utf8_space_length(raw, i)) {
        flush();
        i += len;
        continue;
      }
    }
    current.push_back(config.lowercase && c >= 'A' && c <= 'Z' ? static_cast<char>(c + 32)
                                                               : static_cast<char>(c));
    ++i;
  }
  flush();
  return tokens;
}

std::string join(const Tokens& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

const Sentence& Corpus::at(SentenceId id) const {
  if (id >= sentences_.size())
    throw DataError("sentence id " + std::to_string(id) + " out of range for corpus '" +
                    language_ + "'");
  return sentences_[id];
}

void Corpus::push(Tokens tokens, std::string raw) {
  Sentence s;
  s.id = static_cast<SentenceId>(sentences_.size());
  s.tokens = std::move(tokens);
  s.raw = std::move(raw);
  sentences_.push_back(std::move(s));
}

Corpus Corpus::from_lines(const std::vector<std::string>& lines, std::string language,
                          const LoadOptions& options) {
  Corpus corpus(std::move(language));
  std::unordered_set<std::string> seen;
  for (const auto& line : lines) {
    auto tokens = tokenize(line, options.tokenizer);
    if (tokens.empty()) {
      ++corpus.skipped_blank_;
      continue;
    }
    if (options.dedup && !seen.insert(line).second) {
      ++corpus.skipped_duplicates_;
      continue;
    }
    corpus.push(std::move(tokens), line);
  }
  if (corpus.empty()) throw DataError("zero usable lines");
  return corpus;
}

Corpus Corpus::from_tokens(const std::vector<Tokens>& sentences, std::string language) {
  Corpus corpus(std::move(language));
  for (const auto& tokens : sentences) {
    if (tokens.empty()) {
      ++corpus.skipped_blank_;
      continue;
    }
    corpus.push(tokens, join(tokens));
  }
  return corpus;
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences_) n += s.tokens.size();
  return n;
}

std::string Corpus::serialize_raw() const {
  std::string out;
  for (const auto& s : sentences_) {
    out += s.raw;
    out += '\n';
  }
  return out;
}

Corpus load_corpus(const std::filesystem::path& path, std::string language,
                   const LoadOptions& options) {
  const auto lines = io::read_lines(path);
  Corpus corpus = [&] {
    try {
      return Corpus::from_lines(lines, std::move(language), options);
    } catch (const DataError& e) {
      throw DataError(path.string() + ": " + e.what());
    }
  }();
  if (corpus.skipped_blank() > 0)
    log::warn(path.string() + ": skipped " + std::to_string(corpus.skipped_blank()) +
              " blank line(s)");
  return corpus;
}

ParallelCorpus make_parallel(const std::vector<std::string>& source_lines,
                             const std::vector<std::string>& target_lines,
                             std::string source_language, std::string target_language,
                             const LoadOptions& options) {
  if (source_lines.size() != target_lines.size())
    throw DataError("parallel sides differ in line count: " +
                    std::to_string(source_lines.size()) + " vs " +
                    std::to_string(target_lines.size()));
  std::vector<std::string> src, tgt;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < source_lines.size(); ++i) {
    if (tokenize(source_lines[i], options.tokenizer).empty() ||
        tokenize(target_lines[i], options.tokenizer).empty())
      continue;
    if (options.dedup && !seen.insert(source_lines[i] + '\t' + target_lines[i]).second)
      continue;
    src.push_back(source_lines[i]);
    tgt.push_back(target_lines[i]);
  }
  LoadOptions per_side = options;
  per_side.dedup = false;
  ParallelCorpus out;
  out.source = Corpus::from_lines(src, std::move(source_language), per_side);
  out.target = Corpus::from_lines(tgt, std::move(target_language), per_side);
  return out;
}

ParallelCorpus load_parallel(const std::filesystem::path& source_path,
                             const std::filesystem::path& target_path,
                             std::string source_language, std::string target_language,
                             const LoadOptions& options) {
  return make_parallel(io::read_lines(source_path), io::read_lines(target_path),
                       std::move(source_language), std::move(target_language), options);
}

}  // namespace btcurator
