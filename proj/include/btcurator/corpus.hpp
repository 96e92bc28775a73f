#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace btcurator {

using SentenceId = std::uint32_t;
using Tokens = std::vector<std::string>;

struct TokenizerConfig {
  enum class Mode {
    kWhitespace,   // split on any Unicode whitespace
    kPassThrough,  // input is already tokenized; split on ASCII space only
  };
  Mode mode = Mode::kWhitespace;
  // ASCII case folding; ignored in pass-through mode.
  bool lowercase = false;
};

/// Returns the token sequence for one line. An empty result means the line
/// is blank.
Tokens tokenize(std::string_view raw, const TokenizerConfig& config = {});

std::string join(const Tokens& tokens, std::string_view sep = " ");

struct Sentence {
  SentenceId id = 0;
  Tokens tokens;
  std::string raw;
};

struct LoadOptions {
  TokenizerConfig tokenizer;
  // Drop lines whose raw text exactly matches an earlier kept line.
  bool dedup = false;
};

/// A monolingual corpus. Sentence ids are dense positions [0, size()).
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::string language) : language_(std::move(language)) {}

  /// Builds a corpus from raw lines; blank lines are skipped and counted.
  /// Throws DataError when no usable line remains.
  static Corpus from_lines(const std::vector<std::string>& lines, std::string language,
                           const LoadOptions& options = {});

  /// Builds a corpus from pre-tokenized sentences (raw = tokens joined by
  /// single spaces). Empty token lists are skipped.
  static Corpus from_tokens(const std::vector<Tokens>& sentences, std::string language);

  const std::string& language() const { return language_; }
  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }
  const Sentence& operator[](std::size_t i) const { return sentences_[i]; }
  const Sentence& at(SentenceId id) const;
  auto begin() const { return sentences_.begin(); }
  auto end() const { return sentences_.end(); }

  std::size_t skipped_blank() const { return skipped_blank_; }
  std::size_t skipped_duplicates() const { return skipped_duplicates_; }
  std::size_t token_count() const;

  /// Raw lines joined with '\n', each line newline-terminated.
  std::string serialize_raw() const;

 private:
  void push(Tokens tokens, std::string raw);

  std::string language_;
  std::vector<Sentence> sentences_;
  std::size_t skipped_blank_ = 0;
  std::size_t skipped_duplicates_ = 0;
};

Corpus load_corpus(const std::filesystem::path& path, std::string language,
                   const LoadOptions& options = {});

/// Position-aligned bitext. A line pair is dropped when either side is blank,
/// keeping ids aligned on both sides.
struct ParallelCorpus {
  Corpus source;
  Corpus target;

  std::size_t size() const { return source.size(); }
};

ParallelCorpus make_parallel(const std::vector<std::string>& source_lines,
                             const std::vector<std::string>& target_lines,
                             std::string source_language, std::string target_language,
                             const LoadOptions& options = {});

ParallelCorpus load_parallel(const std::filesystem::path& source_path,
                             const std::filesystem::path& target_path,
                             std::string source_language, std::string target_language,
                             const LoadOptions& options = {});

}  // namespace btcurator
