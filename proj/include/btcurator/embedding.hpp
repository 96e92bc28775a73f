#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "btcurator/corpus.hpp"

namespace btcurator {

using Vector = std::vector<double>;

/// Cosine similarity; 0 when either vector has zero norm. Throws
/// ProviderError on a dimension mismatch.
double cosine(std::span<const double> a, std::span<const double> b);

class SentenceEmbedder {
 public:
  virtual ~SentenceEmbedder() = default;
  virtual std::size_t dimension() const = 0;
  virtual Vector embed(const Sentence& sentence) const = 0;
};

/// Sum of per-token pseudo-random unit vectors, L2-normalized. A token's
/// vector depends only on (token, dimension, seed), and tokens are summed in
/// sorted order so permutations embed identically.
Vector bag_embed(const Tokens& tokens, std::size_t dimension, std::uint64_t seed);

/// bag_embed with an optional token map applied first. Mapping one
/// language's tokens onto the other's puts both sides in a shared space.
class BagEmbedder final : public SentenceEmbedder {
 public:
  BagEmbedder(std::size_t dimension, std::uint64_t seed,
              std::unordered_map<std::string, std::string> token_map = {});

  std::size_t dimension() const override { return dimension_; }
  Vector embed(const Sentence& sentence) const override;
  Vector embed_tokens(const Tokens& tokens) const;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
  std::unordered_map<std::string, std::string> token_map_;
};

/// Precomputed vectors keyed by sentence id.
///
/// File format: a header line "dim N", then one "<id> v1 ... vN" line per
/// sentence.
class EmbeddingTable final : public SentenceEmbedder {
 public:
  explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

  void insert(SentenceId id, Vector v);
  bool contains(SentenceId id) const { return rows_.count(id) > 0; }
  std::size_t size() const { return rows_.size(); }

  std::size_t dimension() const override { return dimension_; }
  /// Throws ProviderError("missing embedding ...") for unknown ids.
  Vector embed(const Sentence& sentence) const override;
  const Vector& lookup(SentenceId id) const;
  /// All rows ordered by id.
  std::vector<Vector> vectors() const;

 private:
  std::size_t dimension_;
  std::unordered_map<SentenceId, Vector> rows_;
};

EmbeddingTable load_embedding_file(const std::filesystem::path& path);

}  // namespace btcurator
