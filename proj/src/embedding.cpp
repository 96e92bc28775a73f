#include "btcurator/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "btcurator/error.hpp"
#include "btcurator/io.hpp"

namespace btcurator {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::uint64_t splitmix_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void add_token_vector(Vector& acc, std::string_view token, std::uint64_t seed) {
  std::uint64_t state = fnv1a(token) ^ (seed * 0xD1B54A32D192ED03ull);
  Vector v(acc.size());
  double norm2 = 0.0;
  for (auto& x : v) {
    x = static_cast<double>(splitmix_next(state) >> 11) * 0x1.0p-52 - 1.0;
    norm2 += x * x;
  }
  const double norm = std::sqrt(norm2);
  if (norm == 0.0) return;
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i] / norm;
}

}  // namespace

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ProviderError("embedding dimension mismatch: " + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

Vector bag_embed(const Tokens& tokens, std::size_t dimension, std::uint64_t seed) {
  Vector acc(dimension, 0.0);
  Tokens sorted = tokens;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& t : sorted) add_token_vector(acc, t, seed);
  double norm2 = 0.0;
  for (double x : acc) norm2 += x * x;
  if (norm2 > 0.0) {
    const double norm = std::sqrt(norm2);
    for (auto& x : acc) x /= norm;
  }
  return acc;
}

BagEmbedder::BagEmbedder(std::size_t dimension, std::uint64_t seed,
                         std::unordered_map<std::string, std::string> token_map)
    : dimension_(dimension), seed_(seed), token_map_(std::move(token_map)) {
  if (dimension_ == 0) throw ConfigError("embedding dimension must be positive");
}

Vector BagEmbedder::embed_tokens(const Tokens& tokens) const {
  if (token_map_.empty()) return bag_embed(tokens, dimension_, seed_);
  Tokens mapped;
  mapped.reserve(tokens.size());
  for (const auto& t : tokens) {
    const auto it = token_map_.find(t);
    mapped.push_back(it == token_map_.end() ? t : it->second);
  }
  return bag_embed(mapped, dimension_, seed_);
}

Vector BagEmbedder::embed(const Sentence& sentence) const { return embed_tokens(sentence.tokens); }

void EmbeddingTable::insert(SentenceId id, Vector v) {
  if (v.size() != dimension_)
    throw DataError("embedding for id " + std::to_string(id) + " has " + std::to_string(v.size()) +
                    " values, expected " + std::to_string(dimension_));
  rows_[id] = std::move(v);
}

const Vector& EmbeddingTable::lookup(SentenceId id) const {
  const auto it = rows_.find(id);
  if (it == rows_.end()) throw ProviderError("missing embedding for sentence " + std::to_string(id));
  return it->second;
}

std::vector<Vector> EmbeddingTable::vectors() const {
  std::vector<SentenceId> ids;
  ids.reserve(rows_.size());
  for (const auto& [id, v] : rows_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  std::vector<Vector> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(rows_.at(id));
  return out;
}

Vector EmbeddingTable::embed(const Sentence& sentence) const { return lookup(sentence.id); }

EmbeddingTable load_embedding_file(const std::filesystem::path& path) {
  const auto lines = io::read_lines(path);
  std::size_t line_no = 0;
  const auto where = [&] { return path.string() + ":" + std::to_string(line_no); };

  std::size_t header = 0;
  while (header < lines.size() && tokenize(lines[header]).empty()) ++header;
  if (header == lines.size()) throw DataError(path.string() + ": missing 'dim N' header");
  line_no = header + 1;
  const auto head = tokenize(lines[header]);
  std::size_t dim = 0;
  try {
    if (head.size() != 2 || head[0] != "dim") throw std::invalid_argument("header");
    std::size_t used = 0;
    dim = std::stoul(head[1], &used);
    if (used != head[1].size() || dim == 0) throw std::invalid_argument("dim");
  } catch (const std::exception&) {
    throw DataError(where() + ": expected header 'dim N'");
  }

  EmbeddingTable table(dim);
  for (std::size_t i = header + 1; i < lines.size(); ++i) {
    line_no = i + 1;
    const auto fields = tokenize(lines[i]);
    if (fields.empty()) continue;
    if (fields.size() != dim + 1)
      throw DataError(where() + ": expected id and " + std::to_string(dim) + " values, got " +
                      std::to_string(fields.size() - 1) + " values");
    SentenceId id = 0;
    Vector v(dim);
    try {
      std::size_t used = 0;
      const auto raw_id = std::stoull(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument("id");
      id = static_cast<SentenceId>(raw_id);
      for (std::size_t k = 0; k < dim; ++k) {
        v[k] = std::stod(fields[k + 1], &used);
        if (used != fields[k + 1].size() || !std::isfinite(v[k])) throw std::invalid_argument("value");
      }
    } catch (const std::exception&) {
      throw DataError(where() + ": unparseable row");
    }
    if (table.contains(id)) throw DataError(where() + ": duplicate id " + std::to_string(id));
    table.insert(id, std::move(v));
  }
  return table;
}

}  // namespace btcurator
