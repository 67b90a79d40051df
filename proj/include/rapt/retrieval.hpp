#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "rapt/types.hpp"

namespace rapt {

using EmbeddingVector = std::vector<double>;

struct ExampleRecord {
  std::string id;
  ParaphrasePair pair;
  EmbeddingVector vector;  // unit norm once stored in an index
};

struct Neighbor {
  const ExampleRecord* record;
  double similarity;
  std::size_t position;  // insertion order within the index
};

/// Exact cosine kNN over unit-normalized vectors. Immutable after build().
class RetrievalIndex {
 public:
  /// Throws DataError naming the offending id on a dimension mismatch,
  /// duplicate id or zero-norm vector.
  static RetrievalIndex build(std::vector<std::pair<ParaphrasePair, EmbeddingVector>> records);

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  std::size_t dim() const noexcept { return dim_; }
  const ExampleRecord& at(std::size_t position) const { return records_.at(position); }
  std::span<const ExampleRecord> records() const noexcept { return records_; }

  /// Top-k by descending cosine; equal scores keep insertion order.
  std::vector<Neighbor> query_knn(std::span<const double> query, std::size_t k,
                                  const std::set<std::string>& exclude = {}) const;

  /// Uniform sample of k records without replacement, deterministic in
  /// `seed`. Results are sorted like query_knn so prompt ordering stays
  /// well defined.
  std::vector<Neighbor> query_random(std::span<const double> query, std::size_t k,
                                     const std::set<std::string>& exclude, std::uint64_t seed) const;

 private:
  RetrievalIndex() = default;
  std::vector<double> unit_query(std::span<const double> query) const;
  double dot(std::span<const double> unit, std::size_t position) const;

  std::vector<ExampleRecord> records_;
  std::size_t dim_ = 0;
};

inline constexpr std::size_t kDefaultNeighbors = 2;

/// Returns `v / |v|`; throws ArgumentError on a zero or non-finite norm.
EmbeddingVector unit_normalized(std::span<const double> v);

// Embedding files ----------------------------------------------------------

struct EmbeddingEntry {
  std::string id;
  EmbeddingVector vector;
};

/// JSONL, one {"id": str, "vector": [float...]} per line.
std::vector<EmbeddingEntry> load_embeddings_jsonl(const std::filesystem::path& path);
void save_embeddings_jsonl(const std::filesystem::path& path, std::span<const EmbeddingEntry> entries);

/// Binary "RAPTEMB1" file (u32 count, u32 dim, count*dim f32, little
/// endian) with ids in a JSONL sidecar ({"id": str} per line).
std::vector<EmbeddingEntry> load_embeddings_binary(const std::filesystem::path& path,
                                                   const std::filesystem::path& ids_path);
void save_embeddings_binary(const std::filesystem::path& path, const std::filesystem::path& ids_path,
                            std::span<const EmbeddingEntry> entries);

/// Sidecar path used when none is given: "<path>.ids.jsonl".
std::filesystem::path default_ids_path(const std::filesystem::path& path);

}  // namespace rapt
