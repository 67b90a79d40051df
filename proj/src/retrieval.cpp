#include "rapt/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_set>

#include "rapt/error.hpp"

namespace rapt {

EmbeddingVector unit_normalized(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ArgumentError("vector has zero or non-finite norm");
  }
  EmbeddingVector out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return out;
}

RetrievalIndex RetrievalIndex::build(std::vector<std::pair<ParaphrasePair, EmbeddingVector>> records) {
  RetrievalIndex index;
  std::unordered_set<std::string> seen;
  index.records_.reserve(records.size());
  for (auto& [pair, vec] : records) {
    if (index.records_.empty()) {
      if (vec.empty()) throw DataError("record '" + pair.id + "': empty embedding");
      index.dim_ = vec.size();
    } else if (vec.size() != index.dim_) {
      throw DataError("record '" + pair.id + "': dimension " + std::to_string(vec.size()) +
                      " does not match index dimension " + std::to_string(index.dim_));
    }
    if (!seen.insert(pair.id).second) throw DataError("duplicate id '" + pair.id + "'");
    EmbeddingVector unit;
    try {
      unit = unit_normalized(vec);
    } catch (const ArgumentError&) {
      throw DataError("record '" + pair.id + "': zero-norm embedding");
    }
    std::string id = pair.id;
    index.records_.push_back({std::move(id), std::move(pair), std::move(unit)});
  }
  return index;
}

std::vector<double> RetrievalIndex::unit_query(std::span<const double> query) const {
  if (query.size() != dim_) {
    throw ArgumentError("query dimension " + std::to_string(query.size()) +
                        " does not match index dimension " + std::to_string(dim_));
  }
  return unit_normalized(query);
}

double RetrievalIndex::dot(std::span<const double> unit, std::size_t position) const {
  const auto& v = records_[position].vector;
  return std::inner_product(v.begin(), v.end(), unit.begin(), 0.0);
}

namespace {

bool by_similarity(const Neighbor& a, const Neighbor& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.position < b.position;
}

}  // namespace

std::vector<Neighbor> RetrievalIndex::query_knn(std::span<const double> query, std::size_t k,
                                                const std::set<std::string>& exclude) const {
  if (k == 0) throw ArgumentError("k must be at least 1");
  if (records_.empty()) return {};
  const auto unit = unit_query(query);

  std::vector<Neighbor> hits;
  hits.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (exclude.contains(records_[i].id)) continue;
    hits.push_back({&records_[i], dot(unit, i), i});
  }
  const std::size_t take = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(take), hits.end(),
                    by_similarity);
  hits.resize(take);
  return hits;
}

std::vector<Neighbor> RetrievalIndex::query_random(std::span<const double> query, std::size_t k,
                                                   const std::set<std::string>& exclude,
                                                   std::uint64_t seed) const {
  if (k == 0) throw ArgumentError("k must be at least 1");
  if (records_.empty()) return {};
  const auto unit = unit_query(query);

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!exclude.contains(records_[i].id)) pool.push_back(i);
  }
  const std::size_t take = std::min(k, pool.size());

  // Partial Fisher-Yates with an explicit bounded draw, so the sample does
  // not depend on the standard library's distribution implementation.
  std::mt19937_64 rng(seed);
  auto bounded = [&rng](std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = rng();
    } while (x >= limit);
    return x % n;
  };
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }

  std::vector<Neighbor> hits;
  hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) hits.push_back({&records_[pool[i]], dot(unit, pool[i]), pool[i]});
  std::sort(hits.begin(), hits.end(), by_similarity);
  return hits;
}

}  // namespace rapt
