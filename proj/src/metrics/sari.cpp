// SARI (Xu et al., 2016) following the released scorer: KEEP and ADD are F1
// scores, DELETE is precision only. Source and prediction n-gram counts are
// replicated once per reference before intersecting with the pooled
// reference counts.

#include <algorithm>

#include "rapt/error.hpp"
#include "rapt/metrics.hpp"

namespace rapt {

namespace {

using Counts = std::map<NGram, std::size_t>;

Counts scaled(const Counts& in, std::size_t factor) {
  Counts out;
  for (const auto& [g, c] : in) out.emplace(g, c * factor);
  return out;
}

Counts intersect(const Counts& a, const Counts& b) {
  Counts out;
  for (const auto& [g, c] : a) {
    auto it = b.find(g);
    if (it != b.end()) out.emplace(g, std::min(c, it->second));
  }
  return out;
}

Counts subtract(const Counts& a, const Counts& b) {
  Counts out;
  for (const auto& [g, c] : a) {
    auto it = b.find(g);
    const std::size_t other = it == b.end() ? 0 : it->second;
    if (c > other) out.emplace(g, c - other);
  }
  return out;
}

std::size_t lookup(const Counts& m, const NGram& g) {
  auto it = m.find(g);
  return it == m.end() ? 0 : it->second;
}

double f1(double p, double r) { return p > 0.0 || r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

struct OrderScore {
  double keep = 0.0;
  double del = 0.0;
  double add = 0.0;
};

OrderScore score_order(const Counts& src, const Counts& pred, const Counts& refs,
                       std::size_t num_refs) {
  OrderScore out;
  const Counts src_rep = scaled(src, num_refs);
  const Counts pred_rep = scaled(pred, num_refs);

  // KEEP
  const Counts keep = intersect(src_rep, pred_rep);
  const Counts keep_good = intersect(keep, refs);
  const Counts keep_all = intersect(src_rep, refs);
  double keep_p = 0.0, keep_r = 0.0;
  for (const auto& [g, c] : keep) {
    const auto good = static_cast<double>(lookup(keep_good, g));
    keep_p += good / static_cast<double>(c);
    if (const std::size_t all = lookup(keep_all, g); all > 0) {
      keep_r += good / static_cast<double>(all);
    }
  }
  if (!keep.empty()) keep_p /= static_cast<double>(keep.size());
  if (!keep_all.empty()) keep_r /= static_cast<double>(keep_all.size());
  out.keep = f1(keep_p, keep_r);

  // DELETE
  const Counts del = subtract(src_rep, pred_rep);
  const Counts del_good = subtract(del, refs);
  double del_p = 0.0;
  for (const auto& [g, c] : del) {
    del_p += static_cast<double>(lookup(del_good, g)) / static_cast<double>(c);
  }
  if (!del.empty()) del_p /= static_cast<double>(del.size());
  out.del = del_p;

  // ADD, on n-gram types only
  std::size_t added = 0, added_good = 0, addable = 0;
  for (const auto& [g, c] : pred) {
    if (src.contains(g)) continue;
    ++added;
    if (refs.contains(g)) ++added_good;
  }
  for (const auto& [g, c] : refs) {
    if (!src.contains(g)) ++addable;
  }
  const double add_p = added ? static_cast<double>(added_good) / static_cast<double>(added) : 0.0;
  const double add_r = addable ? static_cast<double>(added_good) / static_cast<double>(addable) : 0.0;
  out.add = f1(add_p, add_r);
  return out;
}

}  // namespace

SariScore sari_sentence(const TokenSeq& source, const TokenSeq& prediction,
                        std::span<const TokenSeq> references) {
  if (references.empty()) throw ArgumentError("SARI needs at least one reference");

  const bool all_identical =
      source == prediction &&
      std::all_of(references.begin(), references.end(), [&](const TokenSeq& r) { return r == source; });

  SariScore out;
  for (int n = 1; n <= kMaxNGramOrder; ++n) {
    Counts refs;
    for (const auto& r : references) {
      for (const auto& [g, c] : ngrams(r, n).counts) refs[g] += c;
    }
    const Counts src = ngrams(source, n).counts;
    OrderScore s = score_order(src, ngrams(prediction, n).counts, refs, references.size());
    if (all_identical && src.empty()) s.keep = 1.0;
    out.keep_by_order[n - 1] = s.keep;
    out.del_by_order[n - 1] = s.del;
    out.add_by_order[n - 1] = s.add;
    out.keep += s.keep;
    out.del += s.del;
    out.add += s.add;
  }
  out.keep /= kMaxNGramOrder;
  out.del /= kMaxNGramOrder;
  out.add /= kMaxNGramOrder;
  out.score = (out.keep + out.del + out.add) / 3.0;
  return out;
}

double sari_corpus(std::span<const EvalRecord> records) {
  if (records.empty()) throw ArgumentError("SARI needs a non-empty corpus");
  double sum = 0.0;
  for (const auto& rec : records) {
    sum += sari_sentence(rec.source, rec.prediction, rec.references).score;
  }
  return 100.0 * sum / static_cast<double>(records.size());
}

}  // namespace rapt
