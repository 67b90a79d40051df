// Translation edit rate with greedy block shifts, following the TERCOM
// search: repeatedly apply the shift that most reduces the word edit
// distance until no shift helps, then add the remaining edit distance.

#include <algorithm>
#include <tuple>
#include <unordered_map>

#include "rapt/error.hpp"
#include "rapt/metrics.hpp"

namespace rapt {

namespace {

constexpr std::size_t kMaxShiftSize = 10;
constexpr std::size_t kMaxShiftDistance = 50;
constexpr std::size_t kMaxShiftCandidates = 1000;

using Ids = std::vector<int>;

struct Alignment {
  std::size_t cost = 0;
  std::vector<bool> hyp_error;
  std::vector<bool> ref_error;
  // For each reference position, the hypothesis index it is aligned to, or
  // the index of the preceding hypothesis word (-1 at the start) when the
  // reference word is missing from the hypothesis.
  std::vector<long> ref_to_hyp;
};

std::vector<std::size_t> dp_table(const Ids& hyp, const Ids& ref) {
  const std::size_t n = hyp.size();
  const std::size_t m = ref.size();
  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [m, &d](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }
  return d;
}

std::size_t distance(const Ids& hyp, const Ids& ref) {
  // Two-row variant for the inner loop of the shift search.
  std::vector<std::size_t> prev(ref.size() + 1), cur(ref.size() + 1);
  for (std::size_t j = 0; j <= ref.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= hyp.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      const std::size_t diag = prev[j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      cur[j] = std::min({diag, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[ref.size()];
}

Alignment align(const Ids& hyp, const Ids& ref) {
  const std::size_t n = hyp.size();
  const std::size_t m = ref.size();
  const auto d = dp_table(hyp, ref);
  auto at = [m, &d](std::size_t i, std::size_t j) { return d[i * (m + 1) + j]; };

  enum class Op { Match, Sub, HypExtra, RefMissing };
  std::vector<Op> ops;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = hyp[i - 1] == ref[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
        ops.push_back(same ? Op::Match : Op::Sub);
        --i, --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ops.push_back(Op::HypExtra);
      --i;
    } else {
      ops.push_back(Op::RefMissing);
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());

  Alignment a;
  a.cost = at(n, m);
  a.hyp_error.reserve(n);
  a.ref_error.reserve(m);
  a.ref_to_hyp.reserve(m);
  long hpos = -1;
  for (Op op : ops) {
    switch (op) {
      case Op::Match:
      case Op::Sub:
        ++hpos;
        a.hyp_error.push_back(op == Op::Sub);
        a.ref_error.push_back(op == Op::Sub);
        a.ref_to_hyp.push_back(hpos);
        break;
      case Op::HypExtra:
        ++hpos;
        a.hyp_error.push_back(true);
        break;
      case Op::RefMissing:
        a.ref_error.push_back(true);
        a.ref_to_hyp.push_back(hpos);
        break;
    }
  }
  return a;
}

// Moves hyp[start, start+len) so that it sits before original index `dest`.
Ids apply_shift(const Ids& hyp, std::size_t start, std::size_t len, std::size_t dest) {
  Ids out;
  out.reserve(hyp.size());
  const auto b = hyp.begin();
  if (dest < start) {
    out.insert(out.end(), b, b + dest);
    out.insert(out.end(), b + start, b + start + len);
    out.insert(out.end(), b + dest, b + start);
    out.insert(out.end(), b + start + len, hyp.end());
  } else {
    out.insert(out.end(), b, b + start);
    out.insert(out.end(), b + start + len, b + dest);
    out.insert(out.end(), b + start, b + start + len);
    out.insert(out.end(), b + dest, hyp.end());
  }
  return out;
}

struct Shift {
  std::size_t gain = 0;
  std::size_t start = 0;
  std::size_t len = 0;
  std::size_t dest = 0;
  Ids result;

  // Larger gain wins, then leftmost block, then longer block, then the
  // earliest destination.
  bool better_than(const Shift& o) const {
    return std::tuple(gain, o.start, len, o.dest) > std::tuple(o.gain, start, o.len, dest);
  }
};

bool best_shift(const Ids& hyp, const Ids& ref, const Alignment& a, Shift& best) {
  bool found = false;
  std::size_t checked = 0;
  for (std::size_t start = 0; start < hyp.size(); ++start) {
    for (std::size_t rstart = 0; rstart < ref.size(); ++rstart) {
      const std::size_t dist = start > rstart ? start - rstart : rstart - start;
      if (dist > kMaxShiftDistance) continue;
      for (std::size_t len = 1; len <= kMaxShiftSize; ++len) {
        if (start + len > hyp.size() || rstart + len > ref.size()) break;
        if (hyp[start + len - 1] != ref[rstart + len - 1]) break;

        const bool hyp_wrong = std::any_of(a.hyp_error.begin() + start,
                                           a.hyp_error.begin() + start + len, [](bool e) { return e; });
        const bool ref_wrong = std::any_of(a.ref_error.begin() + rstart,
                                           a.ref_error.begin() + rstart + len, [](bool e) { return e; });
        if (!hyp_wrong || !ref_wrong) continue;
        const long anchor = a.ref_to_hyp[rstart];
        if (anchor >= static_cast<long>(start) && anchor < static_cast<long>(start + len)) continue;

        long prev_dest = -1;
        for (long offset = -1; offset < static_cast<long>(len); ++offset) {
          const long rpos = static_cast<long>(rstart) + offset;
          const long dest = rpos < 0 ? 0 : a.ref_to_hyp[rpos] + 1;
          if (dest == prev_dest) continue;
          prev_dest = dest;
          const auto udest = static_cast<std::size_t>(dest);
          if (udest >= start && udest <= start + len) continue;  // no movement

          Ids shifted = apply_shift(hyp, start, len, udest);
          const std::size_t cost = distance(shifted, ref);
          ++checked;
          if (cost < a.cost) {
            Shift cand{a.cost - cost, start, len, udest, std::move(shifted)};
            if (!found || cand.better_than(best)) {
              best = std::move(cand);
              found = true;
            }
          }
        }
      }
      if (checked >= kMaxShiftCandidates) return found;
    }
  }
  return found;
}

std::pair<Ids, Ids> intern(const TokenSeq& hypothesis, const TokenSeq& reference) {
  std::unordered_map<std::string, int> vocab;
  auto to_ids = [&vocab](const TokenSeq& seq) {
    Ids ids;
    ids.reserve(seq.size());
    for (const auto& tok : seq) {
      ids.push_back(vocab.emplace(tok, static_cast<int>(vocab.size())).first->second);
    }
    return ids;
  };
  Ids h = to_ids(hypothesis);
  return {std::move(h), to_ids(reference)};
}

}  // namespace

std::size_t edit_distance(const TokenSeq& hypothesis, const TokenSeq& reference) {
  const auto [h, r] = intern(hypothesis, reference);
  return distance(h, r);
}

TerStats ter_stats(const TokenSeq& hypothesis, const TokenSeq& reference) {
  if (reference.empty()) throw ArgumentError("TER needs a non-empty reference");

  auto [hyp, ref] = intern(hypothesis, reference);

  TerStats stats;
  stats.reference_length = ref.size();
  for (;;) {
    const Alignment a = align(hyp, ref);
    Shift shift;
    if (a.cost == 0 || !best_shift(hyp, ref, a, shift)) {
      stats.edits = stats.shifts + a.cost;
      return stats;
    }
    hyp = std::move(shift.result);
    ++stats.shifts;
  }
}

double ter(const TokenSeq& hypothesis, const TokenSeq& reference) {
  return ter_stats(hypothesis, reference).rate();
}

SelfTerResult self_ter(std::span<const EvalRecord> records) {
  if (records.empty()) throw ArgumentError("self-TER needs a non-empty corpus");
  SelfTerResult result;
  double sum = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].source.empty()) {
      result.skipped.push_back(i);
      continue;
    }
    sum += ter(records[i].prediction, records[i].source);
    ++result.scored;
  }
  if (result.scored > 0) result.percent = 100.0 * sum / static_cast<double>(result.scored);
  return result;
}

}  // namespace rapt
