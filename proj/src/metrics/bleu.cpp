#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "rapt/error.hpp"
#include "rapt/metrics.hpp"

namespace rapt {

namespace {

std::size_t closest_reference_length(std::size_t hyp_len, const std::vector<TokenSeq>& refs) {
  std::size_t best = refs.front().size();
  for (const auto& ref : refs) {
    const auto diff = [hyp_len](std::size_t len) {
      return len > hyp_len ? len - hyp_len : hyp_len - len;
    };
    if (diff(ref.size()) < diff(best) || (diff(ref.size()) == diff(best) && ref.size() < best)) {
      best = ref.size();
    }
  }
  return best;
}

}  // namespace

BleuStats bleu_stats(std::span<const BleuPair> corpus) {
  if (corpus.empty()) throw ArgumentError("BLEU needs a non-empty corpus");

  BleuStats stats;
  for (std::size_t idx = 0; idx < corpus.size(); ++idx) {
    const auto& [prediction, references] = corpus[idx];
    if (references.empty()) {
      throw ArgumentError("record " + std::to_string(idx) + " has no references");
    }
    stats.hypothesis_length += prediction.size();
    stats.reference_length += closest_reference_length(prediction.size(), references);

    for (int n = 1; n <= kMaxNGramOrder; ++n) {
      const NGramProfile hyp = ngrams(prediction, n);
      // Clip each hypothesis n-gram by its maximum count over references.
      std::map<NGram, std::size_t> max_ref;
      for (const auto& ref : references) {
        for (const auto& [gram, count] : ngrams(ref, n).counts) {
          auto& slot = max_ref[gram];
          slot = std::max(slot, count);
        }
      }
      std::size_t matched = 0;
      for (const auto& [gram, count] : hyp.counts) {
        auto it = max_ref.find(gram);
        if (it != max_ref.end()) matched += std::min(count, it->second);
      }
      stats.matches[n - 1] += matched;
      stats.totals[n - 1] += hyp.total();
    }
  }

  for (int n = 0; n < kMaxNGramOrder; ++n) {
    if (stats.matches[n] == 0) stats.zero_match = true;
  }
  // An empty hypothesis side also lands here: every total is zero.
  if (stats.zero_match) return stats;

  double log_precision = 0.0;
  for (int n = 0; n < kMaxNGramOrder; ++n) {
    log_precision += std::log(static_cast<double>(stats.matches[n]) /
                              static_cast<double>(stats.totals[n]));
  }
  log_precision /= kMaxNGramOrder;

  const auto c = static_cast<double>(stats.hypothesis_length);
  const auto r = static_cast<double>(stats.reference_length);
  stats.brevity_penalty = c < r ? std::exp(1.0 - r / c) : 1.0;
  stats.score = 100.0 * stats.brevity_penalty * std::exp(log_precision);
  return stats;
}

double bleu_corpus(std::span<const BleuPair> corpus) { return bleu_stats(corpus).score; }

BleuStats self_bleu_stats(std::span<const EvalRecord> records) {
  std::vector<BleuPair> pairs;
  pairs.reserve(records.size());
  for (const auto& rec : records) pairs.push_back({rec.prediction, {rec.source}});
  return bleu_stats(pairs);
}

double self_bleu(std::span<const EvalRecord> records) { return self_bleu_stats(records).score; }

double ibleu(double bleu, double self_bleu, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ArgumentError("iBLEU alpha must lie in [0, 1]");
  }
  return alpha * bleu - (1.0 - alpha) * self_bleu;
}

}  // namespace rapt
