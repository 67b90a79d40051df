#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rapt/textcore.hpp"

namespace rapt {

/// One evaluated prediction: the input it paraphrases and its ground truths.
struct EvalRecord {
  TokenSeq source;
  TokenSeq prediction;
  std::vector<TokenSeq> references;
};

// ---------------------------------------------------------------------------
// BLEU
// ---------------------------------------------------------------------------

struct BleuPair {
  TokenSeq prediction;
  std::vector<TokenSeq> references;
};

/// Aggregate corpus statistics behind a BLEU4 score.
struct BleuStats {
  std::array<std::size_t, kMaxNGramOrder> matches{};
  std::array<std::size_t, kMaxNGramOrder> totals{};
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;  // sum of closest reference lengths
  double brevity_penalty = 1.0;
  double score = 0.0;  // percent
  /// Some order had no matched n-gram; score forced to 0 without smoothing.
  bool zero_match = false;
};

/// Corpus BLEU4: clipped multi-reference counts, uniform weights, brevity
/// penalty against the closest reference length (shorter wins ties).
BleuStats bleu_stats(std::span<const BleuPair> corpus);
double bleu_corpus(std::span<const BleuPair> corpus);

/// BLEU between every prediction and its own source, in percent.
double self_bleu(std::span<const EvalRecord> records);
BleuStats self_bleu_stats(std::span<const EvalRecord> records);

// ---------------------------------------------------------------------------
// TER
// ---------------------------------------------------------------------------

struct TerStats {
  std::size_t edits = 0;  // insertions + deletions + substitutions + shifts
  std::size_t shifts = 0;
  std::size_t reference_length = 0;

  double rate() const { return static_cast<double>(edits) / static_cast<double>(reference_length); }
};

/// Word-level Levenshtein distance (unit costs).
std::size_t edit_distance(const TokenSeq& hypothesis, const TokenSeq& reference);

/// Translation edit rate with greedy block shifts. Throws ArgumentError for
/// an empty reference.
TerStats ter_stats(const TokenSeq& hypothesis, const TokenSeq& reference);
double ter(const TokenSeq& hypothesis, const TokenSeq& reference);

struct SelfTerResult {
  double percent = 0.0;
  std::size_t scored = 0;
  std::vector<std::size_t> skipped;  // indices of records with empty source
};

/// Mean per-record TER(prediction, source), scaled to percent.
SelfTerResult self_ter(std::span<const EvalRecord> records);

// ---------------------------------------------------------------------------
// iBLEU, SARI, embedding similarity
// ---------------------------------------------------------------------------

inline constexpr double kDefaultIbleuAlpha = 0.7;

double ibleu(double bleu, double self_bleu, double alpha = kDefaultIbleuAlpha);

struct SariScore {
  double keep = 0.0;
  double del = 0.0;
  double add = 0.0;
  double score = 0.0;  // fraction in [0,1]
  std::array<double, kMaxNGramOrder> keep_by_order{};
  std::array<double, kMaxNGramOrder> del_by_order{};
  std::array<double, kMaxNGramOrder> add_by_order{};
};

SariScore sari_sentence(const TokenSeq& source, const TokenSeq& prediction,
                        std::span<const TokenSeq> references);

/// Mean sentence SARI in percent.
double sari_corpus(std::span<const EvalRecord> records);

struct VectorPair {
  std::vector<double> source;
  std::vector<double> prediction;
};

struct SimilarityResult {
  double percent = 0.0;
  std::size_t scored = 0;
  std::vector<std::size_t> excluded;  // zero-norm records
};

/// Mean cosine between paired sentence encodings, in percent.
SimilarityResult semantic_similarity(std::span<const VectorPair> vectors);

// ---------------------------------------------------------------------------
// Full report
// ---------------------------------------------------------------------------

struct MetricReport {
  std::optional<double> bert;
  double self_ter = 0.0;
  double self_bleu = 0.0;
  double bleu = 0.0;
  double ibleu = 0.0;
  double sari = 0.0;
  NormalizationConfig normalization;
  std::size_t corpus_size = 0;

  bool bleu_zero_match = false;
  bool self_bleu_zero_match = false;
  std::vector<std::size_t> self_ter_skipped;
  std::vector<std::size_t> bert_excluded;
};

struct RecordError {
  std::size_t index;
  std::string message;
};

class EvaluationError : public std::runtime_error {
 public:
  explicit EvaluationError(std::vector<RecordError> errors);
  const std::vector<RecordError>& errors() const noexcept { return errors_; }

 private:
  std::vector<RecordError> errors_;
};

/// Runs every metric. Pass `vectors` aligned with `records` to fill the BERT
/// column; pass an empty span to leave it unset.
MetricReport evaluate_all(std::span<const EvalRecord> records,
                          std::span<const VectorPair> vectors,
                          const NormalizationConfig& normalization = {});

/// Two decimals, ties to even. Negative zero prints as "0.00".
std::string format_percent(double value);

/// Table column order: BERT, Self-TER, Self-BLEU, BLEU, iBLEU, SARI.
std::string report_table(const std::vector<std::pair<std::string, MetricReport>>& rows);
std::string report_csv(const std::vector<std::pair<std::string, MetricReport>>& rows);

}  // namespace rapt
