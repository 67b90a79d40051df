#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "rapt/error.hpp"
#include "rapt/metrics.hpp"

namespace rapt {

namespace {

std::string join_errors(const std::vector<RecordError>& errors) {
  std::string msg = "evaluation failed for " + std::to_string(errors.size()) + " record(s)";
  for (const auto& e : errors) msg += "; record " + std::to_string(e.index) + ": " + e.message;
  return msg;
}

}  // namespace

EvaluationError::EvaluationError(std::vector<RecordError> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

SimilarityResult semantic_similarity(std::span<const VectorPair> vectors) {
  if (vectors.empty()) throw ArgumentError("semantic similarity needs at least one vector pair");
  SimilarityResult result;
  double sum = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const auto& [a, b] = vectors[i];
    if (a.size() != b.size()) {
      throw ArgumentError("vector pair " + std::to_string(i) + " has mismatched dimensions");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      dot += a[k] * b[k];
      na += a[k] * a[k];
      nb += b[k] * b[k];
    }
    if (na == 0.0 || nb == 0.0) {
      result.excluded.push_back(i);
      continue;
    }
    sum += std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
    ++result.scored;
  }
  if (result.scored > 0) result.percent = 100.0 * sum / static_cast<double>(result.scored);
  return result;
}

MetricReport evaluate_all(std::span<const EvalRecord> records, std::span<const VectorPair> vectors,
                          const NormalizationConfig& normalization) {
  if (records.empty()) throw ArgumentError("evaluation needs a non-empty corpus");

  std::vector<RecordError> errors;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].references.empty()) errors.push_back({i, "no references"});
  }
  if (!vectors.empty() && vectors.size() != records.size()) {
    errors.push_back({vectors.size(), "embedding pairs not aligned with records (" +
                                          std::to_string(vectors.size()) + " vs " +
                                          std::to_string(records.size()) + ")"});
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].source.size() != vectors[i].prediction.size()) {
      errors.push_back({i, "embedding dimension mismatch"});
    }
  }
  if (!errors.empty()) throw EvaluationError(std::move(errors));

  MetricReport report;
  report.normalization = normalization;
  report.corpus_size = records.size();

  std::vector<BleuPair> pairs;
  pairs.reserve(records.size());
  for (const auto& rec : records) pairs.push_back({rec.prediction, rec.references});
  const BleuStats bleu = bleu_stats(pairs);
  report.bleu = bleu.score;
  report.bleu_zero_match = bleu.zero_match;

  const BleuStats self = self_bleu_stats(records);
  report.self_bleu = self.score;
  report.self_bleu_zero_match = self.zero_match;

  report.ibleu = ibleu(report.bleu, report.self_bleu);

  SelfTerResult st = self_ter(records);
  report.self_ter = st.percent;
  report.self_ter_skipped = std::move(st.skipped);

  report.sari = sari_corpus(records);

  if (!vectors.empty()) {
    SimilarityResult sim = semantic_similarity(vectors);
    report.bert = sim.percent;
    report.bert_excluded = std::move(sim.excluded);
  }
  return report;
}

std::string format_percent(double value) {
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");

  // Round on the decimal expansion so that values such as 0.125 (exactly
  // representable) tie to even while binary noise below 1e-9 is ignored.
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", std::fabs(value));
  std::string digits(buf);
  const auto dot = digits.find('.');
  std::string int_part = digits.substr(0, dot);
  std::string frac = digits.substr(dot + 1);  // 9 digits
  std::string kept = int_part + frac.substr(0, 2);
  const std::string rest = frac.substr(2);

  bool round_up = false;
  if (rest[0] > '5') {
    round_up = true;
  } else if (rest[0] == '5') {
    const bool tail_zero = rest.find_first_not_of('0', 1) == std::string::npos;
    round_up = !tail_zero || ((kept.back() - '0') % 2 == 1);
  }
  if (round_up) {
    int i = static_cast<int>(kept.size()) - 1;
    while (i >= 0 && kept[i] == '9') kept[i--] = '0';
    if (i < 0) {
      kept.insert(kept.begin(), '1');
    } else {
      ++kept[i];
    }
  }
  std::string out = kept.substr(0, kept.size() - 2) + "." + kept.substr(kept.size() - 2);
  const bool is_zero = kept.find_first_not_of('0') == std::string::npos;
  if (value < 0 && !is_zero) out.insert(out.begin(), '-');
  return out;
}

namespace {

constexpr const char* kColumns[] = {"BERT", "Self-TER", "Self-BLEU", "BLEU", "iBLEU", "SARI"};

std::vector<std::string> cells(const MetricReport& r) {
  return {r.bert ? format_percent(*r.bert) : "-",
          format_percent(r.self_ter),
          format_percent(r.self_bleu),
          format_percent(r.bleu),
          format_percent(r.ibleu),
          format_percent(r.sari)};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string report_table(const std::vector<std::pair<std::string, MetricReport>>& rows) {
  std::size_t label_width = 6;  // "Method"
  for (const auto& [label, _] : rows) label_width = std::max(label_width, label.size());

  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(label_width)) << "Method";
  for (const char* col : kColumns) out << "  " << std::right << std::setw(9) << col;
  out << '\n';
  for (const auto& [label, report] : rows) {
    out << std::left << std::setw(static_cast<int>(label_width)) << label;
    for (const auto& cell : cells(report)) out << "  " << std::right << std::setw(9) << cell;
    out << '\n';
  }
  if (!rows.empty()) {
    const auto& r = rows.front().second;
    out << "normalization: " << r.normalization.describe() << "; records: " << r.corpus_size << '\n';
  }
  return out.str();
}

std::string report_csv(const std::vector<std::pair<std::string, MetricReport>>& rows) {
  std::ostringstream out;
  out << "method";
  for (const char* col : kColumns) out << ',' << col;
  out << ",normalization,corpus_size\n";
  for (const auto& [label, report] : rows) {
    out << csv_field(label);
    for (const auto& cell : cells(report)) out << ',' << (cell == "-" ? "" : cell);
    out << ',' << report.normalization.describe() << ',' << report.corpus_size << '\n';
  }
  return out.str();
}

}  // namespace rapt
