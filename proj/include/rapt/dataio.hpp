#pragma once

// Dataset ingestion, split-size validation and output files. JSONL is the
// canonical format; TSV is accepted on input.

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rapt/metrics.hpp"
#include "rapt/novelty.hpp"
#include "rapt/types.hpp"

namespace rapt {

enum class PairFormat { Jsonl, Tsv };

/// ".tsv" selects TSV; anything else is JSONL.
PairFormat format_for_path(const std::filesystem::path& path);
PairFormat parse_pair_format(std::string_view name);

enum class SplitName { Train, Validation, Test };

std::string_view to_string(SplitName name);
SplitName parse_split_name(std::string_view name);

struct DatasetSplit {
  SplitName name = SplitName::Test;
  std::vector<ParaphrasePair> pairs;
  std::optional<std::size_t> expected_size;
};

struct LoadOptions {
  /// Inference inputs may omit the target.
  bool allow_empty_target = false;
};

/// JSONL records {"id"?, "source", "target"}; TSV lines "source\ttarget" or
/// "id\tsource\ttarget". Missing ids become the record's 0-based position.
/// Throws ParseError with the line number on a malformed line, and
/// DataError on duplicate ids.
DatasetSplit load_pairs(const std::filesystem::path& path, PairFormat format, SplitName name = SplitName::Test,
                        const LoadOptions& opts = {});
inline DatasetSplit load_pairs(const std::filesystem::path& path) { return load_pairs(path, format_for_path(path)); }

std::string pairs_to_jsonl(std::span<const ParaphrasePair> pairs);
void write_pairs(const std::filesystem::path& path, std::span<const ParaphrasePair> pairs);

// Split sizes --------------------------------------------------------------------

struct SplitCheck {
  SplitName name;
  std::size_t actual = 0;
  std::optional<std::size_t> expected;
  bool matches() const { return !expected || *expected == actual; }
};

struct SplitSizeReport {
  std::string dataset;
  bool informational = false;  // "custom": nothing to compare against
  std::vector<SplitCheck> checks;

  bool all_match() const;
  std::string describe() const;
};

/// Known names: qqp-50k, qqp-140k, msrpc, parasci-acl, custom.
std::vector<std::string> known_datasets();
/// Expected (train, validation, test) sizes; nullopt for "custom".
std::optional<std::array<std::size_t, 3>> expected_split_sizes(std::string_view dataset);

/// Never fails on a mismatch; throws ArgumentError for an unknown name.
SplitSizeReport validate_split_sizes(std::span<const DatasetSplit> splits, std::string_view dataset);

// Output records -----------------------------------------------------------------

struct GenerationRecord {
  std::string id;
  std::size_t prompt_n = 0;
  std::string output;

  bool operator==(const GenerationRecord&) const = default;
};

/// {"id","source","target","ter","class"} per line.
std::string labeled_to_jsonl(std::span<const LabeledPair> labeled);
void write_labeled(const std::filesystem::path& path, std::span<const LabeledPair> labeled);
std::vector<LabeledPair> load_labeled(const std::filesystem::path& path);

/// {"id","prompt_n","output"} per line.
std::string generations_to_jsonl(std::span<const GenerationRecord> records);
void write_generations(const std::filesystem::path& path, std::span<const GenerationRecord> records);
std::vector<GenerationRecord> load_generations(const std::filesystem::path& path);

using ReportRows = std::vector<std::pair<std::string, MetricReport>>;

void write_report_csv(const std::filesystem::path& path, const ReportRows& rows);
/// Reads the columns written by report_csv; values carry its two-decimal
/// rounding.
ReportRows load_report_csv(const std::filesystem::path& path);

}  // namespace rapt
