#pragma once

// Orchestration: label -> index -> assemble -> generate -> evaluate, plus
// the parameter report. Every command writes a resolved-config snapshot
// next to its outputs.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rapt/backend.hpp"
#include "rapt/dataio.hpp"
#include "rapt/metrics.hpp"
#include "rapt/novelty.hpp"
#include "rapt/paramcount.hpp"
#include "rapt/promptkit.hpp"
#include "rapt/textcore.hpp"

namespace rapt {

enum class RetrievalStrategy { Knn, Random };
enum class GenerateMode { Manual, Rapt, NcRapt, Copy, GroundTruth };

std::string_view to_string(RetrievalStrategy s);
std::string_view to_string(GenerateMode m);
RetrievalStrategy parse_retrieval_strategy(std::string_view name);
GenerateMode parse_generate_mode(std::string_view name);

struct PipelineConfig {
  // data
  std::filesystem::path train;
  std::filesystem::path validation;
  std::filesystem::path test;
  std::string dataset = "custom";
  std::filesystem::path out = "out";
  std::uint64_t seed = 0;

  NormalizationConfig normalization;
  NoveltyThresholds thresholds;

  std::string label_split = "train";

  std::size_t k = kDefaultNeighbors;
  RetrievalStrategy strategy = RetrievalStrategy::Knn;
  std::filesystem::path index_path;  // empty: <out>/train.emb

  SlotSpec slots;
  NoveltyClass query_class = NoveltyClass::High;

  GenerateMode mode = GenerateMode::Rapt;
  std::string generate_split = "test";
  std::size_t max_prompt_tokens = 0;  // 0: no budget trimming
  std::filesystem::path template_path;

  std::filesystem::path generations;  // empty: <out>/generations.jsonl
  std::string method;                 // report row label; empty: derived from mode
  bool bert = true;

  BackendConfig backend;

  /// Applies one key=value setting (same keys as the config file).
  void set(std::string_view key, std::string_view value);
  void validate() const;

  std::filesystem::path index_file() const;
  std::filesystem::path generations_file() const;
  std::filesystem::path split_path(std::string_view split) const;
  std::string method_label() const;
  TextTemplate text_template() const;

  /// Every key with its effective value, sorted; the bearer token is
  /// redacted.
  std::string resolved() const;
};

/// key = value lines with optional [section] headers (keys become
/// "section.key"), '#' comments and optionally quoted values.
PipelineConfig parse_pipeline_config(std::string_view text, const std::string& origin = "<config>");
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// Commands -----------------------------------------------------------------------

struct LabelSummary {
  std::filesystem::path output;
  LabelingResult result;
};

LabelSummary cmd_label(const PipelineConfig& cfg);

struct IndexSummary {
  std::filesystem::path output;
  std::size_t count = 0;
  std::size_t dim = 0;
};

IndexSummary cmd_index(const PipelineConfig& cfg, const Client& client);

struct GenerateSummary {
  std::filesystem::path output;
  std::filesystem::path requests;  // empty for copy / ground-truth
  std::vector<GenerationRecord> records;
  std::vector<std::string> warnings;
};

/// Requests log entries: {"id","prompt","prompt_n","max_new_tokens","slot_realization","layout"}.
GenerateSummary cmd_generate(const PipelineConfig& cfg, const Client* client);

struct EvalSummary {
  std::filesystem::path csv;
  std::string method;
  MetricReport report;
  std::string table;
};

/// `client` may be null when cfg.bert is off.
EvalSummary cmd_eval(const PipelineConfig& cfg, const Client* client);

struct ParamsOptions {
  std::vector<std::string> models = {"gpt2-medium", "gpt2-large"};
  std::optional<ParamCount> layers;  // with width: one custom shape
  std::optional<ParamCount> width;
  std::optional<ParamCount> vocab;
  std::optional<ParamCount> positions;
};

ParamTable cmd_params(const ParamsOptions& opts);

struct PipelineSummary {
  std::optional<LabelSummary> label;
  std::optional<IndexSummary> index;
  GenerateSummary generate;
  EvalSummary eval;
};

PipelineSummary cmd_pipeline(const PipelineConfig& cfg, const Client& client);

/// Writes cfg.resolved() to <out>/<command>.config.
void write_config_snapshot(const PipelineConfig& cfg, std::string_view command);

}  // namespace rapt
