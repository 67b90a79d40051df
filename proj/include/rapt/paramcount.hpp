#pragma once

// Trainable-parameter accounting for GPT-2 style decoders under different
// adaptation methods. Integer arithmetic only.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace rapt {

using ParamCount = std::uint64_t;

struct ModelShape {
  std::string name;
  ParamCount layers = 24;
  ParamCount width = 1024;
  ParamCount ffn_width = 4096;
  ParamCount vocab = 50257;
  ParamCount positions = 1024;
  bool lm_head_tied = true;

  void validate() const;

  static ModelShape gpt2_medium();
  static ModelShape gpt2_large();
  /// Square-attention decoder with ffn_width = 4 * width.
  static ModelShape custom(ParamCount layers, ParamCount width, ParamCount vocab = 50257,
                           ParamCount positions = 1024);
};

struct FineTune {};

struct AdapterTune {
  ParamCount bottleneck = 512;
  ParamCount adapters_per_layer = 1;
  bool tune_layernorm = true;
};

enum class LoraTarget { Query, Key, Value, Output };

struct LoraTune {
  ParamCount rank = 8;
  std::vector<LoraTarget> targets = {LoraTarget::Query, LoraTarget::Value};
};

struct PromptTune {
  ParamCount prefix_len = 256;
  ParamCount infix_len = 8;
};

struct LoraPromptTune {
  LoraTune lora;
  PromptTune prompt;
};

struct RaptTune {
  LoraTune lora;
  ParamCount global_prefix_len = 248;
  ParamCount class_prefix_len = 8;
  ParamCount infix_len = 8;
};

struct NcRaptTune {
  LoraTune lora;
  ParamCount global_prefix_len = 248;
  ParamCount class_prefix_len = 8;
  ParamCount infix_len = 8;
  ParamCount classes = 3;
};

using MethodSpec = std::variant<FineTune, AdapterTune, LoraTune, PromptTune, LoraPromptTune, RaptTune, NcRaptTune>;

/// Row label, e.g. "Adapter Tuning".
std::string method_name(const MethodSpec& method);

ParamCount full_params(const ModelShape& shape);
ParamCount trainable_params(const ModelShape& shape, const MethodSpec& method);

/// The seven methods with their default hyperparameters, in table order:
/// Fine Tuning, Adapter Tuning, LoRA Tuning, Prompt Tuning, LPT, RAPT, NC-RAPT.
std::vector<MethodSpec> default_methods();

struct ParamTable {
  std::vector<std::string> shapes;
  struct Row {
    std::string method;
    std::vector<ParamCount> counts;
  };
  std::vector<Row> rows;
};

ParamTable report_table(const std::vector<ModelShape>& shapes, const std::vector<MethodSpec>& methods);

/// Aligned text with thousands separators.
std::string format_param_table(const ParamTable& table);
std::string param_table_csv(const ParamTable& table);

/// 354823168 -> "354,823,168".
std::string with_thousands(ParamCount value);

}  // namespace rapt
