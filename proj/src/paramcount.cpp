#include "rapt/paramcount.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "rapt/error.hpp"

namespace rapt {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ParamCount lora_params(const ModelShape& shape, const LoraTune& lora) {
  if (lora.rank < 1) throw ArgumentError("LoRA rank must be at least 1");
  if (lora.targets.empty()) throw ArgumentError("LoRA needs at least one target matrix");
  // B (d x r) and A (r x k) per adapted d x k projection, with k = d.
  const ParamCount per_matrix = lora.rank * (shape.width + shape.width);
  return shape.layers * static_cast<ParamCount>(lora.targets.size()) * per_matrix;
}

ParamCount layernorm_params(const ModelShape& shape) {
  // Two per block plus the final one, each with gain and bias.
  return (2 * shape.layers + 1) * 2 * shape.width;
}

}  // namespace

void ModelShape::validate() const {
  if (layers < 1 || width < 1 || ffn_width < 1 || vocab < 1 || positions < 1) {
    throw ArgumentError("model shape dimensions must all be at least 1");
  }
}

ModelShape ModelShape::gpt2_medium() { return {"GPT2 Medium", 24, 1024, 4096, 50257, 1024, true}; }

ModelShape ModelShape::gpt2_large() { return {"GPT2 Large", 36, 1280, 5120, 50257, 1024, true}; }

ModelShape ModelShape::custom(ParamCount layers, ParamCount width, ParamCount vocab, ParamCount positions) {
  return {"L" + std::to_string(layers) + "-d" + std::to_string(width), layers, width, 4 * width, vocab,
          positions, true};
}

std::string method_name(const MethodSpec& method) {
  return std::visit(overloaded{
                        [](const FineTune&) { return "Fine Tuning"; },
                        [](const AdapterTune&) { return "Adapter Tuning"; },
                        [](const LoraTune&) { return "LoRA Tuning"; },
                        [](const PromptTune&) { return "Prompt Tuning"; },
                        [](const LoraPromptTune&) { return "LPT"; },
                        [](const RaptTune&) { return "RAPT"; },
                        [](const NcRaptTune&) { return "NC-RAPT"; },
                    },
                    method);
}

ParamCount full_params(const ModelShape& shape) {
  shape.validate();
  const ParamCount d = shape.width;
  const ParamCount f = shape.ffn_width;
  const ParamCount attention = (d * 3 * d + 3 * d) + (d * d + d);
  const ParamCount mlp = (d * f + f) + (f * d + d);
  const ParamCount per_layer = attention + mlp + 2 * 2 * d;
  ParamCount total = shape.vocab * d + shape.positions * d + shape.layers * per_layer + 2 * d;
  if (!shape.lm_head_tied) total += shape.vocab * d;
  return total;
}

ParamCount trainable_params(const ModelShape& shape, const MethodSpec& method) {
  shape.validate();
  const ParamCount d = shape.width;
  return std::visit(
      overloaded{
          [&](const FineTune&) { return full_params(shape); },
          [&](const AdapterTune& a) {
            if (a.bottleneck < 1 || a.adapters_per_layer < 1) throw ArgumentError("invalid adapter configuration");
            // Down projection d->b and up projection b->d, both with biases.
            const ParamCount adapter = 2 * d * a.bottleneck + a.bottleneck + d;
            return shape.layers * adapter * a.adapters_per_layer + (a.tune_layernorm ? layernorm_params(shape) : 0);
          },
          [&](const LoraTune& l) { return lora_params(shape, l); },
          [&](const PromptTune& p) { return (p.prefix_len + p.infix_len) * d; },
          [&](const LoraPromptTune& lp) {
            return lora_params(shape, lp.lora) + (lp.prompt.prefix_len + lp.prompt.infix_len) * d;
          },
          [&](const RaptTune& r) {
            return (r.global_prefix_len + r.class_prefix_len + r.infix_len) * d + lora_params(shape, r.lora);
          },
          [&](const NcRaptTune& n) {
            if (n.classes < 1) throw ArgumentError("NC-RAPT needs at least one novelty class");
            return (n.global_prefix_len + n.classes * (n.class_prefix_len + n.infix_len)) * d +
                   lora_params(shape, n.lora);
          },
      },
      method);
}

std::vector<MethodSpec> default_methods() {
  return {FineTune{}, AdapterTune{}, LoraTune{}, PromptTune{}, LoraPromptTune{}, RaptTune{}, NcRaptTune{}};
}

ParamTable report_table(const std::vector<ModelShape>& shapes, const std::vector<MethodSpec>& methods) {
  if (shapes.empty() || methods.empty()) throw ArgumentError("parameter table needs shapes and methods");
  ParamTable table;
  for (const auto& s : shapes) table.shapes.push_back(s.name);
  for (const auto& m : methods) {
    ParamTable::Row row{method_name(m), {}};
    for (const auto& s : shapes) row.counts.push_back(trainable_params(s, m));
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string with_thousands(ParamCount value) {
  std::string digits = std::to_string(value);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

std::string format_param_table(const ParamTable& table) {
  std::size_t label_width = 5;  // "Model"
  for (const auto& r : table.rows) label_width = std::max(label_width, r.method.size());
  std::vector<std::size_t> widths;
  for (std::size_t c = 0; c < table.shapes.size(); ++c) {
    std::size_t w = table.shapes[c].size();
    for (const auto& r : table.rows) w = std::max(w, with_thousands(r.counts[c]).size());
    widths.push_back(w);
  }

  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(label_width)) << "Model";
  for (std::size_t c = 0; c < table.shapes.size(); ++c) {
    out << "  " << std::right << std::setw(static_cast<int>(widths[c])) << table.shapes[c];
  }
  out << '\n';
  for (const auto& r : table.rows) {
    out << std::left << std::setw(static_cast<int>(label_width)) << r.method;
    for (std::size_t c = 0; c < r.counts.size(); ++c) {
      out << "  " << std::right << std::setw(static_cast<int>(widths[c])) << with_thousands(r.counts[c]);
    }
    out << '\n';
  }
  return out.str();
}

std::string param_table_csv(const ParamTable& table) {
  std::string out = "method";
  for (const auto& s : table.shapes) out += "," + s;
  out += '\n';
  for (const auto& r : table.rows) {
    out += r.method;
    for (ParamCount c : r.counts) out += "," + std::to_string(c);
    out += '\n';
  }
  return out;
}

}  // namespace rapt
