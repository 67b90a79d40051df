#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

#include "rapt/error.hpp"
#include "rapt/fileio.hpp"
#include "rapt/pipeline.hpp"

namespace rapt {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_bool(std::string_view key, std::string_view v) {
  const std::string s = lower(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ArgumentError("'" + std::string(key) + "' expects a boolean, got '" + std::string(v) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ArgumentError("'" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
  }
  return out;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::string double_text(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

std::string_view to_string(RetrievalStrategy s) { return s == RetrievalStrategy::Knn ? "knn" : "random"; }

std::string_view to_string(GenerateMode m) {
  switch (m) {
    case GenerateMode::Manual: return "manual";
    case GenerateMode::Rapt: return "rapt";
    case GenerateMode::NcRapt: return "ncrapt";
    case GenerateMode::Copy: return "copy";
    case GenerateMode::GroundTruth: return "ground-truth";
  }
  return "unknown";
}

RetrievalStrategy parse_retrieval_strategy(std::string_view name) {
  const std::string n = lower(name);
  if (n == "knn") return RetrievalStrategy::Knn;
  if (n == "random") return RetrievalStrategy::Random;
  throw ArgumentError("unknown retrieval strategy '" + std::string(name) + "' (expected knn or random)");
}

GenerateMode parse_generate_mode(std::string_view name) {
  const std::string n = lower(name);
  if (n == "manual") return GenerateMode::Manual;
  if (n == "rapt") return GenerateMode::Rapt;
  if (n == "ncrapt" || n == "nc-rapt") return GenerateMode::NcRapt;
  if (n == "copy") return GenerateMode::Copy;
  if (n == "ground-truth" || n == "groundtruth") return GenerateMode::GroundTruth;
  throw ArgumentError("unknown generation mode '" + std::string(name) + "'");
}

void PipelineConfig::set(std::string_view raw_key, std::string_view raw_value) {
  std::string key = lower(trim(raw_key));
  if (key.starts_with("data.")) key.erase(0, 5);
  const std::string value(trim(raw_value));

  if (key == "train") {
    train = value;
  } else if (key == "validation") {
    validation = value;
  } else if (key == "test") {
    test = value;
  } else if (key == "dataset") {
    expected_split_sizes(value);  // rejects unknown names
    dataset = lower(value);
  } else if (key == "out") {
    out = value;
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "normalization.lowercase") {
    normalization.lowercase = parse_bool(key, value);
  } else if (key == "normalization.unicode") {
    normalization.unicode_normalize = parse_bool(key, value);
  } else if (key == "normalization.punctuation") {
    normalization.punctuation_split = parse_bool(key, value);
  } else if (key == "normalization.whitespace") {
    normalization.collapse_whitespace = parse_bool(key, value);
  } else if (key == "novelty.low_max") {
    thresholds.low_max = parse_number<double>(key, value);
  } else if (key == "novelty.high_min") {
    thresholds.high_min = parse_number<double>(key, value);
  } else if (key == "label.split") {
    label_split = std::string(to_string(parse_split_name(value)));
  } else if (key == "retrieval.k") {
    k = parse_number<std::size_t>(key, value);
  } else if (key == "retrieval.strategy") {
    strategy = parse_retrieval_strategy(value);
  } else if (key == "retrieval.index") {
    index_path = value;
  } else if (key == "slots.m") {
    slots.global_prefix_len = parse_number<std::size_t>(key, value);
  } else if (key == "slots.s") {
    slots.class_prefix_len = parse_number<std::size_t>(key, value);
  } else if (key == "slots.t") {
    slots.infix_len = parse_number<std::size_t>(key, value);
  } else if (key == "ncrapt.query_class") {
    query_class = parse_novelty_class(value);
  } else if (key == "generate.mode") {
    mode = parse_generate_mode(value);
  } else if (key == "generate.split") {
    generate_split = std::string(to_string(parse_split_name(value)));
  } else if (key == "generate.max_prompt_tokens") {
    max_prompt_tokens = parse_number<std::size_t>(key, value);
  } else if (key == "generate.template") {
    template_path = value;
  } else if (key == "eval.generations") {
    generations = value;
  } else if (key == "eval.method") {
    method = value;
  } else if (key == "eval.bert") {
    bert = parse_bool(key, value);
  } else if (key == "backend.generation_url") {
    backend.generation_url = value;
  } else if (key == "backend.embedding_url") {
    backend.embedding_url = value;
  } else if (key == "backend.tokenize_url") {
    backend.tokenize_url = value;
  } else if (key == "backend.embedding_model") {
    backend.embedding_model = value;
  } else if (key == "backend.timeout_ms") {
    backend.timeout = std::chrono::milliseconds(parse_number<std::int64_t>(key, value));
  } else if (key == "backend.max_in_flight") {
    backend.max_in_flight = parse_number<std::size_t>(key, value);
  } else if (key == "backend.retry_limit") {
    backend.retry_limit = parse_number<std::size_t>(key, value);
  } else if (key == "backend.embed_batch_size") {
    backend.embed_batch_size = parse_number<std::size_t>(key, value);
  } else if (key == "backend.bearer_token") {
    backend.bearer_token = value;
  } else {
    throw ArgumentError("unknown config key '" + std::string(raw_key) + "'");
  }
}

void PipelineConfig::validate() const {
  thresholds.validate();
  slots.validate();
  backend.validate();
  if (k == 0) throw ArgumentError("retrieval.k must be at least 1");
  if (out.empty()) throw ArgumentError("out must be set");
}

std::filesystem::path PipelineConfig::index_file() const {
  return index_path.empty() ? out / "train.emb" : index_path;
}

std::filesystem::path PipelineConfig::generations_file() const {
  return generations.empty() ? out / "generations.jsonl" : generations;
}

std::filesystem::path PipelineConfig::split_path(std::string_view split) const {
  switch (parse_split_name(split)) {
    case SplitName::Train: return train;
    case SplitName::Validation: return validation;
    case SplitName::Test: return test;
  }
  return {};
}

std::string PipelineConfig::method_label() const {
  if (!method.empty()) return method;
  switch (mode) {
    case GenerateMode::Manual: return "Manual";
    case GenerateMode::Rapt: return "RAPT";
    case GenerateMode::NcRapt: return "NC-RAPT (" + std::string(to_string(query_class)) + ")";
    case GenerateMode::Copy: return "Copy";
    case GenerateMode::GroundTruth: return "Ground-Truth";
  }
  return "unknown";
}

TextTemplate PipelineConfig::text_template() const {
  return template_path.empty() ? TextTemplate{} : load_template(template_path);
}

std::string PipelineConfig::resolved() const {
  std::map<std::string, std::string> kv = {
      {"train", train.string()},
      {"validation", validation.string()},
      {"test", test.string()},
      {"dataset", dataset},
      {"out", out.string()},
      {"seed", std::to_string(seed)},
      {"normalization.lowercase", bool_text(normalization.lowercase)},
      {"normalization.unicode", bool_text(normalization.unicode_normalize)},
      {"normalization.punctuation", bool_text(normalization.punctuation_split)},
      {"normalization.whitespace", bool_text(normalization.collapse_whitespace)},
      {"novelty.low_max", double_text(thresholds.low_max)},
      {"novelty.high_min", double_text(thresholds.high_min)},
      {"label.split", label_split},
      {"retrieval.k", std::to_string(k)},
      {"retrieval.strategy", std::string(to_string(strategy))},
      {"retrieval.index", index_path.string()},
      {"slots.m", std::to_string(slots.global_prefix_len)},
      {"slots.s", std::to_string(slots.class_prefix_len)},
      {"slots.t", std::to_string(slots.infix_len)},
      {"ncrapt.query_class", std::string(to_string(query_class))},
      {"generate.mode", std::string(to_string(mode))},
      {"generate.split", generate_split},
      {"generate.max_prompt_tokens", std::to_string(max_prompt_tokens)},
      {"generate.template", template_path.string()},
      {"eval.generations", generations.string()},
      {"eval.method", method},
      {"eval.bert", bool_text(bert)},
      {"backend.generation_url", backend.generation_url},
      {"backend.embedding_url", backend.embedding_url},
      {"backend.tokenize_url", backend.tokenize_url},
      {"backend.embedding_model", backend.embedding_model},
      {"backend.timeout_ms", std::to_string(backend.timeout.count())},
      {"backend.max_in_flight", std::to_string(backend.max_in_flight)},
      {"backend.retry_limit", std::to_string(backend.retry_limit)},
      {"backend.embed_batch_size", std::to_string(backend.embed_batch_size)},
  };
  std::string text;
  for (const auto& [key, value] : kv) text += key + " = " + value + "\n";
  if (!backend.bearer_token.empty()) text += "# backend.bearer_token is set (redacted)\n";
  return text;
}

PipelineConfig parse_pipeline_config(std::string_view text, const std::string& origin) {
  PipelineConfig cfg;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view l = trim(line);
    if (lineno == 1 && l.starts_with("\xEF\xBB\xBF")) l = trim(l.substr(3));
    if (l.empty() || l.front() == '#') continue;
    if (l.front() == '[') {
      if (l.back() != ']') throw ParseError(origin, lineno, "unterminated section header");
      section = std::string(trim(l.substr(1, l.size() - 2)));
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) throw ParseError(origin, lineno, "expected key = value");
    std::string_view value = trim(l.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    const std::string key = section.empty() ? std::string(trim(l.substr(0, eq)))
                                            : section + "." + std::string(trim(l.substr(0, eq)));
    try {
      cfg.set(key, value);
    } catch (const ArgumentError& e) {
      throw ParseError(origin, lineno, e.what());
    }
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return parse_pipeline_config(read_file(path), path.string());
}

void write_config_snapshot(const PipelineConfig& cfg, std::string_view command) {
  std::string text = cfg.resolved();
  text += "# novelty TER direction: hypothesis = target, reference = source\n";
  text += "# prompt text: soft slots realized by the text template as a discrete stand-in\n";
  write_file_atomic(cfg.out / (std::string(command) + ".config"), text);
}

}  // namespace rapt
