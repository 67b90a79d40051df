// rapt: novelty labeling, retrieval-augmented prompting, generation,
// evaluation and parameter accounting from the command line.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 backend error.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rapt/backend.hpp"
#include "rapt/error.hpp"
#include "rapt/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

using Overrides = std::vector<std::pair<std::string, std::string>>;

void add_override(CLI::App* app, Overrides& overrides, const std::string& flag, const std::string& key,
                  const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
}

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

void print_label(const rapt::LabelSummary& s) {
  const auto& h = s.result.histogram;
  std::cout << "labeled " << s.result.labeled.size() << " pairs -> " << s.output.string() << '\n'
            << "  low " << h[0] << "  medium " << h[1] << "  high " << h[2] << '\n';
  for (const auto& r : s.result.rejected) {
    std::cerr << "warning: pair " << r.index << " ('" << r.id << "') rejected: " << r.message << '\n';
  }
}

void print_index(const rapt::IndexSummary& s) {
  std::cout << "indexed " << s.count << " vectors of dim " << s.dim << " -> " << s.output.string() << '\n';
}

void print_generate(const rapt::GenerateSummary& s) {
  warn(s.warnings);
  std::cout << "generated " << s.records.size() << " outputs -> " << s.output.string() << '\n';
}

void print_eval(const rapt::EvalSummary& s) {
  std::cout << s.table << "report -> " << s.csv.string() << '\n';
  if (s.report.bleu_zero_match) std::cerr << "warning: BLEU has an n-gram order with no matches\n";
  if (s.report.self_bleu_zero_match) std::cerr << "warning: self-BLEU has an n-gram order with no matches\n";
  if (!s.report.self_ter_skipped.empty()) {
    std::cerr << "warning: " << s.report.self_ter_skipped.size() << " record(s) skipped by self-TER\n";
  }
  if (!s.report.bert_excluded.empty()) {
    std::cerr << "warning: " << s.report.bert_excluded.size() << " record(s) excluded from BERT\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrieval-augmented, novelty-conditioned paraphrase prompting toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides overrides;
  std::string config_path;
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  add_override(&app, overrides, "--out", "out", "Output directory");
  add_override(&app, overrides, "--seed", "seed", "Random seed");
  add_override(&app, overrides, "--normalization-lowercase", "normalization.lowercase", "true|false");
  add_override(&app, overrides, "--normalization-unicode", "normalization.unicode", "true|false (NFC)");
  add_override(&app, overrides, "--normalization-punctuation", "normalization.punctuation", "true|false");
  add_override(&app, overrides, "--normalization-whitespace", "normalization.whitespace", "true|false");
  std::vector<std::string> sets;
  app.add_option("--set", sets, "Any config key as key=value (repeatable)");

  auto add_data_flags = [&](CLI::App* sub) {
    add_override(sub, overrides, "--train", "train", "Training split (jsonl or tsv)");
    add_override(sub, overrides, "--validation", "validation", "Validation split");
    add_override(sub, overrides, "--test", "test", "Test split");
    add_override(sub, overrides, "--dataset", "dataset", "qqp-50k|qqp-140k|msrpc|parasci-acl|custom");
  };
  auto add_generate_flags = [&](CLI::App* sub) {
    add_override(sub, overrides, "--mode", "generate.mode", "manual|rapt|ncrapt|copy|ground-truth");
    add_override(sub, overrides, "--split", "generate.split", "Split to paraphrase");
    add_override(sub, overrides, "-k,--k", "retrieval.k", "Retrieved examples per prompt");
    add_override(sub, overrides, "--strategy", "retrieval.strategy", "knn|random");
    add_override(sub, overrides, "--index", "retrieval.index", "Embedding file");
    add_override(sub, overrides, "--query-class", "ncrapt.query_class", "low|medium|high");
    add_override(sub, overrides, "--max-prompt-tokens", "generate.max_prompt_tokens", "0 disables trimming");
    add_override(sub, overrides, "--template", "generate.template", "Text template file");
    add_override(sub, overrides, "--generation-url", "backend.generation_url", "Generation endpoint");
    add_override(sub, overrides, "--embedding-url", "backend.embedding_url", "Embedding endpoint");
    add_override(sub, overrides, "--max-in-flight", "backend.max_in_flight", "Concurrent requests");
  };
  auto add_eval_flags = [&](CLI::App* sub) {
    add_override(sub, overrides, "--generations", "eval.generations", "Generations JSONL");
    add_override(sub, overrides, "--method", "eval.method", "Report row label");
    sub->add_flag_callback("--no-bert", [&] { overrides.emplace_back("eval.bert", "false"); },
                           "Skip the embedding-similarity column");
  };

  auto* label = app.add_subcommand("label", "Label pairs with TER novelty classes");
  add_data_flags(label);
  add_override(label, overrides, "--label-split", "label.split", "Split to label (default train)");

  auto* index = app.add_subcommand("index", "Embed the training split and write an index file");
  add_data_flags(index);
  add_override(index, overrides, "--index", "retrieval.index", "Embedding file");
  add_override(index, overrides, "--embedding-url", "backend.embedding_url", "Embedding endpoint");

  auto* generate = app.add_subcommand("generate", "Assemble prompts and generate paraphrases");
  add_data_flags(generate);
  add_generate_flags(generate);

  auto* eval = app.add_subcommand("eval", "Score generations against references");
  add_data_flags(eval);
  add_override(eval, overrides, "--split", "generate.split", "Split the generations belong to");
  add_override(eval, overrides, "--mode", "generate.mode", "Mode used for the row label");
  add_override(eval, overrides, "--embedding-url", "backend.embedding_url", "Embedding endpoint");
  add_eval_flags(eval);

  auto* pipeline = app.add_subcommand("pipeline", "label, index, generate and eval in one run");
  add_data_flags(pipeline);
  add_generate_flags(pipeline);
  add_eval_flags(pipeline);

  auto* params = app.add_subcommand("params", "Trainable-parameter table");
  rapt::ParamsOptions popts;
  std::vector<std::string> models;
  params->add_option("--model", models, "gpt2-medium and/or gpt2-large");
  params->add_option("--layers", popts.layers, "Custom shape: layer count");
  params->add_option("--width", popts.width, "Custom shape: hidden width");
  params->add_option("--vocab", popts.vocab, "Custom shape: vocabulary size");
  params->add_option("--positions", popts.positions, "Custom shape: positions");
  bool params_csv = false;
  params->add_flag("--csv", params_csv, "Print CSV instead of a table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  rapt::PipelineConfig cfg;
  try {
    if (params->parsed()) {
      if (!models.empty()) popts.models = models;
      const auto table = rapt::cmd_params(popts);
      std::cout << (params_csv ? rapt::param_table_csv(table) : rapt::format_param_table(table));
      return kExitOk;
    }
    if (!config_path.empty()) cfg = rapt::load_pipeline_config(config_path);
    cfg.backend.apply_env_overrides();
    for (const auto& [key, value] : overrides) cfg.set(key, value);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw rapt::ArgumentError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (label->parsed()) {
      print_label(rapt::cmd_label(cfg));
    } else if (index->parsed()) {
      print_index(rapt::cmd_index(cfg, rapt::Client(cfg.backend)));
    } else if (generate->parsed()) {
      const bool pseudo = cfg.mode == rapt::GenerateMode::Copy || cfg.mode == rapt::GenerateMode::GroundTruth;
      std::optional<rapt::Client> client;
      if (!pseudo) client.emplace(cfg.backend);
      print_generate(rapt::cmd_generate(cfg, client ? &*client : nullptr));
    } else if (eval->parsed()) {
      std::optional<rapt::Client> client;
      if (cfg.bert) client.emplace(cfg.backend);
      print_eval(rapt::cmd_eval(cfg, client ? &*client : nullptr));
    } else if (pipeline->parsed()) {
      const rapt::Client client(cfg.backend);
      const auto s = rapt::cmd_pipeline(cfg, client);
      if (s.label) print_label(*s.label);
      if (s.index) print_index(*s.index);
      print_generate(s.generate);
      print_eval(s.eval);
    }
  } catch (const rapt::BackendError& e) {
    std::cerr << "backend error (" << rapt::to_string(e.kind()) << "): " << e.what() << '\n';
    return kExitBackend;
  } catch (const rapt::CounterError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return kExitBackend;
  } catch (const rapt::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}
