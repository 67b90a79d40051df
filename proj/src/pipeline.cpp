#include "rapt/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>
#include <unordered_map>

#include "rapt/error.hpp"
#include "rapt/fileio.hpp"
#include "rapt/retrieval.hpp"

namespace rapt {

namespace {

DatasetSplit load_split(const PipelineConfig& cfg, std::string_view split, bool allow_empty_target = false) {
  const auto path = cfg.split_path(split);
  if (path.empty()) throw ArgumentError("no path configured for the " + std::string(split) + " split");
  return load_pairs(path, format_for_path(path), parse_split_name(split), LoadOptions{allow_empty_target});
}

std::vector<std::string> sources_of(std::span<const ParaphrasePair> pairs) {
  std::vector<std::string> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.source);
  return out;
}

std::vector<EmbeddingEntry> embed_pairs(std::span<const ParaphrasePair> pairs, const Client& client) {
  if (pairs.empty()) return {};
  const auto vectors = client.embed(sources_of(pairs));
  std::vector<EmbeddingEntry> entries;
  entries.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) entries.push_back({pairs[i].id, vectors[i]});
  return entries;
}

// Pairs the training set with its stored embeddings, or embeds it when no
// index file exists yet.
std::vector<EmbeddingEntry> train_embeddings(const PipelineConfig& cfg, std::span<const ParaphrasePair> train,
                                             const Client& client, std::vector<std::string>& warnings) {
  if (train.empty()) return {};
  const auto path = cfg.index_file();
  if (!std::filesystem::exists(path)) {
    warnings.push_back("index " + path.string() + " not found; embedding the training split in memory");
    return embed_pairs(train, client);
  }
  auto entries = load_embeddings_binary(path, default_ids_path(path));
  if (entries.size() != train.size()) {
    throw DataError("index " + path.string() + " holds " + std::to_string(entries.size()) +
                    " vectors but the training split has " + std::to_string(train.size()) + " pairs");
  }
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (entries[i].id != train[i].id) {
      throw DataError("index " + path.string() + " entry " + std::to_string(i) + " has id '" + entries[i].id +
                      "' but the training split has '" + train[i].id + "'");
    }
  }
  return entries;
}

PromptLayout build_layout(GenerateMode mode, const TokenSeq& x, std::span<const PromptExample> examples,
                          const PipelineConfig& cfg) {
  switch (mode) {
    case GenerateMode::Manual: return assemble_manual(x);
    case GenerateMode::Rapt: return assemble_rapt(x, examples, cfg.slots);
    case GenerateMode::NcRapt: return assemble_ncrapt(x, examples, cfg.query_class, cfg.slots);
    default: throw ArgumentError("mode " + std::string(to_string(mode)) + " builds no prompt");
  }
}

}  // namespace

LabelSummary cmd_label(const PipelineConfig& cfg) {
  cfg.validate();
  const DatasetSplit split = load_split(cfg, cfg.label_split);
  LabelSummary summary;
  summary.result = label_dataset(split.pairs, cfg.normalization, cfg.thresholds);
  summary.output = cfg.out / ("labeled." + cfg.label_split + ".jsonl");
  write_labeled(summary.output, summary.result.labeled);
  write_config_snapshot(cfg, "label");
  return summary;
}

IndexSummary cmd_index(const PipelineConfig& cfg, const Client& client) {
  cfg.validate();
  const DatasetSplit train = load_split(cfg, "train");
  if (train.pairs.empty()) throw DataError("training split " + cfg.train.string() + " is empty");
  const auto entries = embed_pairs(train.pairs, client);
  // Builds the index once to reject zero-norm vectors before saving.
  std::vector<std::pair<ParaphrasePair, EmbeddingVector>> records;
  for (std::size_t i = 0; i < entries.size(); ++i) records.emplace_back(train.pairs[i], entries[i].vector);
  const auto index = RetrievalIndex::build(std::move(records));

  IndexSummary summary;
  summary.output = cfg.index_file();
  summary.count = index.size();
  summary.dim = index.dim();
  save_embeddings_binary(summary.output, default_ids_path(summary.output), entries);
  write_config_snapshot(cfg, "index");
  return summary;
}

GenerateSummary cmd_generate(const PipelineConfig& cfg, const Client* client) {
  cfg.validate();
  const bool pseudo = cfg.mode == GenerateMode::Copy || cfg.mode == GenerateMode::GroundTruth;
  const DatasetSplit queries = load_split(cfg, cfg.generate_split, cfg.mode != GenerateMode::GroundTruth);

  GenerateSummary summary;
  summary.output = cfg.generations_file();

  if (pseudo) {
    for (const auto& p : queries.pairs) {
      summary.records.push_back({p.id, 0, cfg.mode == GenerateMode::Copy ? p.source : p.target});
    }
    write_generations(summary.output, summary.records);
    write_config_snapshot(cfg, "generate");
    return summary;
  }
  if (client == nullptr) throw ArgumentError("mode " + std::string(to_string(cfg.mode)) + " needs a backend");

  const TextTemplate tmpl = cfg.text_template();
  const TokenCounter counter = client->token_counter();
  const bool retrieves = cfg.mode == GenerateMode::Rapt || cfg.mode == GenerateMode::NcRapt;

  // Retrieval index over the training split.
  std::optional<RetrievalIndex> index;
  std::unordered_map<std::string, NoveltyClass> classes;
  std::vector<EmbeddingVector> query_vectors;
  if (retrieves) {
    DatasetSplit train;
    if (cfg.train.empty()) {
      summary.warnings.push_back("no training split configured; prompts carry no examples");
    } else {
      train = load_split(cfg, "train");
    }
    const auto entries = train_embeddings(cfg, train.pairs, *client, summary.warnings);

    std::set<std::string> keep;
    if (cfg.mode == GenerateMode::NcRapt) {
      const auto labels = label_dataset(train.pairs, cfg.normalization, cfg.thresholds);
      for (const auto& l : labels.labeled) {
        classes.emplace(l.pair.id, l.novelty);
        keep.insert(l.pair.id);
      }
      for (const auto& r : labels.rejected) {
        summary.warnings.push_back("training pair '" + r.id + "' left out of the index: " + r.message);
      }
    }
    std::vector<std::pair<ParaphrasePair, EmbeddingVector>> records;
    for (std::size_t i = 0; i < train.pairs.size(); ++i) {
      if (cfg.mode == GenerateMode::NcRapt && !keep.contains(train.pairs[i].id)) continue;
      records.emplace_back(train.pairs[i], entries[i].vector);
    }
    index = RetrievalIndex::build(std::move(records));
    if (index->empty()) {
      summary.warnings.push_back("retrieval index is empty; prompts carry no examples");
    } else if (!queries.pairs.empty()) {
      query_vectors = client->embed(sources_of(queries.pairs));
    }
  }

  const bool self_exclude = cfg.generate_split == "train";
  std::vector<GenerationRequest> requests;
  requests.reserve(queries.pairs.size());
  for (std::size_t q = 0; q < queries.pairs.size(); ++q) {
    const auto& pair = queries.pairs[q];
    const TokenSeq x = normalize(pair.source, cfg.normalization);
    if (x.empty()) throw DataError("query '" + pair.id + "' is empty after normalization");

    std::vector<PromptExample> ascending;
    if (index && !index->empty()) {
      const std::set<std::string> exclude = self_exclude ? std::set<std::string>{pair.id} : std::set<std::string>{};
      const auto hits = cfg.strategy == RetrievalStrategy::Knn
                            ? index->query_knn(query_vectors[q], cfg.k, exclude)
                            : index->query_random(query_vectors[q], cfg.k, exclude, cfg.seed + q);
      for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
        const auto& rec = *it->record;
        std::optional<NoveltyClass> novelty;
        if (const auto c = classes.find(rec.id); c != classes.end()) novelty = c->second;
        ascending.push_back({rec.id, normalize(rec.pair.source, cfg.normalization),
                             normalize(rec.pair.target, cfg.normalization), it->similarity, novelty});
      }
    }

    const LayoutBuilder build = [&](std::span<const PromptExample> ex) {
      return build_layout(cfg.mode, x, ex, cfg);
    };
    PromptLayout layout = cfg.max_prompt_tokens > 0
                              ? assemble_within_budget(build, ascending, counter, cfg.max_prompt_tokens)
                              : build(ascending);
    if (!layout.dropped.empty()) {
      summary.warnings.push_back("query '" + pair.id + "': dropped " + std::to_string(layout.dropped.size()) +
                                 " example(s) to fit the prompt budget");
    }
    const std::size_t n = layout_length(layout, counter);

    GenerationRequest req;
    req.prompt = render_text(layout, tmpl);
    req.max_new_tokens = decode_budget(n) - n;
    req.stop = {"\n"};
    req.layout_json = layout_to_json(layout);
    req.prompt_n = n;
    requests.push_back(std::move(req));
  }

  const auto outcomes = client->generate_all(requests);
  std::string log;
  for (std::size_t q = 0; q < outcomes.size(); ++q) {
    const auto& pair = queries.pairs[q];
    if (outcomes[q].error) {
      const auto& e = *outcomes[q].error;
      throw BackendError(e.kind(), "query '" + pair.id + "': " + e.what(), e.attempts(), e.prompt_n());
    }
    const auto& req = requests[q];
    std::string output;
    try {
      output = parse_completion(req.prompt + outcomes[q].response->text, tmpl, cfg.normalization).render();
    } catch (const CompletionError& e) {
      summary.warnings.push_back("query '" + pair.id + "': " + e.what() + "; recorded an empty output");
    }
    summary.records.push_back({pair.id, req.prompt_n, std::move(output)});

    nlohmann::json entry = {{"id", pair.id},
                            {"prompt", req.prompt},
                            {"prompt_n", req.prompt_n},
                            {"max_new_tokens", req.max_new_tokens},
                            {"slot_realization", "text-template"},
                            {"layout", nlohmann::json::parse(*req.layout_json)}};
    log += entry.dump();
    log += '\n';
  }

  write_generations(summary.output, summary.records);
  summary.requests = cfg.out / "requests.jsonl";
  write_file_atomic(summary.requests, log);
  write_config_snapshot(cfg, "generate");
  return summary;
}

EvalSummary cmd_eval(const PipelineConfig& cfg, const Client* client) {
  cfg.validate();
  const DatasetSplit split = load_split(cfg, cfg.generate_split);
  const auto generations = load_generations(cfg.generations_file());

  std::unordered_map<std::string, const GenerationRecord*> by_id;
  for (const auto& g : generations) by_id.emplace(g.id, &g);

  std::vector<EvalRecord> records;
  std::vector<std::string> sources;
  std::vector<std::string> predictions;
  records.reserve(split.pairs.size());
  for (const auto& p : split.pairs) {
    const auto it = by_id.find(p.id);
    if (it == by_id.end()) throw DataError("no generation for id '" + p.id + "'");
    records.push_back({normalize(p.source, cfg.normalization), normalize(it->second->output, cfg.normalization),
                       {normalize(p.target, cfg.normalization)}});
    sources.push_back(p.source);
    predictions.push_back(it->second->output);
  }
  if (generations.size() != split.pairs.size()) {
    throw DataError(std::to_string(generations.size() - split.pairs.size()) +
                    " generation(s) have no matching " + cfg.generate_split + " pair");
  }

  std::vector<VectorPair> vectors;
  if (cfg.bert && !records.empty()) {
    if (client == nullptr) throw ArgumentError("eval.bert needs an embedding backend");
    const auto src = client->embed(sources);
    // Empty outputs cannot be embedded; they score as zero vectors and are
    // excluded from the BERT column.
    std::vector<std::string> nonempty;
    for (const auto& s : predictions) {
      if (!s.empty()) nonempty.push_back(s);
    }
    std::vector<EmbeddingVector> pred_vecs;
    if (!nonempty.empty()) pred_vecs = client->embed(nonempty);
    std::size_t next = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      EmbeddingVector pv = predictions[i].empty() ? EmbeddingVector(src[i].size(), 0.0) : pred_vecs[next++];
      vectors.push_back({src[i], std::move(pv)});
    }
  }

  EvalSummary summary;
  summary.method = cfg.method_label();
  summary.report = evaluate_all(records, vectors, cfg.normalization);
  const ReportRows rows = {{summary.method, summary.report}};
  summary.table = report_table(rows);
  summary.csv = cfg.out / "report.csv";
  write_report_csv(summary.csv, rows);
  write_config_snapshot(cfg, "eval");
  return summary;
}

ParamTable cmd_params(const ParamsOptions& opts) {
  std::vector<ModelShape> shapes;
  if (opts.layers || opts.width) {
    if (!opts.layers || !opts.width) throw ArgumentError("custom shapes need both layers and width");
    shapes.push_back(ModelShape::custom(*opts.layers, *opts.width, opts.vocab.value_or(50257),
                                        opts.positions.value_or(1024)));
  } else {
    for (const auto& m : opts.models) {
      if (m == "gpt2-medium") {
        shapes.push_back(ModelShape::gpt2_medium());
      } else if (m == "gpt2-large") {
        shapes.push_back(ModelShape::gpt2_large());
      } else {
        throw ArgumentError("unknown model preset '" + m + "' (expected gpt2-medium or gpt2-large)");
      }
    }
  }
  return report_table(shapes, default_methods());
}

PipelineSummary cmd_pipeline(const PipelineConfig& cfg, const Client& client) {
  PipelineSummary summary;
  const bool retrieves = cfg.mode == GenerateMode::Rapt || cfg.mode == GenerateMode::NcRapt;
  if (cfg.mode == GenerateMode::NcRapt && !cfg.train.empty()) summary.label = cmd_label(cfg);
  if (retrieves && !cfg.train.empty() && !load_split(cfg, "train").pairs.empty()) {
    summary.index = cmd_index(cfg, client);
  }
  summary.generate = cmd_generate(cfg, &client);
  summary.eval = cmd_eval(cfg, &client);
  write_config_snapshot(cfg, "pipeline");
  return summary;
}

}  // namespace rapt
