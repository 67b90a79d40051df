#include "rapt/dataio.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_map>

#include "rapt/error.hpp"
#include "rapt/fileio.hpp"

namespace rapt {

namespace {

using nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

json parse_object(const std::string& line, const std::string& where, std::size_t lineno) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(where, lineno, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(where, lineno, "expected a JSON object");
  return obj;
}

std::string string_field(const json& obj, const char* key, const std::string& where, std::size_t lineno) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where, lineno, std::string("missing field '") + key + "'");
  if (!it->is_string()) throw ParseError(where, lineno, std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

std::optional<std::string> id_field(const json& obj, const std::string& where, std::size_t lineno) {
  const auto it = obj.find("id");
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return it->dump();
  throw ParseError(where, lineno, "field 'id' is neither a string nor an integer");
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return cols;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

// RFC 4180 records; quoted fields may contain commas, quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text, const std::string& where) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t lineno = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++lineno;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) throw ParseError(where, lineno, "quote inside an unquoted field");
        quoted = true;
        field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
        break;
      case '\r':
        break;
      case '\n':
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
        rows.push_back(std::move(row));
        row.clear();
        ++lineno;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (quoted) throw ParseError(where, lineno, "unterminated quoted field");
  if (field_started || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<double> parse_cell(const std::string& cell, const std::string& where, std::size_t row) {
  if (cell.empty()) return std::nullopt;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != cell.size()) throw ParseError(where, row, "not a number: '" + cell + "'");
  return v;
}

}  // namespace

PairFormat format_for_path(const std::filesystem::path& path) {
  return lower(path.extension().string()) == ".tsv" ? PairFormat::Tsv : PairFormat::Jsonl;
}

PairFormat parse_pair_format(std::string_view name) {
  const std::string n = lower(name);
  if (n == "jsonl") return PairFormat::Jsonl;
  if (n == "tsv") return PairFormat::Tsv;
  throw ArgumentError("unknown pair format '" + std::string(name) + "' (expected jsonl or tsv)");
}

std::string_view to_string(SplitName name) {
  switch (name) {
    case SplitName::Train: return "train";
    case SplitName::Validation: return "validation";
    case SplitName::Test: return "test";
  }
  return "unknown";
}

SplitName parse_split_name(std::string_view name) {
  const std::string n = lower(name);
  if (n == "train") return SplitName::Train;
  if (n == "validation" || n == "valid" || n == "dev") return SplitName::Validation;
  if (n == "test") return SplitName::Test;
  throw ArgumentError("unknown split '" + std::string(name) + "'");
}

DatasetSplit load_pairs(const std::filesystem::path& path, PairFormat format, SplitName name,
                        const LoadOptions& opts) {
  const std::string where = path.string();
  const auto lines = read_lines(path);

  DatasetSplit split;
  split.name = name;
  std::unordered_map<std::string, std::size_t> seen;  // id -> line

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const std::string& line = lines[i];
    if (blank(line)) continue;

    std::optional<std::string> id;
    ParaphrasePair pair;
    if (format == PairFormat::Jsonl) {
      const json obj = parse_object(line, where, lineno);
      id = id_field(obj, where, lineno);
      pair.source = string_field(obj, "source", where, lineno);
      if (obj.contains("target") || !opts.allow_empty_target) {
        pair.target = string_field(obj, "target", where, lineno);
      }
    } else {
      auto cols = split_tabs(line);
      if (cols.size() == 3) {
        id = std::move(cols[0]);
        cols.erase(cols.begin());
      } else if (cols.size() != 2) {
        throw ParseError(where, lineno,
                         "expected 2 or 3 tab-separated columns, got " + std::to_string(cols.size()));
      }
      pair.source = std::move(cols[0]);
      pair.target = std::move(cols[1]);
    }

    if (blank(pair.source)) throw ParseError(where, lineno, "empty source");
    if (!opts.allow_empty_target && blank(pair.target)) throw ParseError(where, lineno, "empty target");
    pair.id = id ? *id : std::to_string(split.pairs.size());
    if (pair.id.empty()) throw ParseError(where, lineno, "empty id");
    if (const auto [it, fresh] = seen.emplace(pair.id, lineno); !fresh) {
      throw ParseError(where, lineno,
                       "duplicate id '" + pair.id + "' (first seen on line " + std::to_string(it->second) + ")");
    }
    split.pairs.push_back(std::move(pair));
  }
  return split;
}

std::string pairs_to_jsonl(std::span<const ParaphrasePair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += json{{"id", p.id}, {"source", p.source}, {"target", p.target}}.dump();
    out += '\n';
  }
  return out;
}

void write_pairs(const std::filesystem::path& path, std::span<const ParaphrasePair> pairs) {
  write_file_atomic(path, pairs_to_jsonl(pairs));
}

// Split sizes --------------------------------------------------------------------

std::vector<std::string> known_datasets() { return {"qqp-50k", "qqp-140k", "msrpc", "parasci-acl", "custom"}; }

std::optional<std::array<std::size_t, 3>> expected_split_sizes(std::string_view dataset) {
  const std::string n = lower(dataset);
  if (n == "qqp-50k") return std::array<std::size_t, 3>{46'000, 4'000, 4'000};
  if (n == "qqp-140k") return std::array<std::size_t, 3>{134'206, 5'255, 5'255};
  if (n == "msrpc") return std::array<std::size_t, 3>{2'203, 550, 1'147};
  if (n == "parasci-acl") return std::array<std::size_t, 3>{28'883, 2'753, 2'345};
  if (n == "custom") return std::nullopt;
  throw ArgumentError("unknown dataset '" + std::string(dataset) + "'");
}

bool SplitSizeReport::all_match() const {
  return std::all_of(checks.begin(), checks.end(), [](const SplitCheck& c) { return c.matches(); });
}

std::string SplitSizeReport::describe() const {
  std::ostringstream out;
  out << "dataset " << dataset;
  if (informational) out << " (custom, no reference sizes)";
  out << '\n';
  for (const auto& c : checks) {
    out << "  " << to_string(c.name) << ": " << c.actual;
    if (c.expected) out << " (expected " << *c.expected << ")" << (c.matches() ? " ok" : " MISMATCH");
    out << '\n';
  }
  return out.str();
}

SplitSizeReport validate_split_sizes(std::span<const DatasetSplit> splits, std::string_view dataset) {
  const auto expected = expected_split_sizes(dataset);
  SplitSizeReport report;
  report.dataset = lower(dataset);
  report.informational = !expected;
  for (const auto& s : splits) {
    SplitCheck check{s.name, s.pairs.size(), s.expected_size};
    if (expected) check.expected = (*expected)[static_cast<std::size_t>(s.name)];
    report.checks.push_back(check);
  }
  return report;
}

// Output records -----------------------------------------------------------------

std::string labeled_to_jsonl(std::span<const LabeledPair> labeled) {
  std::string out;
  for (const auto& l : labeled) {
    out += json{{"id", l.pair.id},
                {"source", l.pair.source},
                {"target", l.pair.target},
                {"ter", l.ter},
                {"class", std::string(to_string(l.novelty))}}
               .dump();
    out += '\n';
  }
  return out;
}

void write_labeled(const std::filesystem::path& path, std::span<const LabeledPair> labeled) {
  write_file_atomic(path, labeled_to_jsonl(labeled));
}

std::vector<LabeledPair> load_labeled(const std::filesystem::path& path) {
  const std::string where = path.string();
  const auto lines = read_lines(path);
  std::vector<LabeledPair> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const json obj = parse_object(lines[i], where, i + 1);
    LabeledPair l;
    l.pair.id = string_field(obj, "id", where, i + 1);
    l.pair.source = string_field(obj, "source", where, i + 1);
    l.pair.target = string_field(obj, "target", where, i + 1);
    const auto ter = obj.find("ter");
    if (ter == obj.end() || !ter->is_number() || ter->get<double>() < 0.0) {
      throw ParseError(where, i + 1, "field 'ter' must be a non-negative number");
    }
    l.ter = ter->get<double>();
    try {
      l.novelty = parse_novelty_class(string_field(obj, "class", where, i + 1));
    } catch (const ArgumentError& e) {
      throw ParseError(where, i + 1, e.what());
    }
    out.push_back(std::move(l));
  }
  return out;
}

std::string generations_to_jsonl(std::span<const GenerationRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += json{{"id", r.id}, {"prompt_n", r.prompt_n}, {"output", r.output}}.dump();
    out += '\n';
  }
  return out;
}

void write_generations(const std::filesystem::path& path, std::span<const GenerationRecord> records) {
  write_file_atomic(path, generations_to_jsonl(records));
}

std::vector<GenerationRecord> load_generations(const std::filesystem::path& path) {
  const std::string where = path.string();
  const auto lines = read_lines(path);
  std::vector<GenerationRecord> out;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const json obj = parse_object(lines[i], where, i + 1);
    GenerationRecord r;
    r.id = string_field(obj, "id", where, i + 1);
    r.output = string_field(obj, "output", where, i + 1);
    const auto n = obj.find("prompt_n");
    if (n == obj.end() || !n->is_number_unsigned()) {
      throw ParseError(where, i + 1, "field 'prompt_n' must be a non-negative integer");
    }
    r.prompt_n = n->get<std::size_t>();
    if (!seen.emplace(r.id, i + 1).second) throw ParseError(where, i + 1, "duplicate id '" + r.id + "'");
    out.push_back(std::move(r));
  }
  return out;
}

void write_report_csv(const std::filesystem::path& path, const ReportRows& rows) {
  write_file_atomic(path, report_csv(rows));
}

ReportRows load_report_csv(const std::filesystem::path& path) {
  const std::string where = path.string();
  const auto rows = parse_csv(read_file(path), where);
  static const std::vector<std::string> header = {"method", "BERT", "Self-TER", "Self-BLEU", "BLEU",
                                                  "iBLEU",  "SARI", "normalization", "corpus_size"};
  if (rows.empty() || rows.front() != header) throw ParseError(where, 1, "unexpected report header");

  ReportRows out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != header.size()) {
      throw ParseError(where, r + 1, "expected " + std::to_string(header.size()) + " columns");
    }
    MetricReport m;
    m.bert = parse_cell(row[1], where, r + 1);
    auto required = [&](std::size_t col) {
      const auto v = parse_cell(row[col], where, r + 1);
      if (!v) throw ParseError(where, r + 1, "empty " + header[col] + " cell");
      return *v;
    };
    m.self_ter = required(2);
    m.self_bleu = required(3);
    m.bleu = required(4);
    m.ibleu = required(5);
    m.sari = required(6);
    try {
      m.normalization = parse_normalization(row[7]);
      m.corpus_size = static_cast<std::size_t>(std::stoull(row[8]));
    } catch (const std::exception& e) {
      throw ParseError(where, r + 1, e.what());
    }
    out.emplace_back(row[0], std::move(m));
  }
  return out;
}

}  // namespace rapt
