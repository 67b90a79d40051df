#include "rapt/promptkit.hpp"

#include <algorithm>
#include <json.hpp>
#include <set>

#include "rapt/error.hpp"

namespace rapt {

namespace {

constexpr std::pair<SegmentKind, std::string_view> kSegmentNames[] = {
    {SegmentKind::GlobalPrefix, "global_prefix"}, {SegmentKind::ClassPrefix, "class_prefix"},
    {SegmentKind::Infix, "infix"},                {SegmentKind::ExampleInput, "example_input"},
    {SegmentKind::ExampleOutput, "example_output"}, {SegmentKind::QueryInput, "query_input"},
};

constexpr std::pair<LayoutKind, std::string_view> kLayoutNames[] = {
    {LayoutKind::Manual, "manual"},
    {LayoutKind::Exemplar, "exemplar"},
    {LayoutKind::Rapt, "rapt"},
    {LayoutKind::NcRapt, "ncrapt"},
};

PromptSegment text_segment(SegmentKind kind, const TokenSeq& tokens) {
  return {kind, std::nullopt, tokens};
}

PromptSegment soft_segment(SegmentKind kind, SlotRange range, std::optional<NoveltyClass> c = std::nullopt) {
  return {kind, c, range};
}

// Slot table for one layout.
class SlotTable {
 public:
  SlotTable(const SlotSpec& spec, bool global, std::vector<NoveltyClass> classes)
      : spec_(spec), base_(global ? spec.global_prefix_len : 0), classes_(std::move(classes)) {}

  SlotRange global() const { return {0, spec_.global_prefix_len}; }
  SlotRange prefix(std::optional<NoveltyClass> c) const {
    const std::size_t start = pair_start(c);
    return {start, start + spec_.class_prefix_len};
  }
  SlotRange infix(std::optional<NoveltyClass> c) const {
    const std::size_t start = pair_start(c) + spec_.class_prefix_len;
    return {start, start + spec_.infix_len};
  }

 private:
  std::size_t pair_start(std::optional<NoveltyClass> c) const {
    if (!c) return base_;
    auto it = std::find(classes_.begin(), classes_.end(), *c);
    if (it == classes_.end()) {
      throw ArgumentError("novelty class '" + std::string(to_string(*c)) + "' has no slots in this spec");
    }
    const auto index = static_cast<std::size_t>(it - classes_.begin());
    return base_ + index * (spec_.class_prefix_len + spec_.infix_len);
  }

  const SlotSpec& spec_;
  std::size_t base_;
  std::vector<NoveltyClass> classes_;
};

void require_query(const TokenSeq& x) {
  if (x.empty()) throw ArgumentError("the input to paraphrase must not be empty");
}

void require_ascending(std::span<const PromptExample> examples) {
  for (std::size_t i = 1; i < examples.size(); ++i) {
    if (examples[i].similarity < examples[i - 1].similarity) {
      throw ArgumentError("examples must be in ascending similarity order (example " + std::to_string(i) +
                          " is less similar than example " + std::to_string(i - 1) + ")");
    }
  }
}

RetrievedRef ref_of(const PromptExample& e) { return {e.id, e.similarity, e.novelty}; }

PromptLayout assemble_slots(LayoutKind kind, const TokenSeq& x, std::span<const PromptExample> examples,
                            const SlotSpec& spec, bool global, std::optional<NoveltyClass> query_class) {
  spec.validate();
  require_query(x);
  require_ascending(examples);

  const bool conditioned = kind == LayoutKind::NcRapt;
  std::vector<NoveltyClass> classes;
  if (conditioned) {
    classes = spec.classes.empty()
                  ? std::vector<NoveltyClass>(kAllNoveltyClasses.begin(), kAllNoveltyClasses.end())
                  : spec.classes;
  }
  const SlotTable table(spec, global, classes);

  PromptLayout layout;
  layout.kind = kind;
  layout.spec = spec;
  if (conditioned) layout.spec.classes = classes;
  layout.query_class = query_class;

  if (global) layout.segments.push_back(soft_segment(SegmentKind::GlobalPrefix, table.global()));
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& e = examples[i];
    std::optional<NoveltyClass> c;
    if (conditioned) {
      if (!e.novelty) throw ArgumentError("example " + std::to_string(i) + " ('" + e.id + "') has no novelty class");
      c = e.novelty;
    }
    layout.segments.push_back(soft_segment(SegmentKind::ClassPrefix, table.prefix(c), c));
    layout.segments.push_back(text_segment(SegmentKind::ExampleInput, e.input));
    layout.segments.push_back(soft_segment(SegmentKind::Infix, table.infix(c), c));
    layout.segments.push_back(text_segment(SegmentKind::ExampleOutput, e.output));
    layout.retrieved.push_back(ref_of(e));
  }
  layout.segments.push_back(soft_segment(SegmentKind::ClassPrefix, table.prefix(query_class), query_class));
  layout.segments.push_back(text_segment(SegmentKind::QueryInput, x));
  layout.segments.push_back(soft_segment(SegmentKind::Infix, table.infix(query_class), query_class));
  return layout;
}

}  // namespace

std::string_view to_string(SegmentKind kind) {
  for (const auto& [k, name] : kSegmentNames) {
    if (k == kind) return name;
  }
  throw ArgumentError("unknown segment kind");
}

SegmentKind parse_segment_kind(std::string_view name) {
  for (const auto& [k, n] : kSegmentNames) {
    if (n == name) return k;
  }
  throw ArgumentError("unknown segment kind '" + std::string(name) + "'");
}

std::string_view to_string(LayoutKind kind) {
  for (const auto& [k, name] : kLayoutNames) {
    if (k == kind) return name;
  }
  throw ArgumentError("unknown layout kind");
}

LayoutKind parse_layout_kind(std::string_view name) {
  for (const auto& [k, n] : kLayoutNames) {
    if (n == name) return k;
  }
  throw ArgumentError("unknown layout kind '" + std::string(name) + "'");
}

bool PromptSegment::is_text_kind() const {
  return kind == SegmentKind::ExampleInput || kind == SegmentKind::ExampleOutput ||
         kind == SegmentKind::QueryInput;
}

void SlotSpec::validate() const {
  if (class_prefix_len < 1 || infix_len < 1) {
    throw ArgumentError("class prefix and infix lengths must be at least 1");
  }
  std::set<NoveltyClass> seen(classes.begin(), classes.end());
  if (seen.size() != classes.size()) throw ArgumentError("slot spec lists a novelty class twice");
}

std::size_t SlotSpec::conditioned_table_size() const {
  const std::size_t c = classes.empty() ? kAllNoveltyClasses.size() : classes.size();
  return global_prefix_len + c * (class_prefix_len + infix_len);
}

PromptLayout assemble_manual(const TokenSeq& x) {
  require_query(x);
  const TextTemplate defaults;
  PromptLayout layout;
  layout.kind = LayoutKind::Manual;
  layout.segments = {
      {SegmentKind::ClassPrefix, std::nullopt, Literal{defaults.prefix}},
      text_segment(SegmentKind::QueryInput, x),
      {SegmentKind::Infix, std::nullopt, Literal{defaults.infix}},
  };
  return layout;
}

PromptLayout assemble_exemplar(const TokenSeq& x, std::span<const PromptExample> examples, const SlotSpec& spec) {
  return assemble_slots(LayoutKind::Exemplar, x, examples, spec, false, std::nullopt);
}

PromptLayout assemble_rapt(const TokenSeq& x, std::span<const PromptExample> examples, const SlotSpec& spec) {
  return assemble_slots(LayoutKind::Rapt, x, examples, spec, true, std::nullopt);
}

PromptLayout assemble_ncrapt(const TokenSeq& x, std::span<const PromptExample> examples,
                             NoveltyClass query_class, const SlotSpec& spec) {
  return assemble_slots(LayoutKind::NcRapt, x, examples, spec, true, query_class);
}

void validate_layout(const PromptLayout& layout) {
  const auto& segs = layout.segments;
  std::size_t i = 0;
  auto fail = [&](const std::string& why) {
    throw LayoutError("segment " + std::to_string(i) + ": " + why);
  };
  auto expect = [&](SegmentKind kind) {
    if (i >= segs.size()) fail("expected " + std::string(to_string(kind)) + ", layout ended");
    if (segs[i].kind != kind) {
      fail("expected " + std::string(to_string(kind)) + ", found " + std::string(to_string(segs[i].kind)));
    }
    const bool text_payload = std::holds_alternative<TokenSeq>(segs[i].payload);
    if (segs[i].is_text_kind() != text_payload) fail("payload type does not match segment kind");
    ++i;
  };

  if (i < segs.size() && segs[i].kind == SegmentKind::GlobalPrefix) expect(SegmentKind::GlobalPrefix);
  // Example blocks are recognized by lookahead: a prefix followed by an
  // example input.
  while (i + 1 < segs.size() && segs[i].kind == SegmentKind::ClassPrefix &&
         segs[i + 1].kind == SegmentKind::ExampleInput) {
    expect(SegmentKind::ClassPrefix);
    expect(SegmentKind::ExampleInput);
    expect(SegmentKind::Infix);
    expect(SegmentKind::ExampleOutput);
  }
  if (i < segs.size() && segs[i].kind == SegmentKind::ClassPrefix) expect(SegmentKind::ClassPrefix);
  expect(SegmentKind::QueryInput);
  expect(SegmentKind::Infix);
  if (i != segs.size()) fail("trailing segments after the query infix");

  for (std::size_t r = 1; r < layout.retrieved.size(); ++r) {
    if (layout.retrieved[r].similarity < layout.retrieved[r - 1].similarity) {
      throw LayoutError("retrieved examples are not in ascending similarity order");
    }
  }
}

std::size_t soft_slot_occurrences(const PromptLayout& layout) {
  std::size_t total = 0;
  for (const auto& seg : layout.segments) {
    if (const auto* r = std::get_if<SlotRange>(&seg.payload)) total += r->size();
  }
  return total;
}

std::size_t distinct_soft_slots(const PromptLayout& layout) {
  // Ranges are few; merge them as intervals.
  std::vector<SlotRange> ranges;
  for (const auto& seg : layout.segments) {
    if (const auto* r = std::get_if<SlotRange>(&seg.payload)) ranges.push_back(*r);
  }
  std::sort(ranges.begin(), ranges.end(),
            [](const SlotRange& a, const SlotRange& b) { return a.begin < b.begin; });
  std::size_t total = 0, covered_to = 0;
  for (const auto& r : ranges) {
    const std::size_t from = std::max(r.begin, covered_to);
    if (r.end > from) total += r.end - from;
    covered_to = std::max(covered_to, r.end);
  }
  return total;
}

std::size_t layout_length(const PromptLayout& layout, const TokenCounter& counter) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < layout.segments.size(); ++i) {
    const auto& seg = layout.segments[i];
    if (const auto* r = std::get_if<SlotRange>(&seg.payload)) {
      n += r->size();
      continue;
    }
    const std::string text = std::holds_alternative<TokenSeq>(seg.payload)
                                 ? std::get<TokenSeq>(seg.payload).render()
                                 : std::get<Literal>(seg.payload).text;
    try {
      n += counter(text);
    } catch (const std::exception& e) {
      throw CounterError(i, e.what());
    }
  }
  return n;
}

PromptLayout assemble_within_budget(const LayoutBuilder& build, std::span<const PromptExample> ascending,
                                    const TokenCounter& counter, std::size_t max_prompt_tokens) {
  std::size_t first = 0;
  for (;;) {
    PromptLayout layout = build(ascending.subspan(first));
    if (first == ascending.size() || layout_length(layout, counter) <= max_prompt_tokens) {
      for (std::size_t d = 0; d < first; ++d) layout.dropped.push_back(ref_of(ascending[d]));
      return layout;
    }
    ++first;
  }
}

// JSON ---------------------------------------------------------------------------

namespace {

nlohmann::json ref_json(const RetrievedRef& r) {
  nlohmann::json j{{"id", r.id}, {"similarity", r.similarity}};
  if (r.novelty) j["class"] = to_string(*r.novelty);
  return j;
}

RetrievedRef ref_from(const nlohmann::json& j) {
  RetrievedRef r{j.at("id").get<std::string>(), j.at("similarity").get<double>(), std::nullopt};
  if (j.contains("class")) r.novelty = parse_novelty_class(j.at("class").get<std::string>());
  return r;
}

}  // namespace

std::string layout_to_json(const PromptLayout& layout) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& seg : layout.segments) {
    nlohmann::json j{{"kind", to_string(seg.kind)}};
    if (seg.novelty) j["class"] = to_string(*seg.novelty);
    if (const auto* r = std::get_if<SlotRange>(&seg.payload)) {
      j["slots"] = {r->begin, r->end};
    } else if (const auto* t = std::get_if<TokenSeq>(&seg.payload)) {
      j["tokens"] = t->tokens();
    } else {
      j["literal"] = std::get<Literal>(seg.payload).text;
    }
    segs.push_back(std::move(j));
  }
  nlohmann::json classes = nlohmann::json::array();
  for (NoveltyClass c : layout.spec.classes) classes.push_back(to_string(c));
  nlohmann::json retrieved = nlohmann::json::array(), dropped = nlohmann::json::array();
  for (const auto& r : layout.retrieved) retrieved.push_back(ref_json(r));
  for (const auto& r : layout.dropped) dropped.push_back(ref_json(r));

  nlohmann::json out{
      {"kind", to_string(layout.kind)},
      {"spec",
       {{"global_prefix_len", layout.spec.global_prefix_len},
        {"class_prefix_len", layout.spec.class_prefix_len},
        {"infix_len", layout.spec.infix_len},
        {"classes", classes}}},
      {"segments", segs},
      {"retrieved", retrieved},
      {"dropped", dropped},
  };
  if (layout.query_class) out["query_class"] = to_string(*layout.query_class);
  return out.dump();
}

PromptLayout layout_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    PromptLayout layout;
    layout.kind = parse_layout_kind(j.at("kind").get<std::string>());
    const auto& spec = j.at("spec");
    layout.spec.global_prefix_len = spec.at("global_prefix_len").get<std::size_t>();
    layout.spec.class_prefix_len = spec.at("class_prefix_len").get<std::size_t>();
    layout.spec.infix_len = spec.at("infix_len").get<std::size_t>();
    for (const auto& c : spec.at("classes")) layout.spec.classes.push_back(parse_novelty_class(c.get<std::string>()));
    for (const auto& s : j.at("segments")) {
      PromptSegment seg{parse_segment_kind(s.at("kind").get<std::string>()), std::nullopt, Literal{}};
      if (s.contains("class")) seg.novelty = parse_novelty_class(s.at("class").get<std::string>());
      if (s.contains("slots")) {
        const auto range = s.at("slots").get<std::vector<std::size_t>>();
        if (range.size() != 2 || range[0] > range[1]) throw DataError("slot range must be [begin, end]");
        seg.payload = SlotRange{range[0], range[1]};
      } else if (s.contains("tokens")) {
        seg.payload = TokenSeq(s.at("tokens").get<std::vector<std::string>>());
      } else {
        seg.payload = Literal{s.at("literal").get<std::string>()};
      }
      layout.segments.push_back(std::move(seg));
    }
    for (const auto& r : j.at("retrieved")) layout.retrieved.push_back(ref_from(r));
    for (const auto& r : j.at("dropped")) layout.dropped.push_back(ref_from(r));
    if (j.contains("query_class")) layout.query_class = parse_novelty_class(j.at("query_class").get<std::string>());
    return layout;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid layout JSON: ") + e.what());
  }
}

}  // namespace rapt
