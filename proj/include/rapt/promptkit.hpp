#pragma once

// Prompt layouts for paraphrase generation as auto-completion.
//
// A layout is an ordered list of segments. Template segments (global
// prefix, per-example prefix, infix) normally refer to symbolic soft-slot
// id ranges that a prompt-tuned backend binds to learned embeddings; text
// segments carry the example and query tokens. The manual layout instead
// uses literal template text. Every layout obeys
//
//   GlobalPrefix? (ClassPrefix ExampleInput Infix ExampleOutput)* ClassPrefix? QueryInput Infix
//
// Soft-slot ids are allocated per layout: the global prefix takes
// [0, m) when present; each prefix/infix pair (one per novelty class in
// conditioned layouts, a single shared pair otherwise) follows it with s
// prefix ids and then t infix ids.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rapt/novelty.hpp"
#include "rapt/textcore.hpp"

namespace rapt {

struct SlotSpec {
  std::size_t global_prefix_len = 248;  // total prefix budget 256 minus s
  std::size_t class_prefix_len = 8;
  std::size_t infix_len = 8;
  /// Novelty classes with their own prefix/infix slots. Empty for
  /// non-conditioned layouts; conditioned assembly falls back to all three.
  std::vector<NoveltyClass> classes;

  void validate() const;
  /// Number of ids the slot table defines for a conditioned layout:
  /// m + C * (s + t).
  std::size_t conditioned_table_size() const;

  bool operator==(const SlotSpec&) const = default;
};

struct SlotRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  std::size_t size() const { return end - begin; }
  bool operator==(const SlotRange&) const = default;
};

/// Literal template text (manual layouts only).
struct Literal {
  std::string text;
  bool operator==(const Literal&) const = default;
};

enum class SegmentKind { GlobalPrefix, ClassPrefix, Infix, ExampleInput, ExampleOutput, QueryInput };

std::string_view to_string(SegmentKind kind);
SegmentKind parse_segment_kind(std::string_view name);

struct PromptSegment {
  SegmentKind kind;
  std::optional<NoveltyClass> novelty;  // conditioned prefixes and infixes
  std::variant<SlotRange, TokenSeq, Literal> payload;

  bool is_text_kind() const;
  bool operator==(const PromptSegment&) const = default;
};

/// A retrieved example as supplied to the assemblers.
struct PromptExample {
  std::string id;
  TokenSeq input;
  TokenSeq output;
  double similarity = 0.0;
  std::optional<NoveltyClass> novelty;
};

struct RetrievedRef {
  std::string id;
  double similarity = 0.0;
  std::optional<NoveltyClass> novelty;
  bool operator==(const RetrievedRef&) const = default;
};

enum class LayoutKind { Manual, Exemplar, Rapt, NcRapt };

std::string_view to_string(LayoutKind kind);
LayoutKind parse_layout_kind(std::string_view name);

struct PromptLayout {
  LayoutKind kind = LayoutKind::Manual;
  std::vector<PromptSegment> segments;
  SlotSpec spec;
  std::vector<RetrievedRef> retrieved;  // ascending similarity
  std::vector<RetrievedRef> dropped;    // removed to fit the prompt budget
  std::optional<NoveltyClass> query_class;

  bool operator==(const PromptLayout&) const = default;
};

class LayoutError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// "Input: <x>\nParaphrase:" with literal prefix and infix.
PromptLayout assemble_manual(const TokenSeq& x);

/// Examples followed by the query, each wrapped in the shared prefix and
/// infix slots. `examples` must be in ascending similarity order.
PromptLayout assemble_exemplar(const TokenSeq& x, std::span<const PromptExample> examples,
                               const SlotSpec& spec = {});

/// The exemplar layout behind a single global prefix.
PromptLayout assemble_rapt(const TokenSeq& x, std::span<const PromptExample> examples,
                           const SlotSpec& spec = {});

/// Global prefix, then every example wrapped in the slots of its own
/// novelty class, then the query wrapped in the slots of `query_class`.
PromptLayout assemble_ncrapt(const TokenSeq& x, std::span<const PromptExample> examples,
                             NoveltyClass query_class, const SlotSpec& spec = {});

/// Throws LayoutError when the segment sequence breaks the grammar, a
/// payload has the wrong type, or retrieved examples are out of order.
void validate_layout(const PromptLayout& layout);

/// Sum of slot-range sizes over all soft segments.
std::size_t soft_slot_occurrences(const PromptLayout& layout);
/// Number of distinct slot ids referenced.
std::size_t distinct_soft_slots(const PromptLayout& layout);

// Text realization -----------------------------------------------------------

/// Literal strings that stand in for soft slots when a backend only accepts
/// text. Tuned embeddings have no canonical text, so these are a declared
/// stand-in.
struct TextTemplate {
  std::string global_prefix = "Paraphrase each input.";
  std::string prefix = "Input:";
  std::string infix = "\nParaphrase:";
  std::string separator = "\n\n";
  std::map<NoveltyClass, std::string> class_tags = {
      {NoveltyClass::Low, " (low)"}, {NoveltyClass::Medium, " (medium)"}, {NoveltyClass::High, " (high)"}};

  bool operator==(const TextTemplate&) const = default;
};

/// key=value lines: global_prefix, prefix, infix, separator, class.low,
/// class.medium, class.high. Values understand \n, \t and \\ escapes.
TextTemplate parse_template(std::string_view text);
std::string serialize_template(const TextTemplate& tmpl);
TextTemplate load_template(const std::filesystem::path& path);

/// Deterministic text form. The final infix is the parse-back marker.
std::string render_text(const PromptLayout& layout, const TextTemplate& tmpl = {});

struct RenderedSegment {
  SegmentKind kind;
  std::optional<NoveltyClass> novelty;
  std::string text;  // input/output text; empty for template segments
};

/// Recovers the segment sequence from render_text output.
std::vector<RenderedSegment> parse_rendered(std::string_view text, const TextTemplate& tmpl = {});

// Lengths ----------------------------------------------------------------------

using TokenCounter = std::function<std::size_t(std::string_view)>;

inline constexpr std::size_t kDecodeMargin = 100;

class CounterError : public std::runtime_error {
 public:
  CounterError(std::size_t segment, const std::string& what)
      : std::runtime_error("token counter failed on segment " + std::to_string(segment) + ": " + what),
        segment_(segment) {}
  std::size_t segment() const noexcept { return segment_; }

 private:
  std::size_t segment_;
};

/// n = soft slots + backend token counts of every text and literal segment.
std::size_t layout_length(const PromptLayout& layout, const TokenCounter& counter);

/// Maximum total decoding length for a prompt of size n.
constexpr std::size_t decode_budget(std::size_t n) { return n + kDecodeMargin; }

using LayoutBuilder = std::function<PromptLayout(std::span<const PromptExample>)>;

/// Builds with all examples, then drops the least similar one at a time
/// until layout_length fits `max_prompt_tokens`. Dropped examples are
/// recorded on the layout.
PromptLayout assemble_within_budget(const LayoutBuilder& build, std::span<const PromptExample> ascending,
                                    const TokenCounter& counter, std::size_t max_prompt_tokens);

// JSON -------------------------------------------------------------------------

std::string layout_to_json(const PromptLayout& layout);
PromptLayout layout_from_json(std::string_view json);

}  // namespace rapt
