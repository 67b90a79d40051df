#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rapt/textcore.hpp"
#include "rapt/types.hpp"

namespace rapt {

/// Lexical novelty of a paraphrase relative to its input. Ordered.
enum class NoveltyClass { Low = 0, Medium = 1, High = 2 };

inline constexpr std::array<NoveltyClass, 3> kAllNoveltyClasses = {
    NoveltyClass::Low, NoveltyClass::Medium, NoveltyClass::High};

/// "low" / "medium" / "high".
std::string_view to_string(NoveltyClass c);
/// Case-insensitive inverse of to_string; throws ArgumentError otherwise.
NoveltyClass parse_novelty_class(std::string_view name);

struct NoveltyThresholds {
  double low_max = 0.2;   // TER <= low_max is Low
  double high_min = 0.4;  // TER >= high_min is High

  /// Throws ArgumentError unless 0 < low_max < high_min.
  void validate() const;
};

NoveltyClass classify(double ter_value, const NoveltyThresholds& thresholds = {});

struct LabeledPair {
  ParaphrasePair pair;
  double ter = 0.0;
  NoveltyClass novelty = NoveltyClass::Low;
};

struct LabelingError {
  std::size_t index;
  std::string id;
  std::string message;
};

struct LabelingResult {
  std::vector<LabeledPair> labeled;
  std::vector<LabelingError> rejected;
  std::array<std::size_t, 3> histogram{};  // indexed by NoveltyClass
};

/// Scores TER(target, source): the paraphrase is the hypothesis and the
/// input the reference. Pairs whose normalized source is empty are
/// rejected and the run continues.
LabelingResult label_dataset(std::span<const ParaphrasePair> pairs, const NormalizationConfig& cfg = {},
                             const NoveltyThresholds& thresholds = {});

}  // namespace rapt
