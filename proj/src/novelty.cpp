#include "rapt/novelty.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "rapt/error.hpp"
#include "rapt/metrics.hpp"

namespace rapt {

std::string_view to_string(NoveltyClass c) {
  switch (c) {
    case NoveltyClass::Low: return "low";
    case NoveltyClass::Medium: return "medium";
    case NoveltyClass::High: return "high";
  }
  throw ArgumentError("unknown novelty class");
}

NoveltyClass parse_novelty_class(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  for (NoveltyClass c : kAllNoveltyClasses) {
    if (lower == to_string(c)) return c;
  }
  if (lower == "med") return NoveltyClass::Medium;
  throw ArgumentError("unknown novelty class '" + std::string(name) + "'");
}

void NoveltyThresholds::validate() const {
  if (!(low_max > 0.0 && low_max < high_min)) {
    throw ArgumentError("novelty thresholds must satisfy 0 < low_max < high_min");
  }
}

NoveltyClass classify(double ter_value, const NoveltyThresholds& thresholds) {
  if (!(ter_value >= 0.0)) throw ArgumentError("TER must be non-negative");
  if (ter_value >= thresholds.high_min) return NoveltyClass::High;
  if (ter_value <= thresholds.low_max) return NoveltyClass::Low;
  return NoveltyClass::Medium;
}

LabelingResult label_dataset(std::span<const ParaphrasePair> pairs, const NormalizationConfig& cfg,
                             const NoveltyThresholds& thresholds) {
  thresholds.validate();
  LabelingResult result;
  result.labeled.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& pair = pairs[i];
    const TokenSeq source = normalize(pair.source, cfg);
    if (source.empty()) {
      result.rejected.push_back({i, pair.id, "empty source"});
      continue;
    }
    const double value = ter(normalize(pair.target, cfg), source);
    const NoveltyClass c = classify(value, thresholds);
    ++result.histogram[static_cast<std::size_t>(c)];
    result.labeled.push_back({pair, value, c});
  }
  return result;
}

}  // namespace rapt
