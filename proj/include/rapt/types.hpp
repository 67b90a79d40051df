#pragma once

#include <string>

namespace rapt {

/// One (input, paraphrase) dataset unit. `target` may be empty only for
/// inference inputs.
struct ParaphrasePair {
  std::string id;
  std::string source;
  std::string target;

  bool operator==(const ParaphrasePair&) const = default;
};

}  // namespace rapt
