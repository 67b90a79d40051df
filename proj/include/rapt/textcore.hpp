#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rapt {

/// Switches for the text normalization pipeline. All enabled by default.
struct NormalizationConfig {
  bool lowercase = true;
  /// Unicode canonical composition (NFC).
  bool unicode_normalize = true;
  /// Emit every punctuation character as a standalone token.
  bool punctuation_split = true;
  /// Treat every Unicode White_Space character as a separator. When off,
  /// no-break spaces (U+00A0, U+2007, U+202F) stay inside tokens.
  bool collapse_whitespace = true;

  bool operator==(const NormalizationConfig&) const = default;

  /// Compact form recorded in reports, e.g. "nfc+lower+punct+ws".
  std::string describe() const;
};

/// Inverse of NormalizationConfig::describe(); throws ArgumentError on
/// unknown flags.
NormalizationConfig parse_normalization(std::string_view text);

using Token = std::string;

/// Ordered tokens; no token is empty or contains a separator character.
class TokenSeq {
 public:
  TokenSeq() = default;
  explicit TokenSeq(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}
  TokenSeq(std::initializer_list<Token> tokens) : tokens_(tokens) {}

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const Token& operator[](std::size_t i) const { return tokens_[i]; }
  const std::vector<Token>& tokens() const noexcept { return tokens_; }
  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }

  /// Tokens joined by single spaces.
  std::string render() const;

  bool operator==(const TokenSeq&) const = default;

 private:
  std::vector<Token> tokens_;
};

TokenSeq normalize(std::string_view text, const NormalizationConfig& cfg = {});

using NGram = std::vector<Token>;

/// Multiset of the n-token windows of a sequence.
struct NGramProfile {
  int n = 1;
  std::map<NGram, std::size_t> counts;

  std::size_t total() const;
  std::size_t count(const NGram& gram) const;
};

inline constexpr int kMaxNGramOrder = 4;

/// Sliding-window n-gram counts. Throws ArgumentError unless 1 <= n <= 4.
NGramProfile ngrams(const TokenSeq& seq, int n);

}  // namespace rapt
