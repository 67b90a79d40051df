#include "rapt/textcore.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <numeric>

#include "rapt/error.hpp"

namespace rapt {

namespace {

icu::UnicodeString compose(const icu::UnicodeString& in) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) return in;
  icu::UnicodeString out = nfc->normalize(in, status);
  return U_FAILURE(status) ? in : out;
}

void append_utf8(std::string& dst, UChar32 c) {
  icu::UnicodeString(c).toUTF8String(dst);
}

}  // namespace

std::string NormalizationConfig::describe() const {
  std::string out;
  auto add = [&out](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add(unicode_normalize, "nfc");
  add(lowercase, "lower");
  add(punctuation_split, "punct");
  add(collapse_whitespace, "ws");
  return out.empty() ? "none" : out;
}

NormalizationConfig parse_normalization(std::string_view text) {
  NormalizationConfig cfg{false, false, false, false};
  if (text == "none") return cfg;
  while (!text.empty()) {
    const auto plus = text.find('+');
    const std::string_view flag = text.substr(0, plus);
    if (flag == "nfc") {
      cfg.unicode_normalize = true;
    } else if (flag == "lower") {
      cfg.lowercase = true;
    } else if (flag == "punct") {
      cfg.punctuation_split = true;
    } else if (flag == "ws") {
      cfg.collapse_whitespace = true;
    } else {
      throw ArgumentError("unknown normalization flag '" + std::string(flag) + "'");
    }
    text = plus == std::string_view::npos ? std::string_view{} : text.substr(plus + 1);
  }
  return cfg;
}

std::string TokenSeq::render() const {
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i) out += ' ';
    out += tokens_[i];
  }
  return out;
}

TokenSeq normalize(std::string_view text, const NormalizationConfig& cfg) {
  if (text.empty()) return {};

  icu::UnicodeString us = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  if (cfg.unicode_normalize) us = compose(us);
  if (cfg.lowercase) {
    us.toLower(icu::Locale::getRoot());
    // Lowercasing can leave decomposed sequences (e.g. U+0130).
    if (cfg.unicode_normalize) us = compose(us);
  }

  std::vector<Token> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };

  for (int32_t i = 0; i < us.length();) {
    const UChar32 c = us.char32At(i);
    i += U16_LENGTH(c);
    const bool separator =
        cfg.collapse_whitespace ? u_isUWhiteSpace(c) : u_isWhitespace(c);
    if (separator) {
      flush();
    } else if (cfg.punctuation_split && u_ispunct(c)) {
      flush();
      append_utf8(current, c);
      flush();
    } else {
      append_utf8(current, c);
    }
  }
  flush();
  return TokenSeq(std::move(tokens));
}

std::size_t NGramProfile::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0},
                         [](std::size_t acc, const auto& kv) { return acc + kv.second; });
}

std::size_t NGramProfile::count(const NGram& gram) const {
  auto it = counts.find(gram);
  return it == counts.end() ? 0 : it->second;
}

NGramProfile ngrams(const TokenSeq& seq, int n) {
  if (n < 1 || n > kMaxNGramOrder) {
    throw ArgumentError("n-gram order must be in [1, 4], got " + std::to_string(n));
  }
  NGramProfile profile;
  profile.n = n;
  const auto& toks = seq.tokens();
  const auto order = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + order <= toks.size(); ++i) {
    ++profile.counts[NGram(toks.begin() + i, toks.begin() + i + order)];
  }
  return profile;
}

}  // namespace rapt
