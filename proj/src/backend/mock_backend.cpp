#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <thread>

#include "rapt/backend.hpp"
#include "rapt/error.hpp"

namespace rapt {

namespace {

using nlohmann::json;

constexpr std::string_view kInputMarker = "Input:";
constexpr std::string_view kOutputMarker = "Paraphrase:";

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::string> split_ws(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(std::move(w));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// The query is whatever sits between the last "Input:" and the final
// "Paraphrase:" marker.
std::string query_of(std::string_view prompt) {
  const auto out = prompt.rfind(kOutputMarker);
  if (out == std::string_view::npos) return trim(prompt.substr(0, prompt.find('\n')));
  const auto in = prompt.substr(0, out).rfind(kInputMarker);
  const auto begin = in == std::string_view::npos ? 0 : in + kInputMarker.size();
  return trim(prompt.substr(begin, out - begin));
}

std::size_t parse_count(std::string_view key, std::string_view value) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ArgumentError("mock URL parameter '" + std::string(key) + "' is not a count: " + std::string(value));
  }
  return v;
}

class InFlight {
 public:
  InFlight(std::atomic<std::size_t>& counter, std::atomic<std::size_t>& peak) : counter_(counter) {
    const std::size_t now = ++counter_;
    std::size_t prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
  }
  ~InFlight() { --counter_; }
  InFlight(const InFlight&) = delete;
  InFlight& operator=(const InFlight&) = delete;

 private:
  std::atomic<std::size_t>& counter_;
};

}  // namespace

MockTransport::Options MockTransport::parse_url(std::string_view url) {
  if (!url.starts_with("mock:")) throw ArgumentError("not a mock URL: " + std::string(url));
  url.remove_prefix(5);
  Options opts;
  const auto q = url.find('?');
  const std::string_view mode = url.substr(0, q);
  if (mode == "shuffle") {
    opts.mode = Mode::Shuffle;
  } else if (mode.empty() || mode == "echo" || mode == "embed") {
    opts.mode = Mode::Echo;
  } else {
    throw ArgumentError("unknown mock mode '" + std::string(mode) + "'");
  }
  if (q == std::string_view::npos) return opts;

  std::string_view params = url.substr(q + 1);
  while (!params.empty()) {
    const auto amp = params.find('&');
    const std::string_view kv = params.substr(0, amp);
    params = amp == std::string_view::npos ? std::string_view{} : params.substr(amp + 1);
    if (kv.empty()) continue;
    const auto eq = kv.find('=');
    const std::string_view key = kv.substr(0, eq);
    const std::string_view value = eq == std::string_view::npos ? std::string_view{"1"} : kv.substr(eq + 1);
    if (key == "dim") {
      opts.dim = parse_count(key, value);
      if (opts.dim == 0) throw ArgumentError("mock dim must be positive");
    } else if (key == "seed") {
      opts.seed = parse_count(key, value);
    } else if (key == "latency_ms") {
      opts.latency = std::chrono::milliseconds(parse_count(key, value));
    } else if (key == "fail") {
      opts.transport_failures = parse_count(key, value);
    } else if (key == "malformed") {
      opts.malformed = parse_count(key, value) != 0;
    } else if (key == "max_context") {
      opts.max_context = parse_count(key, value);
    } else {
      throw ArgumentError("unknown mock URL parameter '" + std::string(key) + "'");
    }
  }
  return opts;
}

EmbeddingVector MockTransport::embed_text(std::string_view text, std::size_t dim) {
  EmbeddingVector v(dim, 0.0);
  auto add = [&](std::uint64_t seed) {
    for (double& x : v) x += static_cast<double>(splitmix64(seed) >> 11) * 0x1.0p-52 - 1.0;
  };
  const TokenSeq tokens = normalize(text);
  if (tokens.empty()) {
    add(fnv1a(text));
  } else {
    for (const auto& t : tokens) add(fnv1a(t));
  }
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (!(sq > 0.0)) {
    v.assign(dim, 0.0);
    v[0] = 1.0;
    return v;
  }
  const double norm = std::sqrt(sq);
  for (double& x : v) x /= norm;
  return v;
}

std::string MockTransport::complete(std::string_view prompt, const Options& opts) {
  std::vector<std::string> words = split_ws(query_of(prompt));
  if (opts.mode == Mode::Shuffle && words.size() > 1) {
    std::uint64_t state = fnv1a(prompt) ^ opts.seed;
    const std::size_t shift = 1 + splitmix64(state) % (words.size() - 1);
    std::rotate(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(shift), words.end());
  }
  std::string out;
  for (const auto& w : words) out += " " + w;
  out += "\n";
  out += kInputMarker;
  return out;
}

json MockTransport::post(const json& body) {
  const std::size_t call = calls_++;
  InFlight guard(in_flight_, peak_);
  if (opts_.latency.count() > 0) std::this_thread::sleep_for(opts_.latency);
  if (call < opts_.transport_failures) {
    throw BackendError(BackendErrorKind::Transport, "mock: injected transport failure");
  }
  if (opts_.malformed) return json{{"unexpected", true}};
  if (!body.is_object()) throw BackendError(BackendErrorKind::Http, "mock: HTTP 400");

  if (body.contains("prompt")) {
    const std::string prompt = body.at("prompt").get<std::string>();
    const std::size_t max_new = body.value("max_new_tokens", kDecodeMargin);
    if (opts_.max_context > 0 && split_ws(prompt).size() + max_new > opts_.max_context) {
      throw BackendError(BackendErrorKind::OverBudget, "mock: HTTP 413");
    }
    std::string text = complete(prompt, opts_);
    // Keep at most max_new_tokens whitespace tokens.
    std::size_t seen = 0;
    bool in_word = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
      const bool space = text[i] == ' ' || text[i] == '\n';
      if (!space && !in_word && ++seen > max_new) {
        text.resize(i);
        break;
      }
      in_word = !space;
    }
    json out = {{"text", text}, {"token_count", std::min(max_new, split_ws(text).size())}};
    if (body.contains("request_id")) out["request_id"] = body.at("request_id");
    return out;
  }
  if (body.contains("texts")) {
    json vectors = json::array();
    for (const auto& t : body.at("texts")) vectors.push_back(embed_text(t.get<std::string>(), opts_.dim));
    return json{{"vectors", std::move(vectors)}};
  }
  if (body.contains("text")) return json{{"count", split_ws(body.at("text").get<std::string>()).size()}};
  throw BackendError(BackendErrorKind::Http, "mock: HTTP 400");
}

}  // namespace rapt
