#pragma once

// Clients for the external generation and embedding services.
//
// Wire protocol (JSON over HTTP POST):
//   generation_url  {"prompt", "max_new_tokens", "stop", "request_id", "layout"?}
//                   -> {"text", "token_count"}
//   embedding_url   {"texts": [...], "model"} -> {"vectors": [[...], ...]}
//   tokenize_url    {"text"} -> {"count"}            (optional)
//
// A URL with the "mock:" scheme selects the in-process deterministic mock,
// e.g. "mock:echo", "mock:shuffle?seed=3", "mock:embed?dim=16".

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rapt/promptkit.hpp"
#include "rapt/retrieval.hpp"
#include "rapt/textcore.hpp"

namespace rapt {

inline constexpr const char* kDefaultEmbeddingModel = "paraphrase-mpnet-base-v2";

struct BackendConfig {
  std::string generation_url = "http://127.0.0.1:8080/generate";
  std::string embedding_url = "http://127.0.0.1:8080/embed";
  std::string tokenize_url;  // empty: whitespace token counts
  std::string embedding_model = kDefaultEmbeddingModel;
  std::chrono::milliseconds timeout{30'000};
  std::size_t max_in_flight = 4;
  std::size_t retry_limit = 2;  // extra attempts after a transport failure
  std::size_t embed_batch_size = 64;
  std::string bearer_token;

  void validate() const;
  /// RAPT_GENERATION_URL, RAPT_EMBEDDING_URL, RAPT_TOKENIZE_URL, RAPT_BEARER_TOKEN.
  void apply_env_overrides();
};

struct GenerationRequest {
  std::string prompt;
  std::size_t max_new_tokens = kDecodeMargin;
  std::vector<std::string> stop;
  std::optional<std::string> layout_json;  // attached under "layout"
  std::size_t prompt_n = 0;                // reported with over-budget errors
};

struct GenerationResponse {
  std::string text;
  std::size_t token_count = 0;
  std::chrono::microseconds latency{0};
  std::size_t attempts = 1;
};

enum class BackendErrorKind { Timeout, Transport, Malformed, OverBudget, Http };

std::string_view to_string(BackendErrorKind kind);

class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrorKind kind, const std::string& what, std::size_t attempts = 1, std::size_t prompt_n = 0)
      : std::runtime_error(what), kind_(kind), attempts_(attempts), prompt_n_(prompt_n) {}

  BackendErrorKind kind() const noexcept { return kind_; }
  std::size_t attempts() const noexcept { return attempts_; }
  std::size_t prompt_n() const noexcept { return prompt_n_; }
  bool retryable() const noexcept {
    return kind_ == BackendErrorKind::Transport || kind_ == BackendErrorKind::Timeout;
  }

 private:
  BackendErrorKind kind_;
  std::size_t attempts_;
  std::size_t prompt_n_;
};

/// One JSON POST. Implementations throw BackendError with kind Transport,
/// Timeout, OverBudget (HTTP 413) or Http; response decoding is the
/// client's job.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual nlohmann::json post(const nlohmann::json& body) = 0;
};

std::unique_ptr<Transport> make_http_transport(const std::string& url, const BackendConfig& cfg);

/// Deterministic in-process service. Answers generation, embedding and
/// tokenize bodies; counts concurrent calls.
class MockTransport : public Transport {
 public:
  enum class Mode { Echo, Shuffle };

  struct Options {
    Mode mode = Mode::Echo;
    std::size_t dim = 32;
    std::uint64_t seed = 0;
    std::chrono::milliseconds latency{0};
    std::size_t transport_failures = 0;  // first N calls fail with a transport error
    bool malformed = false;
    std::size_t max_context = 0;  // 0: unlimited
  };

  /// Parses "mock:<mode>?key=value&..." (keys: dim, seed, latency_ms, fail,
  /// malformed, max_context).
  static Options parse_url(std::string_view url);

  explicit MockTransport(Options opts) : opts_(opts) {}

  nlohmann::json post(const nlohmann::json& body) override;

  std::size_t calls() const noexcept { return calls_.load(); }
  std::size_t peak_in_flight() const noexcept { return peak_.load(); }
  const Options& options() const noexcept { return opts_; }

  /// Bag-of-words hashed unit vector; identical texts give identical vectors.
  static EmbeddingVector embed_text(std::string_view text, std::size_t dim);
  /// The completion the mock would produce for `prompt`.
  static std::string complete(std::string_view prompt, const Options& opts);

 private:
  Options opts_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> peak_{0};
};

struct GenerationOutcome {
  std::optional<GenerationResponse> response;
  std::optional<BackendError> error;
};

class Client {
 public:
  explicit Client(BackendConfig cfg);
  /// Injects transports directly (tests).
  Client(BackendConfig cfg, std::unique_ptr<Transport> generation, std::unique_ptr<Transport> embedding);

  const BackendConfig& config() const noexcept { return cfg_; }

  /// Sends with retries on transport failures, then truncates the text at
  /// the first stop string.
  GenerationResponse generate(const GenerationRequest& req, std::string_view request_id = {}) const;

  /// Issues all requests with at most max_in_flight outstanding. Results
  /// are in submission order.
  std::vector<GenerationOutcome> generate_all(std::span<const GenerationRequest> reqs) const;

  /// Vectors aligned with `texts`; all of one dimension.
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const;

  /// Backend token count used for prompt lengths.
  std::size_t count_tokens(std::string_view text) const;
  TokenCounter token_counter() const;

  /// The mock behind the generation endpoint, if any.
  const MockTransport* generation_mock() const;
  const MockTransport* embedding_mock() const;

 private:
  nlohmann::json post_with_retry(Transport& transport, const nlohmann::json& body, std::size_t* attempts,
                                 std::size_t prompt_n) const;

  BackendConfig cfg_;
  std::unique_ptr<Transport> generation_;
  std::unique_ptr<Transport> embedding_;
  std::unique_ptr<Transport> tokenizer_;
};

/// Cuts `text` at the earliest occurrence of any stop string.
std::string truncate_at_stop(std::string_view text, std::span<const std::string> stop);

class CompletionError : public std::runtime_error {
 public:
  CompletionError(const std::string& what, std::string raw) : std::runtime_error(what), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

/// Text after the final infix marker (and its class tag, if any), up to
/// the first newline, normalized. Throws CompletionError when the marker is
/// missing or the paraphrase is empty.
TokenSeq parse_completion(std::string_view raw, const TextTemplate& tmpl = {}, const NormalizationConfig& cfg = {});

}  // namespace rapt
