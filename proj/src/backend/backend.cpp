#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "rapt/backend.hpp"
#include "rapt/error.hpp"

namespace rapt {

namespace {

using nlohmann::json;

std::unique_ptr<Transport> make_transport(const std::string& url, const BackendConfig& cfg) {
  if (url.starts_with("mock:")) return std::make_unique<MockTransport>(MockTransport::parse_url(url));
  return make_http_transport(url, cfg);
}

std::size_t whitespace_tokens(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::size_t n = 0;
  for (std::string w; in >> w;) ++n;
  return n;
}

std::string default_request_id(std::string_view prompt) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : prompt) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

[[noreturn]] void malformed(const std::string& what) {
  throw BackendError(BackendErrorKind::Malformed, "malformed response: " + what);
}

}  // namespace

std::string_view to_string(BackendErrorKind kind) {
  switch (kind) {
    case BackendErrorKind::Timeout: return "timeout";
    case BackendErrorKind::Transport: return "transport";
    case BackendErrorKind::Malformed: return "malformed";
    case BackendErrorKind::OverBudget: return "over-budget";
    case BackendErrorKind::Http: return "http";
  }
  return "unknown";
}

void BackendConfig::validate() const {
  if (generation_url.empty()) throw ArgumentError("generation_url is empty");
  if (embedding_url.empty()) throw ArgumentError("embedding_url is empty");
  if (max_in_flight < 1) throw ArgumentError("max_in_flight must be at least 1");
  if (embed_batch_size < 1) throw ArgumentError("embed_batch_size must be at least 1");
  if (timeout.count() <= 0) throw ArgumentError("timeout must be positive");
}

void BackendConfig::apply_env_overrides() {
  auto take = [](const char* name, std::string& field) {
    if (const char* v = std::getenv(name); v != nullptr && *v != '\0') field = v;
  };
  take("RAPT_GENERATION_URL", generation_url);
  take("RAPT_EMBEDDING_URL", embedding_url);
  take("RAPT_TOKENIZE_URL", tokenize_url);
  take("RAPT_BEARER_TOKEN", bearer_token);
}

Client::Client(BackendConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  generation_ = make_transport(cfg_.generation_url, cfg_);
  embedding_ = make_transport(cfg_.embedding_url, cfg_);
  if (!cfg_.tokenize_url.empty()) tokenizer_ = make_transport(cfg_.tokenize_url, cfg_);
}

Client::Client(BackendConfig cfg, std::unique_ptr<Transport> generation, std::unique_ptr<Transport> embedding)
    : cfg_(std::move(cfg)), generation_(std::move(generation)), embedding_(std::move(embedding)) {
  cfg_.validate();
  if (!cfg_.tokenize_url.empty()) tokenizer_ = make_transport(cfg_.tokenize_url, cfg_);
}

json Client::post_with_retry(Transport& transport, const json& body, std::size_t* attempts,
                             std::size_t prompt_n) const {
  const std::size_t max_attempts = cfg_.retry_limit + 1;
  for (std::size_t attempt = 1;; ++attempt) {
    try {
      json out = transport.post(body);
      if (attempts != nullptr) *attempts = attempt;
      return out;
    } catch (const BackendError& e) {
      if (!e.retryable() || attempt >= max_attempts) {
        std::string what = e.what();
        if (e.retryable()) what += " (after " + std::to_string(attempt) + " attempts)";
        if (e.kind() == BackendErrorKind::OverBudget) {
          what = "prompt of n=" + std::to_string(prompt_n) + " tokens rejected as over budget: " + what;
        }
        throw BackendError(e.kind(), what, attempt, prompt_n);
      }
      const auto backoff = std::min<std::int64_t>(1000, 25LL << std::min<std::size_t>(attempt - 1, 5));
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
    }
  }
}

GenerationResponse Client::generate(const GenerationRequest& req, std::string_view request_id) const {
  if (req.prompt.empty()) throw ArgumentError("prompt is empty");
  const std::string id = request_id.empty() ? default_request_id(req.prompt) : std::string(request_id);

  json body = {{"prompt", req.prompt}, {"max_new_tokens", req.max_new_tokens}, {"stop", req.stop},
               {"request_id", id}};
  if (req.layout_json) {
    try {
      body["layout"] = json::parse(*req.layout_json);
    } catch (const json::exception& e) {
      throw ArgumentError(std::string("layout is not valid JSON: ") + e.what());
    }
  }

  const auto start = std::chrono::steady_clock::now();
  GenerationResponse resp;
  const json out = post_with_retry(*generation_, body, &resp.attempts, req.prompt_n);
  resp.latency = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);

  if (!out.is_object()) malformed("generation response is not an object");
  const auto text = out.find("text");
  if (text == out.end() || !text->is_string()) malformed("missing string field 'text'");
  if (const auto rid = out.find("request_id"); rid != out.end()) {
    if (!rid->is_string() || rid->get<std::string>() != id) malformed("request_id does not match");
  }
  const std::string raw = text->get<std::string>();
  if (const auto tc = out.find("token_count"); tc != out.end()) {
    if (!tc->is_number_unsigned() && !(tc->is_number_integer() && tc->get<std::int64_t>() >= 0)) {
      malformed("'token_count' is not a non-negative integer");
    }
    resp.token_count = tc->get<std::size_t>();
  } else {
    resp.token_count = whitespace_tokens(raw);
  }
  resp.text = truncate_at_stop(raw, req.stop);
  return resp;
}

std::vector<GenerationOutcome> Client::generate_all(std::span<const GenerationRequest> reqs) const {
  std::vector<GenerationOutcome> results(reqs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr unexpected;
  std::mutex unexpected_mu;

  auto worker = [&] {
    for (std::size_t i = next++; i < reqs.size(); i = next++) {
      try {
        results[i].response = generate(reqs[i], "req-" + std::to_string(i));
      } catch (const BackendError& e) {
        results[i].error = e;
      } catch (...) {
        std::lock_guard lock(unexpected_mu);
        if (!unexpected) unexpected = std::current_exception();
      }
    }
  };

  const std::size_t n_workers = std::min(cfg_.max_in_flight, reqs.size());
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (unexpected) std::rethrow_exception(unexpected);
  return results;
}

std::vector<EmbeddingVector> Client::embed(std::span<const std::string> texts) const {
  if (texts.empty()) throw ArgumentError("no texts to embed");
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  std::size_t dim = 0;
  for (std::size_t begin = 0; begin < texts.size(); begin += cfg_.embed_batch_size) {
    const std::size_t end = std::min(texts.size(), begin + cfg_.embed_batch_size);
    const json body = {{"texts", std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(begin),
                                                          texts.begin() + static_cast<std::ptrdiff_t>(end))},
                       {"model", cfg_.embedding_model}};
    const json resp = post_with_retry(*embedding_, body, nullptr, 0);
    if (!resp.is_object()) malformed("embedding response is not an object");
    const auto vectors = resp.find("vectors");
    if (vectors == resp.end() || !vectors->is_array()) malformed("missing array field 'vectors'");
    if (vectors->size() != end - begin) {
      malformed("expected " + std::to_string(end - begin) + " vectors, got " + std::to_string(vectors->size()));
    }
    for (const auto& v : *vectors) {
      if (!v.is_array() || v.empty()) malformed("vector is not a non-empty array");
      EmbeddingVector vec;
      vec.reserve(v.size());
      for (const auto& x : v) {
        if (!x.is_number()) malformed("vector component is not a number");
        vec.push_back(x.get<double>());
      }
      if (dim == 0) dim = vec.size();
      if (vec.size() != dim) {
        malformed("dimension disagreement: " + std::to_string(vec.size()) + " vs " + std::to_string(dim));
      }
      out.push_back(std::move(vec));
    }
  }
  return out;
}

std::size_t Client::count_tokens(std::string_view text) const {
  if (!tokenizer_) return whitespace_tokens(text);
  const json resp = post_with_retry(*tokenizer_, json{{"text", std::string(text)}}, nullptr, 0);
  const auto count = resp.is_object() ? resp.find("count") : resp.end();
  if (count == resp.end() || !count->is_number_integer() || count->get<std::int64_t>() < 0) {
    malformed("missing non-negative integer field 'count'");
  }
  return count->get<std::size_t>();
}

TokenCounter Client::token_counter() const {
  return [this](std::string_view text) { return count_tokens(text); };
}

const MockTransport* Client::generation_mock() const {
  return dynamic_cast<const MockTransport*>(generation_.get());
}

const MockTransport* Client::embedding_mock() const {
  return dynamic_cast<const MockTransport*>(embedding_.get());
}

std::string truncate_at_stop(std::string_view text, std::span<const std::string> stop) {
  std::size_t cut = text.size();
  for (const auto& s : stop) {
    if (s.empty()) continue;
    cut = std::min(cut, text.find(s));
  }
  return std::string(text.substr(0, cut));
}

TokenSeq parse_completion(std::string_view raw, const TextTemplate& tmpl, const NormalizationConfig& cfg) {
  const auto marker = raw.rfind(tmpl.infix);
  if (tmpl.infix.empty() || marker == std::string_view::npos) {
    throw CompletionError("completion lacks the infix marker", std::string(raw));
  }
  std::string_view rest = raw.substr(marker + tmpl.infix.size());
  std::size_t tag_len = 0;
  for (const auto& [c, tag] : tmpl.class_tags) {
    if (!tag.empty() && tag.size() > tag_len && rest.starts_with(tag)) tag_len = tag.size();
  }
  rest.remove_prefix(tag_len);
  rest = rest.substr(0, rest.find('\n'));
  TokenSeq out = normalize(rest, cfg);
  if (out.empty()) throw CompletionError("empty paraphrase after the infix marker", std::string(raw));
  return out;
}

}  // namespace rapt
