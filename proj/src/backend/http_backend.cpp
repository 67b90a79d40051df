#include <httplib.h>

#include "rapt/backend.hpp"
#include "rapt/error.hpp"

namespace rapt {

namespace {

using nlohmann::json;

class HttpTransport : public Transport {
 public:
  HttpTransport(const std::string& url, const BackendConfig& cfg)
      : timeout_(cfg.timeout), bearer_(cfg.bearer_token) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ArgumentError("URL lacks a scheme: " + url);
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw ArgumentError("unsupported URL scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    origin_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (origin_.size() <= scheme_end + 3) throw ArgumentError("URL lacks a host: " + url);
  }

  json post(const json& body) override {
    httplib::Client cli(origin_);
    cli.set_connection_timeout(timeout_);
    cli.set_read_timeout(timeout_);
    cli.set_write_timeout(timeout_);
    if (!bearer_.empty()) cli.set_bearer_token_auth(bearer_);

    const auto res = cli.Post(path_, body.dump(), "application/json");
    const std::string where = origin_ + path_;
    if (!res) {
      const auto err = res.error();
      // httplib reports read timeouts as Read errors.
      const auto kind = err == httplib::Error::ConnectionTimeout ? BackendErrorKind::Timeout
                                                                 : BackendErrorKind::Transport;
      throw BackendError(kind, where + ": " + httplib::to_string(err));
    }
    const int status = res->status;
    if (status == 413) throw BackendError(BackendErrorKind::OverBudget, where + ": HTTP 413");
    if (status == 502 || status == 503 || status == 504) {
      throw BackendError(BackendErrorKind::Transport, where + ": HTTP " + std::to_string(status));
    }
    if (status < 200 || status >= 300) {
      throw BackendError(BackendErrorKind::Http, where + ": HTTP " + std::to_string(status));
    }
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      throw BackendError(BackendErrorKind::Malformed, where + ": response is not JSON: " + e.what());
    }
  }

 private:
  std::string origin_;
  std::string path_;
  std::chrono::milliseconds timeout_;
  std::string bearer_;
};

}  // namespace

std::unique_ptr<Transport> make_http_transport(const std::string& url, const BackendConfig& cfg) {
  return std::make_unique<HttpTransport>(url, cfg);
}

}  // namespace rapt
