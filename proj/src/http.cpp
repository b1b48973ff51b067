#include "frames/http.hpp"

#include <httplib.h>

#include <atomic>
#include <cmath>
#include <cstdlib>

namespace frames {
namespace net {
namespace {
std::atomic<bool> g_forbidden{false};
std::atomic<std::size_t> g_attempts{0};
}  // namespace

void set_forbidden(bool forbidden) { g_forbidden = forbidden; }
bool forbidden() { return g_forbidden; }
std::size_t outbound_attempts() { return g_attempts; }
}  // namespace net

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("URL lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post(const HttpRequest& request, std::chrono::milliseconds timeout) override {
    ++net::g_attempts;
    if (net::forbidden()) throw TransportError("network access is disabled: " + request.url);

    const auto [origin, path] = split_url(request.url);
    httplib::Client client(origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);
    auto result = client.Post(path, headers, request.body, request.content_type);
    if (!result) {
      throw TransportError("request to " + request.url + " failed: " + httplib::to_string(result.error()));
    }
    return {result->status, result->body};
  }
};

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport() { return std::make_unique<HttplibTransport>(); }

std::string_view provider_error_code(ProviderErrorKind kind) {
  switch (kind) {
    case ProviderErrorKind::Unavailable: return "ProviderUnavailable";
    case ProviderErrorKind::RateLimited: return "RateLimited";
    case ProviderErrorKind::AuthFailure: return "AuthFailure";
    case ProviderErrorKind::NonTextResponse: return "NonTextResponse";
    case ProviderErrorKind::Rejected: return "ProviderRejected";
    case ProviderErrorKind::MissingFixture: return "MissingFixture";
  }
  return "ProviderError";
}

HttpResponse post_with_retry(HttpTransport& transport, const HttpRequest& request,
                             const RetryPolicy& policy, std::chrono::milliseconds timeout,
                             Clock& clock) {
  const int attempts = std::max(1, policy.max_attempts);
  std::string last_failure;
  bool last_was_429 = false;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) {
      const double scale = std::pow(policy.factor, attempt - 2);
      clock.sleep_for(std::chrono::duration_cast<Clock::Monotonic>(
          std::chrono::duration<double, std::milli>(policy.initial_backoff.count() * scale)));
    }
    try {
      auto response = transport.post(request, timeout);
      if (response.status >= 200 && response.status < 300) return response;
      if (response.status == 401 || response.status == 403) {
        throw ProviderError(ProviderErrorKind::AuthFailure,
                            request.url + " rejected credentials (HTTP " +
                                std::to_string(response.status) + ")");
      }
      last_was_429 = response.status == 429;
      last_failure = "HTTP " + std::to_string(response.status);
      if (response.status != 429 && response.status < 500) {
        throw ProviderError(ProviderErrorKind::Rejected,
                            request.url + " returned " + last_failure + ": " + response.body.substr(0, 200));
      }
    } catch (const TransportError& e) {
      last_was_429 = false;
      last_failure = e.what();
    }
  }
  const auto message = request.url + " failed after " + std::to_string(attempts) +
                       " attempt(s), last: " + last_failure;
  throw ProviderError(last_was_429 ? ProviderErrorKind::RateLimited : ProviderErrorKind::Unavailable,
                      message);
}

RateLimiter::RateLimiter(double per_second, std::shared_ptr<Clock> clock) : clock_(std::move(clock)) {
  if (per_second > 0) {
    interval_ = std::chrono::duration_cast<Clock::Monotonic>(std::chrono::duration<double>(1.0 / per_second));
  }
}

void RateLimiter::acquire() {
  if (interval_.count() == 0) return;
  Clock::Monotonic slot;
  {
    std::lock_guard lock(mu_);
    const auto now = clock_->monotonic_now();
    slot = next_slot_ ? std::max(now, *next_slot_) : now;
    next_slot_ = slot + interval_;
  }
  clock_->sleep_until(slot);
}

std::string resolve_secret(const std::string& env_var) {
  const char* value = std::getenv(env_var.c_str());
  if (value == nullptr || *value == '\0') {
    throw ProviderError(ProviderErrorKind::AuthFailure, "environment variable " + env_var + " is not set");
  }
  return value;
}

}  // namespace frames
