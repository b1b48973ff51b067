#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "frames/clock.hpp"
#include "frames/error.hpp"

namespace frames {

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::string content_type = "application/json";
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Connection-level failure (DNS, refused, timeout). Retried.
class TransportError : public FramesError {
 public:
  explicit TransportError(const std::string& message) : FramesError("TransportError", message) {}
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const HttpRequest& request, std::chrono::milliseconds timeout) = 0;
};

// cpp-httplib backed transport (http and https).
std::unique_ptr<HttpTransport> make_http_transport();

// Process-wide outbound network switch. When forbidden, every real transport
// call throws instead of connecting. `outbound_attempts()` counts attempts
// made through real transports, allowed or not.
namespace net {
void set_forbidden(bool forbidden);
bool forbidden();
std::size_t outbound_attempts();
}  // namespace net

enum class ProviderErrorKind {
  Unavailable,      // transport errors or 5xx after retries
  RateLimited,      // 429 after retries
  AuthFailure,      // 401/403 or missing credentials
  NonTextResponse,  // unparseable or invalid payload
  Rejected,         // other 4xx
  MissingFixture,   // scripted provider has no entry for the key
};

std::string_view provider_error_code(ProviderErrorKind kind);

class ProviderError : public FramesError {
 public:
  ProviderError(ProviderErrorKind kind, const std::string& message)
      : FramesError(std::string(provider_error_code(kind)), message), kind_(kind) {}
  ProviderErrorKind kind() const noexcept { return kind_; }

 private:
  ProviderErrorKind kind_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{1000};
  double factor = 2.0;
};

// POST with exponential backoff. Retries transport errors, 429 and 5xx;
// maps 401/403 to AuthFailure and other 4xx to Rejected without retrying.
HttpResponse post_with_retry(HttpTransport& transport, const HttpRequest& request,
                             const RetryPolicy& policy, std::chrono::milliseconds timeout,
                             Clock& clock);

// Shared pacing for provider calls: at most `per_second` acquisitions per
// second across all threads. A non-positive rate disables limiting.
class RateLimiter {
 public:
  RateLimiter(double per_second, std::shared_ptr<Clock> clock);
  void acquire();

 private:
  std::shared_ptr<Clock> clock_;
  Clock::Monotonic interval_{0};
  std::mutex mu_;
  std::optional<Clock::Monotonic> next_slot_;
};

// Reads a secret from the environment; throws AuthFailure when unset or empty.
std::string resolve_secret(const std::string& env_var);

}  // namespace frames
