#include <gtest/gtest.h>

#include <cstdlib>
#include <deque>

#include "frames/classifier.hpp"
#include "frames/clock.hpp"
#include "frames/http.hpp"
#include "frames/translation.hpp"
#include "support.hpp"

using namespace frames;
using namespace std::chrono_literals;

namespace {

// Replays canned responses; an empty queue repeats the last one.
class FakeTransport final : public HttpTransport {
 public:
  struct Reply {
    int status = 200;
    std::string body;
    bool transport_error = false;
  };

  explicit FakeTransport(std::deque<Reply> replies) : replies_(std::move(replies)) {}

  HttpResponse post(const HttpRequest& request, std::chrono::milliseconds) override {
    requests.push_back(request);
    Reply r = replies_.front();
    if (replies_.size() > 1) replies_.pop_front();
    if (r.transport_error) throw TransportError("connection refused");
    return {r.status, r.body};
  }

  std::vector<HttpRequest> requests;

 private:
  std::deque<Reply> replies_;
};

HttpRequest dummy_request() { return {"http://provider.invalid/v1", {}, "{}", "application/json"}; }

}  // namespace

TEST(Retry, ExhaustsOnServerErrors) {
  FakeTransport transport({{503, "busy"}});
  FakeClock clock;
  try {
    post_with_retry(transport, dummy_request(), RetryPolicy{}, 1s, clock);
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::Unavailable);
    EXPECT_EQ(e.code(), "ProviderUnavailable");
  }
  EXPECT_EQ(transport.requests.size(), 5u);
  const std::vector<Clock::Monotonic> expected = {1s, 2s, 4s, 8s};
  EXPECT_EQ(clock.sleeps(), expected);
}

TEST(Retry, TransportErrorsAreRetriedThenSucceed) {
  FakeTransport transport({{0, "", true}, {500, ""}, {200, "ok"}});
  FakeClock clock;
  const auto r = post_with_retry(transport, dummy_request(), RetryPolicy{}, 1s, clock);
  EXPECT_EQ(r.body, "ok");
  EXPECT_EQ(transport.requests.size(), 3u);
}

TEST(Retry, RateLimitedAfterRepeated429) {
  FakeTransport transport({{429, ""}});
  FakeClock clock;
  try {
    post_with_retry(transport, dummy_request(), RetryPolicy{3, 100ms, 2.0}, 1s, clock);
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::RateLimited);
  }
  EXPECT_EQ(transport.requests.size(), 3u);
}

TEST(Retry, AuthAndClientErrorsAreNotRetried) {
  for (int status : {401, 403}) {
    FakeTransport transport({{status, ""}});
    FakeClock clock;
    try {
      post_with_retry(transport, dummy_request(), RetryPolicy{}, 1s, clock);
      FAIL();
    } catch (const ProviderError& e) {
      EXPECT_EQ(e.kind(), ProviderErrorKind::AuthFailure);
    }
    EXPECT_EQ(transport.requests.size(), 1u);
  }
  FakeTransport transport({{400, "bad"}});
  FakeClock clock;
  try {
    post_with_retry(transport, dummy_request(), RetryPolicy{}, 1s, clock);
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::Rejected);
  }
  EXPECT_EQ(transport.requests.size(), 1u);
}

TEST(RateLimiter, TenCallsAtFivePerSecondSpanNearlyTwoSeconds) {
  auto clock = std::make_shared<FakeClock>();
  RateLimiter limiter(5.0, clock);
  std::vector<Clock::Monotonic> stamps;
  for (int i = 0; i < 10; ++i) {
    limiter.acquire();
    stamps.push_back(clock->monotonic_now());
  }
  // Ten slots 200 ms apart; the first is immediate.
  EXPECT_EQ(stamps.back() - stamps.front(), 1800ms);
  for (std::size_t i = 1; i < stamps.size(); ++i) EXPECT_GE(stamps[i] - stamps[i - 1], 200ms);
}

TEST(RateLimiter, DisabledWhenNonPositive) {
  auto clock = std::make_shared<FakeClock>();
  RateLimiter limiter(0.0, clock);
  for (int i = 0; i < 5; ++i) limiter.acquire();
  EXPECT_EQ(clock->monotonic_now(), Clock::Monotonic{0});
}

TEST(Secrets, MissingKeyIsAuthFailure) {
  ::unsetenv("FRAMES_TEST_NO_SUCH_KEY");
  try {
    resolve_secret("FRAMES_TEST_NO_SUCH_KEY");
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::AuthFailure);
  }
  ::setenv("FRAMES_TEST_KEY", "k123", 1);
  EXPECT_EQ(resolve_secret("FRAMES_TEST_KEY"), "k123");
}

TEST(NetworkHarness, ForbiddenTransportNeverConnects) {
  frames::testing::NetworkForbidden guard;
  auto transport = make_http_transport();
  EXPECT_THROW(transport->post({"http://127.0.0.1:9/v1", {}, "{}", "application/json"}, 100ms),
               TransportError);
  EXPECT_EQ(guard.attempts(), 1u);
}

TEST(CompletionParser, SkipsLeadingWhitespaceTokens) {
  const std::string body = R"({"choices":[{"text":"\n Conflict","logprobs":{
      "tokens":["\n"," Conflict"],
      "top_logprobs":[{"\n":-0.01,"\n\n":-4.6},{" Conflict":-0.2," Human":-1.9," Economic":-3.0}]}}]})";
  const auto alts = parse_completion_alternatives(body);
  ASSERT_EQ(alts.size(), 3u);
  bool saw_conflict = false;
  for (const auto& a : alts) saw_conflict |= (a.token == " Conflict" && a.logprob == -0.2);
  EXPECT_TRUE(saw_conflict);
}

TEST(CompletionParser, MalformedBodyIsNonText) {
  for (const char* body : {"not json", R"({"choices":[]})", R"({"choices":[{"text":"x"}]})"}) {
    try {
      parse_completion_alternatives(body);
      FAIL() << body;
    } catch (const ProviderError& e) {
      EXPECT_EQ(e.kind(), ProviderErrorKind::NonTextResponse) << body;
    }
  }
}

TEST(HttpCompletion, SendsLegacyCompletionRequest) {
  ::setenv("FRAMES_TEST_LLM_KEY", "sk-test", 1);
  auto transport = std::make_shared<FakeTransport>(std::deque<FakeTransport::Reply>{
      {200, R"({"choices":[{"text":"Economic","logprobs":{"tokens":["Economic"],"top_logprobs":[{"Economic":-0.1}]}}]})"}});
  ClassifierConfig cfg;
  cfg.provider_id = LlmProviderId::http_llm;
  cfg.model_id = "text-davinci-003";
  cfg.endpoint = "https://llm.invalid/v1/completions";
  cfg.auth_env = "FRAMES_TEST_LLM_KEY";
  HttpCompletionProvider provider(cfg, transport, std::make_shared<FakeClock>());
  const auto alts = provider.complete({"i1", "PROMPT", "text", cfg});
  ASSERT_EQ(alts.size(), 1u);
  ASSERT_EQ(transport->requests.size(), 1u);
  const auto& req = transport->requests[0];
  EXPECT_EQ(req.url, cfg.endpoint);
  EXPECT_EQ(req.headers.at(0).second, "Bearer sk-test");
  const auto body = Json::parse(req.body);
  EXPECT_EQ(body["model"], "text-davinci-003");
  EXPECT_EQ(body["prompt"], "PROMPT");
  EXPECT_EQ(body["logprobs"], 5);
  EXPECT_EQ(body["temperature"], 0.0);
}

TEST(HttpTranslation, DeepLCompatibleWireFormat) {
  ::setenv("FRAMES_TEST_MT_KEY", "mt-key", 1);
  auto transport = std::make_shared<FakeTransport>(std::deque<FakeTransport::Reply>{
      {200, R"({"translations":[{"detected_source_language":"NL","text":"hello world"}]})"}});
  TranslationProviderConfig cfg;
  cfg.provider_id = TranslationProviderId::http_mt;
  cfg.endpoint = "https://mt.invalid/v2/translate";
  cfg.auth_env = "FRAMES_TEST_MT_KEY";
  HttpTranslator translator(cfg, transport, std::make_shared<FakeClock>());
  TranscriptItem item{"a", "P", std::nullopt, "nl", "hallo wereld", 2};
  EXPECT_EQ(translator.translate(item), "hello world");
  const auto body = Json::parse(transport->requests.at(0).body);
  EXPECT_EQ(body["text"], Json::array({"hallo wereld"}));
  EXPECT_EQ(body["target_lang"], "EN");
  EXPECT_EQ(body["source_lang"], "NL");
  EXPECT_EQ(transport->requests.at(0).headers.at(0).second, "DeepL-Auth-Key mt-key");
}
