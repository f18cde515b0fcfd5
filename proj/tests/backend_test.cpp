// Copyright 2026 The Probe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "probe/backend.hpp"
#include "probe/http.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "support/oracles.hpp"

namespace probe {
namespace {

/// Scripted service for error-path tests.
class FakeService : public BackendService {
 public:
  std::function<std::vector<Generation>()> on_generate;
  std::function<std::vector<Generation>()> on_translate;
  std::atomic<int> calls{0};

  std::vector<Generation> generate(const GenerationRequest&) override {
    ++calls;
    return on_generate();
  }
  std::vector<Generation> translate(const TranslationRequest&) override {
    ++calls;
    return on_translate();
  }
};

Backend fake_backend(std::shared_ptr<FakeService> s, BackendKind kind, RetryPolicy retry = {},
                     Sleeper sleeper = [](std::chrono::milliseconds) {}) {
  return Backend({"fake", kind, "mock", false}, std::move(s), retry, kDefaultMaxInFlight,
                 std::move(sleeper));
}

TEST(MockBackend, ReturnsTableEntryInLogSpace) {
  auto b = mock_backend({{"Where did Albert Einstein die?", {{"Princeton", 0.6}, {"Berlin", 0.2}}}});
  const auto out = generate(b, {"Where did Albert Einstein die?", 10});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], (Generation{"Princeton", std::log(0.6)}));
  EXPECT_EQ(out[1], (Generation{"Berlin", std::log(0.2)}));
}

TEST(MockBackend, LookupAndMissingKey) {
  auto b = mock_backend({{"q", {{"a", 0.5}}}});
  EXPECT_EQ(generate(b, {"q", 10}), (std::vector<Generation>{{"a", std::log(0.5)}}));
  EXPECT_TRUE(generate(b, {"unknown", 10}).empty());
}

TEST(MockBackend, ProbabilityOutsideUnitIntervalRejected) {
  EXPECT_THROW(mock_backend({{"q", {{"a", 1.5}}}}), ValidationError);
  EXPECT_THROW(mock_backend({{"q", {{"a", 0.0}}}}), ValidationError);
  EXPECT_NO_THROW(mock_backend({{"q", {{"a", 1.0}}}}));
}

TEST(MockBackend, TruncatesToAvailability) {
  auto b = mock_backend({{"q", {{"a", 0.5}, {"b", 0.3}, {"c", 0.1}}}});
  EXPECT_EQ(generate(b, {"q", 10}).size(), 3u);
  EXPECT_EQ(generate(b, {"q", 2}).size(), 2u);
}

TEST(MockBackend, SortsDescending) {
  auto b = mock_backend({{"q", {{"low", 0.1}, {"high", 0.9}, {"mid", 0.5}}}});
  const auto out = generate(b, {"q", 10});
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].text, "high");
  EXPECT_EQ(out[2].text, "low");
}

TEST(MockBackend, BitDeterministic) {
  const std::map<std::string, std::vector<ScoredText>> table{{"q", {{"a", 0.3}, {"b", 0.25}}}};
  EXPECT_EQ(protocol::encode(generate(mock_backend(table), {"q", 10})),
            protocol::encode(generate(mock_backend(table), {"q", 10})));
}

TEST(MockBackend, SubjectRulesJitterDeterministically) {
  MockGenerationTable t;
  t.subject_rules.push_back({"Frédéric Chopin", {{"Paris", 0.4}, {"Warsaw", 0.3}}});
  Backend b({"m", BackendKind::kGeneration, "mock", false}, std::make_shared<MockService>(t));
  const auto a1 = generate(b, {"Where did Frédéric Chopin die?", 10});
  const auto a2 = generate(b, {"Where did Frédéric Chopin die?", 10});
  EXPECT_EQ(a1, a2);
  ASSERT_EQ(a1.size(), 2u);
  for (const auto& g : a1) {
    const double base = g.text == "Paris" ? 0.4 : 0.3;
    EXPECT_GE(g.probability(), 0.25 * base * (1 - 1e-12));
    EXPECT_LT(g.probability(), base);
  }
  // Diacritic-stripped prompts still match the rule.
  EXPECT_EQ(generate(b, {"Where Frederic Chopin die?", 10}).size(), 2u);
  EXPECT_TRUE(generate(b, {"Where did Chopin die?", 10}).empty());
}

TEST(Generate, RejectsWrongKindAndBadBeamSize) {
  auto mt = mock_translator({});
  EXPECT_THROW(generate(mt, {"q", 10}), ConfigError);
  auto gen = mock_backend({});
  EXPECT_THROW(generate(gen, {"q", 0}), ValidationError);
  EXPECT_THROW(generate(gen, {"q", 65}), ValidationError);
}

TEST(Generate, PositiveLogScoreIsProtocolViolationNamingCandidate) {
  auto s = std::make_shared<FakeService>();
  s->on_generate = [] { return std::vector<Generation>{{"ok", -1.0}, {"Princeton", 0.1}}; };
  auto b = fake_backend(s, BackendKind::kGeneration);
  try {
    generate(b, {"q", 10});
    FAIL() << "expected ProtocolError";
  } catch (const ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find("Princeton"), std::string::npos);
  }
}

TEST(Generate, NonFiniteLogScoreRejected) {
  auto s = std::make_shared<FakeService>();
  s->on_generate = [] { return std::vector<Generation>{{"x", std::nan("")}}; };
  EXPECT_THROW(generate(fake_backend(s, BackendKind::kGeneration), {"q", 10}), ProtocolError);
}

TEST(Translate, IdentityTableAllowsZeroLogScore) {
  MockTranslationTable t;
  t.exact[{"en", "fr", "hello"}] = {{"hello", 1.0}};
  const auto out = translate(mock_translator(t), "hello", "en", "fr");
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].log_score, 0.0);
}

TEST(Translate, SameSourceAndTargetIsConfigError) {
  EXPECT_THROW(translate(mock_translator({}), "x", "en", "en"), ConfigError);
}

TEST(Translate, UnsupportedPairIsConfigError) {
  MockTranslationTable t;
  t.languages = {"en", "fr"};
  EXPECT_THROW(translate(mock_translator(t), "x", "en", "ko"), ConfigError);
}

TEST(Translate, AtMostRequestedCandidatesSorted) {
  MockTranslationTable t;
  t.synthetic = true;
  const auto b = mock_translator(t);
  for (int n : {1, 3, 8}) {
    const auto out = translate(b, "Where is X buried?", "en", "fr", n);
    EXPECT_LE(out.size(), static_cast<std::size_t>(n));
    for (std::size_t i = 1; i < out.size(); ++i) EXPECT_GE(out[i - 1].log_score, out[i].log_score);
  }
}

TEST(Retry, BackoffGrowsExponentiallyAndCaps) {
  RetryPolicy p;
  p.initial_backoff = std::chrono::milliseconds(100);
  p.max_backoff = std::chrono::milliseconds(250);
  EXPECT_EQ(p.backoff_before(1).count(), 0);
  EXPECT_EQ(p.backoff_before(2).count(), 100);
  EXPECT_EQ(p.backoff_before(3).count(), 200);
  EXPECT_EQ(p.backoff_before(4).count(), 250);
}

TEST(Retry, ThreeAttemptsThenTransportError) {
  auto s = std::make_shared<FakeService>();
  s->on_generate = []() -> std::vector<Generation> { throw TransportError("connection refused"); };
  std::vector<long> waits;
  auto b = fake_backend(s, BackendKind::kGeneration, {},
                        [&](std::chrono::milliseconds d) { waits.push_back(d.count()); });
  EXPECT_THROW(generate(b, {"q", 10}), TransportError);
  EXPECT_EQ(s->calls.load(), 3);
  EXPECT_EQ(waits, (std::vector<long>{100, 200}));
}

TEST(Retry, RecoversAfterTransientFailure) {
  auto s = std::make_shared<FakeService>();
  int failures = 2;
  s->on_generate = [&]() -> std::vector<Generation> {
    if (failures-- > 0) throw TransportError("503");
    return {{"a", -0.1}};
  };
  EXPECT_EQ(generate(fake_backend(s, BackendKind::kGeneration), {"q", 10}).size(), 1u);
  EXPECT_EQ(s->calls.load(), 3);
}

TEST(Retry, ProtocolErrorsAreNotRetried) {
  auto s = std::make_shared<FakeService>();
  s->on_generate = []() -> std::vector<Generation> { throw ProtocolError("bad"); };
  EXPECT_THROW(generate(fake_backend(s, BackendKind::kGeneration), {"q", 10}), ProtocolError);
  EXPECT_EQ(s->calls.load(), 1);
}

TEST(InFlightLimiter, BoundsConcurrentCalls) {
  class Slow : public BackendService {
   public:
    std::atomic<int> current{0}, peak{0};
    std::vector<Generation> generate(const GenerationRequest&) override {
      const int now = ++current;
      int p = peak.load();
      while (now > p && !peak.compare_exchange_weak(p, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      --current;
      return {{"a", -1.0}};
    }
    std::vector<Generation> translate(const TranslationRequest&) override { return {}; }
  };
  auto slow = std::make_shared<Slow>();
  Backend b({"slow", BackendKind::kGeneration, "mock", false}, slow, {}, 2);
  std::vector<std::jthread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 5; ++i) generate(b, {"q", 10});
    });
  }
  threads.clear();
  EXPECT_LE(slow->peak.load(), 2);
  EXPECT_GE(slow->peak.load(), 1);
}

TEST(Protocol, RequestEncodingIsFieldOrdered) {
  EXPECT_EQ(protocol::encode(GenerationRequest{"Where did Albert Einstein die?", 10}),
            R"({"prompt":"Where did Albert Einstein die?","num_sequences":10})");
  EXPECT_EQ(protocol::encode(TranslationRequest{"x", "en", "fr", 8}),
            R"({"text":"x","source":"en","target":"fr","num_candidates":8})");
  EXPECT_EQ(protocol::encode_error("boom"), R"({"error":"boom"})");
}

TEST(Protocol, RequestsDecode) {
  const auto g = protocol::decode_generation_request(R"({"prompt":"p","num_sequences":3})");
  EXPECT_EQ(g.prompt, "p");
  EXPECT_EQ(g.num_sequences, 3);
  EXPECT_THROW(protocol::decode_generation_request(R"({"prompt":"p"})"), ProtocolError);
  EXPECT_THROW(protocol::decode_translation_request("{"), ProtocolError);
}

TEST(Protocol, ResponseRoundTripIsIdentity) {
  testing::TestRng rng(7);
  const std::vector<std::string> texts{"Princeton", "Wiesbaden, Baden-Württemberg", "in \"Bonn\"",
                                       "東京", "a\\b", "tab\there"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Generation> gens;
    const int n = rng.range(0, 10);
    for (int i = 0; i < n; ++i) {
      // Arbitrary non-positive doubles, including subnormal-scale and zero.
      const double u = rng.unit();
      const double score = trial % 17 == 0 ? 0.0 : -u * std::pow(10.0, rng.range(-300, 3));
      gens.push_back({texts[static_cast<std::size_t>(rng.range(0, 5))], score});
    }
    const auto decoded = protocol::decode_candidates(protocol::encode(gens));
    ASSERT_EQ(decoded, gens);
  }
}

TEST(Protocol, ConformanceVectors) {
  std::ifstream in(PROBE_TESTS_DIR "/data/protocol_vectors.json");
  ASSERT_TRUE(in);
  const auto doc = nlohmann::json::parse(in);
  for (const auto& v : doc["responses"]) {
    const auto body = v["body"].get<std::string>();
    const bool valid = v["valid"].get<bool>();
    bool ok = true;
    try {
      finalize_candidates(protocol::decode_candidates(body), kMaxSequences);
    } catch (const ProtocolError&) {
      ok = false;
    }
    EXPECT_EQ(ok, valid) << v["name"];
  }
  for (const auto& r : doc["requests"]) {
    const auto path = r["path"].get<std::string>();
    const auto body = r["body"].get<std::string>();
    if (path == protocol::kGeneratePath) {
      EXPECT_EQ(protocol::encode(protocol::decode_generation_request(body)), body);
    } else {
      EXPECT_EQ(protocol::encode(protocol::decode_translation_request(body)), body);
    }
  }
}

TEST(Descriptor, EndpointMustBeUrlOrMock) {
  EXPECT_NO_THROW((BackendDescriptor{"a", BackendKind::kGeneration, "mock", false}.validate()));
  EXPECT_NO_THROW(
      (BackendDescriptor{"a", BackendKind::kGeneration, "http://127.0.0.1:8080/api", false}.validate()));
  EXPECT_THROW((BackendDescriptor{"a", BackendKind::kGeneration, "localhost:80", false}.validate()),
               ConfigError);
  EXPECT_THROW((BackendDescriptor{"a", BackendKind::kGeneration, "http://:80", false}.validate()),
               ConfigError);
  EXPECT_THROW((BackendDescriptor{"a", BackendKind::kGeneration, "http://h:x", false}.validate()),
               ConfigError);
}

TEST(SplitUrl, OriginAndBasePath) {
  std::string origin, path;
  ASSERT_TRUE(split_url("http://127.0.0.1:9000/base/", &origin, &path));
  EXPECT_EQ(origin, "http://127.0.0.1:9000");
  EXPECT_EQ(path, "/base");
  ASSERT_TRUE(split_url("https://example.org", &origin, &path));
  EXPECT_EQ(origin, "https://example.org");
  EXPECT_EQ(path, "");
}

/// Protocol server on an ephemeral port for the lifetime of the fixture.
class HttpRoundTrip : public ::testing::Test {
 protected:
  void SetUp() override {
    MockGenerationTable gen;
    gen.exact["Where did Albert Einstein die?"] = {{"Princeton", 0.6}, {"Berlin", 0.2}};
    MockTranslationTable mt;
    mt.synthetic = true;
    mt.languages = {"en", "fr"};
    mount_protocol_routes(server_, std::make_shared<MockService>(gen, mt));
    server_.Post("/flaky/v1/generate", [this](const httplib::Request&, httplib::Response& res) {
      if (flaky_failures_-- > 0) {
        res.status = 503;
        res.set_content(protocol::encode_error("warming up"), "application/json");
        return;
      }
      res.set_content(protocol::encode(std::vector<Generation>{{"ok", -0.5}}), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }
  std::string url(const std::string& base = "") const {
    return "http://127.0.0.1:" + std::to_string(port_) + base;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> flaky_failures_{0};
};

TEST_F(HttpRoundTrip, GenerateMatchesInProcessMock) {
  auto remote = http_backend({"remote", BackendKind::kGeneration, url(), false});
  const auto out = generate(remote, {"Where did Albert Einstein die?", 10});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].text, "Princeton");
  EXPECT_EQ(out[0].log_score, std::log(0.6));
  EXPECT_TRUE(generate(remote, {"unknown", 10}).empty());
}

TEST_F(HttpRoundTrip, TranslateAndErrors) {
  auto remote = http_backend({"remote", BackendKind::kTranslation, url(), false});
  EXPECT_EQ(translate(remote, "Where is X buried?", "en", "fr", 8).size(), 8u);
  EXPECT_THROW(translate(remote, "x", "en", "ko", 8), ConfigError);  // 422 from server
}

TEST_F(HttpRoundTrip, MalformedBodyIs400) {
  httplib::Client client(url());
  auto res = client.Post("/v1/generate", "{oops", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_FALSE(protocol::decode_error(res->body).empty());
}

TEST_F(HttpRoundTrip, ServerErrorsAreRetried) {
  flaky_failures_ = 2;
  RetryPolicy fast;
  fast.initial_backoff = std::chrono::milliseconds(1);
  auto remote = http_backend({"flaky", BackendKind::kGeneration, url("/flaky"), false}, fast);
  const auto out = generate(remote, {"q", 10});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].text, "ok");

  flaky_failures_ = 5;
  EXPECT_THROW(generate(remote, {"q", 10}), TransportError);
}

TEST(Http, UnreachableEndpointIsTransportError) {
  RetryPolicy fast;
  fast.initial_backoff = std::chrono::milliseconds(1);
  // Port 9 (discard) on localhost is closed in the sandbox.
  auto remote = http_backend({"dead", BackendKind::kGeneration, "http://127.0.0.1:9", false}, fast);
  EXPECT_THROW(generate(remote, {"q", 10}), TransportError);
}

}  // namespace
}  // namespace probe
