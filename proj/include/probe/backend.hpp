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

#pragma once

// Scored-sequence backends: the generation/translation wire protocol, retry
// and in-flight limiting, and the deterministic in-process mock.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <semaphore>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"

#include "probe/error.hpp"
#include "probe/text.hpp"

namespace probe {

/// One beam candidate. exp(log_score) is its generation probability.
struct Generation {
  std::string text;
  double log_score = 0.0;

  double probability() const { return std::exp(log_score); }

  bool operator==(const Generation&) const = default;
};

inline void validate_generation(const Generation& g) {
  if (!std::isfinite(g.log_score)) {
    throw ProtocolError("candidate '" + g.text + "' has a non-finite log_score");
  }
  if (g.log_score > 0.0) {
    throw ProtocolError("candidate '" + g.text + "' has positive log_score " +
                        nlohmann::json(g.log_score).dump());
  }
  if (text::trim_view(g.text).empty()) throw ProtocolError("candidate with empty text");
}

inline constexpr int kDefaultBeamSize = 10;
inline constexpr int kMaxSequences = 64;

struct GenerationRequest {
  std::string prompt;
  int num_sequences = kDefaultBeamSize;

  void validate() const {
    if (num_sequences < 1 || num_sequences > kMaxSequences) {
      throw ValidationError("num_sequences must be in [1, 64], got " +
                            std::to_string(num_sequences));
    }
  }
};

struct TranslationRequest {
  std::string text;
  std::string source;
  std::string target;
  int num_candidates = 8;

  void validate() const {
    if (source == target) {
      throw ConfigError("translation source and target are both '" + source + "'");
    }
    if (num_candidates < 1 || num_candidates > kMaxSequences) {
      throw ValidationError("num_candidates must be in [1, 64], got " +
                            std::to_string(num_candidates));
    }
  }
};

enum class BackendKind { kGeneration, kTranslation };

inline std::string_view to_string(BackendKind k) {
  return k == BackendKind::kGeneration ? "generation" : "translation";
}

inline constexpr std::string_view kMockEndpoint = "mock";

/// Splits "http://host:port/base" into scheme+authority and base path.
/// Returns false when the string is not an http(s) URL with a host.
inline bool split_url(std::string_view url, std::string* origin, std::string* base_path) {
  std::string_view rest;
  if (url.starts_with("http://")) {
    rest = url.substr(7);
  } else if (url.starts_with("https://")) {
    rest = url.substr(8);
  } else {
    return false;
  }
  const auto slash = rest.find('/');
  const std::string_view authority = rest.substr(0, slash);
  if (authority.empty() || authority.front() == ':') return false;
  if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    const auto port = authority.substr(colon + 1);
    if (port.empty() || !std::all_of(port.begin(), port.end(), [](char c) {
          return c >= '0' && c <= '9';
        })) {
      return false;
    }
  }
  if (origin) *origin = std::string(url.substr(0, url.size() - rest.size() + authority.size()));
  if (base_path) {
    std::string path = slash == std::string_view::npos ? "" : std::string(rest.substr(slash));
    while (!path.empty() && path.back() == '/') path.pop_back();
    *base_path = path;
  }
  return true;
}

struct BackendDescriptor {
  std::string name;
  BackendKind kind = BackendKind::kGeneration;
  std::string endpoint{kMockEndpoint};
  bool case_insensitive_match = false;

  bool is_mock() const { return endpoint == kMockEndpoint; }

  void validate() const {
    if (!is_mock() && !split_url(endpoint, nullptr, nullptr)) {
      throw ConfigError("backend '" + name + "': endpoint '" + endpoint +
                        "' is neither a URL nor \"mock\"");
    }
  }
};

// ---------------------------------------------------------------------------
// Wire protocol.

namespace protocol {

inline constexpr std::string_view kGeneratePath = "/v1/generate";
inline constexpr std::string_view kTranslatePath = "/v1/translate";

inline std::string encode(const GenerationRequest& r) {
  nlohmann::ordered_json j;
  j["prompt"] = r.prompt;
  j["num_sequences"] = r.num_sequences;
  return j.dump();
}

inline std::string encode(const TranslationRequest& r) {
  nlohmann::ordered_json j;
  j["text"] = r.text;
  j["source"] = r.source;
  j["target"] = r.target;
  j["num_candidates"] = r.num_candidates;
  return j.dump();
}

inline std::string encode(const std::vector<Generation>& candidates) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& g : candidates) {
    nlohmann::ordered_json c;
    c["text"] = g.text;
    c["log_score"] = g.log_score;
    arr.push_back(std::move(c));
  }
  nlohmann::ordered_json j;
  j["candidates"] = std::move(arr);
  return j.dump();
}

inline std::string encode_error(std::string_view message) {
  nlohmann::ordered_json j;
  j["error"] = message;
  return j.dump();
}

namespace detail {

inline nlohmann::json parse_object(std::string_view body, std::string_view what) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(std::string(what) + ": malformed JSON: " + e.what());
  }
  if (!j.is_object()) throw ProtocolError(std::string(what) + ": expected a JSON object");
  return j;
}

inline const nlohmann::json& require(const nlohmann::json& j, const char* key, bool string,
                                     std::string_view what) {
  auto it = j.find(key);
  if (it == j.end() || (string ? !it->is_string() : !it->is_number_integer())) {
    throw ProtocolError(std::string(what) + ": missing or mistyped field '" + key + "'");
  }
  return *it;
}

}  // namespace detail

inline GenerationRequest decode_generation_request(std::string_view body) {
  const auto j = detail::parse_object(body, "generate request");
  GenerationRequest r;
  r.prompt = detail::require(j, "prompt", true, "generate request").get<std::string>();
  r.num_sequences = detail::require(j, "num_sequences", false, "generate request").get<int>();
  return r;
}

inline TranslationRequest decode_translation_request(std::string_view body) {
  const auto j = detail::parse_object(body, "translate request");
  TranslationRequest r;
  r.text = detail::require(j, "text", true, "translate request").get<std::string>();
  r.source = detail::require(j, "source", true, "translate request").get<std::string>();
  r.target = detail::require(j, "target", true, "translate request").get<std::string>();
  r.num_candidates =
      detail::require(j, "num_candidates", false, "translate request").get<int>();
  return r;
}

/// Parses a candidates response without judging its contents.
inline std::vector<Generation> decode_candidates(std::string_view body) {
  const auto j = detail::parse_object(body, "response");
  auto it = j.find("candidates");
  if (it == j.end() || !it->is_array()) {
    throw ProtocolError("response: missing 'candidates' array");
  }
  std::vector<Generation> out;
  out.reserve(it->size());
  for (const auto& c : *it) {
    if (!c.is_object()) throw ProtocolError("response: candidate is not an object");
    auto t = c.find("text");
    auto s = c.find("log_score");
    if (t == c.end() || !t->is_string() || s == c.end() || !s->is_number()) {
      throw ProtocolError("response: candidate needs string 'text' and numeric 'log_score'");
    }
    out.push_back(Generation{t->get<std::string>(), s->get<double>()});
  }
  return out;
}

/// Extracts the message of an error body, or the raw body if it is not one.
inline std::string decode_error(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    if (j.is_object() && j.contains("error") && j["error"].is_string()) {
      return j["error"].get<std::string>();
    }
  } catch (const nlohmann::json::parse_error&) {
  }
  return std::string(body);
}

}  // namespace protocol

/// Validates raw candidates, drops blank texts, sorts by log_score
/// descending (stable) and truncates to `limit`.
inline std::vector<Generation> finalize_candidates(std::vector<Generation> raw, int limit) {
  std::erase_if(raw, [](const Generation& g) { return text::trim_view(g.text).empty(); });
  for (const auto& g : raw) validate_generation(g);
  std::stable_sort(raw.begin(), raw.end(), [](const Generation& a, const Generation& b) {
    return a.log_score > b.log_score;
  });
  if (raw.size() > static_cast<std::size_t>(limit)) raw.resize(static_cast<std::size_t>(limit));
  return raw;
}

// ---------------------------------------------------------------------------
// Services.

/// What sits behind a descriptor: an in-process mock or a protocol client.
class BackendService {
 public:
  virtual ~BackendService() = default;
  virtual std::vector<Generation> generate(const GenerationRequest& request) = 0;
  virtual std::vector<Generation> translate(const TranslationRequest& request) = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{100};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{2000};

  std::chrono::milliseconds backoff_before(int attempt) const {
    // attempt is 1-based; no wait before the first try.
    if (attempt <= 1) return std::chrono::milliseconds{0};
    double ms = static_cast<double>(initial_backoff.count()) * std::pow(multiplier, attempt - 2);
    ms = std::min(ms, static_cast<double>(max_backoff.count()));
    return std::chrono::milliseconds{static_cast<std::int64_t>(ms)};
  }
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline void sleep_for(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

/// Runs `fn`, retrying TransportError with exponential backoff. The last
/// TransportError propagates once attempts are exhausted.
template <typename Fn>
auto with_retry(const RetryPolicy& policy, Fn&& fn, const Sleeper& sleeper = sleep_for)
    -> decltype(fn()) {
  const int attempts = std::max(1, policy.max_attempts);
  for (int attempt = 1;; ++attempt) {
    if (const auto wait = policy.backoff_before(attempt); wait.count() > 0) sleeper(wait);
    try {
      return fn();
    } catch (const TransportError& e) {
      if (attempt >= attempts) {
        throw TransportError(std::string(e.what()) + " (after " + std::to_string(attempts) +
                             " attempts)");
      }
    }
  }
}

/// Caps the number of concurrent requests to one backend.
class InFlightLimiter {
 public:
  static constexpr std::ptrdiff_t kMax = 1024;

  explicit InFlightLimiter(int limit) : sem_(std::clamp<std::ptrdiff_t>(limit, 1, kMax)) {}

  template <typename Fn>
  auto run(Fn&& fn) -> decltype(fn()) {
    sem_.acquire();
    struct Release {
      std::counting_semaphore<kMax>& s;
      ~Release() { s.release(); }
    } release{sem_};
    return fn();
  }

 private:
  std::counting_semaphore<kMax> sem_;
};

inline constexpr int kDefaultMaxInFlight = 4;

/// A descriptor bound to its service. Cheap to copy; copies share the
/// service and the in-flight limit.
class Backend {
 public:
  Backend(BackendDescriptor descriptor, std::shared_ptr<BackendService> service,
          RetryPolicy retry = {}, int max_in_flight = kDefaultMaxInFlight,
          Sleeper sleeper = sleep_for)
      : descriptor_(std::move(descriptor)),
        service_(std::move(service)),
        retry_(retry),
        limiter_(std::make_shared<InFlightLimiter>(max_in_flight)),
        sleeper_(std::move(sleeper)) {
    descriptor_.validate();
  }

  const BackendDescriptor& descriptor() const { return descriptor_; }
  BackendService& service() const { return *service_; }
  const RetryPolicy& retry_policy() const { return retry_; }

  template <typename Fn>
  auto call(Fn&& fn) const -> decltype(fn()) {
    return with_retry(
        retry_, [&] { return limiter_->run(fn); }, sleeper_);
  }

 private:
  BackendDescriptor descriptor_;
  std::shared_ptr<BackendService> service_;
  RetryPolicy retry_;
  std::shared_ptr<InFlightLimiter> limiter_;
  Sleeper sleeper_;
};

/// At most request.num_sequences candidates, non-increasing in log_score.
inline std::vector<Generation> generate(const Backend& backend, const GenerationRequest& request) {
  if (backend.descriptor().kind != BackendKind::kGeneration) {
    throw ConfigError("backend '" + backend.descriptor().name + "' is not a generation backend");
  }
  request.validate();
  auto raw = backend.call([&] { return backend.service().generate(request); });
  return finalize_candidates(std::move(raw), request.num_sequences);
}

inline std::vector<Generation> translate(const Backend& backend, const TranslationRequest& request) {
  if (backend.descriptor().kind != BackendKind::kTranslation) {
    throw ConfigError("backend '" + backend.descriptor().name + "' is not a translation backend");
  }
  request.validate();
  auto raw = backend.call([&] { return backend.service().translate(request); });
  return finalize_candidates(std::move(raw), request.num_candidates);
}

inline std::vector<Generation> translate(const Backend& backend, std::string text,
                                         std::string source, std::string target,
                                         int num_candidates = 8) {
  return translate(backend, TranslationRequest{std::move(text), std::move(source),
                                               std::move(target), num_candidates});
}

// ---------------------------------------------------------------------------
// Deterministic mock.

/// (text, probability) as stored in mock tables.
struct ScoredText {
  std::string text;
  double probability = 1.0;

  bool operator==(const ScoredText&) const = default;
};

inline void validate_probability(const ScoredText& s, std::string_view where) {
  if (!(s.probability > 0.0 && s.probability <= 1.0)) {
    throw ValidationError(std::string(where) + ": probability of '" + s.text +
                          "' must lie in (0, 1], got " + nlohmann::json(s.probability).dump());
  }
}

inline std::vector<Generation> to_generations(const std::vector<ScoredText>& entries) {
  std::vector<Generation> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back({e.text, std::log(e.probability)});
  return out;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Maps a string to a deterministic value in [0, 1).
inline double unit_hash(std::string_view s) {
  std::uint64_t z = fnv1a(s) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

/// Answers for prompts that mention `subject` but have no exact table entry.
/// Each candidate probability is scaled by a factor in [0.25, 1) derived
/// from a hash of (prompt, candidate), so paraphrases disagree a little.
struct SubjectRule {
  std::string subject;
  std::vector<ScoredText> candidates;
};

struct MockGenerationTable {
  std::map<std::string, std::vector<ScoredText>> exact;
  std::vector<SubjectRule> subject_rules;
};

using MockTranslationKey = std::tuple<std::string, std::string, std::string>;  // source, target, text

struct MockTranslationTable {
  std::map<MockTranslationKey, std::vector<ScoredText>> exact;
  /// Produce rule-based round-trip paraphrases for texts not in `exact`.
  bool synthetic = false;
  /// Languages the mock accepts; empty means any pair.
  std::set<std::string> languages;
};

namespace detail {

inline const std::vector<std::string>& synthetic_frames(std::string_view lang) {
  static const std::map<std::string, std::vector<std::string>, std::less<>> frames{
      {"fr", {"Tell me, {}", "Say, {}", "Do you know: {}", "I wonder, {}", "Question: {}",
              "Please tell me: {}", "Can you say: {}", "So, {}"}},
      {"ru", {"Tell me please, {}", "Answer: {}", "Do you know, {}", "Interesting, {}",
              "Query: {}", "Explain: {}", "Say then, {}", "Well, {}"}},
      {"de", {"Tell me: {}", "Say me, {}", "Know you: {}", "Asked: {}", "The question is: {}",
              "Please say: {}", "Can you tell: {}", "Now, {}"}},
      {"es", {"Tell me, please, {}", "Say me: {}", "Do you know, please, {}", "I ask: {}",
              "The question: {}", "Please, tell: {}", "Could you say: {}", "Then, {}"}},
      {"ja", {"Please tell me. {}", "Answer. {}", "Do you know? {}", "I want to know. {}",
              "Question. {}", "Tell, please. {}", "Can you answer? {}", "By the way, {}"}},
  };
  static const std::vector<std::string> fallback{
      "Tell me, {}", "Say, {}", "Do you know: {}", "I wonder, {}",
      "Question: {}", "Please tell me: {}", "Can you say: {}", "So, {}"};
  auto it = frames.find(lang);
  return it == frames.end() ? fallback : it->second;
}

inline std::string fill_frame(const std::string& frame, std::string_view body) {
  std::string out = frame;
  out.replace(out.find("{}"), 2, body);
  return out;
}

}  // namespace detail

class MockService final : public BackendService {
 public:
  explicit MockService(MockGenerationTable generation, MockTranslationTable translation = {})
      : gen_(std::move(generation)), mt_(std::move(translation)) {
    for (const auto& [prompt, entries] : gen_.exact) {
      for (const auto& e : entries) validate_probability(e, "mock table entry '" + prompt + "'");
    }
    for (const auto& rule : gen_.subject_rules) {
      if (rule.subject.empty()) throw ValidationError("mock subject rule with empty subject");
      for (const auto& e : rule.candidates) {
        validate_probability(e, "mock rule '" + rule.subject + "'");
      }
    }
    for (const auto& [key, entries] : mt_.exact) {
      for (const auto& e : entries) validate_probability(e, "mock translation entry");
    }
    // Longest subject first so "Paris Hilton" wins over "Paris".
    std::stable_sort(gen_.subject_rules.begin(), gen_.subject_rules.end(),
                     [](const SubjectRule& a, const SubjectRule& b) {
                       return a.subject.size() > b.subject.size();
                     });
  }

  std::vector<Generation> generate(const GenerationRequest& request) override {
    if (auto it = gen_.exact.find(request.prompt); it != gen_.exact.end()) {
      return truncate(to_generations(it->second), request.num_sequences);
    }
    const std::string folded = text::strip_diacritics(request.prompt);
    for (const auto& rule : gen_.subject_rules) {
      if (request.prompt.find(rule.subject) == std::string::npos &&
          folded.find(text::strip_diacritics(rule.subject)) == std::string::npos) {
        continue;
      }
      std::vector<Generation> out;
      for (const auto& c : rule.candidates) {
        const double jitter = 0.25 + 0.75 * unit_hash(request.prompt + '\x1f' + c.text);
        out.push_back({c.text, std::log(c.probability * jitter)});
      }
      std::stable_sort(out.begin(), out.end(), [](const Generation& a, const Generation& b) {
        return a.log_score > b.log_score;
      });
      return truncate(std::move(out), request.num_sequences);
    }
    return {};
  }

  std::vector<Generation> translate(const TranslationRequest& request) override {
    if (!mt_.languages.empty() &&
        (!mt_.languages.contains(request.source) || !mt_.languages.contains(request.target))) {
      throw ConfigError("mock translator does not support " + request.source + "->" +
                        request.target);
    }
    if (auto it = mt_.exact.find({request.source, request.target, request.text});
        it != mt_.exact.end()) {
      return truncate(to_generations(it->second), request.num_candidates);
    }
    if (!mt_.synthetic) return {};
    return synthetic_translate(request);
  }

 private:
  static std::vector<Generation> truncate(std::vector<Generation> v, int n) {
    if (v.size() > static_cast<std::size_t>(n)) v.resize(static_cast<std::size_t>(n));
    return v;
  }

  // Forward (en -> xx) wraps the text as "<xx#j> text"; backward unwraps it
  // into frame (j + k) mod 8 of the pivot language, so several forward
  // candidates reach the same paraphrase and merge.
  static std::vector<Generation> synthetic_translate(const TranslationRequest& r) {
    std::vector<Generation> out;
    const std::string tag_prefix = "<" + r.source + "#";
    if (r.text.starts_with(tag_prefix)) {
      const auto close = r.text.find("> ");
      if (close == std::string::npos) return out;
      const int j = std::stoi(r.text.substr(tag_prefix.size(), close - tag_prefix.size()));
      const std::string body = r.text.substr(close + 2);
      const auto& frames = detail::synthetic_frames(r.source);
      for (int k = 0; k < r.num_candidates; ++k) {
        const auto& frame = frames[static_cast<std::size_t>(j + k) % frames.size()];
        out.push_back({detail::fill_frame(frame, body), std::log(0.4 * std::pow(0.75, k))});
      }
      return out;
    }
    for (int j = 0; j < r.num_candidates; ++j) {
      out.push_back({"<" + r.target + "#" + std::to_string(j) + "> " + r.text,
                     std::log(0.5 * std::pow(0.7, j))});
    }
    return out;
  }

  MockGenerationTable gen_;
  MockTranslationTable mt_;
};

/// Generation backend answering from `seed_table`; unknown prompts get no candidates.
inline Backend mock_backend(std::map<std::string, std::vector<ScoredText>> seed_table,
                            std::string name = "mock") {
  MockGenerationTable table;
  table.exact = std::move(seed_table);
  return Backend({std::move(name), BackendKind::kGeneration, std::string(kMockEndpoint), false},
                 std::make_shared<MockService>(std::move(table)));
}

inline Backend mock_translator(MockTranslationTable table, std::string name = "mock-mt") {
  return Backend({std::move(name), BackendKind::kTranslation, std::string(kMockEndpoint), false},
                 std::make_shared<MockService>(MockGenerationTable{}, std::move(table)));
}

// ---------------------------------------------------------------------------
// Mock table files.

inline std::vector<ScoredText> parse_scored_list(const nlohmann::json& arr, std::string_view where) {
  if (!arr.is_array()) throw ParseError(std::string(where) + ": expected an array");
  std::vector<ScoredText> out;
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_number()) {
      throw ParseError(std::string(where) + ": entries must be [text, probability] pairs");
    }
    out.push_back({e[0].get<std::string>(), e[1].get<double>()});
  }
  return out;
}

/// {"exact": {prompt: [[text, p], ...]}, "subject_rules": [{"subject": s, "candidates": [...]}]}
inline MockGenerationTable parse_mock_generation(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("mock generation table: expected an object");
  MockGenerationTable t;
  if (auto it = doc.find("exact"); it != doc.end()) {
    for (const auto& [prompt, list] : it->items()) {
      t.exact[prompt] = parse_scored_list(list, "mock generation table");
    }
  }
  if (auto it = doc.find("subject_rules"); it != doc.end()) {
    for (const auto& r : *it) {
      if (!r.is_object() || !r.contains("subject") || !r["subject"].is_string()) {
        throw ParseError("mock generation table: subject rule needs a 'subject'");
      }
      t.subject_rules.push_back(
          {r["subject"].get<std::string>(),
           parse_scored_list(r.value("candidates", nlohmann::json::array()),
                             "mock generation table")});
    }
  }
  return t;
}

/// {"synthetic": bool, "languages": [...], "exact": [{"source","target","text","candidates"}]}
inline MockTranslationTable parse_mock_translation(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("mock translation table: expected an object");
  MockTranslationTable t;
  t.synthetic = doc.value("synthetic", false);
  for (const auto& l : doc.value("languages", nlohmann::json::array())) {
    t.languages.insert(l.get<std::string>());
  }
  for (const auto& e : doc.value("exact", nlohmann::json::array())) {
    t.exact[{e.at("source").get<std::string>(), e.at("target").get<std::string>(),
             e.at("text").get<std::string>()}] =
        parse_scored_list(e.at("candidates"), "mock translation table");
  }
  return t;
}

}  // namespace probe
