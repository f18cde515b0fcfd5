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

// Run configuration, the probe pipeline (dataset -> augment -> generate ->
// aggregate -> evaluate) and report emission.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "probe/aggregate.hpp"
#include "probe/augment.hpp"
#include "probe/backend.hpp"
#include "probe/dataset.hpp"
#include "probe/error.hpp"
#include "probe/evaluate.hpp"
#include "probe/http.hpp"

namespace probe {

inline constexpr std::string_view kVersion = "probe 0.1.0";

// ---------------------------------------------------------------------------
// Configuration.

struct BackendConfig {
  std::string name;
  std::string endpoint{kMockEndpoint};
  bool case_insensitive_match = false;
  /// Mock table file, used when endpoint is "mock".
  std::optional<std::filesystem::path> mock_table;
};

struct RunConfig {
  std::filesystem::path base_dir;  // relative paths resolve against this
  std::filesystem::path facts_path;
  std::optional<std::filesystem::path> templates_path;
  BackendConfig generation;
  std::optional<BackendConfig> translation;
  std::optional<std::filesystem::path> lexicon_path;
  std::optional<std::filesystem::path> embeddings_path;
  std::optional<std::filesystem::path> stopwords_path;
  AugmentationOptions augmentation;
  Strategy strategy = Strategy::kSum;
  std::vector<int> k_values{1, 2, 5, 10, 20, 30};
  int iterations = 5;
  std::uint64_t seed = 0;
  int num_sequences = kDefaultBeamSize;
  bool case_insensitive = false;
  bool accept_aliases = false;
  std::filesystem::path output_dir{"probe-out"};
  int workers = 0;  // 0: hardware concurrency
  int max_in_flight = kDefaultMaxInFlight;
  RetryPolicy retry;

  std::filesystem::path resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : base_dir / p;
  }

  bool effective_case_insensitive() const {
    return case_insensitive || generation.case_insensitive_match;
  }
};

namespace detail {

inline BackendConfig parse_backend_config(const nlohmann::json& j, std::string_view role) {
  if (!j.is_object()) throw ConfigError(std::string(role) + " backend: expected an object");
  BackendConfig b;
  b.name = j.value("name", std::string(role));
  b.endpoint = j.value("endpoint", std::string(kMockEndpoint));
  b.case_insensitive_match = j.value("case_insensitive_match", false);
  if (j.contains("mock_table")) b.mock_table = j["mock_table"].get<std::string>();
  return b;
}

inline nlohmann::ordered_json backend_config_json(const BackendConfig& b) {
  nlohmann::ordered_json j;
  j["name"] = b.name;
  j["endpoint"] = b.endpoint;
  j["case_insensitive_match"] = b.case_insensitive_match;
  if (b.mock_table) j["mock_table"] = b.mock_table->generic_string();
  return j;
}

}  // namespace detail

/// Parses "1,2,5,10" into integers.
inline std::vector<int> parse_k_list(std::string_view s) {
  std::vector<int> out;
  std::string cur;
  auto flush = [&] {
    const auto t = text::trim(cur);
    if (t.empty()) throw ConfigError("empty entry in K list '" + std::string(s) + "'");
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != t.size()) throw ConfigError("bad K value '" + t + "'");
    out.push_back(v);
    cur.clear();
  };
  for (char c : s) {
    if (c == ',') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

/// Reads a JSON config document. Relative paths resolve against `base_dir`.
inline RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  RunConfig c;
  c.base_dir = base_dir;
  try {
    c.facts_path = j.at("facts_path").get<std::string>();
    if (j.contains("templates_path")) c.templates_path = j["templates_path"].get<std::string>();
    c.generation = detail::parse_backend_config(j.at("generation"), "generation");
    if (j.contains("translation") && !j["translation"].is_null()) {
      c.translation = detail::parse_backend_config(j["translation"], "translation");
    }
    if (j.contains("resources")) {
      const auto& r = j["resources"];
      if (r.contains("lexicon")) c.lexicon_path = r["lexicon"].get<std::string>();
      if (r.contains("embeddings")) c.embeddings_path = r["embeddings"].get<std::string>();
      if (r.contains("stopwords")) c.stopwords_path = r["stopwords"].get<std::string>();
    }
    if (j.contains("augmentation")) {
      const auto& a = j["augmentation"];
      if (a.contains("quotas")) {
        for (const auto& [tag, q] : a["quotas"].items()) {
          const auto t = parse_augmentation_type(tag);
          if (!is_multi_variant(t)) throw ConfigError("quota given for single-prompt method " + tag);
          c.augmentation.quotas[t] = q.get<int>();
        }
      }
      c.augmentation.stopword_filter = a.value("stopword_filter", true);
      c.augmentation.fan_out = a.value("fan_out", 8);
      c.augmentation.source_language = a.value("source_language", std::string("en"));
    }
    c.strategy = parse_strategy(j.value("strategy", std::string("sum")));
    if (j.contains("k_values")) c.k_values = j["k_values"].get<std::vector<int>>();
    c.iterations = j.value("iterations", 5);
    c.seed = j.value("seed", std::uint64_t{0});
    c.num_sequences = j.value("num_sequences", kDefaultBeamSize);
    c.case_insensitive = j.value("case_insensitive", false);
    c.accept_aliases = j.value("accept_aliases", false);
    c.output_dir = j.value("output_dir", std::string("probe-out"));
    c.workers = j.value("workers", 0);
    c.max_in_flight = j.value("max_in_flight", kDefaultMaxInFlight);
    if (j.contains("retry")) {
      const auto& r = j["retry"];
      c.retry.max_attempts = r.value("max_attempts", 3);
      c.retry.initial_backoff = std::chrono::milliseconds(r.value("initial_backoff_ms", 100));
      c.retry.multiplier = r.value("multiplier", 2.0);
      c.retry.max_backoff = std::chrono::milliseconds(r.value("max_backoff_ms", 2000));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

/// PROBE_GEN_ENDPOINT and PROBE_MT_ENDPOINT replace the configured endpoints.
inline void apply_env_overrides(RunConfig& c) {
  if (const char* gen = std::getenv("PROBE_GEN_ENDPOINT"); gen && *gen) c.generation.endpoint = gen;
  if (const char* mt = std::getenv("PROBE_MT_ENDPOINT"); mt && *mt) {
    if (!c.translation) c.translation = BackendConfig{"translation", mt, false, std::nullopt};
    c.translation->endpoint = mt;
  }
}

/// Checks invariants that do not need the data loaded.
inline void validate_config(const RunConfig& c) {
  auto must_exist = [&](const std::filesystem::path& p, std::string_view what) {
    if (!std::filesystem::exists(c.resolve(p))) {
      throw ConfigError(std::string(what) + " not found: " + c.resolve(p).string());
    }
  };
  must_exist(c.facts_path, "facts file");
  if (c.templates_path) must_exist(*c.templates_path, "templates file");
  if (c.lexicon_path) must_exist(*c.lexicon_path, "lexicon");
  if (c.embeddings_path) must_exist(*c.embeddings_path, "embedding table");
  if (c.stopwords_path) must_exist(*c.stopwords_path, "stopword list");
  for (const auto* b : {&c.generation, c.translation ? &*c.translation : nullptr}) {
    if (!b) continue;
    BackendDescriptor{b->name, BackendKind::kGeneration, b->endpoint, false}.validate();
    if (b->endpoint == kMockEndpoint && b->mock_table) must_exist(*b->mock_table, "mock table");
  }
  for (const auto& [t, q] : c.augmentation.quotas) {
    if (q < 0) throw ConfigError("quota for " + std::string(to_string(t)) + " is negative");
  }
  if (c.augmentation.fan_out < 1) throw ConfigError("fan_out must be >= 1");
  if (c.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (c.num_sequences < 1 || c.num_sequences > kMaxSequences) {
    throw ConfigError("num_sequences must be in [1, 64]");
  }
  if (c.k_values.empty()) throw ConfigError("k_values is empty");
  for (int k : c.k_values) {
    if (k < 1 || k > kMaxPromptsPerFact) throw ConfigError("K values must lie in [1, 30]");
  }
  if (c.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
  if (c.workers < 0) throw ConfigError("workers must be >= 0");
}

/// Settings that determine results; paths appear as written in the config.
/// Output directory and worker count are left out since they do not.
inline nlohmann::ordered_json config_echo(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["facts_path"] = c.facts_path.generic_string();
  if (c.templates_path) j["templates_path"] = c.templates_path->generic_string();
  j["generation"] = detail::backend_config_json(c.generation);
  j["translation"] = c.translation ? detail::backend_config_json(*c.translation)
                                   : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json res = nlohmann::ordered_json::object();
  if (c.lexicon_path) res["lexicon"] = c.lexicon_path->generic_string();
  if (c.embeddings_path) res["embeddings"] = c.embeddings_path->generic_string();
  if (c.stopwords_path) res["stopwords"] = c.stopwords_path->generic_string();
  j["resources"] = res;
  nlohmann::ordered_json quotas;
  for (auto t : kAllAugmentationTypes) {
    if (is_multi_variant(t)) quotas[std::string(to_string(t))] = c.augmentation.quota(t);
  }
  j["augmentation"] = {{"quotas", quotas},
                       {"stopword_filter", c.augmentation.stopword_filter},
                       {"fan_out", c.augmentation.fan_out},
                       {"source_language", c.augmentation.source_language}};
  j["strategy"] = to_string(c.strategy);
  j["k_values"] = c.k_values;
  j["iterations"] = c.iterations;
  j["seed"] = c.seed;
  j["num_sequences"] = c.num_sequences;
  j["case_insensitive"] = c.effective_case_insensitive();
  j["accept_aliases"] = c.accept_aliases;
  return j;
}

// ---------------------------------------------------------------------------
// Report.

struct RunWarning {
  std::optional<FactKey> fact;
  std::string stage;  // "augment", "generate", "aggregate", "kcurve"
  std::string message;

  bool operator==(const RunWarning&) const = default;
};

struct RelationSummary {
  std::string relation_id;
  long facts = 0;
  long baseline_correct = 0;
  long tta_correct = 0;
  double relative_effect = 1.0;

  bool operator==(const RelationSummary&) const = default;
};

struct FactPromptCount {
  FactKey fact;
  int prompts = 0;

  bool operator==(const FactPromptCount&) const = default;
};

struct RunReport {
  std::string version{kVersion};
  nlohmann::ordered_json config;
  std::vector<PredictionRecord> records;
  KCurve kcurve;
  std::vector<CalibrationBin> calibration_baseline;
  std::vector<CalibrationBin> calibration_tta;
  RelativeEffect overall;
  std::vector<RelationSummary> relations;
  std::vector<FactPromptCount> prompt_counts;
  std::vector<RunWarning> warnings;

  bool operator==(const RunReport&) const = default;
};

// JSON mapping.

inline void to_json(nlohmann::ordered_json& j, const FactKey& k) {
  j = {{"subject", k.subject}, {"relation_id", k.relation_id}};
}
inline void from_json(const nlohmann::ordered_json& j, FactKey& k) {
  k.subject = j.at("subject").get<std::string>();
  k.relation_id = j.at("relation_id").get<std::string>();
}

inline void to_json(nlohmann::ordered_json& j, const PredictionRecord& r) {
  j = nlohmann::ordered_json{{"fact", r.fact_key},
                             {"condition", to_string(r.condition)},
                             {"strategy", to_string(r.strategy)},
                             {"K", r.K},
                             {"final_text", r.final_text},
                             {"confidence", r.confidence},
                             {"correct", r.correct}};
}
inline void from_json(const nlohmann::ordered_json& j, PredictionRecord& r) {
  r.fact_key = j.at("fact").get<FactKey>();
  r.condition = j.at("condition").get<std::string>() == "baseline" ? Condition::kBaseline
                                                                   : Condition::kTta;
  r.strategy = parse_strategy(j.at("strategy").get<std::string>());
  r.K = j.at("K").get<int>();
  r.final_text = j.at("final_text").get<std::string>();
  r.confidence = j.at("confidence").get<double>();
  r.correct = j.at("correct").get<bool>();
}

inline void to_json(nlohmann::ordered_json& j, const KPoint& p) {
  j = nlohmann::ordered_json{{"K", p.K},
                             {"mean_relative_effect", p.mean_relative_effect},
                             {"stderr", p.standard_error},
                             {"correct_per_iteration", p.correct_per_iteration}};
}
inline void from_json(const nlohmann::ordered_json& j, KPoint& p) {
  p.K = j.at("K").get<int>();
  p.mean_relative_effect = j.at("mean_relative_effect").get<double>();
  p.standard_error = j.at("stderr").get<double>();
  p.correct_per_iteration = j.at("correct_per_iteration").get<std::vector<long>>();
}

inline void to_json(nlohmann::ordered_json& j, const KCurve& c) {
  j = nlohmann::ordered_json{{"iterations", c.iterations},
                             {"seed", c.seed},
                             {"baseline_correct", c.baseline_correct},
                             {"points", c.points}};
}
inline void from_json(const nlohmann::ordered_json& j, KCurve& c) {
  c.iterations = j.at("iterations").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.baseline_correct = j.at("baseline_correct").get<long>();
  c.points = j.at("points").get<std::vector<KPoint>>();
}

inline void to_json(nlohmann::ordered_json& j, const CalibrationBin& b) {
  j = nlohmann::ordered_json{{"bin", b.index}, {"lower", b.lower}, {"upper", b.upper},
                             {"n", b.n},       {"correct", b.correct}};
  j["accuracy"] = b.accuracy ? nlohmann::ordered_json(*b.accuracy) : nlohmann::ordered_json(nullptr);
}
inline void from_json(const nlohmann::ordered_json& j, CalibrationBin& b) {
  b.index = j.at("bin").get<int>();
  b.lower = j.at("lower").get<double>();
  b.upper = j.at("upper").get<double>();
  b.n = j.at("n").get<long>();
  b.correct = j.at("correct").get<long>();
  if (j.at("accuracy").is_null()) {
    b.accuracy.reset();
  } else {
    b.accuracy = j["accuracy"].get<double>();
  }
}

inline void to_json(nlohmann::ordered_json& j, const RelativeEffect& e) {
  j = nlohmann::ordered_json{{"value", e.value},
                             {"correct_with", e.correct_with},
                             {"correct_without", e.correct_without}};
}
inline void from_json(const nlohmann::ordered_json& j, RelativeEffect& e) {
  e.value = j.at("value").get<double>();
  e.correct_with = j.at("correct_with").get<long>();
  e.correct_without = j.at("correct_without").get<long>();
}

inline void to_json(nlohmann::ordered_json& j, const RelationSummary& r) {
  j = nlohmann::ordered_json{{"relation_id", r.relation_id},
                             {"facts", r.facts},
                             {"baseline_correct", r.baseline_correct},
                             {"tta_correct", r.tta_correct},
                             {"relative_effect", r.relative_effect}};
}
inline void from_json(const nlohmann::ordered_json& j, RelationSummary& r) {
  r.relation_id = j.at("relation_id").get<std::string>();
  r.facts = j.at("facts").get<long>();
  r.baseline_correct = j.at("baseline_correct").get<long>();
  r.tta_correct = j.at("tta_correct").get<long>();
  r.relative_effect = j.at("relative_effect").get<double>();
}

inline void to_json(nlohmann::ordered_json& j, const FactPromptCount& f) {
  j = nlohmann::ordered_json{{"fact", f.fact}, {"prompts", f.prompts}};
}
inline void from_json(const nlohmann::ordered_json& j, FactPromptCount& f) {
  f.fact = j.at("fact").get<FactKey>();
  f.prompts = j.at("prompts").get<int>();
}

inline void to_json(nlohmann::ordered_json& j, const RunWarning& w) {
  j = nlohmann::ordered_json::object();
  j["fact"] = w.fact ? nlohmann::ordered_json(*w.fact) : nlohmann::ordered_json(nullptr);
  j["stage"] = w.stage;
  j["message"] = w.message;
}
inline void from_json(const nlohmann::ordered_json& j, RunWarning& w) {
  if (j.at("fact").is_null()) {
    w.fact.reset();
  } else {
    w.fact = j["fact"].get<FactKey>();
  }
  w.stage = j.at("stage").get<std::string>();
  w.message = j.at("message").get<std::string>();
}

inline nlohmann::ordered_json report_to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["version"] = r.version;
  j["config"] = r.config;
  j["overall"] = r.overall;
  j["records"] = r.records;
  j["kcurve"] = r.kcurve;
  j["calibration"] = {{"baseline", r.calibration_baseline}, {"tta", r.calibration_tta}};
  j["relations"] = r.relations;
  j["prompt_counts"] = r.prompt_counts;
  j["warnings"] = r.warnings;
  return j;
}

inline RunReport report_from_json(const nlohmann::ordered_json& j) {
  RunReport r;
  r.version = j.at("version").get<std::string>();
  r.config = j.at("config");
  r.overall = j.at("overall").get<RelativeEffect>();
  r.records = j.at("records").get<std::vector<PredictionRecord>>();
  r.kcurve = j.at("kcurve").get<KCurve>();
  r.calibration_baseline = j.at("calibration").at("baseline").get<std::vector<CalibrationBin>>();
  r.calibration_tta = j.at("calibration").at("tta").get<std::vector<CalibrationBin>>();
  r.relations = j.at("relations").get<std::vector<RelationSummary>>();
  r.prompt_counts = j.at("prompt_counts").get<std::vector<FactPromptCount>>();
  r.warnings = j.at("warnings").get<std::vector<RunWarning>>();
  return r;
}

// ---------------------------------------------------------------------------
// Pipeline.

/// Everything a run needs, loaded and validated.
struct RunInputs {
  FactSet facts;
  SynonymLexicon lexicon;
  EmbeddingTable embeddings;
  StopwordSet stopwords;
  std::optional<Backend> generator;
  std::optional<Backend> translator;
};

inline Backend make_backend(const RunConfig& c, const BackendConfig& b, BackendKind kind) {
  BackendDescriptor d{b.name, kind, b.endpoint, b.case_insensitive_match};
  if (!d.is_mock()) {
    d.validate();
    return Backend(d, std::make_shared<HttpService>(d.endpoint), c.retry, c.max_in_flight);
  }
  nlohmann::json table = nlohmann::json::object();
  if (b.mock_table) {
    std::ifstream in(c.resolve(*b.mock_table), std::ios::binary);
    if (!in) throw ConfigError("cannot open mock table " + c.resolve(*b.mock_table).string());
    try {
      table = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("mock table " + b.mock_table->string() + ": " + e.what());
    }
  }
  std::shared_ptr<MockService> service =
      kind == BackendKind::kGeneration
          ? std::make_shared<MockService>(parse_mock_generation(table))
          : std::make_shared<MockService>(MockGenerationTable{}, parse_mock_translation(table));
  return Backend(d, std::move(service), c.retry, c.max_in_flight);
}

inline RunInputs load_inputs(const RunConfig& c) {
  validate_config(c);
  RunInputs in;
  in.facts = load_facts(c.resolve(c.facts_path),
                        c.templates_path ? std::optional(c.resolve(*c.templates_path)) : std::nullopt);
  if (c.lexicon_path) in.lexicon = load_lexicon(c.resolve(*c.lexicon_path));
  if (c.embeddings_path) in.embeddings = load_embeddings(c.resolve(*c.embeddings_path));
  if (c.stopwords_path) in.stopwords = load_stopwords(c.resolve(*c.stopwords_path));
  in.generator = make_backend(c, c.generation, BackendKind::kGeneration);
  if (c.translation) in.translator = make_backend(c, *c.translation, BackendKind::kTranslation);
  return in;
}

struct FactOutcome {
  FactGenerations generations;
  std::vector<Prompt> prompts;
  std::vector<RunWarning> warnings;
  bool skipped = false;
};

/// Augments one fact's prompt and queries the generator once per prompt.
/// Prompts whose request fails are dropped with a warning; losing the
/// original prompt skips the fact.
inline FactOutcome probe_fact(const RunConfig& c, const RunInputs& in, const Fact& fact) {
  FactOutcome out;
  out.generations.fact = fact;
  const auto key = fact.key();
  try {
    Prompt original{in.facts.prompt_for(fact), AugmentationType::kOriginal, key, 0};
    AugmentationResources res{&in.lexicon, &in.embeddings,
                              in.translator ? &*in.translator : nullptr,
                              in.stopwords.empty() ? nullptr : &in.stopwords};
    AugmentationOptions opt = c.augmentation;
    opt.subject = fact.subject;
    auto augmented = augment_all(original, res, opt);
    for (auto& w : augmented.warnings) out.warnings.push_back({key, "augment", w.message});

    for (auto& p : augmented.prompts) {
      try {
        auto beam = generate(*in.generator, {p.text, c.num_sequences});
        out.generations.per_prompt.push_back(std::move(beam));
        out.prompts.push_back(std::move(p));
      } catch (const Error& e) {
        out.warnings.push_back({key, "generate",
                                "prompt dropped (" + std::string(to_string(p.augmentation)) +
                                    " \"" + p.text + "\"): " + e.what()});
        if (p.augmentation == AugmentationType::kOriginal) {
          out.skipped = true;
          out.warnings.push_back({key, "generate", "original prompt failed; fact skipped"});
          return out;
        }
      }
    }
  } catch (const Error& e) {
    out.skipped = true;
    out.warnings.push_back({key, "augment", std::string("fact skipped: ") + e.what()});
  }
  return out;
}

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const std::size_t threads =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

inline RunReport run_probe(const RunConfig& config, const RunInputs& in) {
  RunReport report;
  report.config = config_echo(config);
  const ScoringOptions scoring{config.strategy, config.effective_case_insensitive(),
                               config.accept_aliases};

  const auto& facts = in.facts.facts();
  std::vector<FactOutcome> outcomes(facts.size());
  const int workers = config.workers > 0
                          ? config.workers
                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  parallel_for(facts.size(), workers,
               [&](std::size_t i) { outcomes[i] = probe_fact(config, in, facts[i]); });

  std::vector<FactGenerations> usable;
  std::map<std::string, RelationSummary> relations;
  long baseline_correct = 0;
  long tta_correct = 0;
  for (auto& o : outcomes) {
    const auto key = o.generations.fact.key();
    report.warnings.insert(report.warnings.end(), o.warnings.begin(), o.warnings.end());
    if (o.skipped) continue;
    report.prompt_counts.push_back({key, static_cast<int>(o.prompts.size())});

    const auto& fact = o.generations.fact;
    auto& rel = relations[fact.relation_id];
    rel.relation_id = fact.relation_id;
    ++rel.facts;

    if (auto base = baseline_prediction(o.generations, scoring)) {
      const bool ok = is_correct(fact, base->final().text, scoring);
      report.records.push_back({key, Condition::kBaseline, base->final().text, base->confidence,
                                ok, 1, Strategy::kSum});
      baseline_correct += ok;
      rel.baseline_correct += ok;
    } else {
      report.warnings.push_back({key, "aggregate", "baseline record skipped: no candidates"});
    }
    try {
      const auto tta = aggregate(o.generations.per_prompt, config.strategy,
                                 {scoring.case_insensitive});
      const bool ok = is_correct(fact, tta.final().text, scoring);
      report.records.push_back({key, Condition::kTta, tta.final().text, tta.confidence, ok, tta.K,
                                config.strategy});
      tta_correct += ok;
      rel.tta_correct += ok;
    } catch (const NoCandidatesError&) {
      report.warnings.push_back({key, "aggregate", "tta record skipped: no candidates"});
    }
    usable.push_back(std::move(o.generations));
  }
  report.overall = relative_effect(tta_correct, baseline_correct);
  for (auto& [id, rel] : relations) {
    rel.relative_effect = relative_effect(rel.tta_correct, rel.baseline_correct).value;
    report.relations.push_back(rel);
  }

  // K values beyond the smallest prompt pool cannot be sampled for every fact.
  std::size_t min_pool = usable.empty() ? 0 : usable.front().per_prompt.size();
  for (const auto& fg : usable) min_pool = std::min(min_pool, fg.per_prompt.size());
  std::vector<int> ks;
  for (int k : config.k_values) {
    if (static_cast<std::size_t>(k) <= min_pool) {
      ks.push_back(k);
    } else {
      report.warnings.push_back({std::nullopt, "kcurve",
                                 "K=" + std::to_string(k) + " dropped: only " +
                                     std::to_string(min_pool) +
                                     " prompts available for some fact"});
    }
  }
  report.kcurve = k_subset_experiment(usable, ks, config.iterations, config.seed, scoring);

  std::vector<PredictionRecord> base_records, tta_records;
  for (const auto& r : report.records) {
    (r.condition == Condition::kBaseline ? base_records : tta_records).push_back(r);
  }
  report.calibration_baseline = calibration_table(base_records);
  report.calibration_tta = calibration_table(tta_records);
  return report;
}

inline RunReport run_probe(const RunConfig& config) { return run_probe(config, load_inputs(config)); }

// ---------------------------------------------------------------------------
// Emission.

/// %.9g
inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string records_csv(const RunReport& r) {
  std::string out = "subject,relation_id,condition,strategy,K,final_text,confidence,correct\n";
  for (const auto& rec : r.records) {
    out += csv_field(rec.fact_key.subject) + ',' + csv_field(rec.fact_key.relation_id) + ',' +
           std::string(to_string(rec.condition)) + ',' + std::string(to_string(rec.strategy)) +
           ',' + std::to_string(rec.K) + ',' + csv_field(rec.final_text) + ',' +
           format_number(rec.confidence) + ',' + (rec.correct ? "1" : "0") + '\n';
  }
  return out;
}

inline std::string kcurve_csv(const KCurve& c) {
  std::string out = "K,mean,stderr\n";
  for (const auto& p : c.points) {
    out += std::to_string(p.K) + ',' + format_number(p.mean_relative_effect) + ',' +
           format_number(p.standard_error) + '\n';
  }
  return out;
}

inline std::string calibration_csv(const RunReport& r) {
  std::string out = "bin,n,accuracy,condition\n";
  auto rows = [&](const std::vector<CalibrationBin>& bins, Condition cond) {
    for (const auto& b : bins) {
      out += std::to_string(b.index) + ',' + std::to_string(b.n) + ',' +
             (b.accuracy ? format_number(*b.accuracy) : std::string("NA")) + ',' +
             std::string(to_string(cond)) + '\n';
    }
  };
  rows(r.calibration_baseline, Condition::kBaseline);
  rows(r.calibration_tta, Condition::kTta);
  return out;
}

inline std::string report_json(const RunReport& r) { return report_to_json(r).dump(2) + "\n"; }

inline constexpr std::array<std::string_view, 4> kReportFiles{"records.csv", "kcurve.csv",
                                                              "calibration.csv", "report.json"};

/// Writes the four report files into `dir`. Each file is staged as
/// `<name>.tmp` and renamed once all are written; on failure every staged
/// or renamed file from this call is removed.
inline std::vector<std::filesystem::path> emit_report(const RunReport& r,
                                                      const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const std::array<std::string, 4> contents{records_csv(r), kcurve_csv(r.kcurve),
                                            calibration_csv(r), report_json(r)};
  std::vector<fs::path> staged, written;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& p : staged) fs::remove(p, ec);
    for (const auto& p : written) fs::remove(p, ec);
  };
  try {
    fs::create_directories(dir);
    for (std::size_t i = 0; i < kReportFiles.size(); ++i) {
      const fs::path tmp = dir / (std::string(kReportFiles[i]) + ".tmp");
      staged.push_back(tmp);
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << contents[i];
      out.close();
      if (!out) throw Error("failed writing " + tmp.string());
    }
    for (std::size_t i = 0; i < kReportFiles.size(); ++i) {
      const fs::path final_path = dir / kReportFiles[i];
      fs::rename(staged[i], final_path);
      written.push_back(final_path);
    }
  } catch (const fs::filesystem_error& e) {
    cleanup();
    throw Error(std::string("emit_report: ") + e.what());
  } catch (const Error&) {
    cleanup();
    throw;
  }
  return written;
}

}  // namespace probe
