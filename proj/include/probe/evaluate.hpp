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

// Exact-match scoring, relative effect of augmentation, the K-subset prompt
// count experiment and calibration binning.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "probe/aggregate.hpp"
#include "probe/backend.hpp"
#include "probe/dataset.hpp"
#include "probe/error.hpp"

namespace probe {

/// Normalized equality with the gold object, or with any of `aliases`.
inline bool exact_match(std::string_view prediction, std::string_view gold, bool case_insensitive,
                        std::span<const std::string> aliases = {}) {
  const auto p = normalize_answer(prediction, case_insensitive);
  if (p == normalize_answer(gold, case_insensitive)) return true;
  return std::any_of(aliases.begin(), aliases.end(), [&](const std::string& a) {
    return p == normalize_answer(a, case_insensitive);
  });
}

struct RelativeEffect {
  double value = 1.0;
  long correct_with = 0;
  long correct_without = 0;

  bool operator==(const RelativeEffect&) const = default;
};

/// (correct_with + 1) / (correct_without + 1).
inline RelativeEffect relative_effect(long correct_with_tta, long correct_without_tta) {
  if (correct_with_tta < 0 || correct_without_tta < 0) {
    throw ValidationError("relative_effect: counts must be non-negative");
  }
  return {static_cast<double>(correct_with_tta + 1) / static_cast<double>(correct_without_tta + 1),
          correct_with_tta, correct_without_tta};
}

/// Confidence of a single beam: top probability over the beam's
/// total probability.
inline double baseline_confidence(std::span<const Generation> generations) {
  if (generations.empty()) throw NoCandidatesError();
  std::vector<double> probs;
  probs.reserve(generations.size());
  for (const auto& g : generations) probs.push_back(g.probability());
  std::sort(probs.begin(), probs.end());
  return probs.back() / pairwise_sum(probs);
}

enum class Condition { kBaseline, kTta };

inline std::string_view to_string(Condition c) { return c == Condition::kBaseline ? "baseline" : "tta"; }

struct PredictionRecord {
  FactKey fact_key;
  Condition condition = Condition::kTta;
  std::string final_text;
  double confidence = 0.0;
  bool correct = false;
  int K = 1;
  Strategy strategy = Strategy::kSum;

  bool operator==(const PredictionRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Calibration.

inline constexpr int kCalibrationBins = 10;

struct CalibrationBin {
  int index = 0;
  double lower = 0.0;
  double upper = 0.0;
  long n = 0;
  long correct = 0;
  /// Empty when n == 0.
  std::optional<double> accuracy;

  double midpoint() const { return 0.5 * (lower + upper); }

  bool operator==(const CalibrationBin&) const = default;
};

/// Bin i holds confidences in (i/10, (i+1)/10].
inline int calibration_bin_index(double confidence) {
  if (!(confidence > 0.0 && confidence <= 1.0)) {
    throw ValidationError("confidence " + std::to_string(confidence) + " is outside (0, 1]");
  }
  int i = static_cast<int>(std::ceil(confidence * kCalibrationBins)) - 1;
  i = std::clamp(i, 0, kCalibrationBins - 1);
  while (i > 0 && confidence <= i / static_cast<double>(kCalibrationBins)) --i;
  while (i < kCalibrationBins - 1 && confidence > (i + 1) / static_cast<double>(kCalibrationBins)) ++i;
  return i;
}

inline std::vector<CalibrationBin> calibration_table(std::span<const PredictionRecord> records) {
  std::vector<CalibrationBin> bins(kCalibrationBins);
  for (int i = 0; i < kCalibrationBins; ++i) {
    bins[i].index = i;
    bins[i].lower = i / static_cast<double>(kCalibrationBins);
    bins[i].upper = (i + 1) / static_cast<double>(kCalibrationBins);
  }
  for (const auto& r : records) {
    auto& bin = bins[calibration_bin_index(r.confidence)];
    ++bin.n;
    bin.correct += r.correct ? 1 : 0;
  }
  for (auto& bin : bins) {
    if (bin.n > 0) bin.accuracy = static_cast<double>(bin.correct) / static_cast<double>(bin.n);
  }
  return bins;
}

// ---------------------------------------------------------------------------
// Counter-based sampling.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// SplitMix64 stream. Used instead of <random> distributions, whose output
/// is not specified across standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, bound), unbiased by rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = -bound % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t r = next();
      if (r >= limit) return r % bound;
    }
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Stream seed for one (seed, K, iteration, fact) cell. Depends only on its
/// own key, so adding facts leaves other facts' samples unchanged.
inline std::uint64_t subset_stream_seed(std::uint64_t seed, int K, int iteration,
                                        const FactKey& key) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(K));
  h = splitmix64(h ^ static_cast<std::uint64_t>(iteration));
  h = splitmix64(h ^ fnv1a(key.subject));
  h = splitmix64(h ^ fnv1a(key.relation_id));
  return h;
}

/// Prompt indices for one subset: 0 (the original) plus K-1 distinct indices
/// drawn uniformly from 1..pool_size-1. Returned sorted.
inline std::vector<std::size_t> sample_prompt_subset(std::size_t pool_size, int K,
                                                     std::uint64_t stream_seed) {
  if (K < 1 || static_cast<std::size_t>(K) > pool_size) {
    throw ValidationError("cannot sample " + std::to_string(K) + " prompts from a pool of " +
                          std::to_string(pool_size));
  }
  std::vector<std::size_t> pool(pool_size - 1);
  std::iota(pool.begin(), pool.end(), std::size_t{1});
  SplitMix64 rng(stream_seed);
  const std::size_t take = static_cast<std::size_t>(K - 1);
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<std::size_t> out{0};
  out.insert(out.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// K-subset experiment.

inline constexpr int kMaxPromptsPerFact = 30;

struct KPoint {
  int K = 1;
  double mean_relative_effect = 1.0;
  double standard_error = 0.0;
  /// Correct predictions over all facts, per iteration.
  std::vector<long> correct_per_iteration;

  bool operator==(const KPoint&) const = default;
};

struct KCurve {
  std::vector<KPoint> points;
  int iterations = 0;
  std::uint64_t seed = 0;
  long baseline_correct = 0;

  bool operator==(const KCurve&) const = default;
};

/// Beams for one fact: entry 0 is the original prompt's, the rest its paraphrases'.
struct FactGenerations {
  Fact fact;
  std::vector<std::vector<Generation>> per_prompt;
};

struct ScoringOptions {
  Strategy strategy = Strategy::kSum;
  bool case_insensitive = false;
  bool accept_aliases = false;
};

inline bool is_correct(const Fact& fact, std::string_view prediction, const ScoringOptions& opt) {
  return exact_match(prediction, fact.gold_object, opt.case_insensitive,
                     opt.accept_aliases ? std::span<const std::string>(fact.aliases)
                                        : std::span<const std::string>{});
}

/// No-augmentation prediction: the original prompt's beam, merged by
/// normalized text and ranked by probability.
inline std::optional<AggregationResult> baseline_prediction(const FactGenerations& fg,
                                                            const ScoringOptions& opt) {
  if (fg.per_prompt.empty()) return std::nullopt;
  try {
    return aggregate_sum(std::span(fg.per_prompt).first(1), {opt.case_insensitive});
  } catch (const NoCandidatesError&) {
    return std::nullopt;
  }
}

/// Prediction from the prompts at `subset`. K = 1 is the baseline for any strategy.
inline std::optional<AggregationResult> subset_prediction(const FactGenerations& fg,
                                                          std::span<const std::size_t> subset,
                                                          const ScoringOptions& opt) {
  if (subset.size() == 1 && subset[0] == 0) return baseline_prediction(fg, opt);
  std::vector<std::vector<Generation>> chosen;
  chosen.reserve(subset.size());
  for (auto i : subset) chosen.push_back(fg.per_prompt.at(i));
  try {
    return aggregate(chosen, opt.strategy, {opt.case_insensitive});
  } catch (const NoCandidatesError&) {
    return std::nullopt;
  }
}

inline long count_baseline_correct(std::span<const FactGenerations> facts, const ScoringOptions& opt) {
  long correct = 0;
  for (const auto& fg : facts) {
    const auto pred = baseline_prediction(fg, opt);
    if (pred && is_correct(fg.fact, pred->final().text, opt)) ++correct;
  }
  return correct;
}

/// Mean and standard error over iterations of the relative effect at each K.
inline KCurve k_subset_experiment(std::span<const FactGenerations> facts, std::vector<int> K_values,
                                  int iterations, std::uint64_t seed,
                                  const ScoringOptions& opt = {}) {
  if (iterations < 1) throw ValidationError("k_subset_experiment: iterations must be >= 1");
  std::sort(K_values.begin(), K_values.end());
  K_values.erase(std::unique(K_values.begin(), K_values.end()), K_values.end());
  for (int K : K_values) {
    if (K < 1 || K > kMaxPromptsPerFact) {
      throw ValidationError("K must lie in [1, 30], got " + std::to_string(K));
    }
  }
  if (!K_values.empty()) {
    for (const auto& fg : facts) {
      if (fg.per_prompt.size() < static_cast<std::size_t>(K_values.back())) {
        throw ValidationError("fact " + fg.fact.key().str() + " has " +
                              std::to_string(fg.per_prompt.size()) + " prompts, K=" +
                              std::to_string(K_values.back()) + " requested");
      }
    }
  }

  KCurve curve;
  curve.iterations = iterations;
  curve.seed = seed;
  curve.baseline_correct = count_baseline_correct(facts, opt);

  for (int K : K_values) {
    KPoint point;
    point.K = K;
    std::vector<double> effects;
    for (int it = 0; it < iterations; ++it) {
      long correct = 0;
      for (const auto& fg : facts) {
        const auto subset = sample_prompt_subset(fg.per_prompt.size(), K,
                                                 subset_stream_seed(seed, K, it, fg.fact.key()));
        const auto pred = subset_prediction(fg, subset, opt);
        if (pred && is_correct(fg.fact, pred->final().text, opt)) ++correct;
      }
      point.correct_per_iteration.push_back(correct);
      effects.push_back(relative_effect(correct, curve.baseline_correct).value);
    }
    // Offsets from the first iteration keep identical iterations exact.
    const double n = static_cast<double>(effects.size());
    std::vector<double> offsets;
    for (double e : effects) offsets.push_back(e - effects.front());
    const double mean_offset = pairwise_sum(offsets) / n;
    point.mean_relative_effect = effects.front() + mean_offset;
    if (effects.size() > 1) {
      std::vector<double> sq;
      for (double o : offsets) sq.push_back((o - mean_offset) * (o - mean_offset));
      point.standard_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
    }
    curve.points.push_back(std::move(point));
  }
  return curve;
}

/// Queries `backend` once per prompt (original first) and runs the experiment.
inline KCurve k_subset_experiment(const FactSet& facts,
                                  std::span<const std::vector<std::string>> prompts_per_fact,
                                  const Backend& backend, std::vector<int> K_values, int iterations,
                                  std::uint64_t seed, const ScoringOptions& opt = {},
                                  int num_sequences = kDefaultBeamSize) {
  if (prompts_per_fact.size() != facts.size()) {
    throw ValidationError("k_subset_experiment: one prompt list per fact required");
  }
  std::vector<FactGenerations> all;
  all.reserve(facts.size());
  for (std::size_t i = 0; i < facts.size(); ++i) {
    FactGenerations fg{facts.facts()[i], {}};
    for (const auto& p : prompts_per_fact[i]) {
      fg.per_prompt.push_back(generate(backend, {p, num_sequences}));
    }
    all.push_back(std::move(fg));
  }
  return k_subset_experiment(all, std::move(K_values), iterations, seed, opt);
}

}  // namespace probe
