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

// Combines per-prompt beam candidates into one prediction with a confidence.

#include <algorithm>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "probe/backend.hpp"
#include "probe/error.hpp"
#include "probe/text.hpp"

namespace probe {

/// Raised when no prompt produced any candidate.
class NoCandidatesError : public Error {
 public:
  NoCandidatesError() : Error("no candidates") {}
};

enum class Strategy { kSum, kCount };

inline std::string_view to_string(Strategy s) { return s == Strategy::kSum ? "sum" : "count"; }

inline Strategy parse_strategy(std::string_view s) {
  if (s == "sum") return Strategy::kSum;
  if (s == "count") return Strategy::kCount;
  throw ConfigError("unknown aggregation strategy '" + std::string(s) + "' (want sum|count)");
}

struct NormalizerConfig {
  bool case_insensitive = false;
};

/// Trims, collapses whitespace runs, and lowercases when `case_insensitive`.
inline std::string normalize_answer(std::string_view text, bool case_insensitive) {
  std::string out = text::collapse_whitespace(text);
  return case_insensitive ? text::to_lower(out) : out;
}

struct CandidateScore {
  std::string text;  // normalized
  double score = 0.0;
  int supporting_prompts = 0;

  bool operator==(const CandidateScore&) const = default;
};

struct AggregationResult {
  std::vector<CandidateScore> ranked;
  double confidence = 0.0;
  Strategy strategy = Strategy::kSum;
  int K = 0;

  const CandidateScore& final() const { return ranked.front(); }

  bool operator==(const AggregationResult&) const = default;
};

/// Scores within this relative distance of the best count as tied.
inline constexpr double kScoreTieTolerance = 1e-12;

/// Sum in a fixed pairwise tree over `values` as ordered.
inline double pairwise_sum(std::span<const double> values) {
  if (values.empty()) return 0.0;
  if (values.size() == 1) return values[0];
  if (values.size() == 2) return values[0] + values[1];
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

/// final.score / sum of all candidate scores.
inline double confidence_of(const AggregationResult& result) {
  if (result.ranked.empty()) throw NoCandidatesError();
  if (result.ranked.size() == 1) return 1.0;
  // Sum in normalized-text order so the value does not depend on ranking.
  std::vector<const CandidateScore*> by_text;
  by_text.reserve(result.ranked.size());
  for (const auto& c : result.ranked) by_text.push_back(&c);
  std::sort(by_text.begin(), by_text.end(),
            [](const CandidateScore* a, const CandidateScore* b) { return a->text < b->text; });
  std::vector<double> scores;
  scores.reserve(by_text.size());
  for (const auto* c : by_text) scores.push_back(c->score);
  return result.final().score / pairwise_sum(scores);
}

namespace detail {

struct Accumulator {
  std::vector<double> contributions;
  std::vector<std::size_t> prompts;
};

inline AggregationResult aggregate_impl(std::span<const std::vector<Generation>> per_prompt,
                                        const NormalizerConfig& normalizer, Strategy strategy) {
  std::map<std::string, Accumulator> merged;
  for (std::size_t i = 0; i < per_prompt.size(); ++i) {
    for (const auto& g : per_prompt[i]) {
      auto& acc = merged[normalize_answer(g.text, normalizer.case_insensitive)];
      acc.contributions.push_back(strategy == Strategy::kSum ? g.probability() : 1.0);
      if (acc.prompts.empty() || acc.prompts.back() != i) acc.prompts.push_back(i);
    }
  }
  std::erase_if(merged, [](const auto& kv) { return kv.first.empty(); });
  if (merged.empty()) throw NoCandidatesError();

  AggregationResult result;
  result.strategy = strategy;
  result.K = static_cast<int>(per_prompt.size());
  result.ranked.reserve(merged.size());
  for (auto& [text, acc] : merged) {
    std::sort(acc.contributions.begin(), acc.contributions.end());
    result.ranked.push_back(
        {text, pairwise_sum(acc.contributions), static_cast<int>(acc.prompts.size())});
  }
  std::stable_sort(result.ranked.begin(), result.ranked.end(),
                   [](const CandidateScore& a, const CandidateScore& b) {
                     return a.score > b.score;  // map order already sorts texts ascending
                   });
  // Float sums of equal exact values can differ in the last bits; treat
  // near-equal leaders as tied and let the smallest text win.
  const double best = result.ranked.front().score;
  auto winner = result.ranked.begin();
  for (auto it = result.ranked.begin();
       it != result.ranked.end() && it->score >= best * (1.0 - kScoreTieTolerance); ++it) {
    if (it->text < winner->text) winner = it;
  }
  std::rotate(result.ranked.begin(), winner, winner + 1);
  result.confidence = confidence_of(result);
  return result;
}

}  // namespace detail

/// Score of an answer = sum of its generation probabilities over all prompts.
inline AggregationResult aggregate_sum(std::span<const std::vector<Generation>> per_prompt,
                                       const NormalizerConfig& normalizer = {}) {
  return detail::aggregate_impl(per_prompt, normalizer, Strategy::kSum);
}

/// Score of an answer = number of beam slots it occupies over all prompts.
inline AggregationResult aggregate_count(std::span<const std::vector<Generation>> per_prompt,
                                         const NormalizerConfig& normalizer = {}) {
  return detail::aggregate_impl(per_prompt, normalizer, Strategy::kCount);
}

inline AggregationResult aggregate(std::span<const std::vector<Generation>> per_prompt,
                                   Strategy strategy, const NormalizerConfig& normalizer = {}) {
  return detail::aggregate_impl(per_prompt, normalizer, strategy);
}

}  // namespace probe
