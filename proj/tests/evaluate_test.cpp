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

#include "probe/evaluate.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <map>

#include "support/scenario.hpp"

namespace probe {
namespace {

Generation gen(std::string text, double p) { return {std::move(text), std::log(p)}; }

Fact make_fact(std::string subject, std::string gold) {
  return {std::move(subject), "P20", "place of death", std::move(gold), {}};
}

TEST(ExactMatch, Examples) {
  EXPECT_TRUE(exact_match("africa", "Africa", true));
  EXPECT_FALSE(exact_match("africa", "Africa", false));
  EXPECT_TRUE(exact_match("Africa", "Africa", false));
  EXPECT_FALSE(exact_match("Erlangen, Germany", "Heidelberg", false));
  EXPECT_TRUE(exact_match(" Princeton  ", "Princeton", false));
  EXPECT_FALSE(exact_match("in Bonn", "Bonn", false));
}

TEST(ExactMatch, AliasesOnlyWhenEnabled) {
  Fact f = make_fact("Albert Einstein", "Princeton");
  f.aliases = {"Princeton, New Jersey"};
  EXPECT_TRUE(is_correct(f, "Princeton, New Jersey", {.accept_aliases = true}));
  EXPECT_FALSE(is_correct(f, "Princeton, New Jersey", {}));
}

TEST(RelativeEffect, Examples) {
  EXPECT_EQ(relative_effect(0, 0).value, 1.0);
  EXPECT_EQ(relative_effect(99, 49).value, 2.0);
  EXPECT_EQ(relative_effect(49, 99).value, 0.5);
  EXPECT_EQ(relative_effect(99, 49).correct_with, 99);
  EXPECT_EQ(relative_effect(99, 49).correct_without, 49);
  EXPECT_THROW(relative_effect(-1, 3), ValidationError);
}

TEST(RelativeEffect, IdentityAndMonotonicity) {
  testing::TestRng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const long a = rng.range(0, 100000);
    const long b = rng.range(0, 100000);
    EXPECT_EQ(relative_effect(a, a).value, 1.0);
    EXPECT_GT(relative_effect(a + 1, b).value, relative_effect(a, b).value);
    EXPECT_LT(relative_effect(a, b + 1).value, relative_effect(a, b).value);
  }
}

TEST(BaselineConfidence, Examples) {
  const std::vector<Generation> two{gen("a", 0.6), gen("b", 0.2)};
  EXPECT_NEAR(baseline_confidence(two), 0.75, 1e-15);
  EXPECT_EQ(baseline_confidence(std::vector<Generation>{gen("a", 0.3)}), 1.0);
  std::vector<Generation> uniform;
  for (int i = 0; i < 10; ++i) uniform.push_back(gen(std::string(1, static_cast<char>('a' + i)), 0.05));
  EXPECT_NEAR(baseline_confidence(uniform), 0.1, 1e-15);
  EXPECT_THROW(baseline_confidence(std::vector<Generation>{}), NoCandidatesError);
}

TEST(Calibration, BinBoundaries) {
  EXPECT_EQ(calibration_bin_index(0.05), 0);
  EXPECT_EQ(calibration_bin_index(0.1), 0);
  EXPECT_EQ(calibration_bin_index(std::nextafter(0.1, 1.0)), 1);
  EXPECT_EQ(calibration_bin_index(0.3), 2);
  EXPECT_EQ(calibration_bin_index(0.7), 6);
  EXPECT_EQ(calibration_bin_index(1.0), 9);
  EXPECT_EQ(calibration_bin_index(1e-300), 0);
  EXPECT_THROW(calibration_bin_index(0.0), ValidationError);
  EXPECT_THROW(calibration_bin_index(1.0000001), ValidationError);
  EXPECT_THROW(calibration_bin_index(std::nan("")), ValidationError);
}

TEST(Calibration, BinIndexAgreesWithIntervalDefinition) {
  testing::TestRng rng(4);
  for (int i = 0; i < 20000; ++i) {
    double c = rng.unit();
    if (i % 10 == 0) c = rng.range(1, 10) / 10.0;  // exact boundaries
    if (c == 0.0) continue;
    const int idx = calibration_bin_index(c);
    EXPECT_GT(c, idx / 10.0);
    EXPECT_LE(c, (idx + 1) / 10.0);
  }
}

TEST(Calibration, TableCountsAndEmptyBins) {
  std::vector<PredictionRecord> records;
  for (int i = 0; i < 7; ++i) records.push_back({{"s" + std::to_string(i), "P1"}, Condition::kTta, "x", 0.95, true});
  records.push_back({{"a", "P1"}, Condition::kTta, "x", 0.05, false});
  records.push_back({{"b", "P1"}, Condition::kTta, "x", 0.42, true});
  records.push_back({{"c", "P1"}, Condition::kTta, "x", 0.5, false});
  const auto bins = calibration_table(records);
  ASSERT_EQ(bins.size(), 10u);
  // Recount directly from the records.
  std::map<int, std::pair<long, long>> expect;
  for (const auto& r : records) {
    const int i = static_cast<int>(std::ceil(r.confidence * 10)) - 1;
    expect[i].first += 1;
    expect[i].second += r.correct;
  }
  long total = 0;
  for (const auto& b : bins) {
    total += b.n;
    EXPECT_NEAR(b.lower, b.index / 10.0, 1e-15);
    EXPECT_NEAR(b.upper, (b.index + 1) / 10.0, 1e-15);
    if (auto it = expect.find(b.index); it != expect.end()) {
      EXPECT_EQ(b.n, it->second.first);
      ASSERT_TRUE(b.accuracy.has_value());
      EXPECT_EQ(*b.accuracy, static_cast<double>(it->second.second) / it->second.first);
    } else {
      EXPECT_EQ(b.n, 0);
      EXPECT_FALSE(b.accuracy.has_value());
    }
  }
  EXPECT_EQ(total, 10);
  EXPECT_EQ(*bins[9].accuracy, 1.0);
  records.push_back({{"d", "P1"}, Condition::kTta, "x", 0.0, false});
  EXPECT_THROW(calibration_table(records), ValidationError);
}

TEST(Calibration, PerfectlyCalibratedRecordsTrackMidpoints) {
  SplitMix64 rng(0);
  std::vector<PredictionRecord> records;
  for (int i = 0; i < 10000; ++i) {
    double c = 1.0 - rng.uniform();  // (0, 1]
    records.push_back({{"s", "P1"}, Condition::kTta, "x", c, rng.uniform() < c});
  }
  const auto bins = calibration_table(records);
  long total = 0;
  for (const auto& b : bins) {
    total += b.n;
    if (b.n > 0) {
      EXPECT_LE(std::abs(*b.accuracy - b.midpoint()), 0.03) << "bin " << b.index;
    }
  }
  EXPECT_EQ(total, 10000);
}

TEST(Sampler, SubsetShape) {
  for (std::size_t pool : {1u, 2u, 5u, 30u}) {
    for (int K = 1; K <= static_cast<int>(pool); ++K) {
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = sample_prompt_subset(pool, K, seed);
        ASSERT_EQ(s.size(), static_cast<std::size_t>(K));
        EXPECT_EQ(s.front(), 0u);
        for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LT(s[i - 1], s[i]);
        EXPECT_LT(s.back(), pool);
      }
    }
  }
  EXPECT_THROW(sample_prompt_subset(5, 6, 0), ValidationError);
  EXPECT_THROW(sample_prompt_subset(5, 0, 0), ValidationError);
}

TEST(Sampler, UniformOverSubsets) {
  // Pool of 5: K=3 has C(4,2) = 6 subsets, each expected 1/6 of the time.
  std::map<std::vector<std::size_t>, int> freq;
  const int n = 60000;
  const FactKey key{"Frédéric Chopin", "P20"};
  for (int it = 0; it < n; ++it) freq[sample_prompt_subset(5, 3, subset_stream_seed(1, 3, it, key))]++;
  ASSERT_EQ(freq.size(), 6u);
  for (const auto& [subset, count] : freq) EXPECT_NEAR(count / static_cast<double>(n), 1.0 / 6, 0.01);
}

TEST(Sampler, StreamSeedDependsOnEveryKeyPart) {
  const FactKey a{"Albert Einstein", "P20"}, b{"Albert Einstein", "P19"};
  const auto base = subset_stream_seed(0, 5, 0, a);
  EXPECT_EQ(base, subset_stream_seed(0, 5, 0, a));
  EXPECT_NE(base, subset_stream_seed(1, 5, 0, a));
  EXPECT_NE(base, subset_stream_seed(0, 6, 0, a));
  EXPECT_NE(base, subset_stream_seed(0, 5, 1, a));
  EXPECT_NE(base, subset_stream_seed(0, 5, 0, b));
}

TEST(SplitMix64, BelowStaysInRange) {
  SplitMix64 rng(9);
  for (std::uint64_t bound : {1ull, 2ull, 3ull, 29ull, 1ull << 40}) {
    for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(bound), bound);
  }
}

/// Facts whose prompt slots answer gold (p=0.4) or a fixed wrong answer (p=0.9).
std::vector<FactGenerations> labelled_facts(const std::vector<std::vector<bool>>& gold) {
  std::vector<FactGenerations> out;
  for (std::size_t f = 0; f < gold.size(); ++f) {
    FactGenerations fg{make_fact("Subject " + std::to_string(f), "Paris"), {}};
    for (bool g : gold[f]) fg.per_prompt.push_back({g ? gen("Paris", 0.4) : gen("Zzyzx", 0.9)});
    out.push_back(std::move(fg));
  }
  return out;
}

std::vector<std::vector<bool>> twenty_of_thirty(std::size_t n_facts) {
  std::vector<std::vector<bool>> gold(n_facts);
  for (auto& labels : gold) {
    for (std::size_t i = 0; i < 30; ++i) labels.push_back(!(i % 3 == 0 && i < 28));
  }
  return gold;
}

TEST(KSubset, KOneIsBaselineForBothStrategies) {
  auto facts = labelled_facts(twenty_of_thirty(5));
  facts[0].per_prompt[0] = {gen("Paris", 0.6), gen("Zzyzx", 0.3)};
  for (auto strategy : {Strategy::kSum, Strategy::kCount}) {
    const auto curve = k_subset_experiment(facts, {1}, 5, 0, {.strategy = strategy});
    ASSERT_EQ(curve.points.size(), 1u);
    EXPECT_EQ(curve.points[0].mean_relative_effect, 1.0);
    EXPECT_EQ(curve.points[0].standard_error, 0.0);
    EXPECT_EQ(curve.baseline_correct, 1);
  }
}

TEST(KSubset, FullPoolIsDegenerate) {
  const auto curve = k_subset_experiment(labelled_facts(twenty_of_thirty(4)), {30}, 7, 3);
  const auto& p = curve.points[0];
  for (long c : p.correct_per_iteration) EXPECT_EQ(c, p.correct_per_iteration.front());
  EXPECT_EQ(p.standard_error, 0.0);
}

TEST(KSubset, ConstructedTableMatchesOracle) {
  const auto gold = twenty_of_thirty(12);
  const auto facts = labelled_facts(gold);
  std::vector<Fact> plain;
  for (const auto& fg : facts) plain.push_back(fg.fact);
  std::vector<int> ks;
  for (int k = 1; k <= 30; ++k) ks.push_back(k);
  const auto curve = k_subset_experiment(facts, ks, 5, 17);
  const auto oracle = testing::constructed_curve_oracle(plain, gold, ks, 5, 17);
  ASSERT_EQ(curve.points.size(), oracle.size());
  EXPECT_EQ(curve.baseline_correct, 0);
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    EXPECT_NEAR(curve.points[i].mean_relative_effect, oracle[i].mean.to_double(), 1e-9) << "K=" << oracle[i].K;
    EXPECT_NEAR(curve.points[i].standard_error, oracle[i].standard_error, 1e-9);
  }
  EXPECT_EQ(curve.points.front().mean_relative_effect, 1.0);
  EXPECT_EQ(curve.points.back().mean_relative_effect, oracle.back().mean.to_double());
  // 20 x 0.4 = 8 < 10 x 0.9 = 9: the full pool still picks the wrong answer.
  EXPECT_EQ(curve.points.back().mean_relative_effect, 1.0);
}

TEST(KSubset, Reproducible) {
  const auto facts = labelled_facts(twenty_of_thirty(6));
  const auto a = k_subset_experiment(facts, {1, 5, 13, 30}, 5, 99);
  const auto b = k_subset_experiment(facts, {1, 5, 13, 30}, 5, 99);
  EXPECT_EQ(a, b);
  // Adding a fact leaves the other facts' samples alone.
  auto more = facts;
  more.push_back(labelled_facts(twenty_of_thirty(7)).back());
  const auto c = k_subset_experiment(more, {5}, 5, 99);
  const auto d = k_subset_experiment(facts, {5}, 5, 99);
  for (std::size_t it = 0; it < 5; ++it) {
    EXPECT_GE(c.points[0].correct_per_iteration[it], d.points[0].correct_per_iteration[it]);
    EXPECT_LE(c.points[0].correct_per_iteration[it], d.points[0].correct_per_iteration[it] + 1);
  }
}

TEST(KSubset, ConvergesToExhaustiveAverage) {
  // Pools of 5 prompts (original + 4 paraphrases) with mixed labels.
  const std::vector<std::vector<bool>> gold{{false, true, true, false, true},
                                            {false, true, false, false, true},
                                            {true, false, false, true, true}};
  const auto facts = labelled_facts(gold);
  for (int K : {2, 3}) {
    // Exhaustive: average correctness over every subset containing index 0.
    long baseline = 0;
    for (const auto& labels : gold) baseline += labels[0] ? 1 : 0;
    double expected_correct = 0;
    for (const auto& labels : gold) {
      int subsets = 0, hits = 0;
      for (unsigned mask = 0; mask < 16; ++mask) {
        if (std::popcount(mask) != K - 1) continue;
        int g = labels[0] ? 1 : 0, w = labels[0] ? 0 : 1;
        for (std::size_t i = 1; i < 5; ++i) {
          if (mask >> (i - 1) & 1u) (labels[i] ? g : w) += 1;
        }
        hits += 4 * g > 9 * w || (4 * g == 9 * w && g > 0);  // gold "Paris" < "Zzyzx"
        ++subsets;
      }
      expected_correct += static_cast<double>(hits) / subsets;
    }
    const double expected = (expected_correct + 1) / (baseline + 1);
    const auto curve = k_subset_experiment(facts, {K}, 4000, 5);
    EXPECT_NEAR(curve.points[0].mean_relative_effect, expected, 0.02) << "K=" << K;
  }
}

TEST(KSubset, RejectsOversizedK) {
  const auto facts = labelled_facts({{true, false, true}});
  try {
    k_subset_experiment(facts, {1, 4}, 2, 0);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("Subject 0"), std::string::npos);
  }
  EXPECT_THROW(k_subset_experiment(facts, {31}, 2, 0), ValidationError);
  EXPECT_THROW(k_subset_experiment(facts, {1}, 0, 0), ValidationError);
}

}  // namespace
}  // namespace probe
