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

// Test-only oracles. Nothing here calls into the aggregation code it checks.

#include <cstdint>
#include <cstdlib>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace probe::testing {

/// Exact fraction over int64.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) { reduce(); }

  void reduce() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const auto g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  Rational operator+(const Rational& o) const { return {num * o.den + o.num * den, den * o.den}; }
  Rational operator/(const Rational& o) const { return {num * o.den, den * o.num}; }
  bool operator<(const Rational& o) const { return num * o.den < o.num * den; }
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// A beam candidate whose probability is numerator/64.
struct GridCandidate {
  std::string text;
  int sixty_fourths = 64;
};

using GridInstance = std::vector<std::vector<GridCandidate>>;

struct OracleResult {
  std::map<std::string, Rational> scores;
  std::string chosen;
  Rational confidence;
};

/// Enumerates every distinct text, sums exactly, and picks the max score
/// with the lexicographically smallest text on ties.
inline OracleResult brute_force_aggregate(const GridInstance& inst, bool count) {
  OracleResult r;
  for (const auto& beam : inst) {
    for (const auto& c : beam) {
      r.scores[c.text] = r.scores[c.text] + (count ? Rational(1) : Rational(c.sixty_fourths, 64));
    }
  }
  Rational best(-1);
  Rational total(0);
  for (const auto& [text, score] : r.scores) {
    total = total + score;
    if (best < score) {  // strict: the earlier (smaller) text keeps ties
      best = score;
      r.chosen = text;
    }
  }
  if (!r.scores.empty()) r.confidence = best / total;
  return r;
}

/// Deterministic xorshift generator for test instances.
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
  std::uint64_t next() {
    s_ ^= s_ << 13;
    s_ ^= s_ >> 7;
    s_ ^= s_ << 17;
    return s_;
  }
  int range(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t s_;
};

/// Up to 5 prompts with up to 4 candidates each, texts drawn from a small
/// pool so merges happen often.
inline GridInstance random_grid_instance(TestRng& rng) {
  static const std::vector<std::string> pool{"Africa", "Asia", "Europe", "Paris", "Bonn", "Heidelberg"};
  GridInstance inst(static_cast<std::size_t>(rng.range(1, 5)));
  bool any = false;
  for (auto& beam : inst) {
    const int n = rng.range(0, 4);
    for (int i = 0; i < n; ++i) {
      beam.push_back({pool[static_cast<std::size_t>(rng.range(0, static_cast<int>(pool.size()) - 1))],
                      rng.range(1, 64)});
      any = true;
    }
  }
  if (!any) inst[0].push_back({pool[0], rng.range(1, 64)});
  return inst;
}

}  // namespace probe::testing
