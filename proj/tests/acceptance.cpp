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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. argv[1] is the path of the `probe` executable.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "probe/probe.hpp"
#include "support/scenario.hpp"

namespace {

using namespace probe;
namespace fs = std::filesystem;

const fs::path kMiniConfig = PROBE_DATA_DIR "/mini/config.json";

/// Collects the first failure message of a criterion.
struct Check {
  std::string failure;
  void expect(bool ok, const std::string& what) {
    if (!ok && failure.empty()) failure = what;
  }
};

int g_failed = 0;

void criterion(const std::string& name, const std::function<void(Check&)>& body) {
  Check c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  if (c.failure.empty()) {
    std::printf("PASS  %s\n", name.c_str());
  } else {
    ++g_failed;
    std::printf("FAIL  %s: %s\n", name.c_str(), c.failure.c_str());
  }
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir =
      fs::temp_directory_path() / ("probe-acceptance-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto& row = rows.emplace_back();
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
  }
  return rows;
}

std::vector<std::vector<Generation>> grid_beams(const testing::GridInstance& inst) {
  std::vector<std::vector<Generation>> out;
  for (const auto& beam : inst) {
    auto& b = out.emplace_back();
    for (const auto& c : beam) b.push_back({c.text, std::log(c.sixty_fourths / 64.0)});
  }
  return out;
}

void aggregation_oracle(Check& c) {
  const auto start = std::chrono::steady_clock::now();
  testing::TestRng rng(20230417);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto inst = testing::random_grid_instance(rng);
    const auto beams = grid_beams(inst);
    for (bool count : {false, true}) {
      const auto oracle = testing::brute_force_aggregate(inst, count);
      const auto r = count ? aggregate_count(beams) : aggregate_sum(beams);
      c.expect(r.final().text == oracle.chosen, "trial " + std::to_string(trial) + ": chose " +
                                                     r.final().text + ", oracle " + oracle.chosen);
      c.expect(r.ranked.size() == oracle.scores.size(), "candidate count differs");
      for (const auto& cand : r.ranked) {
        auto it = oracle.scores.find(cand.text);
        c.expect(it != oracle.scores.end() && std::abs(cand.score - it->second.to_double()) <= 1e-12,
                 "score mismatch for " + cand.text);
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(secs < 5.0, "took " + std::to_string(secs) + " s");
}

void relative_effect_suite(Check& c) {
  c.expect(relative_effect(0, 0).value == 1.0, "(0,0) != 1");
  c.expect(relative_effect(99, 49).value == 2.0, "(99,49) != 2");
  c.expect(relative_effect(49, 99).value == 0.5, "(49,99) != 0.5");
  testing::TestRng rng(31337);
  for (int i = 0; i < 10000; ++i) {
    const long a = rng.range(0, 1000000), b = rng.range(0, 1000000);
    c.expect(relative_effect(a, a).value == 1.0, "identity fails");
    c.expect(relative_effect(a + 1, b).value > relative_effect(a, b).value,
             "not increasing in first argument");
    c.expect(relative_effect(a, b + 1).value < relative_effect(a, b).value,
             "not decreasing in second argument");
  }
}

void confidence_suite(Check& c) {
  testing::TestRng rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto beams = grid_beams(testing::random_grid_instance(rng));
    for (auto strategy : {Strategy::kSum, Strategy::kCount}) {
      const auto r = aggregate(beams, strategy);
      double total = 0, shares = 0;
      for (const auto& cand : r.ranked) total += cand.score;
      for (const auto& cand : r.ranked) shares += cand.score / total;
      c.expect(std::abs(shares - 1.0) <= 1e-9, "shares sum to " + std::to_string(shares));
      c.expect(r.confidence >= 1.0 / static_cast<double>(r.ranked.size()),
               "confidence below 1/|candidates|");
      if (r.ranked.size() == 1) c.expect(r.confidence == 1.0, "single candidate confidence != 1");
    }
  }
  const std::vector<std::vector<Generation>> single{{{"Paris", std::log(0.6)}}};
  c.expect(aggregate_sum(single).confidence == 1.0, "single candidate confidence != 1");
}

void kcurve_reproduction(Check& c) {
  auto s = testing::constructed_scenario(kMiniConfig, 100);
  const auto oracle = testing::constructed_curve_oracle(s.inputs.facts.facts(), s.gold,
                                                        s.config.k_values, s.config.iterations,
                                                        s.config.seed);
  const auto dir = scratch_dir("kcurve");
  std::string first;
  for (int run = 0; run < 2; ++run) {
    const auto report = run_probe(s.config, s.inputs);
    c.expect(report.warnings.empty(), "run produced warnings");
    for (std::size_t i = 0; i < oracle.size() && i < report.kcurve.points.size(); ++i) {
      c.expect(std::abs(report.kcurve.points[i].mean_relative_effect - oracle[i].mean.to_double()) <=
                   1e-9,
               "K=" + std::to_string(oracle[i].K) + " mean differs from oracle");
    }
    const auto out = dir / std::to_string(run);
    emit_report(report, out);
    const auto csv = slurp(out / "kcurve.csv");
    if (run == 0) {
      first = csv;
    } else {
      c.expect(csv == first, "kcurve.csv differs between runs");
    }
  }
  const auto rows = csv_rows(first);
  c.expect(rows.size() == oracle.size() + 1, "kcurve.csv has " + std::to_string(rows.size()) + " lines");
  for (std::size_t i = 0; i < oracle.size() && i + 1 < rows.size(); ++i) {
    const auto& row = rows[i + 1];
    c.expect(row.size() == 3 && row[0] == std::to_string(oracle[i].K), "bad kcurve row");
    if (row.size() != 3) continue;
    // Emitted means carry 9 significant digits; compare against the oracle
    // rendered the same way.
    const std::string expected = format_number(oracle[i].mean.to_double());
    if (oracle[i].K == 1 || oracle[i].K == 30) {
      c.expect(row[1] == expected, "K=" + row[0] + " mean " + row[1] + ", oracle " + expected);
    } else {
      c.expect(std::abs(std::stod(row[1]) - std::stod(expected)) <= 1e-9,
               "K=" + row[0] + " mean " + row[1] + ", oracle " + expected);
    }
    c.expect(std::abs(std::stod(row[2]) - std::stod(format_number(oracle[i].standard_error))) <= 1e-9,
             "K=" + row[0] + " stderr differs");
  }
  c.expect(rows.size() > 1 && rows[1].size() == 3 && rows[1][1] == "1", "K=1 mean is not exactly 1");
  fs::remove_all(dir);
}

void calibration_suite(Check& c) {
  SplitMix64 rng(0);
  std::vector<PredictionRecord> records;
  for (int i = 0; i < 10000; ++i) {
    const double conf = 1.0 - rng.uniform();
    records.push_back({{"s", "P1"}, Condition::kTta, "x", conf, rng.uniform() < conf});
  }
  long total = 0;
  for (const auto& b : calibration_table(records)) {
    total += b.n;
    if (b.n > 0) {
      c.expect(std::abs(*b.accuracy - b.midpoint()) <= 0.03,
               "bin " + std::to_string(b.index) + " accuracy " + std::to_string(*b.accuracy));
    } else {
      c.expect(!b.accuracy.has_value(), "empty bin carries an accuracy");
    }
  }
  c.expect(total == 10000, "bins hold " + std::to_string(total) + " records");
}

void augmenter_budget(Check& c) {
  auto full = load_config(kMiniConfig);
  const auto r = run_probe(full);
  c.expect(r.prompt_counts.size() == 100, "not every fact was probed");
  for (const auto& pc : r.prompt_counts) {
    c.expect(pc.prompts == 30, pc.fact.str() + " has " + std::to_string(pc.prompts) + " prompts");
  }
  c.expect(r.warnings.empty(), "full-resource run has warnings");

  auto degraded = load_config(PROBE_DATA_DIR "/mini/config_no_translation.json");
  const auto d = run_probe(degraded);
  std::map<FactKey, int> warnings;
  for (const auto& w : d.warnings) {
    if (w.stage == "augment" && w.fact) ++warnings[*w.fact];
  }
  c.expect(d.prompt_counts.size() == 100, "not every fact was probed without translator");
  for (const auto& pc : d.prompt_counts) {
    c.expect(pc.prompts == 10, pc.fact.str() + " has " + std::to_string(pc.prompts) + " prompts");
    c.expect(warnings[pc.fact] == 5,
             pc.fact.str() + " has " + std::to_string(warnings[pc.fact]) + " warnings");
  }
}

void back_translation(Check& c) {
  BackTranslationOptions bt_options;
  bt_options.fan_out = 8;
  bt_options.keep = 4;
  MockTranslationTable table;
  table.synthetic = true;
  const auto translator = mock_translator(table);
  const auto facts = load_facts(PROBE_DATA_DIR "/mini/facts.jsonl", PROBE_DATA_DIR "/mini/templates.json");
  for (std::size_t i = 0; i < facts.size(); i += 10) {
    const auto prompt = facts.prompt_for(facts.facts()[i]);
    for (const std::string pivot : {"fr", "ru", "de", "es", "ja"}) {
      const auto bt = back_translate_candidates(prompt, pivot, translator, bt_options);
      c.expect(bt.raw.size() == 64, pivot + ": " + std::to_string(bt.raw.size()) + " raw candidates");
      std::map<std::string, long double> merged;
      for (const auto& r : bt.raw) merged[r.text] += r.probability;
      std::vector<std::pair<std::string, long double>> sorted(merged.begin(), merged.end());
      std::stable_sort(sorted.begin(), sorted.end(),
                       [](const auto& a, const auto& b) { return a.second > b.second; });
      c.expect(bt.selected.size() <= 4, "more than 4 selected");
      c.expect(bt.selected.size() == std::min<std::size_t>(4, sorted.size()), "selection short");
      std::set<std::string> distinct;
      for (std::size_t k = 0; k < bt.selected.size() && k < sorted.size(); ++k) {
        c.expect(bt.selected[k].text == sorted[k].first,
                 pivot + ": rank " + std::to_string(k) + " is " + bt.selected[k].text +
                     ", brute force " + sorted[k].first);
        distinct.insert(bt.selected[k].text);
      }
      c.expect(distinct.size() == bt.selected.size(), "selected strings repeat");
    }
  }
}

void end_to_end_determinism(Check& c, const std::string& probe_exe) {
  c.expect(!probe_exe.empty() && fs::exists(probe_exe), "probe executable not given");
  if (!c.failure.empty()) return;
  const auto dir = scratch_dir("e2e");
  for (int run = 0; run < 2; ++run) {
    const auto out = dir / std::to_string(run);
    const std::string cmd = "\"" + probe_exe + "\" run --config \"" + kMiniConfig.string() +
                            "\" --out \"" + out.string() + "\" > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    c.expect(rc == 0, "probe run exited with status " + std::to_string(rc));
  }
  for (auto name : kReportFiles) {
    const auto a = slurp(dir / "0" / name), b = slurp(dir / "1" / name);
    c.expect(!a.empty(), std::string(name) + " is empty");
    c.expect(a == b, std::string(name) + " differs between runs");
  }
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string probe_exe = argc > 1 ? argv[1] : "";
  criterion("aggregation oracle equivalence (1000 instances, sum and count)", aggregation_oracle);
  criterion("relative effect suite (examples, 10000 monotonic pairs)", relative_effect_suite);
  criterion("confidence suite (normalization, lower bound, single candidate)", confidence_suite);
  criterion("k-curve reproduction on constructed mock", kcurve_reproduction);
  criterion("calibration suite (n=10000)", calibration_suite);
  criterion("augmenter budget (30 prompts; 10 prompts and 5 warnings without translator)",
            augmenter_budget);
  criterion("back-translation (64 raw candidates, top-4 by brute-force sort)", back_translation);
  criterion("end-to-end determinism of probe run",
            [&](Check& c) { end_to_end_determinism(c, probe_exe); });
  std::printf("%d criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
