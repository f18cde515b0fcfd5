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

// probe: command-line front end.
//
//   probe run --config <path> [--strategy sum|count] [--seed N] [--k 1,2,5] [--out DIR]
//   probe validate --config <path>
//   probe serve-mock --config <path> [--host H] [--port N]
//
// Exit codes: 0 success, 2 validation error, 3 run error.

#include <csignal>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "probe/probe.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRun = 3;

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Test-time augmentation harness for factual probing"};
  app.require_subcommand(1);

  std::string config_path;
  std::string strategy;
  std::string k_list;
  std::string out_dir;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "augment, query, aggregate and evaluate");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--strategy", strategy, "aggregation strategy")
      ->check(CLI::IsMember({"sum", "count"}));
  auto* seed_opt = run->add_option("--seed", seed, "sampling seed");
  run->add_option("--k", k_list, "comma-separated prompt counts, e.g. 1,2,5,10,20,30");
  run->add_option("--out", out_dir, "output directory");

  auto* validate = app.add_subcommand("validate", "check a config and its inputs");
  validate->add_option("--config", config_path, "JSON config file")->required();

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve-mock", "serve the config's mock backends over HTTP");
  serve->add_option("--config", config_path, "JSON config file")->required();
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  probe::RunConfig config;
  probe::RunInputs inputs;
  try {
    config = probe::load_config(config_path);
    if (!strategy.empty()) config.strategy = probe::parse_strategy(strategy);
    if (*seed_opt) config.seed = seed;
    if (!k_list.empty()) config.k_values = probe::parse_k_list(k_list);
    if (!out_dir.empty()) config.output_dir = out_dir;
    probe::apply_env_overrides(config);
    inputs = probe::load_inputs(config);
  } catch (const probe::Error& e) {
    std::cerr << "probe: invalid configuration: " << e.what() << "\n";
    return kExitValidation;
  }

  if (*validate) {
    std::cout << "ok: " << inputs.facts.size() << " facts, " << inputs.facts.templates().size()
              << " templates\n";
    return 0;
  }

  if (*serve) {
    // Route each kind to its configured backend's service.
    struct Router final : probe::BackendService {
      probe::Backend gen;
      std::optional<probe::Backend> mt;
      Router(probe::Backend g, std::optional<probe::Backend> t) : gen(std::move(g)), mt(std::move(t)) {}
      std::vector<probe::Generation> generate(const probe::GenerationRequest& r) override {
        return gen.service().generate(r);
      }
      std::vector<probe::Generation> translate(const probe::TranslationRequest& r) override {
        if (!mt) throw probe::ConfigError("no translation backend configured");
        return mt->service().translate(r);
      }
    };
    httplib::Server server;
    probe::mount_protocol_routes(server,
                                 std::make_shared<Router>(*inputs.generator, inputs.translator));
    g_server = &server;
    std::signal(SIGINT, stop_server);
    std::signal(SIGTERM, stop_server);
    std::cerr << "serving on " << host << ":" << port << "\n";
    if (!server.listen(host, port)) {
      std::cerr << "probe: cannot listen on " << host << ":" << port << "\n";
      return kExitRun;
    }
    return 0;
  }

  try {
    const auto report = probe::run_probe(config, inputs);
    probe::emit_report(report, config.output_dir);
    std::cout << "facts: " << report.prompt_counts.size()
              << "  relative effect: " << probe::format_number(report.overall.value)
              << "  warnings: " << report.warnings.size() << "\n"
              << "wrote " << config.output_dir.string() << "\n";
  } catch (const probe::Error& e) {
    std::cerr << "probe: run failed: " << e.what() << "\n";
    return kExitRun;
  } catch (const std::exception& e) {
    std::cerr << "probe: run failed: " << e.what() << "\n";
    return kExitRun;
  }
  return 0;
}
