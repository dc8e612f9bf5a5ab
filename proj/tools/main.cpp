// Copyright 2026 The sqs-sim Authors
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

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <iterator>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"
#include "sqs/common.hpp"

#ifndef SQS_VERSION
#define SQS_VERSION "unknown"
#endif
#ifndef SQS_REVISION
#define SQS_REVISION "unknown"
#endif

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kConfig = 2, kNumeric = 3, kBudget = 4, kInternal = 5 };

struct Flags {
  std::string config;
  std::optional<long long> seed;
  std::string out_dir;
  std::string engine;
  std::optional<unsigned> threads;
  std::vector<std::string> overrides;
};

int run(const std::string& command, const Flags& f) {
  using nlohmann::json;
  const auto start = std::chrono::steady_clock::now();
  json user = json::object();
  if (!f.config.empty()) {
    std::ifstream is(f.config);
    if (!is) throw sqs::ConfigError("cannot open config file " + f.config);
    const std::string text{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
    user = sqs::cli::parse_config_text(text, f.config);
  }
  for (const auto& o : f.overrides) sqs::cli::apply_override(user, o);
  if (f.seed) user["run"]["seed"] = *f.seed;
  if (!f.out_dir.empty()) user["output"]["dir"] = f.out_dir;
  if (!f.engine.empty()) user["engine"]["kind"] = f.engine;
  if (f.threads) user["run"]["threads"] = *f.threads;
  const json config = sqs::cli::resolve_config(user);

  sqs::cli::OutputSink sink(config.at("output").at("dir").get<std::string>());
  json manifest{{"tool", "sqs"},
                {"version", SQS_VERSION},
                {"revision", SQS_REVISION},
                {"command", command},
                {"config_path", f.config},
                {"config", config},
                {"config_hash", sqs::fnv1a_hex(config.dump())}};
  sqs::cli::run_command(command, config, sink, manifest);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << command << ": wrote " << sink.entries().size() << " files to " << sink.dir().string() << " in " << secs
            << " s\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sweep-quench-sweep simulation runner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("sqs ") + SQS_VERSION + " (" + SQS_REVISION + ")");
  Flags flags;
  const std::pair<const char*, const char*> commands[] = {
      {"geometry", "build an atom array and export positions, blockade graph and interactions"},
      {"groundscan", "ground-state observables and low spectrum over a detuning grid"},
      {"sweep", "evolve one schedule and write the trajectory"},
      {"scan-tq", "scan the quench duration and summarise the MIS probability trace"},
      {"scan-size", "final MIS probability over chain lengths plus a scaling fit"},
      {"spectra", "instantaneous eigenstate overlaps along a schedule"},
      {"sample", "evolve, draw shots, apply detection noise and blockade repair"},
      {"fit", "scaling fit on a CSV with columns N, P and optional err"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", flags.config, "experiment config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "RNG seed (overrides run.seed)");
    sub->add_option("-o,--out-dir", flags.out_dir, "output directory (overrides output.dir)");
    sub->add_option("--engine", flags.engine, "dense | mps (overrides engine.kind)");
    sub->add_option("-j,--threads", flags.threads, "worker threads for scans (overrides run.threads)");
    sub->add_option("--override", flags.overrides, "section.key=value, repeatable");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, flags);
  } catch (const sqs::ConfigError& e) {
    std::cerr << "sqs " << command << ": config error: " << e.what() << "\n";
    return kConfig;
  } catch (const sqs::BudgetError& e) {
    std::cerr << "sqs " << command << ": budget error: " << e.what() << "\n";
    return kBudget;
  } catch (const std::bad_alloc&) {
    std::cerr << "sqs " << command << ": budget error: out of memory\n";
    return kBudget;
  } catch (const sqs::NumericError& e) {
    std::cerr << "sqs " << command << ": numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::domain_error& e) {
    std::cerr << "sqs " << command << ": numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::logic_error& e) {
    // invalid_argument / out_of_range from the core: a parameter the config supplied.
    std::cerr << "sqs " << command << ": config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "sqs " << command << ": internal error: " << e.what() << "\n";
    return kInternal;
  }
}
