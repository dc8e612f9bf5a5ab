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

#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace sqs::cli {

inline constexpr const char* kSubcommands[] = {"geometry",  "groundscan", "sweep",  "scan-tq",
                                               "scan-size", "spectra",    "sample", "fit"};

/// Collects output files and their content hashes for the manifest.
class OutputSink {
 public:
  explicit OutputSink(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path(const std::string& name) const { return dir_ / name; }

  /// Writes `content` to `name` inside the output directory and records it.
  void write(const std::string& name, const std::string& content);
  /// Records a file some other writer produced inside the output directory.
  void record(const std::string& name);

  const nlohmann::json& entries() const { return entries_; }

 private:
  std::filesystem::path dir_;
  nlohmann::json entries_ = nlohmann::json::array();
};

/// Runs `command` against a resolved configuration and writes every output,
/// manifest.json last. Throws the core error categories on failure.
void run_command(const std::string& command, const nlohmann::json& config, OutputSink& sink, nlohmann::json& manifest);

}  // namespace sqs::cli
