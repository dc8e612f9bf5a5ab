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

#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

namespace sqs::cli {

/// Sectioned key-value text:
///
///   # comment
///   [section]
///   key = 1.5            numbers
///   key = "text"         strings
///   key = true           booleans
///   key = [1, 2, 3]      flat arrays of the above
///
/// Returns {section: {key: value}}. Keys before the first header land in
/// section "run". Throws ConfigError with the line number on malformed input.
nlohmann::json parse_config_text(std::string_view text, const std::string& origin = "<config>");

/// Parses the right-hand side of `key = value` (also used by --override).
nlohmann::json parse_config_value(std::string_view text, const std::string& where);

/// Every accepted section and key with its default value. A null default
/// marks an optional key without a default.
const nlohmann::json& config_schema();

/// Defaults merged with `user`, after rejecting unknown sections/keys and
/// type mismatches. Integers are accepted where a number is expected.
nlohmann::json resolve_config(const nlohmann::json& user);

/// Applies `section.key=value` on top of `user`.
void apply_override(nlohmann::json& user, const std::string& assignment);

}  // namespace sqs::cli
