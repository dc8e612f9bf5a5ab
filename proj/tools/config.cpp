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

#include "config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "sqs/common.hpp"

namespace sqs::cli {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Drops a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

json scalar(std::string_view s, const std::string& where) {
  if (s.empty()) throw ConfigError(where + ": missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') throw ConfigError(where + ": unterminated string");
    const std::string_view body = s.substr(1, s.size() - 2);
    if (body.find('"') != std::string_view::npos) throw ConfigError(where + ": stray quote in string");
    return std::string(body);
  }
  if (s == "true") return true;
  if (s == "false") return false;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(where + ": cannot parse value '" + std::string(s) + "'");
  }
  return v;
}

// Section -> key -> [type, default].
const json kSchema = json::parse(R"({
  "run":         {"threads": ["integer", 1], "seed": ["integer", 20260101]},
  "units":       {"omega": ["number", null], "omega_unit": ["string", null]},
  "geometry":    {"builder": ["string", "doublet_chain"], "L": ["integer", 15], "s": ["number", 5.5],
                  "s_x": ["number", null], "s_y": ["number", null],
                  "rows": ["integer", 3], "cols": ["integer", 3], "a": ["number", 6.5], "d": ["number", 3.0],
                  "offset": ["number", 0.0], "k": ["number", 1.4142135623730951], "path": ["string", null]},
  "interaction": {"c6": ["number", null], "v_nn": ["number", 12.5], "r_nn": ["number", 5.5],
                  "truncation": ["string", "nnn"], "constraint": ["string", "blockade"]},
  "schedule":    {"kind": ["string", "sqs"], "delta_start": ["number", -4.0], "delta_end": ["number", 4.0],
                  "rate": ["number", 1.5], "delta_i": ["number", 0.55], "delta_q": ["number", 1.5],
                  "t_q": ["number", 0.45], "resume_at_quench": ["bool", false],
                  "tau": ["number", 0.0], "shift": ["number", 0.0], "omega_ramp": ["number", 0.0],
                  "t_q_ns": ["number", null], "tau_ns": ["number", null], "shift_ns": ["number", null]},
  "engine":      {"kind": ["string", "dense"], "n_steps": ["integer", 1000], "method": ["string", "krylov"],
                  "krylov_tol": ["number", 1e-10], "krylov_max_dim": ["integer", 30],
                  "chi_max": ["integer", 0], "cutoff": ["number", 1e-8],
                  "initial": ["string", "exact_ground"], "stride": ["integer", 10],
                  "checkpoint_stride": ["integer", 0]},
  "measure":     {"shots": ["integer", 0], "noise": ["bool", true], "p_r_to_g": ["number", 0.08],
                  "p_g_to_r": ["number", 0.01], "postprocess": ["string", "auto"]},
  "scan":        {"tq_start": ["number", 0.0], "tq_stop": ["number", 1.2], "tq_step": ["number", 0.05],
                  "sizes": ["array", [9, 11, 13, 15]]},
  "spectra":     {"delta_start": ["number", -4.0], "delta_stop": ["number", 4.0], "delta_points": ["integer", 81],
                  "k": ["integer", 4], "gap_lo": ["number", null], "gap_hi": ["number", null],
                  "overlap_k": ["integer", 6]},
  "fit":         {"input": ["string", null], "n0": ["number", 13.0]},
  "output":      {"dir": ["string", "out"], "formats": ["array", ["csv", "json"]]}
})");

bool type_matches(const json& v, const std::string& type) {
  if (type == "number") return v.is_number();
  if (type == "integer") return v.is_number() && std::floor(v.get<double>()) == v.get<double>();
  if (type == "string") return v.is_string();
  if (type == "bool") return v.is_boolean();
  if (type == "array") return v.is_array();
  return false;
}

}  // namespace

json parse_config_value(std::string_view text, const std::string& where) {
  const std::string_view s = trim(text);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw ConfigError(where + ": unterminated array");
    json arr = json::array();
    std::string_view body = trim(s.substr(1, s.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      const std::string_view item = trim(body.substr(0, comma));
      if (!item.empty() && item.front() == '[') throw ConfigError(where + ": nested arrays are not supported");
      arr.push_back(scalar(item, where));
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
      if (body.empty()) break;  // trailing comma
    }
    return arr;
  }
  return scalar(s, where);
}

json parse_config_text(std::string_view text, const std::string& origin) {
  json out = json::object();
  std::string section = "run";
  std::size_t lineno = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      const std::string_view name = trim(line.substr(1, line.size() - 2));
      if (!valid_name(name)) throw ConfigError(where + ": invalid section name");
      section = std::string(name);
      if (out.contains(section)) throw ConfigError(where + ": section [" + section + "] repeated");
      out[section] = json::object();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (!valid_name(key)) throw ConfigError(where + ": invalid key '" + key + "'");
    json& sec = out[section];
    if (sec.contains(key)) throw ConfigError(where + ": key '" + key + "' repeated");
    sec[key] = parse_config_value(line.substr(eq + 1), where);
  }
  return out;
}

const json& config_schema() { return kSchema; }

json resolve_config(const json& user) {
  if (!user.is_object()) throw ConfigError("configuration must be a table of sections");
  for (const auto& [section, keys] : user.items()) {
    if (!kSchema.contains(section)) throw ConfigError("unknown section [" + section + "]");
    if (!keys.is_object()) throw ConfigError("section [" + section + "] must hold key = value pairs");
    for (const auto& [key, value] : keys.items()) {
      const auto& sec = kSchema.at(section);
      if (!sec.contains(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      const std::string type = sec.at(key).at(0);
      if (!type_matches(value, type)) {
        throw ConfigError("[" + section + "] " + key + ": expected " + type + ", got " + value.dump());
      }
    }
  }
  json resolved = json::object();
  for (const auto& [section, keys] : kSchema.items()) {
    json& out = resolved[section];
    out = json::object();
    for (const auto& [key, entry] : keys.items()) {
      const bool given = user.contains(section) && user.at(section).contains(key);
      out[key] = given ? user.at(section).at(key) : entry.at(1);
    }
  }
  return resolved;
}

void apply_override(json& user, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override '" + assignment + "' must look like section.key=value");
  }
  const std::string section(trim(std::string_view(assignment).substr(0, dot)));
  const std::string key(trim(std::string_view(assignment).substr(dot + 1, eq - dot - 1)));
  if (!valid_name(section) || !valid_name(key)) throw ConfigError("override '" + assignment + "': invalid name");
  const std::string_view rhs = trim(std::string_view(assignment).substr(eq + 1));
  json value;
  try {
    value = parse_config_value(rhs, "--override " + assignment);
  } catch (const ConfigError&) {
    // Bare words are strings on the command line: --override engine.kind=mps.
    if (rhs.empty() || rhs.find_first_of(" \t\"[],") != std::string_view::npos) throw;
    value = std::string(rhs);
  }
  user[section][key] = value;
}

}  // namespace sqs::cli
