// Copyright 2026 The lidarsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * \file config.hpp
 * Line-oriented configuration text:
 *
 *   # comment
 *   [noise]
 *   p = 0.45            # number
 *   enabled = true      # boolean
 *   name = glass        # bare or "quoted" string
 *   color = 0.6, 0.9, 1 # comma-separated triple
 *
 * Keys before the first header belong to the unnamed section. Sections
 * listed as repeatable (e.g. [box]) start a fresh instance at every header;
 * any other section name may appear more than once but its keys must stay
 * unique across all of its headers.
 */
#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lidarsim/core.hpp"

namespace lidarsim {

using ConfigValue = std::variant<bool, double, std::string, Vec3>;

struct ConfigEntry {
  std::string key;
  ConfigValue value;
  int line = 0;
};

struct ConfigSection {
  std::string name;
  int line = 0;
  std::vector<ConfigEntry> entries;

  const ConfigEntry* find(std::string_view key) const;
};

enum class ValueType { kNumber, kBool, kString, kTriple };

struct KeySpec {
  ValueType type = ValueType::kNumber;
  std::optional<double> min;
  std::optional<double> max;
};

/// Keys are "section.key" ("key" for the unnamed section).
using ConfigSchema = std::map<std::string, KeySpec>;

class ConfigError : public std::runtime_error {
 public:
  enum class Kind { kSyntax, kDuplicateKey, kUnknownKey, kType, kRange, kMissing };

  ConfigError(Kind kind, int line, const std::string& message);

  Kind kind() const { return kind_; }
  int line() const { return line_; }

 private:
  Kind kind_;
  int line_;
};

class Config {
 public:
  const std::vector<ConfigSection>& sections() const { return sections_; }
  std::vector<const ConfigSection*> sections_named(std::string_view name) const;

  /// Lookup by "section.key"; repeated sections resolve to the first match.
  const ConfigValue* get(std::string_view dotted) const;
  bool has(std::string_view dotted) const { return get(dotted) != nullptr; }

  double number(std::string_view dotted) const;
  double number_or(std::string_view dotted, double fallback) const;
  bool boolean_or(std::string_view dotted, bool fallback) const;
  std::string string(std::string_view dotted) const;
  std::string string_or(std::string_view dotted, std::string fallback) const;
  Vec3 triple(std::string_view dotted) const;

  std::vector<ConfigSection>& mutable_sections() { return sections_; }

 private:
  std::vector<ConfigSection> sections_;
};

/// Throws ConfigError with the offending line number. With a schema, keys
/// outside it are rejected and values are type- and range-checked.
Config parse_config(std::string_view text, const ConfigSchema* schema = nullptr,
                    const std::set<std::string>& repeatable = {"box", "material"});

/// Typed accessors for a single section instance.
double section_number(const ConfigSection& s, std::string_view key);
std::string section_string(const ConfigSection& s, std::string_view key);
Vec3 section_triple(const ConfigSection& s, std::string_view key);
bool section_bool_or(const ConfigSection& s, std::string_view key, bool fallback);

}  // namespace lidarsim
