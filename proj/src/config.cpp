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

#include "lidarsim/config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>

namespace lidarsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '-' || c == '.';
}

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!is_name_char(c)) return false;
  }
  return true;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Drops a trailing '#' comment that is not inside quotes.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (line[k] == '"') quoted = !quoted;
    if (line[k] == '#' && !quoted) return line.substr(0, k);
  }
  return line;
}

ConfigValue parse_value(std::string_view raw, int line) {
  const std::string_view s = trim(raw);
  if (s.empty()) throw ConfigError(ConfigError::Kind::kSyntax, line, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') {
      throw ConfigError(ConfigError::Kind::kSyntax, line, "unterminated string");
    }
    return std::string(s.substr(1, s.size() - 2));
  }
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.find(',') != std::string_view::npos) {
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
      const auto comma = s.find(',', start);
      const auto piece = s.substr(start, comma == std::string_view::npos ? s.npos : comma - start);
      const auto v = parse_number(piece);
      if (!v) {
        throw ConfigError(ConfigError::Kind::kSyntax, line,
                          fmt::format("bad number '{}' in triple", trim(piece)));
      }
      parts.push_back(*v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (parts.size() != 3) {
      throw ConfigError(ConfigError::Kind::kSyntax, line,
                        fmt::format("expected 3 comma-separated numbers, got {}", parts.size()));
    }
    return Vec3{parts[0], parts[1], parts[2]};
  }
  if (auto v = parse_number(s)) return *v;
  return std::string(s);
}

const char* type_name(ValueType t) {
  switch (t) {
    case ValueType::kNumber: return "number";
    case ValueType::kBool: return "boolean";
    case ValueType::kString: return "string";
    case ValueType::kTriple: return "triple";
  }
  return "?";
}

void check_against(const ConfigEntry& e, const std::string& dotted, const KeySpec& spec) {
  const bool ok = (spec.type == ValueType::kNumber && std::holds_alternative<double>(e.value)) ||
                  (spec.type == ValueType::kBool && std::holds_alternative<bool>(e.value)) ||
                  (spec.type == ValueType::kString && std::holds_alternative<std::string>(e.value)) ||
                  (spec.type == ValueType::kTriple && std::holds_alternative<Vec3>(e.value));
  if (!ok) {
    throw ConfigError(ConfigError::Kind::kType, e.line,
                      fmt::format("'{}' must be a {}", dotted, type_name(spec.type)));
  }
  std::vector<double> values;
  if (const auto* d = std::get_if<double>(&e.value)) values = {*d};
  if (const auto* v = std::get_if<Vec3>(&e.value)) values = {v->x, v->y, v->z};
  for (double x : values) {
    if ((spec.min && x < *spec.min) || (spec.max && x > *spec.max)) {
      throw ConfigError(ConfigError::Kind::kRange, e.line,
                        fmt::format("'{}' = {} outside [{}, {}]", dotted, x,
                                    spec.min ? fmt::format("{}", *spec.min) : "-inf",
                                    spec.max ? fmt::format("{}", *spec.max) : "inf"));
    }
  }
}

std::string dotted_key(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

}  // namespace

ConfigError::ConfigError(Kind kind, int line, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}", line, message) : message),
      kind_(kind),
      line_(line) {}

const ConfigEntry* ConfigSection::find(std::string_view key) const {
  for (const auto& e : entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

Config parse_config(std::string_view text, const ConfigSchema* schema,
                    const std::set<std::string>& repeatable) {
  Config cfg;
  auto& sections = cfg.mutable_sections();
  sections.push_back({"", 0, {}});
  std::size_t current = 0;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(ConfigError::Kind::kSyntax, line_no, "unterminated section header");
      }
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (!valid_name(name)) {
        throw ConfigError(ConfigError::Kind::kSyntax, line_no,
                          fmt::format("invalid section name '{}'", name));
      }
      // Non-repeatable sections merge with an earlier header of the same name.
      std::optional<std::size_t> existing;
      if (!repeatable.contains(name)) {
        for (std::size_t k = 0; k < sections.size(); ++k) {
          if (sections[k].name == name) existing = k;
        }
      }
      if (existing) {
        current = *existing;
      } else {
        sections.push_back({name, line_no, {}});
        current = sections.size() - 1;
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(ConfigError::Kind::kSyntax, line_no, "expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (!valid_name(key)) {
      throw ConfigError(ConfigError::Kind::kSyntax, line_no, fmt::format("invalid key '{}'", key));
    }
    ConfigSection& section = sections[current];
    const std::string dotted = dotted_key(section.name, key);
    if (section.find(key)) {
      throw ConfigError(ConfigError::Kind::kDuplicateKey, line_no,
                        fmt::format("duplicate key '{}'", dotted));
    }
    ConfigEntry entry{key, parse_value(line.substr(eq + 1), line_no), line_no};
    if (schema) {
      const auto it = schema->find(dotted);
      if (it == schema->end()) {
        throw ConfigError(ConfigError::Kind::kUnknownKey, line_no,
                          fmt::format("unknown key '{}'", dotted));
      }
      // A string schema accepts bare words that happen to look like numbers.
      if (it->second.type == ValueType::kString && !std::holds_alternative<std::string>(entry.value)) {
        entry.value = std::string(trim(line.substr(eq + 1)));
      }
      check_against(entry, dotted, it->second);
    }
    section.entries.push_back(std::move(entry));
  }
  return cfg;
}

std::vector<const ConfigSection*> Config::sections_named(std::string_view name) const {
  std::vector<const ConfigSection*> out;
  for (const auto& s : sections_) {
    if (s.name == name) out.push_back(&s);
  }
  return out;
}

const ConfigValue* Config::get(std::string_view dotted) const {
  const auto dot = dotted.rfind('.');
  const std::string_view section = dot == std::string_view::npos ? "" : dotted.substr(0, dot);
  const std::string_view key = dot == std::string_view::npos ? dotted : dotted.substr(dot + 1);
  for (const auto& s : sections_) {
    if (s.name != section) continue;
    if (const auto* e = s.find(key)) return &e->value;
  }
  return nullptr;
}

namespace {

template <typename T>
const T& require(const ConfigValue* v, std::string_view dotted, const char* type) {
  if (!v) {
    throw ConfigError(ConfigError::Kind::kMissing, 0, fmt::format("missing key '{}'", dotted));
  }
  const T* t = std::get_if<T>(v);
  if (!t) {
    throw ConfigError(ConfigError::Kind::kType, 0, fmt::format("'{}' must be a {}", dotted, type));
  }
  return *t;
}

const ConfigValue* entry_value(const ConfigSection& s, std::string_view key) {
  const auto* e = s.find(key);
  return e ? &e->value : nullptr;
}

}  // namespace

double Config::number(std::string_view dotted) const {
  return require<double>(get(dotted), dotted, "number");
}

double Config::number_or(std::string_view dotted, double fallback) const {
  return has(dotted) ? number(dotted) : fallback;
}

bool Config::boolean_or(std::string_view dotted, bool fallback) const {
  return has(dotted) ? require<bool>(get(dotted), dotted, "boolean") : fallback;
}

std::string Config::string(std::string_view dotted) const {
  return require<std::string>(get(dotted), dotted, "string");
}

std::string Config::string_or(std::string_view dotted, std::string fallback) const {
  return has(dotted) ? string(dotted) : fallback;
}

Vec3 Config::triple(std::string_view dotted) const {
  return require<Vec3>(get(dotted), dotted, "triple");
}

double section_number(const ConfigSection& s, std::string_view key) {
  return require<double>(entry_value(s, key), dotted_key(s.name, std::string(key)), "number");
}

std::string section_string(const ConfigSection& s, std::string_view key) {
  return require<std::string>(entry_value(s, key), dotted_key(s.name, std::string(key)), "string");
}

Vec3 section_triple(const ConfigSection& s, std::string_view key) {
  return require<Vec3>(entry_value(s, key), dotted_key(s.name, std::string(key)), "triple");
}

bool section_bool_or(const ConfigSection& s, std::string_view key, bool fallback) {
  const auto* v = entry_value(s, key);
  return v ? require<bool>(v, dotted_key(s.name, std::string(key)), "boolean") : fallback;
}

}  // namespace lidarsim
