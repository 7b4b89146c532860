#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "faraday/scenario.hpp"

namespace faraday {

using ConfigValue = std::variant<double, std::string, bool, std::vector<double>>;

/// Flat "section.key" -> value map read from a TOML subset: [section]
/// headers, key = value, numbers (incl. inf), "strings", booleans, numeric
/// arrays, # comments. Insertion order is kept so written manifests are
/// stable.
class Config
{
public:
  static Config parse(std::string_view text, std::string_view source = "<config>");
  static Config load(const std::filesystem::path& path);

  /// Keys in `overrides` replace ours; new keys are appended.
  void merge(const Config& overrides);
  void set(const std::string& key, ConfigValue value);
  /// "section.key=value" with the value in TOML syntax ("optimal" may be
  /// given without quotes).
  void set_assignment(std::string_view assignment);

  const ConfigValue* find(std::string_view key) const;
  bool contains(std::string_view key) const { return find(key) != nullptr; }
  double number(std::string_view key) const;

  const std::vector<std::pair<std::string, ConfigValue>>& entries() const { return entries_; }

  /// TOML text that parses back to the same config.
  std::string to_toml() const;

private:
  std::vector<std::pair<std::string, ConfigValue>> entries_;
};

std::string to_string(const ConfigValue& v);

/// Keys that make up a Scenario, with the unit carried in the key name.
const std::vector<std::string>& scenario_keys();

/// Builds an SI Scenario. Missing or mistyped scenario keys and unknown keys
/// in scenario sections raise ConfigError (all of them at once); invariant
/// violations raise ValidationError. "optimal" apertures and "filter"
/// detector time constants are resolved here.
Scenario scenario_from_config(const Config& config);

/// Non-fatal notes about the config (e.g. an explicit tau_pd that disagrees
/// with the filter).
std::vector<std::string> config_diagnostics(const Config& config);

} // namespace faraday
