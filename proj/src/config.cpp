#include "faraday/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "faraday/errors.hpp"

namespace faraday {

namespace {

std::string_view trim(std::string_view s)
{
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view text, double& out)
{
  std::string cleaned;
  for (char ch : text)
    if (ch != '_') cleaned.push_back(ch);
  if (cleaned == "inf" || cleaned == "+inf") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  if (cleaned == "-inf") {
    out = -std::numeric_limits<double>::infinity();
    return true;
  }
  std::string_view sv = cleaned;
  if (!sv.empty() && sv.front() == '+') sv.remove_prefix(1);
  const auto* end = sv.data() + sv.size();
  const auto [ptr, ec] = std::from_chars(sv.data(), end, out);
  return !sv.empty() && ec == std::errc() && ptr == end && !std::isnan(out);
}

// Strips a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view line)
{
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

ConfigValue parse_value(std::string_view text, bool bare_strings, const std::string& where)
{
  text = trim(text);
  if (text.empty()) throw ConfigError(where + ": missing value");
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') throw ConfigError(where + ": unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < text.size(); ++i) {
      if (text[i] == '\\' && i + 2 < text.size()) {
        const char next = text[++i];
        out.push_back(next == 'n' ? '\n' : next == 't' ? '\t' : next);
      } else {
        out.push_back(text[i]);
      }
    }
    return out;
  }
  if (text == "true") return true;
  if (text == "false") return false;
  if (text.front() == '[') {
    if (text.back() != ']') throw ConfigError(where + ": unterminated array");
    std::vector<double> values;
    auto body = trim(text.substr(1, text.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      const auto item = trim(body.substr(0, comma));
      double v = 0;
      if (!item.empty()) {
        if (!parse_double(item, v))
          throw ConfigError(fmt::format("{}: array element '{}' is not a number", where, item));
        values.push_back(v);
      }
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
    }
    return values;
  }
  double v = 0;
  if (parse_double(text, v)) return v;
  if (bare_strings) return std::string(text);
  throw ConfigError(fmt::format("{}: cannot parse value '{}'", where, text));
}

const std::set<std::string, std::less<>> known_sections = {
  "transition", "cloud", "probe", "lattice", "field", "detector",
  "trace", "run", "sweep", "reference", "analysis", "reproduce"};

const std::set<std::string, std::less<>> scenario_sections = {
  "transition", "cloud", "probe", "lattice", "field", "detector", "trace", "run"};

} // namespace

std::string to_string(const ConfigValue& v)
{
  struct Visitor
  {
    std::string operator()(double d) const { return fmt::format("{}", d); }
    std::string operator()(const std::string& s) const
    {
      std::string out = "\"";
      for (char ch : s) {
        if (ch == '"' || ch == '\\') out.push_back('\\');
        out.push_back(ch);
      }
      return out + "\"";
    }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::vector<double>& a) const
    {
      std::string out = "[";
      for (std::size_t i = 0; i < a.size(); ++i)
        out += (i ? ", " : "") + fmt::format("{}", a[i]);
      return out + "]";
    }
  };
  return std::visit(Visitor{}, v);
}

Config Config::parse(std::string_view text, std::string_view source)
{
  Config cfg;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const std::string where = fmt::format("{}:{}", source, line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_sections.contains(section))
        throw ConfigError(fmt::format("{}: unknown section [{}]", where, section));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (section.empty()) throw ConfigError(where + ": key outside of a [section]");
    cfg.set(section + "." + std::string(key), parse_value(line.substr(eq + 1), false, where));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

void Config::merge(const Config& overrides)
{
  for (const auto& [k, v] : overrides.entries_) set(k, v);
}

void Config::set(const std::string& key, ConfigValue value)
{
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(key, std::move(value));
}

void Config::set_assignment(std::string_view assignment)
{
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError(fmt::format("override '{}' is not of the form key=value", assignment));
  const auto key = std::string(trim(assignment.substr(0, eq)));
  const auto dot = key.find('.');
  if (dot == std::string::npos || !known_sections.contains(std::string_view(key).substr(0, dot)))
    throw ConfigError(fmt::format("override key '{}' does not name a known section", key));
  set(key, parse_value(assignment.substr(eq + 1), true, "override " + key));
}

const ConfigValue* Config::find(std::string_view key) const
{
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

double Config::number(std::string_view key) const
{
  const auto* v = find(key);
  if (!v) throw ConfigError(fmt::format("missing key {}", key));
  if (const auto* d = std::get_if<double>(v)) return *d;
  throw ConfigError(fmt::format("{} must be a number", key));
}

std::string Config::to_toml() const
{
  std::vector<std::string> sections;
  for (const auto& [k, v] : entries_) {
    auto s = k.substr(0, k.find('.'));
    if (std::find(sections.begin(), sections.end(), s) == sections.end()) sections.push_back(s);
  }
  std::string out;
  for (const auto& s : sections) {
    out += (out.empty() ? "" : "\n") + fmt::format("[{}]\n", s);
    for (const auto& [k, v] : entries_)
      if (k.compare(0, s.size() + 1, s + ".") == 0)
        out += fmt::format("{} = {}\n", k.substr(s.size() + 1), to_string(v));
  }
  return out;
}

const std::vector<std::string>& scenario_keys()
{
  static const std::vector<std::string> keys = {
    "transition.wavelength_nm", "transition.linewidth_mhz", "transition.total_spin",
    "transition.lande_gf",      "cloud.atom_number",        "cloud.radius_um",
    "probe.detuning_ghz",       "probe.intensity_mw_cm2",   "probe.aperture_um",
    "lattice.wavepacket_width_nm", "field.bias_mgauss",     "detector.efficiency",
    "detector.signal_factor",   "detector.low_cut_khz",     "detector.high_cut_khz",
    "detector.filter_order",    "detector.tau_us",          "trace.initial_phase_rad",
    "trace.pre_trigger_ms",     "trace.duration_ms",        "trace.sample_rate_khz",
    "trace.background_decay_ms", "trace.rin",               "trace.noise",
    "run.seed"};
  return keys;
}

namespace {

std::uint64_t seed_value(const ConfigValue& v, std::vector<std::string>& errors)
{
  if (const auto* d = std::get_if<double>(&v)) {
    if (*d >= 0 && *d <= 9007199254740992.0 && std::floor(*d) == *d)
      return static_cast<std::uint64_t>(*d);
  } else if (const auto* s = std::get_if<std::string>(&v)) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), out);
    if (ec == std::errc() && ptr == s->data() + s->size()) return out;
  }
  errors.emplace_back("run.seed must be a non-negative integer");
  return 0;
}

} // namespace

Scenario scenario_from_config(const Config& config)
{
  std::vector<std::string> errors;
  const auto& keys = scenario_keys();
  for (const auto& [k, v] : config.entries()) {
    const auto section = std::string_view(k).substr(0, k.find('.'));
    if (scenario_sections.contains(section) && std::find(keys.begin(), keys.end(), k) == keys.end())
      errors.push_back(fmt::format("unknown key {}", k));
  }

  auto num = [&](const char* key) -> double {
    const auto* v = config.find(key);
    if (!v) {
      errors.push_back(fmt::format("missing key {}", key));
      return 0;
    }
    if (const auto* d = std::get_if<double>(v)) return *d;
    errors.push_back(fmt::format("{} must be a number, got {}", key, to_string(*v)));
    return 0;
  };
  // Number, or one of the listed keywords (returned as NaN).
  auto num_or = [&](const char* key, std::string_view word) -> double {
    const auto* v = config.find(key);
    if (const auto* s = v ? std::get_if<std::string>(v) : nullptr) {
      if (*s == word) return std::numeric_limits<double>::quiet_NaN();
      errors.push_back(fmt::format("{} must be a number or \"{}\"", key, word));
      return 0;
    }
    return num(key);
  };

  Scenario s;
  s.transition.wavelength = num("transition.wavelength_nm") * units::nm;
  s.transition.linewidth = units::angular(num("transition.linewidth_mhz") * units::MHz);
  s.transition.total_spin = num("transition.total_spin");
  s.transition.lande_gf = num("transition.lande_gf");
  s.cloud.atom_number = num("cloud.atom_number");
  s.cloud.radius = num("cloud.radius_um") * units::um;
  s.probe.detuning = units::angular(num("probe.detuning_ghz") * units::GHz);
  s.probe.intensity = num("probe.intensity_mw_cm2") * units::mW_per_cm2;
  const double aperture = num_or("probe.aperture_um", "optimal");
  s.probe.efficiency = num("detector.efficiency");
  s.wavepacket_width = num("lattice.wavepacket_width_nm") * units::nm;
  s.bias_field = num("field.bias_mgauss") * units::mgauss;
  s.signal_factor = num("detector.signal_factor");
  s.filter.low_cut = num("detector.low_cut_khz") * units::kHz;
  s.filter.high_cut = num("detector.high_cut_khz") * units::kHz;
  const double order = num("detector.filter_order");
  s.filter.order = static_cast<int>(order);
  if (order != std::floor(order)) errors.emplace_back("detector.filter_order must be an integer");
  const double tau_us = num_or("detector.tau_us", "filter");
  s.initial_phase = num("trace.initial_phase_rad");
  s.pre_trigger = num("trace.pre_trigger_ms") * units::ms;
  s.duration = num("trace.duration_ms") * units::ms;
  s.sample_rate = num("trace.sample_rate_khz") * units::kHz;
  s.background_decay = num("trace.background_decay_ms") * units::ms;
  s.rin = num("trace.rin");
  if (const auto* v = config.find("trace.noise")) {
    if (const auto* b = std::get_if<bool>(v))
      s.noise = *b;
    else
      errors.emplace_back("trace.noise must be true or false");
  } else {
    errors.emplace_back("missing key trace.noise");
  }
  if (const auto* v = config.find("run.seed"))
    s.seed = seed_value(*v, errors);
  else
    errors.emplace_back("missing key run.seed");

  if (!errors.empty()) throw ConfigError(join_violations(errors));

  s.probe.aperture_radius =
    std::isnan(aperture) ? (s.cloud.radius > 0 ? optimal_aperture(s.cloud.radius) : 0.0)
                         : aperture * units::um;
  s.probe.detector_time_constant = 0;
  if (!std::isnan(tau_us)) {
    s.probe.detector_time_constant = tau_us * units::us;
  } else if (s.sample_rate > 0 && s.filter.violations(s.sample_rate).empty()) {
    s.probe.detector_time_constant = detector_tau_from_filter(s.filter, s.sample_rate);
  }
  s.validate();
  return s;
}

std::vector<std::string> config_diagnostics(const Config& config)
{
  std::vector<std::string> out;
  const auto s = scenario_from_config(config);
  const auto* tau = config.find("detector.tau_us");
  if (tau && std::holds_alternative<double>(*tau)) {
    const double from_filter = detector_tau_from_filter(s.filter, s.sample_rate);
    if (std::abs(s.probe.detector_time_constant / from_filter - 1) > 0.01)
      out.push_back(fmt::format("detector.tau_us = {} differs from the filter's effective "
                                "{:.4g} us; synthesized traces follow the filter",
                                std::get<double>(*tau), from_filter / units::us));
  }
  for (auto&& d : diagnostics(s)) out.push_back(std::move(d));
  return out;
}

} // namespace faraday
