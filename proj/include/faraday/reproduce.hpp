#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "faraday/config.hpp"

namespace faraday {

/// defaults.toml from `preset_dir`, then `<name>.toml` on top. Throws
/// ConfigError if either is missing.
Config load_preset(const std::filesystem::path& preset_dir, const std::string& name);

struct ReproduceOptions
{
  std::filesystem::path preset_dir;
  std::filesystem::path out_dir;   ///< bundle goes to out_dir/<figure>
  std::uint64_t seed = 1;
  int jobs = 0;
  std::optional<int> seeds;        ///< overrides the preset's seed counts
  std::vector<std::string> overrides; ///< "section.key=value", applied last
};

/// Headline numbers of a bundle, also written to <figure>/summary.csv.
struct FigureSummary
{
  std::string figure;
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::filesystem::path> files;

  double value(const std::string& key) const;
};

/// figure: fig2 | fig3 | fig4 | fig5. Writes CSVs, a README.txt describing
/// the expected shapes, and a manifest per preset used.
FigureSummary reproduce_figure(const std::string& figure, const ReproduceOptions& options);

const std::vector<std::string>& reproducible_figures();

/// Derived quantities of a scenario, one "name = value unit" line each.
std::vector<std::string> derived_notes(const Scenario& s);

/// Resolved config plus derived quantities as comments; parses back to the
/// same config.
std::string manifest_text(const Config& config, const std::vector<std::string>& notes = {});

} // namespace faraday
