#pragma once

#include <cmath>
#include <numbers>

#include "faraday/config.hpp"
#include "faraday/core.hpp"
#include "faraday/reproduce.hpp"
#include "faraday/scenario.hpp"

namespace test {

inline faraday::TransitionSpecd cesium()
{
  return {852e-9, 2 * std::numbers::pi * 5.22e6, 4, 0.25};
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

inline faraday::Config preset(const char* name) { return faraday::load_preset(FARADAY_PRESET_DIR, name); }

inline faraday::Scenario scenario(const char* name) { return faraday::scenario_from_config(preset(name)); }

} // namespace test
