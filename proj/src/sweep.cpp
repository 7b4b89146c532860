#include "faraday/sweep.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "faraday/analysis.hpp"
#include "faraday/errors.hpp"
#include "faraday/trace_io.hpp"

namespace faraday {

namespace {

std::string resolve_parameter(const std::string& name)
{
  const auto& keys = scenario_keys();
  if (name == "run.seed") throw ConfigError("sweep.parameter cannot be run.seed");
  if (std::find(keys.begin(), keys.end(), name) != keys.end()) return name;
  std::vector<std::string> matches;
  for (const auto& k : keys)
    if (k.size() > name.size() && k.compare(0, name.size(), name) == 0 && k[name.size()] == '_')
      matches.push_back(k);
  if (matches.size() == 1) return matches.front();
  throw ConfigError(fmt::format("sweep.parameter '{}' does not name a scenario field", name));
}

} // namespace

SweepSpec sweep_from_config(const Config& config)
{
  SweepSpec spec;
  const auto* param = config.find("sweep.parameter");
  if (!param || !std::holds_alternative<std::string>(*param))
    throw ConfigError("sweep.parameter must be given as a string, e.g. \"probe.detuning_ghz\"");
  spec.parameter = resolve_parameter(std::get<std::string>(*param));

  if (const auto* v = config.find("sweep.values")) {
    if (const auto* list = std::get_if<std::vector<double>>(v))
      spec.values = *list;
    else if (const auto* d = std::get_if<double>(v))
      spec.values = {*d};
    else
      throw ConfigError("sweep.values must be a numeric array");
  } else if (config.contains("sweep.start")) {
    const double start = config.number("sweep.start");
    const double stop = config.number("sweep.stop");
    const double count = config.number("sweep.count");
    if (!(count >= 1) || count != std::floor(count))
      throw ConfigError("sweep.count must be a positive integer");
    std::string spacing = "linear";
    if (const auto* s = config.find("sweep.spacing")) {
      if (!std::holds_alternative<std::string>(*s)) throw ConfigError("sweep.spacing must be a string");
      spacing = std::get<std::string>(*s);
    }
    const auto n = static_cast<std::size_t>(count);
    if (spacing == "log" && !(start * stop > 0))
      throw ConfigError("log spacing needs start and stop of the same sign, both nonzero");
    if (spacing != "log" && spacing != "linear")
      throw ConfigError("sweep.spacing must be \"linear\" or \"log\"");
    for (std::size_t i = 0; i < n; ++i) {
      const double f = n == 1 ? 0.0 : double(i) / double(n - 1);
      spec.values.push_back(spacing == "log"
                              ? start * std::pow(stop / start, f)
                              : start + (stop - start) * f);
    }
  } else {
    throw ConfigError("sweep needs values = [...] or start/stop/count");
  }
  if (spec.values.empty()) throw ConfigError("sweep needs at least one value");

  if (const auto* s = config.find("sweep.seeds_per_point")) {
    const auto* d = std::get_if<double>(s);
    if (!d || *d < 0 || *d != std::floor(*d))
      throw ConfigError("sweep.seeds_per_point must be a non-negative integer");
    spec.seeds_per_point = static_cast<int>(*d);
  }
  return spec;
}

std::uint64_t derive_seed(std::uint64_t base, std::size_t point, std::size_t repetition)
{
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ std::uint64_t(point)) ^ std::uint64_t(repetition));
}

std::vector<SweepRow> run_sweep(const Config& base, const SweepSpec& spec, std::uint64_t base_seed,
                                int jobs)
{
  std::vector<Scenario> scenarios;
  for (double v : spec.values) {
    Config c = base;
    c.set(spec.parameter, v);
    scenarios.push_back(scenario_from_config(c));
  }

  const std::size_t reps = spec.seeds_per_point > 0 ? std::size_t(spec.seeds_per_point) : 1;
  std::vector<SweepRow> rows(scenarios.size() * reps);
  parallel_for(rows.size(), jobs, [&](std::size_t task) {
    const std::size_t point = task / reps;
    const std::size_t rep = task % reps;
    Scenario s = scenarios[point];
    SweepRow& row = rows[task];
    row.point = point;
    row.seed_index = rep;
    row.value = spec.values[point];
    row.scattering_time = lattice_scattering_time(s);
    row.decay_time = predict_decay_time(s);
    row.snr_analytic = predict_snr(s);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.snr_measured = row.amplitude = row.noise_rms = row.fit_decay_time = nan;
    if (spec.seeds_per_point == 0) return;
    s.seed = row.seed = derive_seed(base_seed, point, rep);
    FitOptions options;
    options.omega_hint = larmor_angular_frequency(s);
    try {
      const auto m = measure(detector_output(s), options);
      row.snr_measured = m.snr;
      row.amplitude = m.fit.amplitude;
      row.noise_rms = m.noise_rms;
      row.fit_decay_time = m.fit.decay_time;
      row.converged = m.fit.converged;
    } catch (const DomainError&) {
      // leave the measured columns NaN
    }
  });
  return rows;
}

void write_sweep_csv(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows)
{
  out << "# schema=1\n";
  out << "# parameter = " << spec.parameter << '\n';
  out << "# seeds_per_point = " << spec.seeds_per_point << '\n';
  out << "point,seed_index,seed," << spec.parameter
      << ",tau_s_s,tau_eff_s,snr_analytic,snr_measured,amplitude_w,noise_rms_w,fit_tau_s,converged\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.point, r.seed_index, r.seed,
                       format_double(r.value), format_double(r.scattering_time),
                       format_double(r.decay_time), format_double(r.snr_analytic),
                       format_double(r.snr_measured), format_double(r.amplitude),
                       format_double(r.noise_rms), format_double(r.fit_decay_time),
                       r.converged ? 1 : 0);
  }
}

std::vector<PointSummary> summarize(const SweepSpec& spec, const std::vector<SweepRow>& rows)
{
  std::vector<PointSummary> out;
  for (std::size_t p = 0; p < spec.values.size(); ++p) {
    PointSummary s{spec.values[p], 0, 0, 0, 0, 0};
    double sum = 0, sum2 = 0;
    for (const auto& r : rows) {
      if (r.point != p) continue;
      s.scattering_time = r.scattering_time;
      s.snr_analytic = r.snr_analytic;
      if (std::isnan(r.snr_measured)) continue;
      sum += r.snr_measured;
      sum2 += r.snr_measured * r.snr_measured;
      ++s.samples;
    }
    const double n = double(s.samples);
    s.snr_mean = n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
    s.snr_stderr = n > 1 ? std::sqrt(std::max(0.0, (sum2 - n * s.snr_mean * s.snr_mean) / (n - 1)) / n)
                         : std::numeric_limits<double>::quiet_NaN();
    out.push_back(s);
  }
  return out;
}

} // namespace faraday
