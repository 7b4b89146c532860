#include "faraday/reproduce.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>

#include "faraday/analysis.hpp"
#include "faraday/errors.hpp"
#include "faraday/sweep.hpp"
#include "faraday/trace_io.hpp"

namespace faraday {

namespace fs = std::filesystem;

Config load_preset(const fs::path& preset_dir, const std::string& name)
{
  auto config = Config::load(preset_dir / "defaults.toml");
  if (name != "defaults") config.merge(Config::load(preset_dir / (name + ".toml")));
  return config;
}

double FigureSummary::value(const std::string& key) const
{
  for (const auto& [k, v] : values)
    if (k == key) return v;
  throw std::out_of_range("no summary value " + key);
}

const std::vector<std::string>& reproducible_figures()
{
  static const std::vector<std::string> figures = {"fig2", "fig3", "fig4", "fig5"};
  return figures;
}

std::vector<std::string> derived_notes(const Scenario& s)
{
  const auto report = backaction_eta(s.transition, s.cloud, s.probe.efficiency,
                                     s.probe.detector_time_constant, lattice_scattering_time(s),
                                     s.transition.total_spin);
  const double snr_value = predict_snr(s);
  std::vector<std::string> notes = {
    fmt::format("signal_amplitude = {:.6g} W", predict_signed_amplitude(s)),
    fmt::format("shot_noise_rms = {:.6g} W", predict_noise_rms(s)),
    fmt::format("min_detectable_fz = {:.6g}", 1.0 / snr_value),
    fmt::format("snr = {:.6g}", snr_value),
    fmt::format("scattering_rate = {:.6g} 1/s", 1.0 / lattice_scattering_time(s)),
    fmt::format("scattering_time = {:.6g} s", lattice_scattering_time(s)),
    fmt::format("single_beam_scattering_time = {:.6g} s", single_beam_scattering_time(s)),
    fmt::format("decay_time = {:.6g} s", predict_decay_time(s)),
    fmt::format("debye_waller_beta = {:.6g}", lattice_of(s).beta()),
    fmt::format("optical_depth = {:.6g}", report.optical_depth),
    fmt::format("eta = {:.6g}", report.eta),
    fmt::format("optimal_aperture = {:.6g} m", optimal_aperture(s.cloud.radius)),
    fmt::format("aperture = {:.6g} m", s.probe.aperture_radius),
    fmt::format("tau_pd = {:.6g} s", s.probe.detector_time_constant),
    fmt::format("larmor_frequency = {:.6g} Hz", larmor_angular_frequency(s) / (2 * std::numbers::pi)),
  };
  return notes;
}

std::string manifest_text(const Config& config, const std::vector<std::string>& notes)
{
  std::string out = "# faraday run manifest (schema=1)\n";
  for (const auto& n : notes) out += "# derived: " + n + "\n";
  return out + "\n" + config.to_toml();
}

namespace {

struct Bundle
{
  fs::path dir;
  FigureSummary summary;

  std::ofstream open(const std::string& name)
  {
    const auto path = dir / name;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string(), 0);
    summary.files.push_back(path);
    return out;
  }

  void manifest(const std::string& name, const Config& config)
  {
    open(name + ".manifest.toml") << manifest_text(config, derived_notes(scenario_from_config(config)));
  }

  void finish(const std::string& readme)
  {
    auto out = open("summary.csv");
    out << "# schema=1\nquantity,value\n";
    for (const auto& [k, v] : summary.values) out << k << ',' << format_double(v) << '\n';
    open("README.txt") << readme;
  }
};

Config preset(const ReproduceOptions& o, const std::string& name)
{
  auto config = load_preset(o.preset_dir, name);
  config.set("run.seed", o.seed <= (1ULL << 53) ? ConfigValue(double(o.seed))
                                                 : ConfigValue(std::to_string(o.seed)));
  for (const auto& a : o.overrides) config.set_assignment(a);
  return config;
}

int preset_count(const Config& config, const char* key, const ReproduceOptions& o, int fallback)
{
  if (o.seeds) return *o.seeds;
  const auto* v = config.find(key);
  if (const auto* d = v ? std::get_if<double>(v) : nullptr) return static_cast<int>(*d);
  return fallback;
}

SignalTrace averaged_trace(Scenario s, int count, std::uint64_t base, std::size_t point, int jobs)
{
  std::vector<Eigen::VectorXd> runs(static_cast<std::size_t>(count));
  parallel_for(runs.size(), jobs, [&](std::size_t k) {
    Scenario local = s;
    local.seed = derive_seed(base, point, k);
    runs[k] = detector_output(local).samples;
  });
  s.seed = derive_seed(base, point, 0);
  SignalTrace avg = detector_output(s);
  avg.samples.setZero();
  for (const auto& r : runs) avg.samples += r;
  avg.samples /= double(count);
  return avg;
}

FigureSummary fig2(const ReproduceOptions& o, Bundle& b)
{
  auto below_cfg = preset(o, "fig2");
  auto above_cfg = below_cfg;
  above_cfg.set("probe.detuning_ghz", -below_cfg.number("probe.detuning_ghz"));
  const auto below = scenario_from_config(below_cfg);
  const auto above = scenario_from_config(above_cfg);
  const int averages = preset_count(below_cfg, "reproduce.averages", o, 256);

  auto single_below = below, single_above = above;
  single_below.seed = derive_seed(o.seed, 0, 0);
  single_above.seed = derive_seed(o.seed, 1, 0);
  const auto raw_below = detector_output(single_below);
  const auto raw_above = detector_output(single_above);
  const auto avg_below = averaged_trace(below, averages, o.seed, 0, o.jobs);
  const auto avg_above = averaged_trace(above, averages, o.seed, 1, o.jobs);

  {
    auto out = b.open("traces.csv");
    out << "# schema=1\n# averages = " << averages << '\n'
        << "time_s,single_below_w,single_above_w,average_below_w,average_above_w\n";
    for (Eigen::Index i = 0; i < raw_below.size(); ++i)
      out << fmt::format("{},{},{},{},{}\n", format_double(raw_below.time(i)),
                         format_double(raw_below.samples(i)), format_double(raw_above.samples(i)),
                         format_double(avg_below.samples(i)), format_double(avg_above.samples(i)));
  }

  FitOptions fo;
  fo.omega_hint = larmor_angular_frequency(below);
  const auto m_below = measure(avg_below, fo);
  const auto m_above = measure(avg_above, fo);
  const auto s_below = measure(raw_below, fo);
  {
    auto out = b.open("fits.csv");
    out << "# schema=1\ndetuning_ghz,predicted_amplitude_w,predicted_tau_s," << fit_csv_header << '\n';
    for (const auto& [s, m] : {std::pair{&below, &m_below}, std::pair{&above, &m_above}})
      out << format_double(s->probe.detuning / (2 * std::numbers::pi * 1e9)) << ','
          << format_double(predict_signed_amplitude(*s)) << ','
          << format_double(predict_decay_time(*s)) << ',' << fit_csv_row(m->fit) << '\n';
  }
  b.manifest("fig2_below", below_cfg);
  b.manifest("fig2_above", above_cfg);

  auto& v = b.summary.values;
  v = {{"amplitude_ratio_predicted", predict_signed_amplitude(below) / -predict_signed_amplitude(above)},
       {"amplitude_ratio_fitted", m_below.fit.amplitude / m_above.fit.amplitude},
       {"signed_amplitude_below_w", predict_signed_amplitude(below)},
       {"signed_amplitude_above_w", predict_signed_amplitude(above)},
       {"phase_difference_rad", std::remainder(m_above.fit.phase - m_below.fit.phase, 2 * std::numbers::pi)},
       {"scattering_time_below_s", lattice_scattering_time(below)},
       {"beta", lattice_of(below).beta()},
       {"snr_single_below_predicted", predict_snr(below)},
       {"snr_single_below_measured", s_below.snr},
       {"averages", double(averages)}};
  b.finish(fmt::format(
    "Simulated analogue of the +-50 GHz Larmor precession signals.\n\n"
    "traces.csv  one real-time trace and a {}-trace average for each detuning sign.\n"
    "fits.csv    damped-sinusoid fits of the averages with the predicted amplitude and decay.\n\n"
    "Expected shape: the below-resonance signal is larger by (1 + beta) / (1 - beta) = 4.71\n"
    "for beta = 0.65, and the two signals are in antiphase (phase_difference_rad near +-pi)\n"
    "because the Faraday rotation changes sign with the detuning.\n",
    averages));
  return b.summary;
}

FigureSummary sweep_figure(const ReproduceOptions& o, Bundle& b, bool scaling)
{
  const std::string name = scaling ? "fig3" : "fig4";
  auto config = preset(o, name);
  auto spec = sweep_from_config(config);
  if (o.seeds) spec.seeds_per_point = *o.seeds;
  const auto rows = run_sweep(config, spec, o.seed, o.jobs);
  {
    auto runs = b.open("runs.csv");
    write_sweep_csv(runs, spec, rows);
  }
  const auto points = summarize(spec, rows);

  std::vector<double> fit_tau(points.size(), 0.0);
  std::vector<std::size_t> fit_n(points.size(), 0);
  for (const auto& r : rows)
    if (!std::isnan(r.fit_decay_time)) fit_tau[r.point] += r.fit_decay_time, ++fit_n[r.point];

  auto out = b.open("points.csv");
  out << "# schema=1\n" << spec.parameter
      << ",tau_s_s,tau_eff_predicted_s,tau_fit_mean_s,snr_analytic,snr_mean,snr_stderr,samples\n";
  std::vector<ScalingPoint> scaling_points;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto& pt = points[p];
    const double tau_fit = fit_n[p] ? fit_tau[p] / double(fit_n[p]) : std::nan("");
    out << fmt::format("{},{},{},{},{},{},{},{}\n", format_double(pt.value),
                       format_double(pt.scattering_time), format_double(rows[p * std::max(1, spec.seeds_per_point)].decay_time),
                       format_double(tau_fit), format_double(pt.snr_analytic),
                       format_double(pt.snr_mean), format_double(pt.snr_stderr), pt.samples);
    if (pt.samples > 0) scaling_points.push_back({pt.scattering_time, pt.snr_mean, pt.value});
  }
  out.close();

  Config point0 = config;
  point0.set(spec.parameter, spec.values.front());
  b.manifest(name, point0);
  const auto s0 = scenario_from_config(point0);
  auto& v = b.summary.values;
  v.emplace_back("points", double(points.size()));
  v.emplace_back("seeds_per_point", double(spec.seeds_per_point));
  v.emplace_back("tau_s_min_s", points.front().scattering_time);
  v.emplace_back("tau_s_max_s", points.back().scattering_time);

  if (scaling) {
    if (scaling_points.size() < 3) throw DomainError("fig3 needs at least 3 measured points");
    const auto lat = lattice_of(s0);
    const double correction = lattice_snr_correction(lat.sign, lat.beta()) * s0.signal_factor;
    const ScalingModel model{s0.cloud.radius, s0.probe.efficiency, s0.probe.detector_time_constant,
                             s0.transition.wavelength, correction};
    const auto f = scaling_fit(scaling_points, model);
    v.emplace_back("slope", f.slope);
    v.emplace_back("intercept", f.intercept);
    v.emplace_back("inferred_atom_number", f.inferred_atom_number);
    v.emplace_back("true_atom_number", s0.cloud.atom_number);
    b.finish(
      "Simulated analogue of SNR versus photon scattering time (detuning sweep at fixed\n"
      "probe intensity).\n\n"
      "runs.csv    one row per (detuning, seed): analytic and measured SNR.\n"
      "points.csv  per-detuning means with standard errors.\n"
      "summary.csv log-log slope and the atom number inferred from the fit.\n\n"
      "Expected shape: SNR proportional to tau_s^-1/2 (slope -0.5) over about two decades\n"
      "of tau_s, and an inferred atom number matching the simulated one.\n");
  } else {
    double plateau = 0;
    for (std::size_t p = 0; p < points.size(); ++p)
      if (points[p].scattering_time == points.back().scattering_time && fit_n[p])
        plateau = fit_tau[p] / double(fit_n[p]);
    v.emplace_back("plateau_fit_s", plateau);
    v.emplace_back("background_decay_s", s0.background_decay);
    b.finish(
      "Simulated analogue of damping time versus photon scattering time.\n\n"
      "points.csv  tau_fit_mean_s (fitted damping time) against tau_s_s.\n\n"
      "Expected shape: tau close to tau_s for short scattering times, levelling off to a\n"
      "plateau at the background dephasing time (trace.background_decay_ms) for long ones.\n");
  }
  return b.summary;
}

FigureSummary fig5(const ReproduceOptions& o, Bundle& b)
{
  auto& v = b.summary.values;
  auto out = b.open("predictions.csv");
  out << "# schema=1\npreset,detuning_ghz,atom_number,tau_s_s,snr_analytic,snr_measured_mean,"
         "snr_reference,optical_depth,eta,eta_reference\n";
  for (const std::string name : {"fig5a", "fig5b"}) {
    const auto config = preset(o, name);
    const auto s = scenario_from_config(config);
    const int seeds = preset_count(config, "reproduce.seeds", o, 20);
    double measured = 0;
    std::size_t ok = 0;
    FitOptions fo;
    fo.omega_hint = larmor_angular_frequency(s);
    std::vector<double> snrs(std::size_t(std::max(seeds, 0)), std::nan(""));
    parallel_for(snrs.size(), o.jobs, [&](std::size_t k) {
      Scenario local = s;
      local.seed = derive_seed(o.seed, name == "fig5a" ? 0 : 1, k);
      try {
        snrs[k] = measure(detector_output(local), fo).snr;
      } catch (const DomainError&) {
      }
    });
    for (double x : snrs)
      if (!std::isnan(x)) measured += x, ++ok;
    measured = ok ? measured / double(ok) : std::nan("");
    const auto report = backaction_eta(s.transition, s.cloud, s.probe.efficiency,
                                       s.probe.detector_time_constant, lattice_scattering_time(s),
                                       s.transition.total_spin);
    auto ref = [&](const char* key) {
      const auto* r = config.find(key);
      const auto* d = r ? std::get_if<double>(r) : nullptr;
      return d ? *d : std::nan("");
    };
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", name,
                       format_double(s.probe.detuning / (2 * std::numbers::pi * 1e9)),
                       format_double(s.cloud.atom_number), format_double(lattice_scattering_time(s)),
                       format_double(predict_snr(s)), format_double(measured),
                       format_double(ref("reference.snr")), format_double(report.optical_depth),
                       format_double(report.eta), format_double(ref("reference.eta")));
    const std::string tag = name.substr(3);
    v.emplace_back(tag + "_snr_analytic", predict_snr(s));
    v.emplace_back(tag + "_snr_measured", measured);
    v.emplace_back(tag + "_snr_reference", ref("reference.snr"));
    v.emplace_back(tag + "_eta", report.eta);
    v.emplace_back(tag + "_optical_depth", report.optical_depth);
    b.manifest(name, config);
  }
  out.close();
  b.finish(
    "Simulated analogue of the large-sample (~1e8 atoms) measurements at -23 GHz and -60 GHz\n"
    "with a ~2 kHz detection bandwidth (tau_pd ~ 125 us).\n\n"
    "predictions.csv  analytic SNR, mean measured SNR of synthesized traces, optical depth and\n"
    "                 backaction figure of merit eta, next to the published reference values.\n\n"
    "Expected: SNR of a few hundred, within a factor of two of the quoted 470 and 250.\n"
    "The model eta (~0.055 at -23 GHz) is within a factor of two of the quoted 0.035, i.e.\n"
    "some 20 to 30 times short of the eta > 1 needed for measurement-induced squeezing.\n"
    "The fit models the narrow detection filter, so the measured SNR follows the analytic one\n"
    "to a few percent.\n");
  return b.summary;
}

} // namespace

FigureSummary reproduce_figure(const std::string& figure, const ReproduceOptions& options)
{
  const auto& figures = reproducible_figures();
  if (std::find(figures.begin(), figures.end(), figure) == figures.end())
    throw ConfigError(fmt::format("unknown figure '{}' (expected fig2, fig3, fig4 or fig5)", figure));
  Bundle b{options.out_dir / figure, {figure, {}, {}}};
  fs::create_directories(b.dir);
  if (figure == "fig2") return fig2(options, b);
  if (figure == "fig3") return sweep_figure(options, b, true);
  if (figure == "fig4") return sweep_figure(options, b, false);
  return fig5(options, b);
}

} // namespace faraday
