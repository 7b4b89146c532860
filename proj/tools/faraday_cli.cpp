// faraday: predict | sweep | synth | analyze | reproduce
//
// Exit codes: 0 ok, 2 configuration error, 3 data error.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "faraday/analysis.hpp"
#include "faraday/config.hpp"
#include "faraday/errors.hpp"
#include "faraday/reproduce.hpp"
#include "faraday/sweep.hpp"
#include "faraday/trace_io.hpp"

namespace fs = std::filesystem;
using namespace faraday;

namespace {

constexpr int exit_config = 2;
constexpr int exit_data = 3;

struct Common
{
  std::string config_path;
  std::string preset;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::vector<std::string> overrides;
  std::string preset_dir;
};

void add_common(CLI::App* cmd, Common& c, bool with_preset = true)
{
  cmd->add_option("--config", c.config_path, "Scenario config (TOML subset), layered over the defaults");
  if (with_preset) cmd->add_option("--preset", c.preset, "Preset name from the preset directory, e.g. fig5a");
  cmd->add_option("--out", c.out, "Output path");
  cmd->add_option("--seed", c.seed, "Base seed (default: FARADAY_SEED, then run.seed)");
  cmd->add_option("--jobs", c.jobs, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  cmd->add_option("--set", c.overrides, "Override a config key: section.key=value");
  cmd->add_option("--presets", c.preset_dir, "Preset directory");
}

fs::path preset_dir(const Common& c)
{
  if (!c.preset_dir.empty()) return c.preset_dir;
  if (const char* env = std::getenv("FARADAY_PRESETS")) return env;
  return FARADAY_PRESET_DIR;
}

std::optional<std::uint64_t> resolve_seed(const Common& c)
{
  if (c.seed) return c.seed;
  if (const char* env = std::getenv("FARADAY_SEED"); env && *env) {
    std::uint64_t v = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw ConfigError(fmt::format("FARADAY_SEED='{}' is not an unsigned 64-bit integer", s));
    return v;
  }
  return std::nullopt;
}

ConfigValue seed_value(std::uint64_t seed)
{
  if (seed <= (1ULL << 53)) return double(seed);
  return std::to_string(seed);
}

std::uint64_t config_seed(const Config& config)
{
  const auto* v = config.find("run.seed");
  if (const auto* d = v ? std::get_if<double>(v) : nullptr) return static_cast<std::uint64_t>(*d);
  if (const auto* s = v ? std::get_if<std::string>(v) : nullptr) return std::stoull(*s);
  return 0;
}

/// defaults -> preset -> --config -> --set -> seed.
Config resolve_config(const Common& c)
{
  Config config = load_preset(preset_dir(c), c.preset.empty() ? "defaults" : c.preset);
  if (!c.config_path.empty()) config.merge(Config::load(c.config_path));
  for (const auto& a : c.overrides) config.set_assignment(a);
  if (const auto seed = resolve_seed(c)) config.set("run.seed", seed_value(*seed));
  return config;
}

/// Writes `body` to --out (plus <out>.manifest.toml) or to stdout with the
/// manifest appended as comments.
void emit(const Common& c, const std::string& body, const std::string& manifest)
{
  if (c.out.empty()) {
    std::cout << body << '\n';
    std::istringstream lines(manifest);
    for (std::string line; std::getline(lines, line);)
      std::cout << (line.starts_with("#") ? "" : "# ") << line << '\n';
    return;
  }
  std::ofstream(c.out) << body;
  std::ofstream(c.out + ".manifest.toml") << manifest;
}

std::string line(std::string_view name, std::string_view symbol, double value, std::string_view unit)
{
  return fmt::format("{:<28} {:<8} = {:<14.6g} {}\n", name, symbol, value, unit);
}

int cmd_predict(const Common& c)
{
  const auto config = resolve_config(c);
  const auto s = scenario_from_config(config);
  for (const auto& d : config_diagnostics(config)) std::cerr << "warning: " << d << '\n';

  const double tau_s = lattice_scattering_time(s);
  const auto report = backaction_eta(s.transition, s.cloud, s.probe.efficiency,
                                     s.probe.detector_time_constant, tau_s, s.transition.total_spin);
  const double snr_value = predict_snr(s);
  std::string out;
  out += line("signal amplitude", "dP_S", predict_signed_amplitude(s), "W");
  out += line("shot noise rms", "dP_N", predict_noise_rms(s), "W");
  out += line("min detectable spin", "dFz/F", 1.0 / snr_value, "");
  out += line("signal-to-noise ratio", "SNR", snr_value, "");
  out += line("SNR, optimal aperture", "SNR*", predict_snr_optimal(s), "");
  out += line("scattering rate (lattice)", "gamma_s", 1.0 / tau_s, "1/s");
  out += line("scattering time (lattice)", "tau_s", tau_s, "s");
  out += line("scattering time (1 beam)", "tau_s1", single_beam_scattering_time(s), "s");
  out += line("precession decay time", "tau", predict_decay_time(s), "s");
  out += line("Debye-Waller factor", "beta", lattice_of(s).beta(), "");
  out += line("resonant optical depth", "O", report.optical_depth, "");
  out += line("projection noise", "dFz~/F", report.projection_noise, "");
  out += line("backaction figure of merit", "eta", report.eta, "");
  out += line("optimal aperture", "a*", optimal_aperture(s.cloud.radius), "m");
  out += line("aperture", "a", s.probe.aperture_radius, "m");
  out += line("detector time constant", "tau_pd", s.probe.detector_time_constant, "s");
  out += line("Larmor frequency", "nu_L", larmor_angular_frequency(s) / (2 * std::numbers::pi), "Hz");

  for (const auto& [key, value] : config.entries()) {
    if (!key.starts_with("reference.")) continue;
    const auto name = key.substr(10);
    std::string extra;
    if (const auto* d = std::get_if<double>(&value)) {
      if (name == "eta") extra = fmt::format("  (model / reference = {:.3g})", report.eta / *d);
      if (name == "snr") extra = fmt::format("  (model / reference = {:.3g})", snr_value / *d);
    }
    out += fmt::format("reference {:<18} = {}{}\n", name, to_string(value), extra);
  }
  emit(c, out, manifest_text(config, derived_notes(s)));
  return 0;
}

int cmd_sweep(const Common& c)
{
  auto config = resolve_config(c);
  const auto spec = sweep_from_config(config);
  const auto rows = run_sweep(config, spec, config_seed(config), c.jobs);
  const std::string out = c.out.empty() ? "sweep.csv" : c.out;
  std::ofstream csv(out);
  if (!csv) throw DataError("cannot write " + out, 0);
  write_sweep_csv(csv, spec, rows);
  Config point0 = config;
  point0.set(spec.parameter, spec.values.front());
  std::ofstream(out + ".manifest.toml")
    << manifest_text(config, derived_notes(scenario_from_config(point0)));

  std::cout << fmt::format("{:>14} {:>12} {:>12} {:>12} {:>10}\n", spec.parameter, "tau_s [s]",
                           "snr_analytic", "snr_mean", "stderr");
  for (const auto& p : summarize(spec, rows))
    std::cout << fmt::format("{:>14.6g} {:>12.4g} {:>12.4g} {:>12.4g} {:>10.3g}\n", p.value,
                             p.scattering_time, p.snr_analytic, p.snr_mean, p.snr_stderr);
  std::cout << "wrote " << out << '\n';
  return 0;
}

int cmd_synth(const Common& c, bool raw)
{
  const auto config = resolve_config(c);
  const auto s = scenario_from_config(config);
  const auto trace = raw ? synthesize_trace(s) : detector_output(s);
  const std::string out = c.out.empty() ? "trace.csv" : c.out;
  std::ofstream csv(out);
  if (!csv) throw DataError("cannot write " + out, 0);
  Metadata meta;
  for (const auto& [k, v] : config.entries())
    if (!k.starts_with("reference.")) meta.emplace_back("config." + k, to_string(v));
  write_trace_csv(csv, trace, meta);
  std::ofstream(out + ".manifest.toml") << manifest_text(config, derived_notes(s));
  std::cout << fmt::format("wrote {} ({} samples, predicted amplitude {:.6g} W, SNR {:.4g})\n",
                           out, trace.size(), predict_signed_amplitude(s), predict_snr(s));
  return 0;
}

struct AnalyzeOptions
{
  std::vector<std::string> files;
  std::optional<double> fit_start_ms;
  std::optional<double> larmor_hz;
  bool fix_larmor = false;
};

int cmd_analyze(const Common& c, const AnalyzeOptions& a)
{
  std::string body = fmt::format("# schema=1\n{},snr,noise_rms_w,file\n", fit_csv_header);
  Config manifest;
  for (const auto& file : a.files) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file, 0);
    TraceFile tf;
    try {
      tf = read_trace_csv(in);
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}: {}", file, e.what()), 0);
    }
    const auto& trace = tf.trace;
    FitOptions fo;
    if (a.larmor_hz) fo.omega_hint = 2 * std::numbers::pi * *a.larmor_hz;
    if (a.fix_larmor) fo.fixed_omega = fo.omega_hint;
    auto window = default_fit_window(trace);
    if (a.fit_start_ms) window.start = *a.fit_start_ms * 1e-3;
    const auto fit = fit_damped_sinusoid(trace, window, fo);
    const double noise = rms_noise(trace, default_noise_window(trace));
    body += fmt::format("{},{},{},{}\n", fit_csv_row(fit), format_double(fit.amplitude / noise),
                        format_double(noise), file);
    std::cerr << fmt::format("{}: A = {:.6g} W, tau = {:.6g} s, nu_L = {:.6g} Hz, phi = {:.4f}, "
                             "SNR = {:.4g}{}\n",
                             file, fit.amplitude, fit.decay_time,
                             fit.angular_frequency / (2 * std::numbers::pi), fit.phase,
                             fit.amplitude / noise, fit.converged ? "" : " (not converged)");
    manifest.set("analysis.fit_start_ms", window.start * 1e3);
  }
  if (a.larmor_hz) manifest.set("analysis.larmor_hint_hz", *a.larmor_hz);
  if (a.fix_larmor) manifest.set("analysis.fixed_larmor", true);
  std::string text = "# faraday analyze manifest (schema=1)\n";
  for (const auto& f : a.files) text += "# input: " + f + "\n";
  emit(c, body, text + "\n" + manifest.to_toml());
  return 0;
}

int cmd_reproduce(const Common& c, const std::string& figure, std::optional<int> seeds)
{
  ReproduceOptions o;
  o.preset_dir = preset_dir(c);
  o.out_dir = c.out.empty() ? "reproduce" : c.out;
  o.seed = resolve_seed(c).value_or(config_seed(load_preset(o.preset_dir, "defaults")));
  o.jobs = c.jobs;
  o.seeds = seeds;
  o.overrides = c.overrides;
  std::vector<std::string> figures;
  if (figure == "all")
    figures = reproducible_figures();
  else
    figures = {figure};
  for (const auto& f : figures) {
    const auto summary = reproduce_figure(f, o);
    std::cout << "[" << f << "] " << (o.out_dir / f).string() << '\n';
    for (const auto& [k, v] : summary.values) std::cout << fmt::format("  {:<30} {:.6g}\n", k, v);
  }
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Faraday spectroscopy of Larmor-precessing atoms: prediction, synthesis, analysis"};
  app.require_subcommand(1);

  Common common;
  auto* predict = app.add_subcommand("predict", "Analytic signal, noise, SNR and backaction figures");
  add_common(predict, common);
  auto* sweep = app.add_subcommand("sweep", "Vary one scenario key; Monte Carlo SNR per point");
  add_common(sweep, common);
  auto* synth = app.add_subcommand("synth", "Write a synthetic detector trace CSV");
  add_common(synth, common);
  bool raw = false;
  synth->add_flag("--raw", raw, "Skip the detection bandpass");
  auto* analyze = app.add_subcommand("analyze", "Fit damped sinusoids to trace CSV files");
  add_common(analyze, common, false);
  AnalyzeOptions aopts;
  analyze->add_option("files", aopts.files, "Trace CSV files")->required();
  analyze->add_option("--fit-start-ms", aopts.fit_start_ms, "Fit window start after the trigger");
  auto* larmor = analyze->add_option("--larmor-hz", aopts.larmor_hz, "Search the spectrum within 20% of this");
  analyze->add_flag("--fix-larmor", aopts.fix_larmor, "Hold the frequency at --larmor-hz")->needs(larmor);
  auto* reproduce = app.add_subcommand("reproduce", "Simulated data bundles for the published figures");
  add_common(reproduce, common, false);
  std::string figure;
  std::optional<int> seeds;
  reproduce->add_option("figure", figure, "fig2 | fig3 | fig4 | fig5 | all")->required();
  reproduce->add_option("--seeds", seeds, "Seeds (or averages) per point, overriding the presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  const bool analyzing = analyze->parsed();
  try {
    if (predict->parsed()) return cmd_predict(common);
    if (sweep->parsed()) return cmd_sweep(common);
    if (synth->parsed()) return cmd_synth(common, raw);
    if (analyzing) return cmd_analyze(common, aopts);
    return cmd_reproduce(common, figure, seeds);
  } catch (const ValidationError& e) {
    std::cerr << "invalid scenario:\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v << '\n';
    return exit_config;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return exit_data;
  } catch (const DomainError& e) {
    std::cerr << (analyzing ? "data error: " : "config error: ") << e.what() << '\n';
    return analyzing ? exit_data : exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
