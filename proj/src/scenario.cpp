#include "faraday/scenario.hpp"

#include <cmath>

#include <fmt/format.h>

namespace faraday {

std::vector<std::string> Scenario::violations() const
{
  std::vector<std::string> v = transition.violations();
  for (auto&& x : cloud.violations()) v.push_back(std::move(x));
  for (auto&& x : probe.violations()) v.push_back(std::move(x));
  if (!(wavepacket_width >= 0)) v.emplace_back("lattice.wavepacket_width must be >= 0");
  if (!(bias_field >= 0)) v.emplace_back("field.bias must be >= 0");
  if (!std::isfinite(initial_phase)) v.emplace_back("trace.initial_phase must be finite");
  if (!(pre_trigger >= 0)) v.emplace_back("trace.pre_trigger must be >= 0");
  if (!(duration > 0)) v.emplace_back("trace.duration must be > 0");
  if (!(sample_rate > 0)) {
    v.emplace_back("trace.sample_rate must be > 0");
  } else {
    const double larmor_hz = transition.lande_gf * bias_field *
                             PhysicalConstantsd{}.bohr_magneton / PhysicalConstantsd{}.hbar /
                             (2 * pi<double>);
    if (sample_rate < 10 * std::abs(larmor_hz))
      v.push_back(fmt::format("trace.sample_rate {} Hz is below 10x the Larmor frequency {} Hz",
                              sample_rate, larmor_hz));
    for (auto&& x : filter.violations(sample_rate)) v.push_back(std::move(x));
  }
  if (!(background_decay > 0)) v.emplace_back("trace.background_decay must be > 0 or inf");
  if (!(rin >= 0 && rin <= 0.02)) v.emplace_back("trace.rin must be in [0, 0.02]");
  if (!(signal_factor > 0 && signal_factor <= 1))
    v.emplace_back("detector.signal_factor must be in (0, 1]");
  return v;
}

void Scenario::validate() const
{
  if (auto v = violations(); !v.empty()) throw ValidationError(std::move(v));
}

double detector_tau_from_filter(const FilterSpec& filter, double sample_rate)
{
  return effective_tau_pd(BandpassFilter(filter, sample_rate).equivalent_noise_bandwidth());
}

LatticeSpecd lattice_of(const Scenario& s)
{
  return {detuning_sign(s.probe.detuning), s.wavepacket_width, s.transition.wavelength};
}

double larmor_angular_frequency(const Scenario& s)
{
  return larmor_frequency(s.bias_field, s.transition.lande_gf);
}

double predict_signed_amplitude(const Scenario& s)
{
  const double bare = differential_power(s.transition, s.cloud, s.probe, SpinStated{1});
  return bare * lattice_of(s).signal_factor() * s.signal_factor;
}

double predict_amplitude(const Scenario& s) { return std::abs(predict_signed_amplitude(s)); }

double predict_noise_rms(const Scenario& s)
{
  return shot_noise_rms(s.probe, s.transition.photon_energy());
}

double predict_snr(const Scenario& s) { return predict_amplitude(s) / predict_noise_rms(s); }

double predict_snr_optimal(const Scenario& s)
{
  const auto lat = lattice_of(s);
  const double tau = lattice_scattering_time(s);
  const double correction = lattice_snr_correction(lat.sign, lat.beta()) * s.signal_factor;
  if (correction == 0) return 0;
  return correction * snr(s.transition, s.cloud, s.probe.efficiency,
                          s.probe.detector_time_constant, tau);
}

double single_beam_scattering_time(const Scenario& s)
{
  return scattering_time(s.transition, s.probe.intensity, s.probe.detuning);
}

double lattice_scattering_time(const Scenario& s)
{
  const double rate = scattering_rate(s.transition, s.probe.intensity, s.probe.detuning) *
                      lattice_of(s).scattering_factor();
  return rate > 0 ? 1 / rate : std::numeric_limits<double>::infinity();
}

double predict_decay_time(const Scenario& s)
{
  return effective_decay_time(lattice_scattering_time(s), s.background_decay);
}

double raw_noise_sigma(const Scenario& s)
{
  ProbeSpecd raw = s.probe;
  raw.detector_time_constant = effective_tau_pd(s.sample_rate / 2);
  return shot_noise_rms(raw, s.transition.photon_energy());
}

std::vector<std::string> diagnostics(const Scenario& s)
{
  auto out = validity_diagnostics(s.transition, s.probe);
  if (s.filter.high_cut > 0 && s.sample_rate > 0 && s.filter.high_cut < s.sample_rate / 2) {
    const double larmor_hz = larmor_angular_frequency(s) / (2 * pi<double>);
    if (larmor_hz < s.filter.low_cut || larmor_hz > s.filter.high_cut)
      out.push_back(fmt::format("Larmor frequency {:.4g} Hz lies outside the detection band "
                                "[{:.4g}, {:.4g}] Hz",
                                larmor_hz, s.filter.low_cut, s.filter.high_cut));
  }
  return out;
}

} // namespace faraday
