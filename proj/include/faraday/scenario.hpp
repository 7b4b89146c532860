#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "faraday/core.hpp"
#include "faraday/filter.hpp"
#include "faraday/lattice.hpp"

namespace faraday {

/// Everything needed to predict, synthesise and analyse one Larmor
/// precession measurement. All fields SI.
///
/// probe.detector_time_constant is normally derived from the filter with
/// detector_tau_from_filter(); the config loader does that unless an explicit
/// override is given.
struct Scenario
{
  TransitionSpecd transition{};
  CloudSpecd cloud{};
  ProbeSpecd probe{};
  double wavepacket_width = 0;   ///< dz, m
  double bias_field = 0;         ///< T
  double initial_phase = 0;      ///< rad
  double pre_trigger = 0;        ///< s
  double duration = 0;           ///< s
  double sample_rate = 0;        ///< Hz
  double background_decay = std::numeric_limits<double>::infinity(); ///< s
  double rin = 0;                ///< fractional, multiplicative on the signal
  double signal_factor = 1;      ///< extra signal loss (birefringence, spin tilt)
  bool noise = true;             ///< false: noiseless synthesis
  FilterSpec filter{};
  std::uint64_t seed = 0;

  std::vector<std::string> violations() const;
  /// Throws ValidationError listing every violated invariant.
  void validate() const;
};

/// tau_pd = 1 / (4 ENBW) of the detection filter at the given sample rate.
double detector_tau_from_filter(const FilterSpec& filter, double sample_rate);

LatticeSpecd lattice_of(const Scenario& s);

/// Larmor angular frequency from bias field and g_F, rad/s.
double larmor_angular_frequency(const Scenario& s);

/// Signed precession amplitude at t = 0 (fz = 1), W. Odd in the detuning.
double predict_signed_amplitude(const Scenario& s);

/// |signal| at t = 0 including the Bragg factor and signal_factor, W.
double predict_amplitude(const Scenario& s);

/// Shot-noise RMS of the detected power difference at the scenario tau_pd, W.
double predict_noise_rms(const Scenario& s);

/// predict_amplitude / predict_noise_rms at the scenario's aperture.
double predict_snr(const Scenario& s);

/// Optimal-aperture SNR through the lattice scattering time, with the lattice
/// and signal_factor corrections applied. Equals predict_snr when the
/// aperture is optimal.
double predict_snr_optimal(const Scenario& s);

/// Single-beam scattering time, s.
double single_beam_scattering_time(const Scenario& s);

/// Scattering time in the lattice: single-beam rate times 2 (1 +- beta), s.
/// Infinite when atoms sit exactly at the nodes.
double lattice_scattering_time(const Scenario& s);

/// Precession decay time from lattice scattering and background dephasing, s.
double predict_decay_time(const Scenario& s);

/// White-noise standard deviation per raw sample, W. Equal to the shot noise
/// with tau_pd = effective_tau_pd(fs/2).
double raw_noise_sigma(const Scenario& s);

/// Regime diagnostics (never errors).
std::vector<std::string> diagnostics(const Scenario& s);

} // namespace faraday
