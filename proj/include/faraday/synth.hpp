#pragma once

#include <optional>

#include <Eigen/Core>

#include "faraday/filter.hpp"
#include "faraday/scenario.hpp"

namespace faraday {

/// Uniformly sampled power difference P_x - P_y, W. Sample `trigger_index`
/// is t = 0, the start of Larmor precession.
struct SignalTrace
{
  Eigen::VectorXd samples;
  double sample_rate = 0;
  Eigen::Index trigger_index = 0;
  std::optional<Scenario> scenario;  ///< generating scenario, when known
  std::optional<FilterSpec> filter;  ///< detection filter already applied, if any

  Eigen::Index size() const { return samples.size(); }
  double time(Eigen::Index i) const { return double(i - trigger_index) / sample_rate; }
  Eigen::VectorXd times() const;
};

/// Noiseless precession A exp(-t/tau) sin(omega_L t + phi0) for t >= 0 and
/// zero before the trigger, on the scenario's sample grid.
Eigen::VectorXd precession_signal(const Scenario& s);

/// Raw detector trace: precession_signal (optionally with multiplicative RIN)
/// plus white Gaussian shot noise of raw_noise_sigma per sample. The PRNG is
/// std::mt19937_64 seeded with scenario.seed, so output is deterministic.
/// Throws ValidationError for an invalid scenario.
SignalTrace synthesize_trace(const Scenario& s);

/// Causal Butterworth bandpass of the trace (the detector chain).
SignalTrace bandpass_filter(const SignalTrace& trace, const FilterSpec& spec);

/// synthesize_trace followed by the scenario's filter.
SignalTrace detector_output(const Scenario& s);

} // namespace faraday
