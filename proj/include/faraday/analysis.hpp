#pragma once

#include <optional>
#include <span>

#include "faraday/synth.hpp"

namespace faraday {

/// Time window in seconds relative to the trigger. Samples with
/// start <= t < stop are used.
struct TimeWindow
{
  double start;
  double stop;
};

/// s(t) = A exp(-t/tau) sin(omega t + phi), t from the trigger.
struct FitResult
{
  double amplitude = 0;         ///< A >= 0, W
  double decay_time = 0;        ///< tau, s
  double angular_frequency = 0; ///< rad/s
  double phase = 0;             ///< [0, 2 pi)
  double residual_rms = 0;      ///< W
  bool converged = false;
  int iterations = 0;
  /// 1-sigma uncertainty of A from the local curvature, scaled by the
  /// residual spectrum near omega so coloured (filtered) noise is honoured.
  double amplitude_stderr = 0;

  double operator()(double t) const;
};

struct FitOptions
{
  int max_iterations = 200;
  /// Relative parameter change above which the fit is reported unconverged.
  double tolerance = 1e-8;
  /// Restrict the spectral search for the initial frequency to +-20% of this.
  std::optional<double> omega_hint;
  /// Hold the angular frequency at this value (known field). Only A, tau
  /// and phi are fitted; amplitude_stderr is then free of the frequency search.
  std::optional<double> fixed_omega;
  /// When the trace records its detection filter, fit the filtered model
  /// from the trigger on, so the start-up transient and the filter's gain
  /// and phase at the precession frequency are modelled instead of skipped.
  /// The fitted parameters then describe the signal before the filter.
  bool through_filter = true;
};

/// Start-up transient to skip after the trigger (and at the start of the
/// record): 5 slowest-pole time constants of the filter, 0 for raw traces.
double transient_skip(const SignalTrace& trace);

/// Pre-trigger window after the record-start transient.
TimeWindow default_noise_window(const SignalTrace& trace);

/// From the trigger to the end of the record; starts transient_skip later
/// for a filtered trace fitted without the filter model.
TimeWindow default_fit_window(const SignalTrace& trace, const FitOptions& options = {});

/// Standard deviation (1/n) of the samples in a window before the trigger.
/// Throws DomainError if the window reaches the trigger or holds < 50 samples.
double rms_noise(const SignalTrace& trace, TimeWindow window);

/// Levenberg-Marquardt fit of a damped sinusoid.
///
/// Initial (omega, tau) from a matched-filter search: zero-padded spectra of
/// the data weighted by exp(-t/tau) over a log grid of tau, peak refined by
/// parabolic interpolation. A and phi by linear projection. Steps are accepted only if the cost drops;
/// damping /10 on accept, x10 on reject.
FitResult fit_damped_sinusoid(const SignalTrace& trace, TimeWindow window,
                              const FitOptions& options = {});

struct SnrMeasurement
{
  double snr;
  double noise_rms;
  FitResult fit;
};

/// Fitted amplitude over pre-trigger RMS noise, default windows.
SnrMeasurement measure(const SignalTrace& trace, const FitOptions& options = {});

double measure_snr(const SignalTrace& trace);

struct ScalingPoint
{
  double scattering_time; ///< tau_s, s
  double measured_snr;
  double detuning = 0;    ///< rad/s, label only
};

/// What is needed to turn an SNR into an atom number.
struct ScalingModel
{
  double cloud_radius;
  double efficiency;
  double tau_pd;
  double wavelength;
  double correction = 1; ///< Bragg x birefringence x spin-alignment factors
};

struct ScalingFit
{
  double slope;     ///< d ln SNR / d ln tau_s
  double intercept; ///< ln SNR at tau_s = 1 s
  double inferred_atom_number;
};

/// Least-squares line through (ln tau_s, ln SNR); the atom number inverts the
/// optimal-aperture SNR formula at the centroid of the data.
ScalingFit scaling_fit(std::span<const ScalingPoint> points, const ScalingModel& model);

/// N such that the optimal-aperture SNR (times `correction`) equals
/// `measured_snr`.
double infer_atom_number(double measured_snr, double tau_s, double tau_pd, double efficiency,
                         double cloud_radius, double wavelength, double correction = 1);

} // namespace faraday
