#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace faraday {

/// Band edges of the detection bandpass. `order` is the total filter order
/// (number of poles); it must be even and is realised as order/2 biquads.
struct FilterSpec
{
  double low_cut = 2e3;   ///< Hz
  double high_cut = 22e3; ///< Hz
  int order = 4;

  std::vector<std::string> violations(double sample_rate) const;
};

/// One second-order section, normalised so a0 = 1.
struct Biquad
{
  double b0, b1, b2;
  double a1, a2;
};

/// Causal digital Butterworth bandpass, bilinear transform with pre-warped
/// band edges, unit gain at the (digital) centre frequency and zero initial
/// state.
class BandpassFilter
{
public:
  /// Throws DomainError when the band does not fit below Nyquist.
  BandpassFilter(const FilterSpec& spec, double sample_rate);

  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& input) const;

  std::complex<double> response(double frequency) const;
  double magnitude(double frequency) const { return std::abs(response(frequency)); }

  /// Digital frequency of unit gain, close to sqrt(low_cut * high_cut).
  double centre_frequency() const { return centre_; }

  /// One-sided equivalent noise bandwidth in Hz, relative to the unit
  /// centre gain: integral of |H|^2 over [0, fs/2].
  double equivalent_noise_bandwidth() const { return enbw_; }

  /// 1 / (smallest pole decay rate), s. Sets the duration of the start-up
  /// transient.
  double slowest_time_constant() const { return slowest_; }

  const std::vector<Biquad>& sections() const { return sections_; }
  const FilterSpec& spec() const { return spec_; }
  double sample_rate() const { return sample_rate_; }

private:
  FilterSpec spec_;
  double sample_rate_;
  std::vector<Biquad> sections_;
  double centre_ = 0;
  double enbw_ = 0;
  double slowest_ = 0;
};

/// Detector time constant equivalent to a noise bandwidth: tau_pd = 1 / 4B.
double effective_tau_pd(double bandwidth);

/// Inverse of effective_tau_pd.
double bandwidth_of(double tau_pd);

} // namespace faraday
