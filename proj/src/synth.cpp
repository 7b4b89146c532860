#include "faraday/synth.hpp"

#include <cmath>
#include <random>

namespace faraday {

Eigen::VectorXd SignalTrace::times() const
{
  Eigen::VectorXd t(samples.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = time(i);
  return t;
}

namespace {

struct Grid
{
  Eigen::Index pre;
  Eigen::Index total;
};

Grid grid_of(const Scenario& s)
{
  const auto pre = static_cast<Eigen::Index>(std::llround(s.pre_trigger * s.sample_rate));
  const auto post = static_cast<Eigen::Index>(std::llround(s.duration * s.sample_rate));
  return {pre, pre + post};
}

} // namespace

Eigen::VectorXd precession_signal(const Scenario& s)
{
  const auto [pre, total] = grid_of(s);
  const double amplitude = predict_signed_amplitude(s);
  const double omega = larmor_angular_frequency(s);
  const double tau = predict_decay_time(s);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(total);
  for (Eigen::Index i = pre; i < total; ++i) {
    const double t = double(i - pre) / s.sample_rate;
    out(i) = amplitude * std::exp(-t / tau) * std::sin(omega * t + s.initial_phase);
  }
  return out;
}

SignalTrace synthesize_trace(const Scenario& s)
{
  s.validate();
  SignalTrace trace;
  trace.samples = precession_signal(s);
  trace.sample_rate = s.sample_rate;
  trace.trigger_index = grid_of(s).pre;
  trace.scenario = s;

  if (s.noise) {
    std::mt19937_64 rng(s.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sigma = raw_noise_sigma(s);
    for (Eigen::Index i = 0; i < trace.samples.size(); ++i) {
      const double shot = sigma * normal(rng);
      if (s.rin > 0) trace.samples(i) *= 1 + s.rin * normal(rng);
      trace.samples(i) += shot;
    }
  }
  return trace;
}

SignalTrace bandpass_filter(const SignalTrace& trace, const FilterSpec& spec)
{
  const BandpassFilter filter(spec, trace.sample_rate);
  SignalTrace out = trace;
  out.samples = filter.apply(trace.samples);
  out.filter = spec;
  return out;
}

SignalTrace detector_output(const Scenario& s)
{
  return bandpass_filter(synthesize_trace(s), s.filter);
}

} // namespace faraday
