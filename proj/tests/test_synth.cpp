#include <doctest.h>

#include "faraday/analysis.hpp"
#include "faraday/synth.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

using namespace faraday;
using test::rel;

TEST_CASE("scenario predictions")
{
  auto s = test::scenario("fig2");
  // tau_pd comes from the 2-22 kHz filter
  CHECK(s.probe.detector_time_constant ==
        doctest::Approx(effective_tau_pd(BandpassFilter(s.filter, s.sample_rate).equivalent_noise_bandwidth())));
  CHECK(lattice_scattering_time(s) == doctest::Approx(6.2e-3).epsilon(1e-6));
  CHECK(predict_decay_time(s) == doctest::Approx(1 / (1 / 6.2e-3 + 1 / 5e-3)));
  CHECK(larmor_angular_frequency(s) / (2 * std::numbers::pi) == doctest::Approx(oracle::larmor_30mg));

  // optimal aperture: the two SNR routes agree
  CHECK(rel(predict_snr(s), predict_snr_optimal(s)) < 1e-12);

  // amplitude with beta = 0 and signal_factor = 1 is the bare signal
  auto bare = s;
  bare.wavepacket_width = 1e-5;
  bare.signal_factor = 1;
  CHECK(rel(predict_amplitude(bare),
            std::abs(differential_power(s.transition, s.cloud, s.probe, SpinStated{1}))) < 1e-12);

  // sign flips with the detuning; magnitude ratio (1 + beta) / (1 - beta)
  auto above = s;
  above.probe.detuning = -s.probe.detuning;
  CHECK(predict_signed_amplitude(s) * predict_signed_amplitude(above) < 0);
  CHECK(rel(predict_amplitude(s) / predict_amplitude(above),
            (1 + lattice_of(s).beta()) / (1 - lattice_of(s).beta())) < 1e-12);

  // atoms exactly at the nodes never scatter
  auto nodes = above;
  nodes.wavepacket_width = 0;
  CHECK(std::isinf(lattice_scattering_time(nodes)));
}

TEST_CASE("scenario validation lists every violation")
{
  auto s = test::scenario("defaults");
  s.cloud.atom_number = 0;
  s.duration = 0;
  s.rin = 0.5;
  s.sample_rate = 50e3;
  try {
    s.validate();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.violations().size() == 4);
  }
  CHECK_THROWS_AS(synthesize_trace(s), ValidationError);
}

TEST_CASE("noiseless synthesis is the closed-form precession")
{
  auto s = test::scenario("fig2");
  s.noise = false;
  s.initial_phase = 0.3;
  const auto trace = synthesize_trace(s);
  CHECK(trace.size() == Eigen::Index(std::llround((s.pre_trigger + s.duration) * s.sample_rate)));
  CHECK(trace.time(trace.trigger_index) == 0.0);
  CHECK(trace.samples.head(trace.trigger_index).cwiseAbs().maxCoeff() == 0.0);
  const double a = predict_signed_amplitude(s), tau = predict_decay_time(s),
               w = larmor_angular_frequency(s);
  double worst = 0;
  for (Eigen::Index i = trace.trigger_index; i < trace.size(); ++i) {
    const double t = trace.time(i);
    worst = std::max(worst, std::abs(trace.samples(i) - a * std::exp(-t / tau) * std::sin(w * t + 0.3)));
  }
  CHECK(worst < 1e-12 * std::abs(a));
}

TEST_CASE("synthesis is deterministic per seed")
{
  auto s = test::scenario("fig2");
  s.seed = 42;
  const auto a = detector_output(s), b = detector_output(s);
  CHECK((a.samples.array() == b.samples.array()).all());
  s.seed = 43;
  CHECK((a.samples.array() != detector_output(s).samples.array()).any());
}

TEST_CASE("raw noise: zero mean, per-sample sigma, 1e6 samples")
{
  auto s = test::scenario("fig2");
  s.pre_trigger = 5.0; // 1e6 pure-noise samples before the trigger
  s.duration = 1e-3;
  s.seed = 9;
  const auto trace = synthesize_trace(s);
  const auto noise = trace.samples.head(trace.trigger_index);
  const double n = double(noise.size());
  const double sigma = raw_noise_sigma(s);
  CHECK(rel(sigma, shot_noise_rms(ProbeSpecd{s.probe.detuning, s.probe.intensity, s.probe.aperture_radius,
                                             s.probe.efficiency, 1 / (2 * s.sample_rate)},
                                  s.transition.photon_energy())) < 1e-12);
  const double mean = noise.mean();
  const double rms = std::sqrt((noise.array() - mean).square().mean());
  CHECK(std::abs(mean) < 4 * sigma / std::sqrt(n));
  CHECK(std::abs(rms - sigma) < 4 * sigma / std::sqrt(2 * n));
}

TEST_CASE("filtered quiet-segment RMS matches the band-limited shot noise")
{
  auto s = test::scenario("fig2");
  double sum = 0;
  const int seeds = 100;
  for (int k = 0; k < seeds; ++k) {
    s.seed = 1000 + k;
    const auto trace = detector_output(s);
    sum += rms_noise(trace, default_noise_window(trace));
  }
  CHECK(rel(sum / seeds, predict_noise_rms(s)) < 0.10);
  CHECK(rel(sum / seeds, predict_noise_rms(s)) < 0.03); // tighter than required
}

TEST_CASE("ensemble average converges to the filtered noiseless signal")
{
  auto s = test::scenario("fig2");
  const int n = 200;
  auto clean = s;
  clean.noise = false;
  const Eigen::VectorXd target = detector_output(clean).samples;
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(target.size());
  for (int k = 0; k < n; ++k) {
    s.seed = 77 + k;
    avg += detector_output(s).samples;
  }
  avg /= n;
  const double limit = predict_noise_rms(s) / std::sqrt(double(n));
  const Eigen::ArrayXd dev = (avg - target).array();
  // RMS deviation at the expected level, and outliers beyond 3 sigma as rare
  // as a Gaussian allows.
  CHECK(std::sqrt(dev.square().mean()) == doctest::Approx(limit).epsilon(0.10));
  CHECK(double((dev.abs() > 3 * limit).count()) / double(dev.size()) < 0.01);
}

TEST_CASE("RIN is multiplicative on the signal")
{
  // E[(x - clean)^2] = sigma^2 + rin^2 clean^2 sample by sample.
  auto s = test::scenario("fig5a");
  s.rin = 0.02;
  auto c = s;
  c.noise = false;
  const Eigen::VectorXd clean = synthesize_trace(c).samples;
  const double sigma = raw_noise_sigma(s);
  const auto pre = synthesize_trace(c).trigger_index;
  const Eigen::Index n = 400; // first 2 ms of precession
  double excess = 0, signal = 0;
  for (int k = 0; k < 50; ++k) {
    s.seed = 300 + k;
    const Eigen::VectorXd d = synthesize_trace(s).samples - clean;
    excess += d.segment(pre, n).squaredNorm() - double(n) * sigma * sigma;
    signal += clean.segment(pre, n).squaredNorm();
  }
  CHECK(std::sqrt(excess / signal) == doctest::Approx(0.02).epsilon(0.15));
}

TEST_CASE("bandpass_filter records the band")
{
  auto s = test::scenario("fig2");
  const auto raw = synthesize_trace(s);
  CHECK_FALSE(raw.filter.has_value());
  const auto out = bandpass_filter(raw, s.filter);
  REQUIRE(out.filter.has_value());
  CHECK(out.filter->low_cut == s.filter.low_cut);
  CHECK(out.size() == raw.size());
}
