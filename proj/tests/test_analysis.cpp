#include <doctest.h>

#include <random>

#include "faraday/analysis.hpp"
#include "faraday/synth.hpp"
#include "test_support.hpp"

using namespace faraday;
using test::rel;

namespace {

constexpr double two_pi = 2 * std::numbers::pi;

SignalTrace model_trace(double a, double tau, double omega, double phi, double fs = 200e3,
                        double pre = 5e-3, double duration = 20e-3)
{
  SignalTrace tr;
  tr.sample_rate = fs;
  tr.trigger_index = Eigen::Index(std::llround(pre * fs));
  tr.samples = Eigen::VectorXd::Zero(tr.trigger_index + Eigen::Index(std::llround(duration * fs)));
  for (Eigen::Index i = tr.trigger_index; i < tr.size(); ++i) {
    const double t = tr.time(i);
    tr.samples(i) = a * std::exp(-t / tau) * std::sin(omega * t + phi);
  }
  return tr;
}

// N = 1.7e6, L = 350 um, ~2 kHz detection band (tau_pd ~ 125 us), tau_s 6.2 ms:
// analytic SNR ~ 30 with the Bragg factor.
Scenario snr30()
{
  auto c = test::preset("fig2");
  c.set("detector.low_cut_khz", 9.6);
  c.set("detector.high_cut_khz", 11.4);
  c.set("detector.signal_factor", 1.0);
  return scenario_from_config(c);
}

} // namespace

TEST_CASE("rms_noise")
{
  SignalTrace tr;
  tr.sample_rate = 1e3;
  tr.trigger_index = 100;
  tr.samples = Eigen::VectorXd::Constant(200, 3.0);
  CHECK(rms_noise(tr, {-0.1, 0.0}) == 0.0);
  for (Eigen::Index i = 0; i < 100; ++i) tr.samples(i) = i % 2 ? 0.25 : -0.25;
  CHECK(rms_noise(tr, {-0.1, 0.0}) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(rms_noise(tr, {-0.1, 0.01}), DomainError);
  CHECK_THROWS_AS(rms_noise(tr, {-0.04, 0.0}), DomainError); // 40 samples
}

TEST_CASE("noiseless fit recovers all four parameters")
{
  const double a = 1e-9, tau = 5e-3, omega = two_pi * 10e3, phi = 0.3;
  const auto tr = model_trace(a, tau, omega, phi);
  const auto fit = fit_damped_sinusoid(tr, default_fit_window(tr));
  CHECK(fit.converged);
  CHECK(rel(fit.amplitude, a) < 1e-9);
  CHECK(rel(fit.decay_time, tau) < 1e-9);
  CHECK(rel(fit.angular_frequency, omega) < 1e-9);
  CHECK(rel(fit.phase, phi) < 1e-9);
  CHECK(fit.residual_rms < 1e-12 * a);
  CHECK(fit(0.0) == doctest::Approx(a * std::sin(phi)));
}

TEST_CASE("noiseless filtered trace: the fit through the filter is exact")
{
  auto s = test::scenario("fig3");
  s.noise = false;
  s.initial_phase = 1.1;
  for (double ghz : {-9.9, -50.2, -100.0}) {
    s.probe.detuning = two_pi * ghz * 1e9;
    const auto tr = detector_output(s);
    const auto fit = fit_damped_sinusoid(tr, default_fit_window(tr));
    CAPTURE(ghz);
    CHECK(rel(fit.amplitude, predict_amplitude(s)) < 1e-9);
    CHECK(rel(fit.decay_time, predict_decay_time(s)) < 1e-9);
    CHECK(rel(fit.angular_frequency, larmor_angular_frequency(s)) < 1e-9);
    // negative amplitude is absorbed into the phase
    CHECK(std::abs(std::remainder(fit.phase - (1.1 + std::numbers::pi), two_pi)) < 1e-9);
  }
}

TEST_CASE("plain fit skips the transient")
{
  auto s = test::scenario("fig3");
  s.noise = false;
  const auto tr = detector_output(s);
  FitOptions plain;
  plain.through_filter = false;
  const auto w = default_fit_window(tr, plain);
  CHECK(w.start == doctest::Approx(transient_skip(tr)));
  CHECK(transient_skip(tr) > 0);
  CHECK(transient_skip(synthesize_trace(s)) == 0);
  const auto fit = fit_damped_sinusoid(tr, w, plain);
  // only the filter's gain at the complex frequency separates it from the truth
  CHECK(rel(fit.amplitude, predict_amplitude(s)) < 0.05);
  CHECK(rel(fit.angular_frequency, larmor_angular_frequency(s)) < 1e-3);
}

TEST_CASE("fit is linear in the amplitude")
{
  auto s = test::scenario("fig2");
  s.seed = 3;
  const auto tr = detector_output(s);
  auto scaled = tr;
  scaled.samples *= 7.5;
  const auto f1 = fit_damped_sinusoid(tr, default_fit_window(tr));
  const auto f2 = fit_damped_sinusoid(scaled, default_fit_window(scaled));
  CHECK(rel(f2.amplitude, 7.5 * f1.amplitude) < 1e-9);
  CHECK(rel(f2.decay_time, f1.decay_time) < 1e-9);
  CHECK(rel(f2.angular_frequency, f1.angular_frequency) < 1e-9);
  CHECK(std::abs(f2.phase - f1.phase) < 1e-9);

  // measure_snr is scale invariant
  CHECK(rel(measure_snr(scaled), measure_snr(tr)) < 1e-9);
}

TEST_CASE("doubling the signal at fixed noise doubles the SNR")
{
  auto s = test::scenario("fig5a");
  s.seed = 8;
  auto clean = s;
  clean.noise = false;
  const auto noisy = detector_output(s);
  const auto signal = detector_output(clean);
  auto doubled = noisy;
  doubled.samples += signal.samples;
  CHECK(measure_snr(doubled) / measure_snr(noisy) == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("fit error paths")
{
  auto tr = model_trace(1e-9, 5e-3, two_pi * 10e3, 0.3);
  CHECK_THROWS_AS(fit_damped_sinusoid(tr, {0.0, 5e-5}), DomainError);
  // 5 samples per period
  const auto fast = model_trace(1e-9, 5e-3, two_pi * 40e3, 0.3);
  CHECK_THROWS_AS(fit_damped_sinusoid(fast, default_fit_window(fast)), DomainError);
  tr.samples(tr.trigger_index + 10) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fit_damped_sinusoid(tr, default_fit_window(tr)), DataError);
}

TEST_CASE("Monte Carlo at SNR ~ 30: unbiased amplitude, calibrated uncertainty")
{
  auto s = snr30();
  const double analytic = predict_snr_optimal(s);
  CHECK(analytic == doctest::Approx(30).epsilon(0.1));
  const int seeds = 200;
  std::vector<double> amps;
  double stderr_sum = 0, snr_sum = 0;
  FitOptions fo;
  fo.omega_hint = larmor_angular_frequency(s);
  for (int k = 0; k < seeds; ++k) {
    s.seed = 5000 + k;
    const auto m = measure(detector_output(s), fo);
    amps.push_back(m.fit.amplitude);
    stderr_sum += m.fit.amplitude_stderr;
    snr_sum += m.snr;
  }
  double mean = 0, var = 0;
  for (double a : amps) mean += a / seeds;
  for (double a : amps) var += (a - mean) * (a - mean) / (seeds - 1);
  CHECK(rel(mean, predict_amplitude(s)) < 0.02);
  const double ratio = std::sqrt(var) / (stderr_sum / seeds);
  CHECK(ratio > 0.85);
  CHECK(ratio < 1.15);
  CHECK(rel(snr_sum / seeds, analytic) < 0.10);
}

TEST_CASE("pure noise: amplitude not significant at the known Larmor frequency")
{
  // With omega held at the field's Larmor frequency, A / stderr is Rayleigh
  // distributed with P(> 3) = exp(-4.5) ~ 1%.
  auto s = test::scenario("fig2");
  auto clean = s;
  clean.noise = false;
  const Eigen::VectorXd signal = detector_output(clean).samples;
  FitOptions fo;
  fo.fixed_omega = larmor_angular_frequency(s);
  int significant = 0;
  const int seeds = 100;
  for (int k = 0; k < seeds; ++k) {
    s.seed = 9000 + k;
    auto tr = detector_output(s);
    tr.samples -= signal;
    const auto fit = fit_damped_sinusoid(tr, default_fit_window(tr), fo);
    REQUIRE(fit.angular_frequency == *fo.fixed_omega);
    REQUIRE(fit.amplitude_stderr > 0);
    REQUIRE(std::isfinite(fit.amplitude_stderr));
    if (fit.amplitude > 3 * fit.amplitude_stderr) ++significant;
  }
  CHECK(significant <= seeds / 20);
}

TEST_CASE("undamped fits keep a finite amplitude uncertainty")
{
  // Noise alone often fits best with tau -> inf; ln tau then has no curvature.
  auto s = test::scenario("fig2");
  auto clean = s;
  clean.noise = false;
  const Eigen::VectorXd signal = detector_output(clean).samples;
  FitOptions fo;
  fo.omega_hint = larmor_angular_frequency(s);
  int undamped = 0;
  for (int k = 0; k < 20; ++k) {
    s.seed = 9000 + k;
    auto tr = detector_output(s);
    tr.samples -= signal;
    const auto fit = fit_damped_sinusoid(tr, default_fit_window(tr), fo);
    CHECK(fit.amplitude_stderr > 0);
    CHECK(std::isfinite(fit.amplitude_stderr));
    undamped += fit.decay_time > 1.0;
  }
  CHECK(undamped > 0);
}

TEST_CASE("fixed frequency fit on a signal")
{
  const double a = 1e-9, tau = 5e-3, omega = two_pi * 10e3, phi = 0.3;
  const auto tr = model_trace(a, tau, omega, phi);
  FitOptions fo;
  fo.fixed_omega = omega;
  const auto fit = fit_damped_sinusoid(tr, default_fit_window(tr), fo);
  CHECK(fit.angular_frequency == omega);
  CHECK(rel(fit.amplitude, a) < 1e-9);
  CHECK(rel(fit.decay_time, tau) < 1e-9);
  fo.fixed_omega = -1.0;
  CHECK_THROWS_AS(fit_damped_sinusoid(tr, default_fit_window(tr), fo), DomainError);
}

TEST_CASE("scaling fit on exact data")
{
  const auto t = test::cesium();
  const CloudSpecd c{1.7e6, 350e-6};
  std::vector<ScalingPoint> pts;
  for (double tau : {0.5e-3, 1e-3, 3e-3, 10e-3, 30e-3, 60e-3})
    pts.push_back({tau, 0.8 * snr(t, c, 0.29, 125e-6, tau)});
  const ScalingModel model{350e-6, 0.29, 125e-6, 852e-9, 0.8};
  const auto f = scaling_fit(pts, model);
  CHECK(std::abs(f.slope + 0.5) < 1e-6);
  CHECK(rel(f.inferred_atom_number, 1.7e6) < 1e-10);

  CHECK_THROWS_AS(scaling_fit(std::span(pts).first(2), model), DomainError);
  std::vector<ScalingPoint> narrow = {{1e-3, 10}, {2e-3, 7}, {5e-3, 4.5}};
  CHECK_THROWS_AS(scaling_fit(narrow, model), DomainError);
}

TEST_CASE("atom number inversion")
{
  const auto t = test::cesium();
  const CloudSpecd c{2.3e6, 420e-6};
  const double s = snr(t, c, 0.29, 125e-6, 7e-3);
  CHECK(rel(infer_atom_number(s, 7e-3, 125e-6, 0.29, 420e-6, 852e-9), 2.3e6) < 1e-12);
  CHECK(infer_atom_number(s, 7e-3, 125e-6, 0.29, 420e-6, 852e-9, 0.5) ==
        doctest::Approx(2 * infer_atom_number(s, 7e-3, 125e-6, 0.29, 420e-6, 852e-9, 1.0)));
  CHECK_THROWS_AS(infer_atom_number(s, 7e-3, 125e-6, 0.29, 420e-6, 852e-9, 2.5), DomainError);
  CHECK_THROWS_AS(infer_atom_number(-1.0, 7e-3, 125e-6, 0.29, 420e-6, 852e-9), DomainError);
}
