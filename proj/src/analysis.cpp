#include "faraday/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "faraday/core.hpp"
#include "faraday/errors.hpp"

namespace faraday {

namespace {

constexpr double two_pi = 2 * std::numbers::pi;

struct Samples
{
  Eigen::VectorXd t;
  Eigen::VectorXd y;
};

Samples window_samples(const SignalTrace& trace, TimeWindow w)
{
  const double fs = trace.sample_rate;
  const auto first = std::max<Eigen::Index>(
    0, static_cast<Eigen::Index>(std::ceil(w.start * fs - 1e-9)) + trace.trigger_index);
  const auto last = std::min<Eigen::Index>(
    trace.size(), static_cast<Eigen::Index>(std::ceil(w.stop * fs - 1e-9)) + trace.trigger_index);
  Samples s;
  const Eigen::Index n = std::max<Eigen::Index>(0, last - first);
  s.t.resize(n);
  s.y = trace.samples.segment(first, n);
  for (Eigen::Index i = 0; i < n; ++i) s.t(i) = trace.time(first + i);
  return s;
}

// |DFT|^2 of `y`, zero-padded to a power of two >= 8 len.
std::vector<double> power_spectrum(const Eigen::VectorXd& y, std::size_t& nfft)
{
  nfft = 1;
  while (nfft < 8 * static_cast<std::size_t>(y.size())) nfft <<= 1;
  std::vector<double> padded(nfft, 0.0);
  for (Eigen::Index i = 0; i < y.size(); ++i) padded[i] = y(i);
  std::vector<std::complex<double>> spectrum;
  Eigen::FFT<double> fft;
  fft.fwd(spectrum, padded);
  std::vector<double> power(nfft / 2);
  for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(spectrum[k]);
  return power;
}

struct Guess
{
  double omega;
  double tau;
};

// Matched-filter search: for each trial tau the data are weighted by
// exp(-u/tau) and the spectrum peak normalised by sum(w^2); the (omega, tau)
// pair with the largest normalised peak power wins.
Guess initial_guess(const Samples& s, double fs, const std::optional<double>& hint)
{
  const auto n = s.y.size();
  const double span = double(n) / fs;
  std::size_t nfft = 1;
  while (nfft < 4 * static_cast<std::size_t>(n)) nfft <<= 1;
  const double bin = fs / double(nfft);
  std::size_t lo = static_cast<std::size_t>(std::ceil(2.0 * fs / double(n) / bin));
  std::size_t hi = nfft / 2 - 2;
  if (hint) {
    const double f = *hint / two_pi;
    lo = static_cast<std::size_t>(0.8 * f / bin);
    hi = std::min(hi, static_cast<std::size_t>(1.2 * f / bin) + 1);
  }
  lo = std::max<std::size_t>(lo, 1);
  if (lo >= hi) throw DomainError("fit window too short to resolve a frequency");

  Eigen::FFT<double> fft;
  std::vector<double> padded(nfft, 0.0);
  std::vector<std::complex<double>> spectrum;
  std::array<double, 3> best_mag{};
  double best_score = -1, best_tau = 0;
  std::size_t best_k = lo;
  const double tau_min = std::max(16.0 / fs, span / 1024);
  for (double tau = 8 * span; tau >= tau_min; tau /= std::sqrt(2.0)) {
    double norm = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = std::exp(-(s.t(i) - s.t(0)) / tau);
      padded[std::size_t(i)] = w * s.y(i);
      norm += w * w;
    }
    fft.fwd(spectrum, padded);
    for (std::size_t k = lo; k <= hi; ++k) {
      const double score = std::norm(spectrum[k]) / norm;
      if (score > best_score) {
        best_score = score, best_tau = tau, best_k = k;
        best_mag = {std::abs(spectrum[k - 1]), std::abs(spectrum[k]), std::abs(spectrum[k + 1])};
      }
    }
  }
  const double denom = best_mag[0] - 2 * best_mag[1] + best_mag[2];
  const double shift = denom != 0 ? 0.5 * (best_mag[0] - best_mag[2]) / denom : 0.0;
  return {two_pi * (double(best_k) + std::clamp(shift, -0.5, 0.5)) * bin, best_tau};
}

// Evaluation grid of a fit. With a filter the model is built from the
// trigger (zero filter state there, as in the data), filtered, and compared
// on the window samples only.
struct Grid
{
  Eigen::VectorXd u;       // t - t_centre on the evaluation grid
  Eigen::Index offset = 0; // first window sample within u
  Eigen::Index size = 0;
  const BandpassFilter* filter = nullptr;

  Eigen::VectorXd shape(const Eigen::VectorXd& full) const
  {
    if (!filter) return full;
    return filter->apply(full).segment(offset, size);
  }
};

// Least-squares (c, d) for y ~ exp(-u/tau) (c sin(omega u) + d cos(omega u)).
struct Projection
{
  double c, d, cost;
};

Projection project(const Grid& g, const Eigen::VectorXd& y, double omega, double tau)
{
  Eigen::VectorXd sn(g.u.size()), cs(g.u.size());
  for (Eigen::Index i = 0; i < g.u.size(); ++i) {
    const double e = std::exp(-g.u(i) / tau);
    sn(i) = e * std::sin(omega * g.u(i));
    cs(i) = e * std::cos(omega * g.u(i));
  }
  Eigen::Matrix<double, Eigen::Dynamic, 2> basis(g.size, 2);
  basis.col(0) = g.shape(sn);
  basis.col(1) = g.shape(cs);
  const Eigen::Matrix2d a = basis.transpose() * basis;
  const Eigen::Vector2d b = basis.transpose() * y;
  const Eigen::Vector2d x = a.ldlt().solve(b);
  return {x(0), x(1), y.squaredNorm() - x.dot(b)};
}

// Refines tau on a finer log grid with the linear parameters projected out.
double refine_decay(const Grid& g, const Eigen::VectorXd& y, double omega, double tau)
{
  double best = tau, best_cost = project(g, y, omega, tau).cost;
  for (int k = -8; k <= 8; ++k) {
    const double cand = tau * std::pow(2.0, k / 8.0);
    const double cost = project(g, y, omega, cand).cost;
    if (cost < best_cost) best_cost = cost, best = cand;
  }
  return best;
}

using Vector4 = Eigen::Vector4d;
using Jacobian = Eigen::Matrix<double, Eigen::Dynamic, 4>;

// Centred parameterisation: theta = (B, ln tau, omega, psi), model
// B exp(-u/tau) sin(omega u + psi) with u = t - t_centre.
void evaluate(const Vector4& theta, const Grid& g, Eigen::VectorXd& model, Jacobian* jac)
{
  const double b = theta(0), tau = std::exp(theta(1)), omega = theta(2), psi = theta(3);
  const auto n = g.u.size();
  Eigen::VectorXd full(n);
  Jacobian jfull(jac ? n : 0, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = g.u(i);
    const double e = std::exp(-u / tau);
    const double arg = omega * u + psi;
    const double sn = std::sin(arg), cs = std::cos(arg);
    full(i) = b * e * sn;
    if (jac) {
      jfull(i, 0) = e * sn;
      jfull(i, 1) = b * e * sn * u / tau;
      jfull(i, 2) = b * e * cs * u;
      jfull(i, 3) = b * e * cs;
    }
  }
  model = g.shape(full);
  if (jac) {
    jac->resize(g.size, 4);
    for (int c = 0; c < 4; ++c) jac->col(c) = g.shape(jfull.col(c));
  }
}

// Residual power near omega relative to its mean over the whole spectrum.
double colour_factor(const Eigen::VectorXd& residual, double omega, double fs)
{
  std::size_t nfft = 0;
  const auto power = power_spectrum(residual, nfft);
  double mean = 0;
  for (std::size_t k = 1; k < power.size(); ++k) mean += power[k];
  mean /= double(power.size() - 1);
  if (!(mean > 0)) return 1.0;
  const auto centre = static_cast<long>(std::lround(omega / two_pi * double(nfft) / fs));
  const long half = 3 * static_cast<long>(nfft / std::size_t(residual.size()));
  double near = 0;
  long count = 0;
  for (long k = std::max(1L, centre - half);
       k <= std::min<long>(long(power.size()) - 1, centre + half); ++k, ++count)
    near += power[k];
  return count > 0 ? near / double(count) / mean : 1.0;
}

} // namespace

double FitResult::operator()(double t) const
{
  return amplitude * std::exp(-t / decay_time) * std::sin(angular_frequency * t + phase);
}

double transient_skip(const SignalTrace& trace)
{
  if (!trace.filter) return 0.0;
  const BandpassFilter filter(*trace.filter, trace.sample_rate);
  return 5.0 * filter.slowest_time_constant();
}

TimeWindow default_noise_window(const SignalTrace& trace)
{
  return {trace.time(0) + transient_skip(trace), 0.0};
}

TimeWindow default_fit_window(const SignalTrace& trace, const FitOptions& options)
{
  const bool through = options.through_filter && trace.filter;
  return {through ? 0.0 : transient_skip(trace), trace.time(trace.size() - 1) + 0.5 / trace.sample_rate};
}

double rms_noise(const SignalTrace& trace, TimeWindow window)
{
  if (window.stop > 1e-9 / trace.sample_rate)
    throw DomainError("noise window overlaps the precession signal");
  const auto s = window_samples(trace, window);
  if (s.y.size() < 50) throw DomainError("noise window holds fewer than 50 samples");
  if (!s.y.allFinite()) throw DataError("non-finite samples in noise window");
  const double mean = s.y.mean();
  return std::sqrt((s.y.array() - mean).square().mean());
}

FitResult fit_damped_sinusoid(const SignalTrace& trace, TimeWindow window,
                              const FitOptions& options)
{
  const auto s = window_samples(trace, window);
  if (!s.y.allFinite()) throw DataError("non-finite samples in fit window");
  if (s.y.size() < 16) throw DomainError("fit window holds fewer than 16 samples");
  const double fs = trace.sample_rate;
  const double t_centre = s.t.mean();

  Grid g;
  g.size = s.y.size();
  std::optional<BandpassFilter> filter;
  Samples search = s;
  if (options.through_filter && trace.filter) {
    if (s.t(0) < -0.5 / fs)
      throw DomainError("a fit through the filter needs a window starting at or after the trigger");
    filter.emplace(*trace.filter, fs);
    g.filter = &*filter;
    g.offset = std::lround(s.t(0) * fs);
    g.u = Eigen::VectorXd::LinSpaced(g.offset + g.size, 0.0, double(g.offset + g.size - 1) / fs)
            .array() - t_centre;
    // The spectral search only looks past the start-up transient.
    const double skip = transient_skip(trace);
    Eigen::Index first = 0;
    while (first < s.t.size() && s.t(first) < skip) ++first;
    if (s.t.size() - first >= 16)
      search = {s.t.tail(s.t.size() - first), s.y.tail(s.y.size() - first)};
  } else {
    g.u = s.t.array() - t_centre;
  }

  const auto guess = initial_guess(search, fs, options.fixed_omega ? options.fixed_omega : options.omega_hint);
  const double omega0 = options.fixed_omega.value_or(guess.omega);
  if (options.fixed_omega && !(*options.fixed_omega > 0)) throw DomainError("fixed frequency must be > 0");
  const bool hold = options.fixed_omega.has_value();
  if (fs / (omega0 / two_pi) < 8)
    throw DomainError("fewer than 8 samples per period in the fit window");
  const double tau0 = refine_decay(g, s.y, omega0, guess.tau);
  const auto proj = project(g, s.y, omega0, tau0);

  Vector4 theta(std::hypot(proj.c, proj.d), std::log(tau0), omega0, std::atan2(proj.d, proj.c));
  if (!(theta(0) > 0)) theta(0) = s.y.cwiseAbs().maxCoeff();

  Eigen::VectorXd model;
  Jacobian jac;
  evaluate(theta, g, model, &jac);
  if (hold) jac.col(2).setZero();
  Eigen::VectorXd residual = s.y - model;
  double cost = residual.squaredNorm();
  double lambda = 1e-3;
  double change = std::numeric_limits<double>::infinity();
  int iter = 0;

  auto relative_change = [](const Vector4& step, const Vector4& at) {
    return std::max({std::abs(step(0)) / std::max(std::abs(at(0)), 1e-300), std::abs(step(1)),
                     std::abs(step(2)) / std::abs(at(2)), std::abs(step(3))});
  };

  while (iter < options.max_iterations) {
    ++iter;
    Eigen::Matrix4d normal = jac.transpose() * jac;
    if (hold) normal(2, 2) = 1;
    const Vector4 gradient = jac.transpose() * residual;
    bool accepted = false;
    while (lambda < 1e16) {
      Eigen::Matrix4d damped = normal;
      damped.diagonal() *= 1 + lambda;
      const Vector4 step = damped.ldlt().solve(gradient);
      const Vector4 trial = theta + step;
      Eigen::VectorXd trial_model;
      evaluate(trial, g, trial_model, nullptr);
      const double trial_cost = (s.y - trial_model).squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        change = relative_change(step, theta);
        theta = trial;
        cost = trial_cost;
        lambda = std::max(lambda / 10, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10;
    }
    if (!accepted) {
      // No descent direction left: theta is a minimum to working precision.
      change = 0;
      break;
    }
    evaluate(theta, g, model, &jac);
    if (hold) jac.col(2).setZero();
    residual = s.y - model;
    if (change < 1e-3 * options.tolerance) break;
  }

  FitResult fit;
  const double tau = std::exp(theta(1));
  double b = theta(0), psi = theta(3);
  if (b < 0) b = -b, psi += std::numbers::pi;
  fit.amplitude = b * std::exp(t_centre / tau);
  fit.decay_time = tau;
  fit.angular_frequency = theta(2);
  fit.phase = std::fmod(psi - theta(2) * t_centre, two_pi);
  if (fit.phase < 0) fit.phase += two_pi;
  fit.residual_rms = std::sqrt(cost / double(s.y.size()));
  fit.iterations = iter;
  fit.converged = change <= options.tolerance;

  const auto dof = static_cast<double>(s.y.size() - 4);
  // Pseudo-inverse on unit-norm columns: an undamped fit (tau -> inf) leaves
  // ln tau flat, and that direction must drop out rather than poison the rest.
  Vector4 norms = jac.colwise().norm().transpose();
  for (int k = 0; k < 4; ++k)
    if (!(norms(k) > 0)) norms(k) = 1;
  const Jacobian scaled = jac * norms.cwiseInverse().asDiagonal();
  const Eigen::JacobiSVD<Jacobian> svd(scaled, Eigen::ComputeThinV);
  const Vector4 sv = svd.singularValues();
  Vector4 inv_sq = Vector4::Zero();
  for (int k = 0; k < 4; ++k)
    if (sv(k) > 1e-8 * sv(0)) inv_sq(k) = 1 / (sv(k) * sv(k));
  const Eigen::Matrix4d pinv = norms.cwiseInverse().asDiagonal() *
                               (svd.matrixV() * inv_sq.asDiagonal() * svd.matrixV().transpose()) *
                               norms.cwiseInverse().asDiagonal();
  Eigen::Matrix4d cov;
  if (trace.filter) {
    // Filtered shot noise: C = s_w^2 H H^T with H the recorded filter, so
    // J^T C J = s_w^2 |H^T J|^2. H^T is the filter run backwards, continued
    // into the samples before the window that feed its noise.
    const BandpassFilter h(*trace.filter, fs);
    const Eigen::Index start = trace.trigger_index + std::lround(s.t(0) * fs);
    const Eigen::Index lead =
      std::min<Eigen::Index>(start, std::lround(10 * h.slowest_time_constant() * fs));
    Jacobian back(lead + jac.rows(), 4);
    for (int k = 0; k < 4; ++k) {
      Eigen::VectorXd padded = Eigen::VectorXd::Zero(lead + jac.rows());
      padded.tail(jac.rows()) = jac.col(k);
      const Eigen::VectorXd reversed = padded.reverse();
      back.col(k) = h.apply(reversed).reverse();
    }
    const double white = cost / dof * fs / (2 * h.equivalent_noise_bandwidth());
    cov = pinv * (back.transpose() * back) * pinv * white;
  } else {
    cov = pinv * (cost / dof) * colour_factor(residual, theta(2), fs);
  }
  // A = B exp(t_c / tau): dA/dB = exp(t_c/tau), dA/d ln tau = -A t_c / tau.
  const Vector4 grad(std::exp(t_centre / tau), std::isfinite(tau) ? -fit.amplitude * t_centre / tau : 0.0, 0, 0);
  fit.amplitude_stderr = std::sqrt(std::max(0.0, grad.dot(cov * grad)));
  return fit;
}

SnrMeasurement measure(const SignalTrace& trace, const FitOptions& options)
{
  SnrMeasurement m;
  m.noise_rms = rms_noise(trace, default_noise_window(trace));
  m.fit = fit_damped_sinusoid(trace, default_fit_window(trace, options), options);
  m.snr = m.fit.amplitude / m.noise_rms;
  return m;
}

double measure_snr(const SignalTrace& trace) { return measure(trace).snr; }

ScalingFit scaling_fit(std::span<const ScalingPoint> points, const ScalingModel& model)
{
  if (points.size() < 3) throw DomainError("scaling fit needs at least 3 points");
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  Eigen::MatrixX2d design(points.size(), 2);
  Eigen::VectorXd rhs(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!(p.scattering_time > 0) || !(p.measured_snr > 0))
      throw DomainError("scaling points need positive tau_s and SNR");
    lo = std::min(lo, p.scattering_time);
    hi = std::max(hi, p.scattering_time);
    design(i, 0) = 1;
    design(i, 1) = std::log(p.scattering_time);
    rhs(i) = std::log(p.measured_snr);
  }
  if (hi < 10 * lo) throw DomainError("scaling points must span at least a decade in tau_s");

  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  ScalingFit out{coef(1), coef(0), 0};
  const double x_mean = design.col(1).mean();
  const double y_mean = coef(0) + coef(1) * x_mean;
  out.inferred_atom_number =
    infer_atom_number(std::exp(y_mean), std::exp(x_mean), model.tau_pd, model.efficiency,
                      model.cloud_radius, model.wavelength, model.correction);
  return out;
}

double infer_atom_number(double measured_snr, double tau_s, double tau_pd, double efficiency,
                         double cloud_radius, double wavelength, double correction)
{
  if (!(measured_snr > 0) || !(tau_s > 0) || !(tau_pd > 0) || !(efficiency > 0) ||
      !(cloud_radius > 0) || !(wavelength > 0))
    throw DomainError("atom-number inference needs positive inputs");
  if (!(correction > 0 && correction <= 2)) throw DomainError("correction must be in (0, 2]");
  return measured_snr * cloud_radius /
         (snr_prefactor<double>() * wavelength * std::sqrt(efficiency) * correction *
          std::sqrt(tau_pd / tau_s));
}

} // namespace faraday
