#pragma once

// Closed-form model of a continuous Faraday-rotation measurement on a cloud of
// trapped atoms: indices, phase, detected power difference, shot noise,
// sensitivity, photon scattering, aperture optimisation, projection noise and
// the backaction figure of merit.
//
// Every function is a pure template over the scalar type so the same formulas
// can be evaluated in long double for reference checks.

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "faraday/constants.hpp"
#include "faraday/errors.hpp"

namespace faraday {

template <typename Scalar = double>
struct TransitionSpec
{
  Scalar wavelength;        ///< m
  Scalar linewidth;         ///< natural linewidth Gamma, rad/s
  Scalar total_spin;        ///< F of the probed ground manifold
  Scalar lande_gf;          ///< ground-state g_F

  /// Resonant scattering cross section 3 lambda^2 / 2 pi.
  Scalar cross_section() const { return 3 * wavelength * wavelength / (2 * pi<Scalar>); }

  /// Two-level saturation intensity 2 pi^2 hbar c Gamma / 3 lambda^3.
  Scalar saturation_intensity(const PhysicalConstants<Scalar>& k = {}) const
  {
    return 2 * pi<Scalar> * pi<Scalar> * k.hbar * k.c * linewidth /
           (3 * wavelength * wavelength * wavelength);
  }

  /// hbar omega_0 of a resonant photon.
  Scalar photon_energy(const PhysicalConstants<Scalar>& k = {}) const
  {
    return 2 * pi<Scalar> * k.hbar * k.c / wavelength;
  }

  std::vector<std::string> violations() const
  {
    std::vector<std::string> v;
    if (!(wavelength > 0)) v.emplace_back("transition.wavelength must be > 0");
    if (!(linewidth > 0)) v.emplace_back("transition.linewidth must be > 0");
    if (!(total_spin > 0)) v.emplace_back("transition.total_spin must be > 0");
    // g_F = 0 is physical (no Larmor precession) but never useful here.
    if (!std::isfinite(static_cast<double>(lande_gf)))
      v.emplace_back("transition.lande_gf must be finite");
    return v;
  }
};

/// Gaussian cloud: column density N/(2 pi L^2) exp(-r^2 / 2 L^2).
template <typename Scalar = double>
struct CloudSpec
{
  Scalar atom_number;
  Scalar radius;  ///< L, m

  Scalar column_density(Scalar r) const
  {
    return atom_number / (2 * pi<Scalar> * radius * radius) *
           std::exp(-r * r / (2 * radius * radius));
  }

  std::vector<std::string> violations() const
  {
    std::vector<std::string> v;
    if (!(atom_number >= 1)) v.emplace_back("cloud.atom_number must be >= 1");
    if (!(radius > 0)) v.emplace_back("cloud.radius must be > 0");
    return v;
  }
};

template <typename Scalar = double>
struct ProbeSpec
{
  Scalar detuning;               ///< Delta = omega - omega_0, rad/s
  Scalar intensity;              ///< single-beam intensity, W/m^2
  Scalar aperture_radius;        ///< a, m
  Scalar efficiency;             ///< detection efficiency kappa
  Scalar detector_time_constant; ///< tau_pd, s

  /// Power through the aperture, uniform intensity assumed.
  Scalar power() const { return intensity * pi<Scalar> * aperture_radius * aperture_radius; }

  std::vector<std::string> violations() const
  {
    std::vector<std::string> v;
    if (!(detuning != 0) || !std::isfinite(static_cast<double>(detuning)))
      v.emplace_back("probe.detuning must be non-zero and finite");
    if (!(intensity >= 0)) v.emplace_back("probe.intensity must be >= 0");
    if (!(aperture_radius > 0)) v.emplace_back("probe.aperture_radius must be > 0");
    if (!(efficiency > 0 && efficiency <= 1)) v.emplace_back("probe.efficiency must be in (0, 1]");
    if (!(detector_time_constant > 0))
      v.emplace_back("probe.detector_time_constant must be > 0");
    return v;
  }
};

/// <F_z>/F of a single atom, or <F~_z>/F~ of the collective spin.
template <typename Scalar = double>
struct SpinState
{
  Scalar fz;
};

/// Backaction summary.
///
/// projection_noise is dF~_z/F~ of a spin-coherent state of N atoms, where the
/// collective spin F~ is the sum of the N single-atom spins F^(i). Individual
/// F^(i) never appear: everything is normalised by N F.
template <typename Scalar = double>
struct BackactionReport
{
  Scalar projection_noise;
  Scalar sensitivity;   ///< smallest detectable dF_z/F
  Scalar eta;           ///< projection_noise / sensitivity
  Scalar optical_depth; ///< resonant O through the cloud centre
};

template <typename Scalar = double>
struct CircularIndices
{
  Scalar n_plus;
  Scalar n_minus;
};

using TransitionSpecd = TransitionSpec<double>;
using CloudSpecd = CloudSpec<double>;
using ProbeSpecd = ProbeSpec<double>;
using SpinStated = SpinState<double>;
using BackactionReportd = BackactionReport<double>;

namespace detail {
template <typename Scalar>
void require_detuning(Scalar detuning)
{
  if (detuning == 0 || !std::isfinite(static_cast<double>(detuning)))
    throw DomainError("detuning must be non-zero and finite");
}
} // namespace detail

/// Two-level scalar polarizability -3 eps0 lambda^3 Gamma / (8 pi^2 Delta), SI.
template <typename Scalar>
Scalar scalar_polarizability(const TransitionSpec<Scalar>& t, Scalar detuning,
                             const PhysicalConstants<Scalar>& k = {})
{
  detail::require_detuning(detuning);
  const Scalar l3 = t.wavelength * t.wavelength * t.wavelength;
  return -3 * k.epsilon0 * l3 * t.linewidth / (8 * pi<Scalar> * pi<Scalar> * detuning);
}

/// Refractive indices for sigma+ / sigma- light in a spin-polarised medium of
/// atom density `density` (m^-3).
template <typename Scalar>
CircularIndices<Scalar> circular_indices(const TransitionSpec<Scalar>& t, Scalar density,
                                         Scalar detuning, SpinState<Scalar> s,
                                         const PhysicalConstants<Scalar>& k = {})
{
  if (!(density >= 0)) throw DomainError("density must be >= 0");
  const Scalar base = density * scalar_polarizability(t, detuning, k) / (2 * k.epsilon0);
  return {1 + base * (Scalar(2) / 3 + s.fz / 3), 1 + base * (Scalar(2) / 3 - s.fz / 3)};
}

/// Differential sigma+/sigma- phase for a column density rho*l (m^-2).
template <typename Scalar>
Scalar differential_phase(const TransitionSpec<Scalar>& t, Scalar column_density,
                          Scalar detuning, SpinState<Scalar> s)
{
  detail::require_detuning(detuning);
  if (!(column_density >= 0)) throw DomainError("column density must be >= 0");
  return -(t.cross_section() * column_density) / (6 * (detuning / t.linewidth)) * s.fz;
}

/// I_x - I_y behind the analyzer for a polarization rotated by phase phi.
template <typename Scalar>
Scalar differential_intensity(Scalar incident, Scalar phase)
{
  return -incident * std::sin(phase);
}

/// Small-angle form -I phi.
template <typename Scalar>
Scalar differential_intensity_linear(Scalar incident, Scalar phase)
{
  return -incident * phase;
}

/// Fraction 1 - exp(-a^2 / 2 L^2) of the atoms seen through the aperture.
template <typename Scalar>
Scalar aperture_factor(Scalar aperture_radius, Scalar cloud_radius)
{
  // -expm1 keeps the small-aperture limit accurate.
  return -std::expm1(-aperture_radius * aperture_radius / (2 * cloud_radius * cloud_radius));
}

/// Power difference P_x - P_y integrated over the aperture (small-angle).
template <typename Scalar>
Scalar differential_power(const TransitionSpec<Scalar>& t, const CloudSpec<Scalar>& c,
                          const ProbeSpec<Scalar>& p, SpinState<Scalar> s)
{
  detail::require_detuning(p.detuning);
  const Scalar a2 = p.aperture_radius * p.aperture_radius;
  return p.power() / (6 * (p.detuning / t.linewidth)) * t.cross_section() * c.atom_number /
         (pi<Scalar> * a2) * aperture_factor(p.aperture_radius, c.radius) * s.fz;
}

/// RMS shot-noise fluctuation of the detected power difference, W.
template <typename Scalar>
Scalar shot_noise_rms(const ProbeSpec<Scalar>& p, Scalar photon_energy)
{
  const Scalar power = p.power();
  if (!(power > 0)) throw DomainError("shot noise needs a positive detected power");
  if (!(p.efficiency > 0 && p.efficiency <= 1))
    throw DomainError("detection efficiency must be in (0, 1]");
  if (!(p.detector_time_constant > 0)) throw DomainError("detector time constant must be > 0");
  return std::sqrt(power * photon_energy / (2 * p.efficiency * p.detector_time_constant));
}

/// Smallest detectable dF_z/F, found by equating signal and shot noise.
template <typename Scalar>
Scalar min_detectable_spin_vs_power(const TransitionSpec<Scalar>& t, const CloudSpec<Scalar>& c,
                                    const ProbeSpec<Scalar>& p,
                                    const PhysicalConstants<Scalar>& k = {})
{
  const Scalar per_unit_spin = std::abs(differential_power(t, c, p, SpinState<Scalar>{1}));
  return shot_noise_rms(p, t.photon_energy(k)) / per_unit_spin;
}

/// Single-beam photon scattering rate per atom, s^-1.
template <typename Scalar>
Scalar scattering_rate(const TransitionSpec<Scalar>& t, Scalar intensity, Scalar detuning,
                       const PhysicalConstants<Scalar>& k = {})
{
  detail::require_detuning(detuning);
  if (!(intensity >= 0)) throw DomainError("intensity must be >= 0");
  const Scalar d = detuning / t.linewidth;
  return t.linewidth / 12 * (intensity / t.saturation_intensity(k)) / (d * d);
}

/// Mean time between scattering events; infinite for zero intensity.
template <typename Scalar>
Scalar scattering_time(const TransitionSpec<Scalar>& t, Scalar intensity, Scalar detuning,
                       const PhysicalConstants<Scalar>& k = {})
{
  const Scalar rate = scattering_rate(t, intensity, detuning, k);
  return rate > 0 ? 1 / rate : std::numeric_limits<Scalar>::infinity();
}

/// Sensitivity expressed through the scattering time tau_s; depends on the
/// probe only through aperture, efficiency and tau_pd.
template <typename Scalar>
Scalar min_detectable_spin(const TransitionSpec<Scalar>& t, const CloudSpec<Scalar>& c,
                           const ProbeSpec<Scalar>& p, Scalar tau_s)
{
  if (!(tau_s > 0)) throw DomainError("scattering time must be > 0");
  if (!(p.detector_time_constant > 0)) throw DomainError("detector time constant must be > 0");
  if (!(p.efficiency > 0)) throw DomainError("detection efficiency must be > 0");
  return std::sqrt(Scalar(2)) * pi<Scalar> * p.aperture_radius /
         (t.wavelength * c.atom_number * std::sqrt(p.efficiency) *
          aperture_factor(p.aperture_radius, c.radius)) *
         std::sqrt(tau_s / p.detector_time_constant);
}

/// Aperture radius minimising a / (1 - exp(-a^2/2L^2)).
///
/// With u = a^2/2L^2 the stationarity condition is e^u = 1 + 2u; its
/// non-trivial root is bracketed in [0.5, 3], where e^u - 1 - 2u is monotone.
template <typename Scalar>
Scalar optimal_aperture(Scalar cloud_radius, Scalar tolerance = Scalar(1e-12))
{
  if (!(cloud_radius > 0)) throw DomainError("cloud radius must be > 0");
  auto g = [](Scalar u) { return std::expm1(u) - 2 * u; };
  Scalar lo = Scalar(0.5), hi = Scalar(3);
  while (hi - lo > tolerance * (hi + lo) / 2) {
    const Scalar mid = (lo + hi) / 2;
    if (g(mid) < 0)
      lo = mid;
    else
      hi = mid;
  }
  return cloud_radius * std::sqrt(2 * ((lo + hi) / 2));
}

/// sqrt(2) pi a* / (L (1 - exp(-a*^2/2L^2))), the optimal-aperture prefactor
/// of dF_z/F = K L / (lambda N sqrt(kappa)) sqrt(tau_s/tau_pd). About 9.85.
template <typename Scalar = double>
Scalar sensitivity_prefactor(Scalar tolerance = Scalar(1e-12))
{
  const Scalar ratio = optimal_aperture(Scalar(1), tolerance);
  return std::sqrt(Scalar(2)) * pi<Scalar> * ratio / aperture_factor(ratio, Scalar(1));
}

/// SNR prefactor, 1 / sensitivity_prefactor. About 0.1016.
template <typename Scalar = double>
Scalar snr_prefactor(Scalar tolerance = Scalar(1e-12))
{
  return 1 / sensitivity_prefactor(tolerance);
}

/// Prefactor of eta = K (lambda/L) sqrt(kappa N / F) sqrt(tau_pd/tau_s). About 0.0718.
template <typename Scalar = double>
Scalar eta_prefactor(Scalar tolerance = Scalar(1e-12))
{
  return snr_prefactor(tolerance) / std::sqrt(Scalar(2));
}

/// Prefactor of eta = K sqrt(kappa O / F) sqrt(tau_pd/tau_s) for an aperture
/// a = ratio * L. Maximal (about 0.2605) at the optimal aperture and vanishing
/// as a -> 0 or a -> infinity.
template <typename Scalar>
Scalar eta_od_prefactor_at(Scalar aperture_ratio)
{
  if (!(aperture_ratio > 0)) throw DomainError("aperture ratio must be > 0");
  return aperture_factor(aperture_ratio, Scalar(1)) / (aperture_ratio * std::sqrt(Scalar(3)));
}

template <typename Scalar = double>
Scalar eta_od_prefactor(Scalar tolerance = Scalar(1e-12))
{
  return eta_od_prefactor_at(optimal_aperture(Scalar(1), tolerance));
}

/// Sensitivity at the optimal aperture.
template <typename Scalar>
Scalar min_detectable_spin_optimal(const TransitionSpec<Scalar>& t, const CloudSpec<Scalar>& c,
                                   Scalar efficiency, Scalar tau_pd, Scalar tau_s)
{
  const ProbeSpec<Scalar> p{Scalar(1), Scalar(0), optimal_aperture(c.radius), efficiency, tau_pd};
  return min_detectable_spin(t, c, p, tau_s);
}

/// F / dF_z: signal-to-noise ratio for a full 0 -> F change of <F_z>.
template <typename Scalar>
Scalar snr(const TransitionSpec<Scalar>& t, const CloudSpec<Scalar>& c, Scalar efficiency,
           Scalar tau_pd, Scalar tau_s)
{
  return 1 / min_detectable_spin_optimal(t, c, efficiency, tau_pd, tau_s);
}

/// Fractional projection noise of a spin-coherent state of N spin-F atoms.
template <typename Scalar>
Scalar projection_noise(Scalar atom_number, Scalar total_spin)
{
  if (!(atom_number >= 1)) throw DomainError("atom number must be >= 1");
  if (!(total_spin > 0)) throw DomainError("spin must be > 0");
  return 1 / std::sqrt(2 * total_spin * atom_number);
}

/// Resonant optical depth sigma N / 2 pi L^2 through the cloud centre.
template <typename Scalar>
Scalar resonant_optical_depth(const TransitionSpec<Scalar>& t, const CloudSpec<Scalar>& c)
{
  return t.cross_section() * c.atom_number / (2 * pi<Scalar> * c.radius * c.radius);
}

template <typename Scalar>
BackactionReport<Scalar> backaction_eta(const TransitionSpec<Scalar>& t, const CloudSpec<Scalar>& c,
                                        Scalar efficiency, Scalar tau_pd, Scalar tau_s,
                                        Scalar total_spin)
{
  BackactionReport<Scalar> r;
  r.projection_noise = projection_noise(c.atom_number, total_spin);
  r.sensitivity = min_detectable_spin_optimal(t, c, efficiency, tau_pd, tau_s);
  r.eta = r.projection_noise / r.sensitivity;
  r.optical_depth = resonant_optical_depth(t, c);
  return r;
}

/// eta from the resonant optical depth at the optimal aperture.
template <typename Scalar>
Scalar backaction_eta_from_od(Scalar optical_depth, Scalar efficiency, Scalar total_spin,
                              Scalar tau_pd, Scalar tau_s)
{
  if (!(optical_depth > 0)) throw DomainError("optical depth must be > 0");
  if (!(tau_s > 0) || !(tau_pd > 0)) throw DomainError("time constants must be > 0");
  return eta_od_prefactor<Scalar>() * std::sqrt(efficiency * optical_depth / total_spin) *
         std::sqrt(tau_pd / tau_s);
}

/// Larmor angular frequency g_F mu_B B / hbar, rad/s.
template <typename Scalar>
Scalar larmor_frequency(Scalar field, Scalar lande_gf, const PhysicalConstants<Scalar>& k = {})
{
  if (!(field >= 0)) throw DomainError("bias field must be >= 0");
  return lande_gf * k.bohr_magneton * field / k.hbar;
}

/// Decay time of the precession signal when scattering and a background
/// dephasing channel act independently: rates add.
template <typename Scalar>
Scalar effective_decay_time(Scalar tau_s, Scalar tau_background)
{
  if (!(tau_s > 0) || !(tau_background > 0)) throw DomainError("decay times must be > 0");
  return 1 / (1 / tau_s + 1 / tau_background);
}

/// Sensitivity gain of a buildup cavity, sqrt(finesse).
template <typename Scalar>
Scalar cavity_enhanced_eta(Scalar eta, Scalar finesse)
{
  if (!(finesse >= 1)) throw DomainError("cavity finesse must be >= 1");
  return eta * std::sqrt(finesse);
}

/// Regime diagnostics. These never throw: sweeps are allowed to cross them.
template <typename Scalar>
std::vector<std::string> validity_diagnostics(const TransitionSpec<Scalar>& t,
                                              const ProbeSpec<Scalar>& p,
                                              const PhysicalConstants<Scalar>& k = {})
{
  std::vector<std::string> out;
  const Scalar d = std::abs(p.detuning / t.linewidth);
  if (d < 100)
    out.push_back("|detuning|/linewidth = " + std::to_string(static_cast<double>(d)) +
                  " < 100: large-detuning model is not accurate");
  const Scalar half = t.linewidth / (2 * p.detuning);
  const Scalar saturation = p.intensity / t.saturation_intensity(k) * half * half;
  if (saturation > Scalar(0.1))
    out.push_back("saturation parameter " + std::to_string(static_cast<double>(saturation)) +
                  " > 0.1: low-saturation model is not accurate");
  return out;
}

} // namespace faraday
