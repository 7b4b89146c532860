#pragma once

// Corrections that apply when the probe is one beam of a 1D standing-wave
// lattice: Bragg scattering into the counter-propagating beam enhances
// (atoms at antinodes, red detuning) or cancels (atoms at nodes, blue
// detuning) the forward Faraday signal, reduced by the Debye-Waller factor of
// the localised wavepackets.

#include <algorithm>
#include <cmath>
#include <string_view>

#include "faraday/constants.hpp"
#include "faraday/errors.hpp"
#include "faraday/quadrature.hpp"

namespace faraday {

enum class DetuningSign
{
  below_resonance, ///< Delta < 0, atoms at antinodes
  above_resonance, ///< Delta > 0, atoms at nodes
};

template <typename Scalar>
DetuningSign detuning_sign(Scalar detuning)
{
  if (detuning == 0) throw DomainError("detuning must be non-zero");
  return detuning < 0 ? DetuningSign::below_resonance : DetuningSign::above_resonance;
}

inline std::string_view to_string(DetuningSign s)
{
  return s == DetuningSign::below_resonance ? "below_resonance" : "above_resonance";
}

/// beta = exp(-(2k)^2 dz^2).
template <typename Scalar>
Scalar debye_waller(Scalar wavepacket_width, Scalar wavelength)
{
  if (!(wavepacket_width >= 0)) throw DomainError("wavepacket width must be >= 0");
  if (!(wavelength > 0)) throw DomainError("wavelength must be > 0");
  const Scalar dk = 4 * pi<Scalar> / wavelength;
  return std::exp(-dk * dk * wavepacket_width * wavepacket_width);
}

namespace detail {
template <typename Scalar>
void require_beta(Scalar beta)
{
  if (!(beta >= 0 && beta <= 1)) throw DomainError("Debye-Waller factor must be in [0, 1]");
}
} // namespace detail

/// Multiplier on the travelling-wave Faraday signal: 1 + beta or 1 - beta.
template <typename Scalar>
Scalar bragg_signal_factor(DetuningSign sign, Scalar beta)
{
  detail::require_beta(beta);
  return sign == DetuningSign::below_resonance ? 1 + beta : 1 - beta;
}

/// Multiplier on the single-beam scattering rate: the wavepacket-averaged
/// standing-wave intensity in units of one beam, 2 (1 +- beta).
template <typename Scalar>
Scalar lattice_scattering_factor(DetuningSign sign, Scalar beta)
{
  return 2 * bragg_signal_factor(sign, beta);
}

/// SNR multiplier relative to the travelling-wave SNR expressed through the
/// lattice scattering time: (1 +- beta) / sqrt(2 (1 +- beta)).
template <typename Scalar>
Scalar lattice_snr_correction(DetuningSign sign, Scalar beta)
{
  return std::sqrt(bragg_signal_factor(sign, beta) / 2);
}

/// Relative forward + Bragg signal for an atom at x (x = 0 is an antinode).
template <typename Scalar>
Scalar position_signal(Scalar x, Scalar wavelength)
{
  return 1 + std::cos(4 * pi<Scalar> * x / wavelength);
}

/// position_signal averaged over a Gaussian wavepacket centred on an antinode
/// (below resonance) or a node (above resonance), by quadrature.
///
/// The wavepacket variance is 2 dz^2: the unique Gaussian for which
/// <cos(2k x)> equals the Debye-Waller factor exp(-(2k)^2 dz^2).
template <typename Scalar>
Scalar wavepacket_averaged_signal(DetuningSign sign, Scalar wavepacket_width, Scalar wavelength)
{
  if (!(wavepacket_width >= 0)) throw DomainError("wavepacket width must be >= 0");
  if (!(wavelength > 0)) throw DomainError("wavelength must be > 0");
  const Scalar centre = sign == DetuningSign::below_resonance ? Scalar(0) : wavelength / 4;
  if (wavepacket_width == 0) return position_signal(centre, wavelength);

  const Scalar sd = std::sqrt(Scalar(2)) * wavepacket_width;
  const Scalar span = 12 * sd;
  const Scalar panel = std::min(sd, wavelength / 8);
  const auto panels =
    static_cast<std::size_t>(std::clamp(std::ceil(2 * span / panel), Scalar(8), Scalar(200000)));
  const Scalar norm = 1 / (sd * std::sqrt(2 * pi<Scalar>));
  auto integrand = [&](Scalar u) {
    return norm * std::exp(-u * u / (2 * sd * sd)) * position_signal(centre + u, wavelength);
  };
  return quad::integrate(integrand, -span, span, panels, quad::gauss_legendre<Scalar>(16));
}

/// Debye-Waller factor from the below/above-resonance signal ratio
/// R = (1 + beta) / (1 - beta).
template <typename Scalar>
Scalar beta_from_ratio(Scalar ratio)
{
  if (!(ratio > 1)) throw DomainError("below/above signal ratio must be > 1");
  if (std::isinf(static_cast<double>(ratio))) return 1;
  return (ratio - 1) / (ratio + 1);
}

template <typename Scalar = double>
struct LatticeSpec
{
  DetuningSign sign;
  Scalar wavepacket_width; ///< dz, m
  Scalar wavelength;       ///< m

  Scalar beta() const { return debye_waller(wavepacket_width, wavelength); }
  Scalar momentum_transfer() const { return 4 * pi<Scalar> / wavelength; }
  Scalar signal_factor() const { return bragg_signal_factor(sign, beta()); }
  Scalar scattering_factor() const { return lattice_scattering_factor(sign, beta()); }
};

using LatticeSpecd = LatticeSpec<double>;

} // namespace faraday
