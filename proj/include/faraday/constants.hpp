#pragma once

#include <numbers>

namespace faraday {

/// CODATA 2018 values, SI units.
template <typename Scalar = double>
struct PhysicalConstants
{
  Scalar hbar          = Scalar(1.054571817e-34L);  // J s
  Scalar c             = Scalar(299792458.0L);      // m / s
  Scalar epsilon0      = Scalar(8.8541878128e-12L); // F / m
  Scalar bohr_magneton = Scalar(9.2740100783e-24L); // J / T
  Scalar planck_h      = Scalar(6.62607015e-34L);   // J s
};

using PhysicalConstantsd = PhysicalConstants<double>;

template <typename Scalar>
inline constexpr Scalar pi = std::numbers::pi_v<Scalar>;

namespace units {
inline constexpr double nm = 1e-9;
inline constexpr double um = 1e-6;
inline constexpr double mm = 1e-3;
inline constexpr double ms = 1e-3;
inline constexpr double us = 1e-6;
inline constexpr double kHz = 1e3;
inline constexpr double MHz = 1e6;
inline constexpr double GHz = 1e9;
inline constexpr double mW_per_cm2 = 10.0; // W / m^2
inline constexpr double gauss = 1e-4;      // T
inline constexpr double mgauss = 1e-7;     // T

/// Ordinary frequency to angular frequency.
inline constexpr double angular(double hz) { return 2.0 * std::numbers::pi * hz; }
} // namespace units

} // namespace faraday
