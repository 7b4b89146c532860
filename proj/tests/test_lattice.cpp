#include <doctest.h>

#include <random>

#include "faraday/lattice.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

using namespace faraday;
using test::rel;

namespace {
constexpr double lambda = 852e-9;
constexpr auto below = DetuningSign::below_resonance;
constexpr auto above = DetuningSign::above_resonance;
} // namespace

TEST_CASE("Debye-Waller factor")
{
  CHECK(rel(debye_waller(44.5e-9, lambda), oracle::beta_44_5nm) < 1e-12);
  CHECK(rel(debye_waller(oracle::dz_beta_065, lambda), 0.65) < 1e-12);
  CHECK(debye_waller(0.0, lambda) == 1.0);
  CHECK(debye_waller(1e-6, lambda) < 1e-90);
  CHECK_THROWS_AS(debye_waller(-1e-9, lambda), DomainError);
}

TEST_CASE("Bragg factors and the below/above ratio")
{
  CHECK(bragg_signal_factor(below, 0.65) == doctest::Approx(1.65));
  CHECK(bragg_signal_factor(above, 0.65) == doctest::Approx(0.35));
  CHECK(bragg_signal_factor(below, 0.0) == 1.0);
  CHECK(bragg_signal_factor(above, 1.0) == 0.0);
  CHECK(lattice_scattering_factor(below, 0.65) == doctest::Approx(3.3));
  CHECK(lattice_snr_correction(below, 0.0) == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(bragg_signal_factor(below, 1.5), DomainError);

  const double ratio = bragg_signal_factor(below, 0.65) / bragg_signal_factor(above, 0.65);
  CHECK(rel(ratio, oracle::ratio_beta_065) < 1e-14);
  CHECK(rel(beta_from_ratio(4.7), oracle::beta_ratio_4_7) < 1e-15);
  CHECK(beta_from_ratio(std::numeric_limits<double>::infinity()) == 1.0);
  CHECK_THROWS_AS(beta_from_ratio(1.0), DomainError);
  CHECK_THROWS_AS(beta_from_ratio(0.5), DomainError);
}

TEST_CASE("beta round trip through the ratio")
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 0.999);
  for (int i = 0; i < 1000; ++i) {
    const double beta = u(rng);
    const double r = bragg_signal_factor(below, beta) / bragg_signal_factor(above, beta);
    REQUIRE(std::abs(beta_from_ratio(r) - beta) < 1e-12);
  }
}

TEST_CASE("wavepacket quadrature equals 1 +- beta")
{
  CHECK(rel(wavepacket_averaged_signal(below, 44.5e-9, lambda), oracle::wavepacket_below_44_5nm) < 1e-10);
  for (double dz : {0.0, 5e-9, 20e-9, 44.5e-9, 80e-9, 200e-9}) {
    const double beta = debye_waller(dz, lambda);
    CAPTURE(dz);
    CHECK(std::abs(wavepacket_averaged_signal(below, dz, lambda) - (1 + beta)) < 1e-10);
    CHECK(std::abs(wavepacket_averaged_signal(above, dz, lambda) - (1 - beta)) < 1e-10);
  }
}

TEST_CASE("position signal")
{
  CHECK(position_signal(0.0, lambda) == 2.0);
  CHECK(std::abs(position_signal(lambda / 4, lambda)) < 1e-15);
  CHECK(position_signal(lambda / 2, lambda) == doctest::Approx(2.0));
}

TEST_CASE("LatticeSpec and detuning sign")
{
  CHECK(detuning_sign(-1.0) == below);
  CHECK(detuning_sign(1.0) == above);
  CHECK_THROWS_AS(detuning_sign(0.0), DomainError);
  CHECK(to_string(below) == "below_resonance");
  const LatticeSpecd l{above, 44.5e-9, lambda};
  CHECK(l.beta() == doctest::Approx(0.65).epsilon(1e-5));
  CHECK(l.signal_factor() == doctest::Approx(0.35).epsilon(1e-4));
  CHECK(l.scattering_factor() == doctest::Approx(0.7).epsilon(1e-4));
  CHECK(l.momentum_transfer() == doctest::Approx(4 * std::numbers::pi / lambda));
}
