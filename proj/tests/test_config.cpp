#include <doctest.h>

#include "faraday/config.hpp"
#include "faraday/errors.hpp"
#include "faraday/reproduce.hpp"
#include "test_support.hpp"

using namespace faraday;

TEST_CASE("parse the TOML subset")
{
  const auto c = Config::parse(R"(
# comment
[probe]
detuning_ghz = -50   # trailing comment
aperture_um = "optimal"
[trace]
noise = false
background_decay_ms = inf
[sweep]
values = [1, 2.5, -3e2, 1_000]
parameter = "with # hash \"quoted\""
)");
  CHECK(c.number("probe.detuning_ghz") == -50);
  CHECK(std::get<std::string>(*c.find("probe.aperture_um")) == "optimal");
  CHECK(std::get<bool>(*c.find("trace.noise")) == false);
  CHECK(std::isinf(c.number("trace.background_decay_ms")));
  CHECK(std::get<std::vector<double>>(*c.find("sweep.values")) == std::vector<double>{1, 2.5, -300, 1000});
  CHECK(std::get<std::string>(*c.find("sweep.parameter")) == "with # hash \"quoted\"");
  CHECK_FALSE(c.contains("probe.missing"));
}

TEST_CASE("parse errors carry the line")
{
  CHECK_THROWS_WITH_AS(Config::parse("[probe]\ndetuning_ghz = abc\n", "x.toml"),
                       doctest::Contains("x.toml:2"), ConfigError);
  CHECK_THROWS_AS(Config::parse("detuning_ghz = 1\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[nosuch]\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[probe\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[probe]\nx = \"open\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[probe]\nx\n"), ConfigError);
}

TEST_CASE("to_toml round trips")
{
  auto c = test::preset("fig3");
  c.set("probe.detuning_ghz", 0.1 + 0.2);
  c.set("trace.background_decay_ms", std::numeric_limits<double>::infinity());
  const auto back = Config::parse(c.to_toml());
  CHECK(back.entries() == c.entries());
  // manifest text parses back to the same config too
  CHECK(Config::parse(manifest_text(c, {"a = 1 W"})).entries() == c.entries());
}

TEST_CASE("merge and overrides")
{
  auto c = test::preset("defaults");
  c.merge(Config::parse("[cloud]\natom_number = 5e6\n"));
  CHECK(c.number("cloud.atom_number") == 5e6);
  c.set_assignment("probe.aperture_um=optimal");
  c.set_assignment("probe.detuning_ghz = -20");
  c.set_assignment("sweep.values=[1,2]");
  CHECK(c.number("probe.detuning_ghz") == -20);
  CHECK(std::get<std::string>(*c.find("probe.aperture_um")) == "optimal");
  CHECK_THROWS_AS(c.set_assignment("nodot=1"), ConfigError);
  CHECK_THROWS_AS(c.set_assignment("bogus.key=1"), ConfigError);
  CHECK_THROWS_AS(c.set_assignment("probe.detuning_ghz"), ConfigError);
}

TEST_CASE("scenario from config converts units")
{
  const auto s = test::scenario("fig5a");
  CHECK(s.transition.wavelength == doctest::Approx(852e-9));
  CHECK(s.transition.linewidth == doctest::Approx(2 * std::numbers::pi * 5.22e6));
  CHECK(s.cloud.radius == doctest::Approx(750e-6));
  CHECK(s.probe.detuning == doctest::Approx(-2 * std::numbers::pi * 23e9));
  CHECK(s.probe.intensity == doctest::Approx(17459.4269));
  CHECK(s.probe.aperture_radius == doctest::Approx(optimal_aperture(750e-6)));
  CHECK(s.probe.detector_time_constant == doctest::Approx(125e-6).epsilon(0.01));
  CHECK(s.bias_field == doctest::Approx(3e-6));
  CHECK(s.pre_trigger == doctest::Approx(20e-3));
  CHECK(s.sample_rate == doctest::Approx(200e3));
  CHECK(s.filter.low_cut == doctest::Approx(9.6e3));
  CHECK(s.background_decay == doctest::Approx(5e-3));

  auto c = test::preset("fig5a");
  c.set("detector.tau_us", 100.0);
  c.set("probe.aperture_um", 500.0);
  const auto t = scenario_from_config(c);
  CHECK(t.probe.detector_time_constant == doctest::Approx(100e-6));
  CHECK(t.probe.aperture_radius == doctest::Approx(500e-6));
  CHECK(config_diagnostics(c).size() >= 1);
}

TEST_CASE("config errors list every problem")
{
  auto c = test::preset("defaults");
  c.set("probe.detuning_ghz", std::string("fast"));
  c.set("cloud.colour", 1.0);
  c.set("trace.noise", 1.0);
  try {
    scenario_from_config(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("probe.detuning_ghz") != std::string::npos);
    CHECK(what.find("cloud.colour") != std::string::npos);
    CHECK(what.find("trace.noise") != std::string::npos);
  }
  auto d = test::preset("defaults");
  d.set("cloud.atom_number", 0.0);
  CHECK_THROWS_AS(scenario_from_config(d), ValidationError);

  Config empty;
  CHECK_THROWS_AS(scenario_from_config(empty), ConfigError);
}

TEST_CASE("seed from config")
{
  auto c = test::preset("defaults");
  c.set("run.seed", std::string("18446744073709551615"));
  CHECK(scenario_from_config(c).seed == 18446744073709551615ULL);
  c.set("run.seed", 12.0);
  CHECK(scenario_from_config(c).seed == 12);
  c.set("run.seed", -1.0);
  CHECK_THROWS_AS(scenario_from_config(c), ConfigError);
}

TEST_CASE("every preset loads and validates")
{
  for (const char* name : {"defaults", "fig2", "fig3", "fig4", "fig5a", "fig5b"}) {
    CAPTURE(name);
    CHECK_NOTHROW(test::scenario(name));
  }
  CHECK_THROWS_AS(test::preset("fig9"), ConfigError);
}
