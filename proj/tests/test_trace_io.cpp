#include <doctest.h>

#include <sstream>

#include "faraday/errors.hpp"
#include "faraday/trace_io.hpp"
#include "test_support.hpp"

using namespace faraday;

namespace {

SignalTrace sample_trace()
{
  auto s = test::scenario("fig2");
  s.seed = 4;
  return detector_output(s);
}

std::string written(const SignalTrace& tr, const Metadata& meta = {})
{
  std::ostringstream out;
  write_trace_csv(out, tr, meta);
  return out.str();
}

} // namespace

TEST_CASE("write then read is lossless")
{
  const auto tr = sample_trace();
  const auto text = written(tr, {{"config.probe.detuning_ghz", "-50"}});
  CHECK(text.rfind("# schema=1\n", 0) == 0);
  std::istringstream in(text);
  const auto file = read_trace_csv(in);
  CHECK(file.trace.size() == tr.size());
  CHECK((file.trace.samples.array() == tr.samples.array()).all());
  CHECK(file.trace.sample_rate == tr.sample_rate);
  CHECK(file.trace.trigger_index == tr.trigger_index);
  REQUIRE(file.trace.filter.has_value());
  CHECK(file.trace.filter->high_cut == tr.filter->high_cut);
  CHECK(file.metadata.front().first == "schema");
  CHECK(file.metadata[1] == std::pair<std::string, std::string>{"config.probe.detuning_ghz", "-50"});
}

TEST_CASE("bare CSV: sample rate and trigger inferred")
{
  std::istringstream in("time_s,diff_power_w\n-0.002,0\n-0.001,0\n0,1\n0.001,2\n");
  const auto file = read_trace_csv(in);
  CHECK(file.trace.sample_rate == doctest::Approx(1000));
  CHECK(file.trace.trigger_index == 2);
  CHECK_FALSE(file.trace.filter.has_value());
}

TEST_CASE("malformed input reports the line")
{
  auto expect_line = [](const std::string& text, long line) {
    std::istringstream in(text);
    try {
      read_trace_csv(in);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(e.line() == line);
    }
  };
  expect_line("time_s,diff_power_w\n0,1\n0.1,x\n", 3);
  expect_line("time_s,diff_power_w\n0,1\n0.1,2,3\n", 3);
  expect_line("time,power\n0,1\n", 1);
  expect_line("# samples = 5\ntime_s,diff_power_w\n0,1\n1,2\n", 5);
  expect_line("# schema=2\ntime_s,diff_power_w\n0,1\n1,2\n", 1);
  expect_line("time_s,diff_power_w\n0,nan\n", 2);
  expect_line("", 1);

  // truncating a real file is caught
  const auto text = written(sample_trace());
  std::istringstream cut(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(read_trace_csv(cut), DataError);
}

TEST_CASE("fit rows")
{
  FitResult f;
  f.amplitude = 1.5e-9;
  f.decay_time = 5e-3;
  f.angular_frequency = 62831.85307179586;
  f.phase = 0.3;
  f.converged = true;
  const auto row = fit_csv_row(f);
  CHECK(row == "1.5e-09,0.0050000000000000001,62831.853071795857,0.29999999999999999,0,1");
  CHECK(std::string(fit_csv_header) == "A_w,tau_s,omega_rad_s,phase_rad,residual_rms_w,converged");
}
