#include "faraday/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string_view>

#include <fmt/format.h>

#include "faraday/errors.hpp"

namespace faraday {

namespace {

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view text, long line)
{
  text = trim(text);
  double value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty())
    throw DataError(fmt::format("cannot parse number '{}'", text), line);
  if (!std::isfinite(value)) throw DataError("non-finite value", line);
  return value;
}

const std::string* find(const Metadata& meta, std::string_view key)
{
  for (const auto& [k, v] : meta)
    if (k == key) return &v;
  return nullptr;
}

} // namespace

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

void write_trace_csv(std::ostream& out, const SignalTrace& trace, const Metadata& metadata)
{
  out << "# schema=1\n";
  for (const auto& [k, v] : metadata) out << "# " << k << " = " << v << '\n';
  out << "# sample_rate_hz = " << format_double(trace.sample_rate) << '\n';
  out << "# trigger_index = " << trace.trigger_index << '\n';
  out << "# samples = " << trace.size() << '\n';
  if (trace.filter) {
    out << "# filter.low_cut_hz = " << format_double(trace.filter->low_cut) << '\n';
    out << "# filter.high_cut_hz = " << format_double(trace.filter->high_cut) << '\n';
    out << "# filter.order = " << trace.filter->order << '\n';
  }
  out << "time_s,diff_power_w\n";
  for (Eigen::Index i = 0; i < trace.size(); ++i)
    out << format_double(trace.time(i)) << ',' << format_double(trace.samples(i)) << '\n';
}

TraceFile read_trace_csv(std::istream& in)
{
  TraceFile file;
  std::vector<double> times, values;
  std::string raw;
  long line = 0;
  bool header = false;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = trim(raw);
    if (text.empty()) continue;
    if (text.front() == '#') {
      if (header) throw DataError("comment after the column header", line);
      auto body = trim(text.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      file.metadata.emplace_back(std::string(trim(body.substr(0, eq))),
                                 std::string(trim(body.substr(eq + 1))));
      continue;
    }
    if (!header) {
      if (text != "time_s,diff_power_w")
        throw DataError(fmt::format("expected header 'time_s,diff_power_w', got '{}'", text), line);
      header = true;
      continue;
    }
    const auto comma = text.find(',');
    if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos)
      throw DataError("expected two comma-separated fields", line);
    times.push_back(parse_number(text.substr(0, comma), line));
    values.push_back(parse_number(text.substr(comma + 1), line));
  }
  if (!header) throw DataError("missing column header 'time_s,diff_power_w'", line + 1);
  if (const auto* schema = find(file.metadata, "schema"); schema && *schema != "1")
    throw DataError("unsupported trace schema " + *schema, 1);

  if (const auto* n = find(file.metadata, "samples")) {
    if (static_cast<double>(values.size()) != parse_number(*n, 0))
      throw DataError(fmt::format("truncated trace: expected {} samples, found {}", *n,
                                  values.size()),
                      line + 1);
  }
  if (values.empty()) throw DataError("trace has no samples", line + 1);

  auto& trace = file.trace;
  trace.samples = Eigen::Map<const Eigen::VectorXd>(values.data(), Eigen::Index(values.size()));
  if (const auto* fs = find(file.metadata, "sample_rate_hz")) {
    trace.sample_rate = parse_number(*fs, 0);
  } else {
    if (times.size() < 2) throw DataError("cannot infer sample rate from one sample", line);
    trace.sample_rate = double(times.size() - 1) / (times.back() - times.front());
  }
  if (!(trace.sample_rate > 0)) throw DataError("sample rate must be positive", line);
  if (const auto* trig = find(file.metadata, "trigger_index")) {
    trace.trigger_index = static_cast<Eigen::Index>(parse_number(*trig, 0));
  } else {
    trace.trigger_index = 0;
    while (trace.trigger_index < Eigen::Index(times.size()) && times[trace.trigger_index] < 0)
      ++trace.trigger_index;
  }
  if (trace.trigger_index < 0 || trace.trigger_index >= trace.size())
    throw DataError("trigger index outside the trace", line);

  const auto* lo = find(file.metadata, "filter.low_cut_hz");
  const auto* hi = find(file.metadata, "filter.high_cut_hz");
  const auto* order = find(file.metadata, "filter.order");
  if (lo && hi && order)
    trace.filter = FilterSpec{parse_number(*lo, 0), parse_number(*hi, 0),
                              static_cast<int>(parse_number(*order, 0))};
  return file;
}

std::string fit_csv_row(const FitResult& fit)
{
  return fmt::format("{},{},{},{},{},{}", format_double(fit.amplitude),
                     format_double(fit.decay_time), format_double(fit.angular_frequency),
                     format_double(fit.phase), format_double(fit.residual_rms),
                     fit.converged ? 1 : 0);
}

} // namespace faraday
