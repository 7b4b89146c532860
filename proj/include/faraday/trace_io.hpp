#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "faraday/analysis.hpp"
#include "faraday/synth.hpp"

namespace faraday {

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Trace CSV, schema 1:
///
///   # schema=1
///   # <key> = <value>            (caller metadata, e.g. the resolved config)
///   # sample_rate_hz = ...
///   # trigger_index = ...
///   # samples = ...
///   # filter.low_cut_hz / filter.high_cut_hz / filter.order   (if filtered)
///   time_s,diff_power_w
///   <t>,<P_x - P_y>              (17 significant digits)
void write_trace_csv(std::ostream& out, const SignalTrace& trace, const Metadata& metadata = {});

struct TraceFile
{
  SignalTrace trace;
  Metadata metadata; ///< every "# key = value" line, in file order
};

/// Throws DataError (with the 1-based line number) on malformed or truncated
/// input.
TraceFile read_trace_csv(std::istream& in);

inline constexpr const char* fit_csv_header = "A_w,tau_s,omega_rad_s,phase_rad,residual_rms_w,converged";

std::string fit_csv_row(const FitResult& fit);

/// Shortest-round-trip-safe decimal form used in every CSV we write.
std::string format_double(double value);

} // namespace faraday
