#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "faraday/config.hpp"

namespace faraday {

/// One scenario key varied over a list of values, with repeated seeds per
/// point. `parameter` is a full config key such as probe.detuning_ghz.
struct SweepSpec
{
  std::string parameter;
  std::vector<double> values;
  int seeds_per_point = 1; ///< 0: analytic columns only
};

/// Reads [sweep]: parameter, and either values = [...] or start, stop, count
/// and spacing ("linear" | "log"); seeds_per_point. A parameter given without
/// its unit suffix (probe.detuning) is resolved to the unique matching key.
/// Throws ConfigError.
SweepSpec sweep_from_config(const Config& config);

/// splitmix64 over (base, point, repetition).
std::uint64_t derive_seed(std::uint64_t base, std::size_t point, std::size_t repetition);

struct SweepRow
{
  std::size_t point = 0;
  std::size_t seed_index = 0;
  std::uint64_t seed = 0;
  double value = 0;
  double scattering_time = 0;     ///< lattice tau_s, s
  double decay_time = 0;          ///< predicted tau_eff, s
  double snr_analytic = 0;
  double snr_measured = 0;        ///< NaN without seeds or when the fit fails
  double amplitude = 0;           ///< fitted, W
  double noise_rms = 0;           ///< measured, W
  double fit_decay_time = 0;      ///< s
  bool converged = false;
};

/// Runs `fn(i)` for i in [0, n) on `jobs` threads (0: hardware concurrency).
/// The first exception thrown is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn)
{
  std::size_t workers = jobs > 0 ? std::size_t(jobs) : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

/// Every point is validated before any work starts (ConfigError or
/// ValidationError). Rows come back ordered by (point, seed_index) whatever
/// the scheduling.
std::vector<SweepRow> run_sweep(const Config& base, const SweepSpec& spec, std::uint64_t base_seed,
                                int jobs = 0);

/// Schema-1 CSV, one row per (point, seed) or one per point without seeds.
void write_sweep_csv(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows);

/// Mean and standard error of snr_measured per point, NaN rows skipped.
struct PointSummary
{
  double value;
  double scattering_time;
  double snr_analytic;
  double snr_mean;
  double snr_stderr;
  std::size_t samples;
};
std::vector<PointSummary> summarize(const SweepSpec& spec, const std::vector<SweepRow>& rows);

} // namespace faraday
