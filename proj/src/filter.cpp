#include "faraday/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "faraday/errors.hpp"

namespace faraday {

using cplx = std::complex<double>;

std::vector<std::string> FilterSpec::violations(double sample_rate) const
{
  std::vector<std::string> v;
  if (!(low_cut > 0)) v.emplace_back("filter.low_cut must be > 0");
  if (!(high_cut > low_cut)) v.emplace_back("filter.high_cut must exceed filter.low_cut");
  if (!(high_cut < sample_rate / 2)) v.emplace_back("filter.high_cut must be below Nyquist");
  if (order < 2 || order % 2 != 0) v.emplace_back("filter.order must be an even integer >= 2");
  return v;
}

BandpassFilter::BandpassFilter(const FilterSpec& spec, double sample_rate)
  : spec_(spec)
  , sample_rate_(sample_rate)
{
  if (!(sample_rate > 0)) throw DomainError("sample rate must be > 0");
  if (auto v = spec.violations(sample_rate); !v.empty()) throw DomainError(join_violations(v));

  const double pi = std::numbers::pi;
  const double fs2 = 2 * sample_rate;
  const double w_lo = fs2 * std::tan(pi * spec.low_cut / sample_rate);
  const double w_hi = fs2 * std::tan(pi * spec.high_cut / sample_rate);
  const double bw = w_hi - w_lo;
  const double w0sq = w_lo * w_hi;
  const int n = spec.order / 2;

  std::vector<cplx> poles;
  for (int k = 0; k < n; ++k) {
    const cplx p = std::polar(1.0, pi * (2.0 * k + n + 1) / (2.0 * n));
    const cplx pb = p * bw;
    const cplx disc = std::sqrt(pb * pb - 4.0 * w0sq);
    for (cplx s : {(pb + disc) / 2.0, (pb - disc) / 2.0})
      poles.push_back((fs2 + s) / (fs2 - s));
  }

  // Conjugate pairs first, then any real poles two at a time.
  std::vector<double> real_poles;
  const double eps = 1e-12;
  for (const auto& z : poles) {
    if (z.imag() > eps)
      sections_.push_back({1, 0, -1, -2 * z.real(), std::norm(z)});
    else if (std::abs(z.imag()) <= eps)
      real_poles.push_back(z.real());
  }
  std::sort(real_poles.begin(), real_poles.end());
  for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2)
    sections_.push_back({1, 0, -1, -(real_poles[i] + real_poles[i + 1]),
                         real_poles[i] * real_poles[i + 1]});

  slowest_ = 0;
  for (const auto& z : poles)
    slowest_ = std::max(slowest_, -1.0 / (sample_rate * std::log(std::abs(z))));

  centre_ = sample_rate / pi * std::atan(std::sqrt(w0sq) / fs2);
  const double gain = std::abs(response(centre_));
  sections_.front().b0 /= gain;
  sections_.front().b1 /= gain;
  sections_.front().b2 /= gain;

  // Parseval on the impulse response: sum h^2 = (2/fs) * integral_0^{fs/2} |H|^2.
  const auto length = static_cast<Eigen::Index>(
    std::min(2e7, std::ceil(60.0 * slowest_ * sample_rate) + 64.0));
  Eigen::VectorXd impulse = Eigen::VectorXd::Zero(length);
  impulse(0) = 1;
  enbw_ = apply(impulse).squaredNorm() * sample_rate / 2;
}

Eigen::VectorXd BandpassFilter::apply(const Eigen::Ref<const Eigen::VectorXd>& input) const
{
  Eigen::VectorXd y = input;
  for (const auto& s : sections_) {
    double z1 = 0, z2 = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double x = y(i);
      const double out = s.b0 * x + z1;
      z1 = s.b1 * x - s.a1 * out + z2;
      z2 = s.b2 * x - s.a2 * out;
      y(i) = out;
    }
  }
  return y;
}

cplx BandpassFilter::response(double frequency) const
{
  const cplx zinv = std::polar(1.0, -2 * std::numbers::pi * frequency / sample_rate_);
  cplx h = 1;
  for (const auto& s : sections_)
    h *= (s.b0 + zinv * (s.b1 + zinv * s.b2)) / (1.0 + zinv * (s.a1 + zinv * s.a2));
  return h;
}

double effective_tau_pd(double bandwidth)
{
  if (!(bandwidth > 0)) throw DomainError("bandwidth must be > 0");
  return 1 / (4 * bandwidth);
}

double bandwidth_of(double tau_pd)
{
  if (!(tau_pd > 0)) throw DomainError("time constant must be > 0");
  return 1 / (4 * tau_pd);
}

} // namespace faraday
