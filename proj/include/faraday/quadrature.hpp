#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "faraday/constants.hpp"

namespace faraday::quad {

template <typename Scalar = double>
struct GaussLegendreRule
{
  std::vector<Scalar> nodes;   // on [-1, 1]
  std::vector<Scalar> weights;
};

/// n-point Gauss-Legendre rule; nodes by Newton iteration on P_n.
template <typename Scalar = double>
GaussLegendreRule<Scalar> gauss_legendre(std::size_t n)
{
  GaussLegendreRule<Scalar> rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    Scalar x = std::cos(pi<Scalar> * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      Scalar p0 = 1, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const Scalar p2 = ((2 * Scalar(k) - 1) * x * p1 - (Scalar(k) - 1) * p0) / Scalar(k);
        p0 = p1;
        p1 = p2;
      }
      dp = Scalar(n) * (x * p1 - p0) / (x * x - 1);
      const Scalar dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 4 * std::numeric_limits<Scalar>::epsilon()) break;
    }
    const Scalar w = 2 / ((1 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

/// Composite Gauss-Legendre over [a, b] with `panels` equal panels.
template <typename Scalar, typename F>
Scalar integrate(F&& f, Scalar a, Scalar b, std::size_t panels,
                 const GaussLegendreRule<Scalar>& rule)
{
  const Scalar h = (b - a) / Scalar(panels);
  Scalar total = 0;
  for (std::size_t p = 0; p < panels; ++p) {
    const Scalar mid = a + (Scalar(p) + Scalar(0.5)) * h;
    Scalar panel = 0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      panel += rule.weights[i] * f(mid + h / 2 * rule.nodes[i]);
    total += panel * h / 2;
  }
  return total;
}

template <typename Scalar, typename F>
Scalar integrate(F&& f, Scalar a, Scalar b, std::size_t panels = 16, std::size_t order = 20)
{
  return integrate(std::forward<F>(f), a, b, panels, gauss_legendre<Scalar>(order));
}

} // namespace faraday::quad
