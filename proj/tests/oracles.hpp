#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the library's quadrature or estimator code.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

// 10-point Gauss-Legendre nodes and weights on [-1, 1].
inline constexpr std::array<double, 5> gl_nodes{
  0.1488743389816312108848260, 0.4333953941292471907992659,
  0.6794095682990244062343274, 0.8650633666889845107320967,
  0.9739065285171717200779640
};
inline constexpr std::array<double, 5> gl_weights{
  0.2955242247147528701738930, 0.2692667193099963550912269,
  0.2190863625159820439955349, 0.1494513491505805931457763,
  0.0666713443086881375935688
};

inline double gauss_legendre(const std::function<double(double)>& f,
                             double a,
                             double b,
                             int panels = 64)
{
  if (!(a < b))
    return 0.0;
  const double w = (b - a) / panels;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = a + (k + 0.5) * w;
    const double half = 0.5 * w;
    double s = 0.0;
    for (std::size_t i = 0; i < gl_nodes.size(); ++i)
      s += gl_weights[i] * (f(mid - half * gl_nodes[i]) + f(mid + half * gl_nodes[i]));
    total += s * half;
  }
  return total;
}

// Splits [a, b] at the given breakpoints, so piecewise-polynomial integrands
// are integrated exactly on each piece.
inline double integrate(const std::function<double(double)>& f,
                        double a,
                        double b,
                        std::vector<double> breaks = {},
                        int panels = 16)
{
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = std::max(breaks[i], a);
    const double hi = std::min(breaks[i + 1], b);
    if (lo < hi)
      total += gauss_legendre(f, lo, hi, panels);
  }
  return total;
}

// Kernel formulas written out again.
inline double uniform_k(double t) { return std::abs(t) <= 1.0 ? 0.5 : 0.0; }
inline double epan_k(double t) { return std::abs(t) <= 1.0 ? 0.75 * (1.0 - t * t) : 0.0; }
inline double biweight_k(double t)
{
  const double u = 1.0 - t * t;
  return std::abs(t) <= 1.0 ? 15.0 / 16.0 * u * u : 0.0;
}

inline double uniform_noise(double e) { return std::abs(e) < 0.5 ? 1.0 : 0.0; }

inline std::function<double(double)> trapezoid(double g1, double g2)
{
  return [g1, g2](double e) {
    const double a = std::abs(e);
    if (a <= g1)
      return 1.0;
    if (a >= g2)
      return 0.0;
    return (g2 - a) / (g2 - g1);
  };
}

// E f~(z) - f(z) for pmf on {zmin, ..., zmin + probs.size() - 1}, integrating
// over t = (z' + e - z)/h instead of over e.
inline double bias(const std::vector<double>& probs,
                   std::int64_t zmin,
                   std::int64_t z,
                   double h,
                   const std::function<double(double)>& kernel,
                   const std::function<double(double)>& noise,
                   double g1,
                   double g2)
{
  double expectation = 0.0, fz = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto zp = zmin + static_cast<std::int64_t>(i);
    if (zp == z)
      fz = probs[i];
    const double d = static_cast<double>(zp - z);
    // e = h t - d
    const std::vector<double> br{ (d - g2) / h, (d - g1) / h, (d + g1) / h, (d + g2) / h };
    expectation += probs[i] * integrate([&](double t) { return kernel(t) * noise(h * t - d); },
                                        -1.0, 1.0, br, 32);
  }
  return expectation - fz;
}

} // namespace oracle
