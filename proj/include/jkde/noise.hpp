#pragma once

#include "quadrature.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jkde {

enum class NoiseShape
{
  uniform,
  trapezoid
};

//! Parameters of a noise density with plateau [-gamma1, gamma1] (value 1)
//! and support inside (-gamma2, gamma2).
//!
//! This is a plain parameter record: it can describe invalid densities so
//! that they can be inspected by validate_noise_class(). Use make_noise() to
//! obtain a spec that is guaranteed to be a member of the noise class.
struct NoiseSpec
{
  NoiseShape shape = NoiseShape::uniform;
  double gamma1 = 0.5;
  double gamma2 = 0.5;

  bool operator==(const NoiseSpec&) const = default;
};

inline std::string to_string(NoiseShape shape)
{
  return shape == NoiseShape::uniform ? "uniform" : "trapezoid";
}

inline NoiseShape noise_shape_from_string(std::string_view name)
{
  if (name == "uniform")
    return NoiseShape::uniform;
  if (name == "trapezoid")
    return NoiseShape::trapezoid;
  throw std::invalid_argument("unknown noise '" + std::string(name) +
                              "' (expected uniform|trapezoid)");
}

//! Throws std::invalid_argument unless the spec describes a valid member of
//! the noise class.
inline void check_noise(const NoiseSpec& noise)
{
  const double g1 = noise.gamma1, g2 = noise.gamma2;
  if (!(g1 > 0.0 && g1 <= 0.5 && g2 >= 0.5 && g2 < 1.0))
    throw std::invalid_argument(
      "noise parameters must satisfy 0 < gamma1 <= 0.5 <= gamma2 < 1");
  if (noise.shape == NoiseShape::uniform) {
    if (g1 != 0.5 || g2 != 0.5)
      throw std::invalid_argument("uniform noise requires gamma1 = gamma2 = 0.5");
    return;
  }
  if (!(g1 < g2))
    throw std::invalid_argument("trapezoid noise requires gamma1 < gamma2");
  // plateau mass 2*g1 plus two triangles (g2 - g1) / 2
  if (std::abs(g1 + g2 - 1.0) > 1e-12)
    throw std::invalid_argument(
      "trapezoid noise has mass gamma1 + gamma2 = " + std::to_string(g1 + g2) +
      " != 1; use gamma2 = 1 - gamma1");
}

inline NoiseSpec make_noise(NoiseShape shape, double gamma1, double gamma2)
{
  NoiseSpec spec{ shape, gamma1, gamma2 };
  check_noise(spec);
  return spec;
}

inline NoiseSpec uniform_noise()
{
  return { NoiseShape::uniform, 0.5, 0.5 };
}

inline NoiseSpec trapezoid_noise(double gamma1, double gamma2)
{
  return make_noise(NoiseShape::trapezoid, gamma1, gamma2);
}

//! Largest discrete bandwidth for which the estimator does not smooth
//! across integers: min(gamma1, 1 - gamma2).
inline double plateau_bandwidth(const NoiseSpec& noise)
{
  return std::min(noise.gamma1, 1.0 - noise.gamma2);
}

inline double noise_pdf(const NoiseSpec& noise, double x)
{
  const double a = std::abs(x);
  if (noise.shape == NoiseShape::uniform)
    return a < 0.5 ? 1.0 : 0.0;
  if (a <= noise.gamma1)
    return 1.0;
  if (a >= noise.gamma2)
    return 0.0;
  return (noise.gamma2 - a) / (noise.gamma2 - noise.gamma1);
}

//! Points where the density is not smooth.
inline std::vector<double> noise_knots(const NoiseSpec& noise)
{
  if (noise.shape == NoiseShape::uniform)
    return { -0.5, 0.5 };
  return { -noise.gamma2, -noise.gamma1, noise.gamma1, noise.gamma2 };
}

//! Distribution function of a valid noise density.
inline double noise_cdf(const NoiseSpec& noise, double x)
{
  if (noise.shape == NoiseShape::uniform)
    return std::clamp(x + 0.5, 0.0, 1.0);
  const double g1 = noise.gamma1, g2 = noise.gamma2, w = g2 - g1;
  if (x <= -g2)
    return 0.0;
  if (x >= g2)
    return 1.0;
  if (x < -g1)
    return (x + g2) * (x + g2) / (2.0 * w);
  if (x <= g1)
    return 0.5 * w + (x + g1);
  return 1.0 - (g2 - x) * (g2 - x) / (2.0 * w);
}

//! Inverse of noise_cdf on (0, 1).
inline double noise_quantile(const NoiseSpec& noise, double u)
{
  if (noise.shape == NoiseShape::uniform)
    return u - 0.5;
  const double g1 = noise.gamma1, g2 = noise.gamma2, w = g2 - g1;
  const double shoulder = 0.5 * w;
  if (u < shoulder)
    return -g2 + std::sqrt(2.0 * w * u);
  if (u <= 1.0 - shoulder)
    return u - shoulder - g1;
  return g2 - std::sqrt(2.0 * w * (1.0 - u));
}

//! iid draws by inversion.
inline std::vector<double> noise_sample(const NoiseSpec& noise,
                                        RngStream& stream,
                                        std::size_t count)
{
  std::vector<double> out(count);
  for (auto& e : out)
    e = noise_quantile(noise, stream.uniform01());
  return out;
}

struct ValidationCheck
{
  std::string name;
  bool passed = false;
  double residual = 0.0;
};

struct ValidationReport
{
  std::vector<ValidationCheck> checks;

  bool passed() const
  {
    return std::all_of(checks.begin(), checks.end(),
                       [](const auto& c) { return c.passed; });
  }
};

//! Numerically checks the defining conditions of the noise class: parameter
//! range, unit plateau on [-gamma1, gamma1], vanishing outside
//! (-gamma2, gamma2), and unit mass.
inline ValidationReport validate_noise_class(const NoiseSpec& noise,
                                             std::size_t grid_size = 20001)
{
  ValidationReport report;
  const double g1 = noise.gamma1, g2 = noise.gamma2;
  const bool range_ok = g1 > 0.0 && g1 <= 0.5 && g2 >= 0.5 && g2 < 1.0;
  const bool shape_ok =
    noise.shape == NoiseShape::uniform ? (g1 == 0.5 && g2 == 0.5) : g1 < g2;
  report.checks.push_back({ "parameter range", range_ok && shape_ok, 0.0 });
  if (!(g1 > 0.0 && g2 > g1 - 1e-15)) {
    report.checks.push_back({ "plateau", false, NAN });
    report.checks.push_back({ "support", false, NAN });
    report.checks.push_back({ "unit mass", false, NAN });
    return report;
  }

  // plateau; the open-interval uniform density is checked on the interior
  double plateau_err = 0.0;
  const double plateau_hi =
    noise.shape == NoiseShape::uniform ? std::nextafter(g1, 0.0) : g1;
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double x = -plateau_hi + 2.0 * plateau_hi * i / (grid_size - 1);
    plateau_err = std::max(plateau_err, std::abs(noise_pdf(noise, x) - 1.0));
  }
  report.checks.push_back({ "plateau", plateau_err == 0.0, plateau_err });

  double support_err = 0.0;
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double x = g2 + 2.0 * i / (grid_size - 1);
    support_err = std::max(support_err, std::abs(noise_pdf(noise, x)));
    support_err = std::max(support_err, std::abs(noise_pdf(noise, -x)));
  }
  report.checks.push_back({ "support", support_err == 0.0, support_err });

  const double mass = quadrature::integrate_piecewise(
    [&](double x) { return noise_pdf(noise, x); }, -g2, g2, noise_knots(noise));
  const double mass_err = std::abs(mass - 1.0);
  report.checks.push_back({ "unit mass", mass_err <= 1e-12, mass_err });
  return report;
}

} // namespace jkde
