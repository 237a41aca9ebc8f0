#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace jkde {

enum class KernelFamily
{
  uniform,
  epanechnikov,
  biweight
};

//! A symmetric kernel supported on [-1, 1].
//!
//! Only second-order kernels are built in; `order` is carried so that the
//! theory formulas can be written for general order.
struct KernelSpec
{
  KernelFamily family = KernelFamily::epanechnikov;
  int order = 2;

  explicit KernelSpec(KernelFamily fam = KernelFamily::epanechnikov,
                      int ord = 2)
    : family(fam)
    , order(ord)
  {
    if (order != 2)
      throw std::invalid_argument(
        "kernel order must be 2 (only second-order kernels are built in)");
  }

  bool operator==(const KernelSpec&) const = default;
};

inline std::string to_string(KernelFamily family)
{
  switch (family) {
    case KernelFamily::uniform:
      return "uniform";
    case KernelFamily::epanechnikov:
      return "epanechnikov";
    case KernelFamily::biweight:
      return "biweight";
  }
  return "unknown";
}

inline KernelFamily kernel_family_from_string(std::string_view name)
{
  if (name == "uniform")
    return KernelFamily::uniform;
  if (name == "epanechnikov")
    return KernelFamily::epanechnikov;
  if (name == "biweight")
    return KernelFamily::biweight;
  throw std::invalid_argument("unknown kernel '" + std::string(name) +
                              "' (expected uniform|epanechnikov|biweight)");
}

//! K(t); zero outside [-1, 1].
inline double kernel_eval(const KernelSpec& spec, double t)
{
  const double a = std::abs(t);
  if (!(a <= 1.0))
    return 0.0;
  switch (spec.family) {
    case KernelFamily::uniform:
      return 0.5;
    case KernelFamily::epanechnikov:
      return 0.75 * (1.0 - t * t);
    case KernelFamily::biweight: {
      const double u = 1.0 - t * t;
      return 0.9375 * u * u;
    }
  }
  return 0.0;
}

//! sigma_k = int_{-1}^{1} s^k K(s) ds, in closed form.
inline double kernel_moment(const KernelSpec& spec, int k)
{
  if (k < 0)
    throw std::invalid_argument("kernel moment order must be >= 0");
  if (k % 2 == 1)
    return 0.0;
  // int_{-1}^{1} s^j ds = 2 / (j + 1) for even j
  auto mono = [](int j) { return 2.0 / (j + 1.0); };
  switch (spec.family) {
    case KernelFamily::uniform:
      return 0.5 * mono(k);
    case KernelFamily::epanechnikov:
      return 0.75 * (mono(k) - mono(k + 2));
    case KernelFamily::biweight:
      return 0.9375 * (mono(k) - 2.0 * mono(k + 2) + mono(k + 4));
  }
  return 0.0;
}

//! kappa = int K^2.
inline double kernel_roughness(const KernelSpec& spec)
{
  switch (spec.family) {
    case KernelFamily::uniform:
      return 0.5;
    case KernelFamily::epanechnikov:
      return 0.6;
    case KernelFamily::biweight:
      return 5.0 / 7.0;
  }
  return 0.0;
}

//! int_{-1}^{t} K(s) ds.
inline double kernel_cdf(const KernelSpec& spec, double t)
{
  if (t <= -1.0)
    return 0.0;
  if (t >= 1.0)
    return 1.0;
  switch (spec.family) {
    case KernelFamily::uniform:
      return 0.5 * (t + 1.0);
    case KernelFamily::epanechnikov:
      return 0.5 + 0.75 * (t - t * t * t / 3.0);
    case KernelFamily::biweight: {
      const double t3 = t * t * t;
      return 0.5 + 0.9375 * (t - 2.0 * t3 / 3.0 + t3 * t * t / 5.0);
    }
  }
  return 0.0;
}

//! int_a^b K(s) ds for a <= b (zero for an empty interval).
inline double kernel_mass(const KernelSpec& spec, double a, double b)
{
  if (!(a < b))
    return 0.0;
  return kernel_cdf(spec, b) - kernel_cdf(spec, a);
}

//! prod_j K(w_j); 1 for an empty argument.
inline double product_kernel(const KernelSpec& spec, std::span<const double> w)
{
  double prod = 1.0;
  for (double wj : w) {
    prod *= kernel_eval(spec, wj);
    if (prod == 0.0)
      break;
  }
  return prod;
}

} // namespace jkde
