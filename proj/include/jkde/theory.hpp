#pragma once

#include "kernels.hpp"
#include "noise.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace jkde::theory {

//! Probability mass function on consecutive integers starting at z_min.
class DiscretePmf
{
public:
  DiscretePmf(std::int64_t z_min, std::vector<double> probs)
    : z_min_(z_min)
    , probs_(std::move(probs))
  {
    if (probs_.empty())
      throw std::invalid_argument("pmf needs at least one probability");
    double total = 0.0;
    for (double v : probs_) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("pmf entries must be non-negative");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("pmf must sum to 1");
  }

  //! f(z), zero outside the support.
  double operator()(std::int64_t z) const
  {
    if (z < z_min_ || z >= z_max_plus_one())
      return 0.0;
    return probs_[static_cast<std::size_t>(z - z_min_)];
  }

  std::int64_t z_min() const { return z_min_; }
  std::int64_t z_max() const { return z_max_plus_one() - 1; }
  const std::vector<double>& probs() const { return probs_; }

private:
  std::int64_t z_max_plus_one() const
  {
    return z_min_ + static_cast<std::int64_t>(probs_.size());
  }

  std::int64_t z_min_;
  std::vector<double> probs_;
};

//! Density value and pure ell-th partial derivatives in each continuous
//! direction at a point.
struct TheoryPoint
{
  double f = 0.0;
  std::vector<double> partials;
};

inline double factorial(int k)
{
  double r = 1.0;
  for (int i = 2; i <= k; ++i)
    r *= i;
  return r;
}

//! Leading bias term sum_j b_j^ell sigma_ell / ell! * d^ell f / dx_j^ell.
inline double theorem1_bias(const TheoryPoint& point,
                            std::span<const double> b,
                            const KernelSpec& kernel)
{
  if (b.size() != point.partials.size())
    throw std::invalid_argument("one bandwidth per continuous direction");
  const int ell = kernel.order;
  const double c = kernel_moment(kernel, ell) / factorial(ell);
  double s = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (!(b[j] > 0.0))
      throw std::invalid_argument("bandwidths must be positive");
    s += std::pow(b[j], ell) * point.partials[j];
  }
  return c * s;
}

//! Common continuous bandwidth.
inline double theorem1_bias(const TheoryPoint& point,
                            double b,
                            const KernelSpec& kernel)
{
  const std::vector<double> bs(point.partials.size(), b);
  if (!(b > 0.0))
    throw std::invalid_argument("bandwidths must be positive");
  return theorem1_bias(point, bs, kernel);
}

//! Leading variance term f / (n prod b) * (kappa^(p+q) / prod h - prod b * f),
//! where p = h.size() and q = b.size().
inline double theorem1_variance(double f,
                                std::size_t n,
                                std::span<const double> h,
                                std::span<const double> b,
                                const KernelSpec& kernel)
{
  if (n < 1)
    throw std::invalid_argument("variance needs n >= 1");
  double prod_h = 1.0, prod_b = 1.0;
  for (double v : h) {
    if (!(v > 0.0))
      throw std::invalid_argument("bandwidths must be positive");
    prod_h *= v;
  }
  for (double v : b) {
    if (!(v > 0.0))
      throw std::invalid_argument("bandwidths must be positive");
    prod_b *= v;
  }
  const double kappa_pow =
    std::pow(kernel_roughness(kernel), static_cast<double>(h.size() + b.size()));
  return f / (static_cast<double>(n) * prod_b) *
         (kappa_pow / prod_h - prod_b * f);
}

inline double amse(const TheoryPoint& point,
                   std::size_t n,
                   std::span<const double> h,
                   std::span<const double> b,
                   const KernelSpec& kernel)
{
  const double bias = b.empty() ? 0.0 : theorem1_bias(point, b, kernel);
  return bias * bias + theorem1_variance(point.f, n, h, b, kernel);
}

//! Asymptotic relative efficiency of the jittering estimator against the
//! sample frequency at h = min(gamma1, 1 - gamma2), purely discrete case.
inline double are(double f_z, const NoiseSpec& noise, const KernelSpec& kernel)
{
  if (!(f_z >= 0.0 && f_z <= 1.0))
    throw std::invalid_argument("ARE requires 0 <= f(z) <= 1");
  if (f_z == 1.0)
    return 0.0;
  const double g = plateau_bandwidth(noise);
  if (!(g > 0.0))
    throw std::invalid_argument("noise plateau must be positive");
  return (1.0 - f_z) / (kernel_roughness(kernel) / g - f_z);
}

//! (f(z + k) - 2 f(z) + f(z - k)) / k^2
inline double central_difference(const DiscretePmf& pmf, std::int64_t z, int k)
{
  if (k < 1)
    throw std::invalid_argument("step size must be >= 1");
  return (pmf(z + k) - 2.0 * pmf(z) + pmf(z - k)) / (static_cast<double>(k) * k);
}

//! Expected kernel weight that an observation at distance d = z' - z puts
//! on z: w_d = int K(t) eta(h t - d) dt.
inline double jitter_weight(std::int64_t d,
                            double h,
                            const KernelSpec& kernel,
                            const NoiseSpec& noise)
{
  if (!(h > 0.0))
    throw std::invalid_argument("bandwidth must be positive");
  const double dd = static_cast<double>(d);
  std::vector<double> knots;
  for (double e : noise_knots(noise))
    knots.push_back((dd + e) / h);
  return quadrature::integrate_piecewise(
    [&](double t) { return kernel_eval(kernel, t) * noise_pdf(noise, h * t - dd); },
    -1.0, 1.0, knots);
}

//! All non-zero weights w_d, as (d, w_d) pairs with d ascending.
inline std::vector<std::pair<std::int64_t, double>> jitter_weights(
  double h,
  const KernelSpec& kernel,
  const NoiseSpec& noise)
{
  const auto reach = static_cast<std::int64_t>(std::ceil(h + noise.gamma2));
  std::vector<std::pair<std::int64_t, double>> out;
  for (std::int64_t d = -reach; d <= reach; ++d)
    out.emplace_back(d, jitter_weight(d, h, kernel, noise));
  return out;
}

//! Finite-sample bias of the purely discrete estimator under uniform noise
//! and a symmetric kernel:
//!   sum_{k=1}^{ceil(h - 1/2)} rho_k(h) Delta_k^2 f(z),
//!   rho_k(h) = k^2 int_{A_k} K,  A_k = [(-1/2 - k)/h, (1/2 - k)/h] cap [-1, 1].
//! The kernel mass over A_k uses the closed-form kernel distribution.
inline double bias_corollary1(const DiscretePmf& pmf,
                              std::int64_t z,
                              double h,
                              const KernelSpec& kernel)
{
  if (!(h > 0.0))
    throw std::invalid_argument("bandwidth must be positive");
  const auto kmax = static_cast<int>(std::ceil(h - 0.5));
  double bias = 0.0;
  for (int k = 1; k <= kmax; ++k) {
    const double lo = std::max((-0.5 - k) / h, -1.0);
    const double hi = std::min((0.5 - k) / h, 1.0);
    const double rho = static_cast<double>(k) * k * kernel_mass(kernel, lo, hi);
    bias += rho * central_difference(pmf, z, k);
  }
  return bias;
}

//! Weight rho^eta_{+-k}(h) = k^2 int_{A} K(t) eta(+-k - h t) dt over
//! A = [(+-k - gamma2)/h, (+-k + gamma2)/h] cap [-1, 1], the set on which
//! the noise density can be non-zero.
inline double lemma2_rho(int signed_k,
                         double h,
                         const KernelSpec& kernel,
                         const NoiseSpec& noise)
{
  const double k = static_cast<double>(signed_k);
  const double lo = std::max((k - noise.gamma2) / h, -1.0);
  const double hi = std::min((k + noise.gamma2) / h, 1.0);
  if (!(lo < hi))
    return 0.0;
  std::vector<double> knots;
  for (double e : noise_knots(noise))
    knots.push_back((k - e) / h);
  return k * k *
         quadrature::integrate_piecewise(
           [&](double t) { return kernel_eval(kernel, t) * noise_pdf(noise, k - h * t); },
           lo, hi, knots);
}

//! Finite-sample bias for general noise of the class, as a weighted sum of
//! forward and backward differences:
//!   sum_{k=1}^{K} [rho_k f(z+k) - (rho_k + rho_-k) f(z) + rho_-k f(z-k)] / k^2
//! with K = ceil(h + gamma2 - 1), the largest step with non-zero weight.
//! For uniform noise K = ceil(h - 1/2).
inline double bias_lemma2(const DiscretePmf& pmf,
                          std::int64_t z,
                          double h,
                          const KernelSpec& kernel,
                          const NoiseSpec& noise)
{
  if (!(h > 0.0))
    throw std::invalid_argument("bandwidth must be positive");
  const auto kmax = static_cast<int>(std::ceil(h + noise.gamma2 - 1.0));
  double bias = 0.0;
  for (int k = 1; k <= kmax; ++k) {
    const double fwd = lemma2_rho(k, h, kernel, noise);
    const double bwd = lemma2_rho(-k, h, kernel, noise);
    bias += (fwd * pmf(z + k) - (fwd + bwd) * pmf(z) + bwd * pmf(z - k)) /
            (static_cast<double>(k) * k);
  }
  return bias;
}

//! E{f~(z)} - f(z) for a single observation, computed directly in the noise
//! variable: sum_{z'} f(z') int eta(e) K((z' - z + e)/h) / h de - f(z).
//! Ground truth for the bias formulas.
inline double bias_oracle_quadrature(const DiscretePmf& pmf,
                                     std::int64_t z,
                                     double h,
                                     const KernelSpec& kernel,
                                     const NoiseSpec& noise)
{
  if (!(h > 0.0))
    throw std::invalid_argument("bandwidth must be positive");
  double expectation = 0.0;
  for (std::int64_t zp = pmf.z_min(); zp <= pmf.z_max(); ++zp) {
    const double mass = pmf(zp);
    if (mass == 0.0)
      continue;
    const double d = static_cast<double>(zp - z);
    auto knots = noise_knots(noise);
    knots.push_back(-h - d);
    knots.push_back(h - d);
    const double integral = quadrature::integrate_piecewise(
      [&](double e) { return noise_pdf(noise, e) * kernel_eval(kernel, (d + e) / h); },
      -noise.gamma2, noise.gamma2, knots);
    expectation += mass * integral / h;
  }
  return expectation - pmf(z);
}

} // namespace jkde::theory
