#pragma once

#include "dataset.hpp"
#include "kernels.hpp"
#include "noise.hpp"
#include "parallel.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace jkde {

//! One noise draw per discrete cell, row-major n x p. Draws are taken from
//! the stream in row-major order and do not depend on the data values.
inline std::vector<double> jitter(const MixedDataset& data,
                                  const NoiseSpec& noise,
                                  RngStream& stream)
{
  return noise_sample(noise, stream, data.n() * data.p());
}

//! Stream used for the jitter of a model fitted with `seed`.
inline RngStream jitter_stream(std::uint64_t seed)
{
  return RngStream(seed, { 0x6a6974746572ULL });
}

//! A fitted jittering kernel density estimator.
//!
//! Holds the data together with a single realization of the jitter; the
//! jitter is never resampled, so evaluation is deterministic.
class JKDEModel
{
public:
  JKDEModel(MixedDataset data,
            std::vector<double> jitter,
            KernelSpec kernel,
            NoiseSpec noise,
            Bandwidths bandwidths,
            std::uint64_t seed)
    : data_(std::move(data))
    , jitter_(std::move(jitter))
    , kernel_(kernel)
    , noise_(noise)
    , bandwidths_(std::move(bandwidths))
    , seed_(seed)
  {
    check_noise(noise_);
    if (data_.n() < 1)
      throw std::invalid_argument("cannot fit a model to an empty dataset");
    check_bandwidths(bandwidths_, data_.p(), data_.q());
    if (jitter_.size() != data_.n() * data_.p())
      throw std::invalid_argument("jitter matrix must be n x p");
    for (double e : jitter_)
      if (!(std::abs(e) < noise_.gamma2))
        throw std::invalid_argument("jitter value outside noise support");
    norm_ = static_cast<double>(data_.n());
    for (double h : bandwidths_.h)
      norm_ *= h;
    for (double b : bandwidths_.b)
      norm_ *= b;
  }

  const MixedDataset& data() const { return data_; }
  const std::vector<double>& jitter_values() const { return jitter_; }
  double jitter(std::size_t i, std::size_t k) const
  {
    return jitter_[i * data_.p() + k];
  }
  //! Z_ik + E_ik.
  double jittered(std::size_t i, std::size_t k) const
  {
    return static_cast<double>(data_.z(i, k)) + jitter(i, k);
  }
  const KernelSpec& kernel() const { return kernel_; }
  const NoiseSpec& noise() const { return noise_; }
  const Bandwidths& bandwidths() const { return bandwidths_; }
  std::uint64_t seed() const { return seed_; }

  //! Density estimate at (z, x).
  double operator()(std::span<const std::int64_t> z,
                    std::span<const double> x) const
  {
    const std::size_t p = data_.p(), q = data_.q();
    if (z.size() != p || x.size() != q)
      throw std::invalid_argument("evaluation point has wrong dimensions");
    const auto& h = bandwidths_.h;
    const auto& b = bandwidths_.b;
    double sum = 0.0;
    for (std::size_t i = 0; i < data_.n(); ++i) {
      double prod = 1.0;
      for (std::size_t k = 0; k < p && prod != 0.0; ++k) {
        // integer offset first, so offsets of +-1 plus jitter stay exact
        const double offset = static_cast<double>(data_.z(i, k) - z[k]);
        prod *= kernel_eval(kernel_, (offset + jitter(i, k)) / h[k]);
      }
      for (std::size_t j = 0; j < q && prod != 0.0; ++j)
        prod *= kernel_eval(kernel_, (data_.x(i, j) - x[j]) / b[j]);
      sum += prod;
    }
    return sum / norm_;
  }

private:
  MixedDataset data_;
  std::vector<double> jitter_;
  KernelSpec kernel_;
  NoiseSpec noise_;
  Bandwidths bandwidths_;
  std::uint64_t seed_;
  double norm_ = 1.0;
};

//! Fits the estimator: validates inputs and draws one jitter realization
//! from a stream derived from `seed`.
inline JKDEModel fit(MixedDataset data,
                     const KernelSpec& kernel,
                     const NoiseSpec& noise,
                     Bandwidths bandwidths,
                     std::uint64_t seed)
{
  check_noise(noise);
  check_bandwidths(bandwidths, data.p(), data.q());
  auto stream = jitter_stream(seed);
  auto e = jitter(data, noise, stream);
  return JKDEModel(std::move(data), std::move(e), kernel, noise,
                   std::move(bandwidths), seed);
}

inline double evaluate(const JKDEModel& model,
                       std::span<const std::int64_t> z,
                       std::span<const double> x)
{
  return model(z, x);
}

//! Tensor-product evaluation grid: one axis per discrete column followed by
//! one axis per continuous column.
struct GridSpec
{
  std::vector<std::vector<std::int64_t>> z_axes;
  std::vector<std::vector<double>> x_axes;

  std::vector<std::size_t> shape() const
  {
    std::vector<std::size_t> s;
    for (const auto& a : z_axes)
      s.push_back(a.size());
    for (const auto& a : x_axes)
      s.push_back(a.size());
    return s;
  }

  std::size_t size() const
  {
    if (z_axes.empty() && x_axes.empty())
      return 0;
    std::size_t count = 1;
    for (auto s : shape())
      count *= s;
    return count;
  }

  //! Coordinates of node `index` (row-major, last axis fastest).
  void node(std::size_t index,
            std::vector<std::int64_t>& z,
            std::vector<double>& x) const
  {
    z.resize(z_axes.size());
    x.resize(x_axes.size());
    for (std::size_t j = x_axes.size(); j-- > 0;) {
      x[j] = x_axes[j][index % x_axes[j].size()];
      index /= x_axes[j].size();
    }
    for (std::size_t k = z_axes.size(); k-- > 0;) {
      z[k] = z_axes[k][index % z_axes[k].size()];
      index /= z_axes[k].size();
    }
  }
};

//! Row-major values over a grid, with the grid's shape.
struct GridTensor
{
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

//! Evaluates any estimator callable as est(z, x) at every node of the grid.
template <typename Estimator>
GridTensor evaluate_grid_with(const Estimator& est,
                              const GridSpec& grid,
                              unsigned threads = 1)
{
  const std::size_t count = grid.size();
  if (count == 0)
    throw std::invalid_argument("evaluation grid is empty");
  GridTensor out{ grid.shape(), std::vector<double>(count) };
  parallel_for(count, threads, [&](std::size_t i) {
    std::vector<std::int64_t> z;
    std::vector<double> x;
    grid.node(i, z, x);
    out.values[i] = est(std::span<const std::int64_t>(z),
                        std::span<const double>(x));
  });
  return out;
}

inline GridTensor evaluate_grid(const JKDEModel& model,
                                const GridSpec& grid,
                                unsigned threads = 1)
{
  if (grid.z_axes.size() != model.data().p() ||
      grid.x_axes.size() != model.data().q())
    throw std::invalid_argument("grid dimensions do not match the model");
  return evaluate_grid_with(model, grid, threads);
}

//! Relative frequency of the cell z in a purely discrete dataset.
inline double sample_frequency(const MixedDataset& data,
                               std::span<const std::int64_t> z)
{
  if (data.q() != 0)
    throw std::invalid_argument(
      "sample frequency requires purely discrete data (q = 0)");
  if (z.size() != data.p())
    throw std::invalid_argument("evaluation point has wrong dimensions");
  if (data.n() == 0)
    throw std::invalid_argument("empty dataset");
  std::size_t count = 0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    auto row = data.z_row(i);
    if (std::equal(row.begin(), row.end(), z.begin()))
      ++count;
  }
  return static_cast<double>(count) / static_cast<double>(data.n());
}

// Li-Racine style baseline ---------------------------------------------------

//! Ordered-discrete kernel estimator used as a benchmark: discrete column k
//! contributes lambda_k^|Z_ik - z_k|, normalized per observation so that the
//! weights sum to one over the observed category range [min_k, max_k];
//! continuous columns use the ordinary scaled kernel. Cells outside the
//! observed range get density zero.
class LiRacineEstimator
{
public:
  LiRacineEstimator(MixedDataset data,
                    std::vector<double> lambda,
                    std::vector<double> b,
                    KernelSpec kernel)
    : data_(std::move(data))
    , lambda_(std::move(lambda))
    , b_(std::move(b))
    , kernel_(kernel)
  {
    const std::size_t n = data_.n(), p = data_.p(), q = data_.q();
    if (n < 1)
      throw std::invalid_argument("cannot fit a model to an empty dataset");
    if (lambda_.size() != p || b_.size() != q)
      throw std::invalid_argument("bandwidth dimensions do not match data");
    for (double l : lambda_)
      if (!(l >= 0.0 && l <= 1.0))
        throw std::invalid_argument("discrete smoothing lambda must be in [0, 1]");
    for (double v : b_)
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("continuous bandwidths must be positive");

    lo_.assign(p, 0);
    hi_.assign(p, 0);
    for (std::size_t k = 0; k < p; ++k) {
      lo_[k] = hi_[k] = data_.z(0, k);
      for (std::size_t i = 1; i < n; ++i) {
        lo_[k] = std::min(lo_[k], data_.z(i, k));
        hi_[k] = std::max(hi_[k], data_.z(i, k));
      }
    }
    inv_norm_.assign(n * p, 1.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < p; ++k)
        inv_norm_[i * p + k] =
          1.0 / geometric_mass(lambda_[k], data_.z(i, k), lo_[k], hi_[k]);
    norm_ = static_cast<double>(n);
    for (double v : b_)
      norm_ *= v;
  }

  //! sum_{c=lo}^{hi} lambda^|center - c|
  static double geometric_mass(double lambda,
                               std::int64_t center,
                               std::int64_t lo,
                               std::int64_t hi)
  {
    double s = 0.0;
    for (std::int64_t c = lo; c <= hi; ++c)
      s += discrete_weight(lambda, center - c);
    return s;
  }

  static double discrete_weight(double lambda, std::int64_t distance)
  {
    // 0^0 = 1: lambda = 0 reduces to the indicator
    return distance == 0 ? 1.0
                         : std::pow(lambda, static_cast<double>(
                                              distance < 0 ? -distance : distance));
  }

  double operator()(std::span<const std::int64_t> z,
                    std::span<const double> x) const
  {
    const std::size_t p = data_.p(), q = data_.q();
    if (z.size() != p || x.size() != q)
      throw std::invalid_argument("evaluation point has wrong dimensions");
    for (std::size_t k = 0; k < p; ++k)
      if (z[k] < lo_[k] || z[k] > hi_[k])
        return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < data_.n(); ++i) {
      double prod = 1.0;
      for (std::size_t k = 0; k < p && prod != 0.0; ++k)
        prod *= discrete_weight(lambda_[k], data_.z(i, k) - z[k]) *
                inv_norm_[i * p + k];
      for (std::size_t j = 0; j < q && prod != 0.0; ++j)
        prod *= kernel_eval(kernel_, (data_.x(i, j) - x[j]) / b_[j]);
      sum += prod;
    }
    return sum / norm_;
  }

  const MixedDataset& data() const { return data_; }
  const std::vector<double>& lambda() const { return lambda_; }
  const std::vector<double>& b() const { return b_; }

private:
  MixedDataset data_;
  std::vector<double> lambda_;
  std::vector<double> b_;
  KernelSpec kernel_;
  std::vector<std::int64_t> lo_;
  std::vector<std::int64_t> hi_;
  std::vector<double> inv_norm_;
  double norm_ = 1.0;
};

inline double li_racine_eval(const MixedDataset& data,
                             std::span<const std::int64_t> z,
                             std::span<const double> x,
                             const std::vector<double>& lambda,
                             const std::vector<double>& b,
                             const KernelSpec& kernel)
{
  return LiRacineEstimator(data, lambda, b, kernel)(z, x);
}

} // namespace jkde
