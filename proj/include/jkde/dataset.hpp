#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace jkde {

//! n observations of a discrete part z (integers, p columns) and a
//! continuous part x (reals, q columns), both stored row-major.
class MixedDataset
{
public:
  MixedDataset() = default;

  MixedDataset(std::size_t p,
               std::size_t q,
               std::vector<std::int64_t> z,
               std::vector<double> x,
               std::vector<std::string> discrete_names = {},
               std::vector<std::string> continuous_names = {})
    : p_(p)
    , q_(q)
    , z_(std::move(z))
    , x_(std::move(x))
    , discrete_names_(std::move(discrete_names))
    , continuous_names_(std::move(continuous_names))
  {
    if (p_ + q_ == 0)
      throw std::invalid_argument("dataset needs at least one column");
    if (p_ > 0 && z_.size() % p_ != 0)
      throw std::invalid_argument("discrete values do not fill whole rows");
    if (q_ > 0 && x_.size() % q_ != 0)
      throw std::invalid_argument("continuous values do not fill whole rows");
    n_ = p_ > 0 ? z_.size() / p_ : x_.size() / q_;
    if ((p_ > 0 && z_.size() != n_ * p_) || (q_ > 0 && x_.size() != n_ * q_))
      throw std::invalid_argument(
        "discrete and continuous parts have different row counts");
    if (p_ == 0 && !z_.empty())
      throw std::invalid_argument("discrete values given for p = 0");
    if (q_ == 0 && !x_.empty())
      throw std::invalid_argument("continuous values given for q = 0");
    for (double v : x_)
      if (!std::isfinite(v))
        throw std::invalid_argument("continuous values must be finite");
    if (discrete_names_.empty())
      for (std::size_t k = 0; k < p_; ++k)
        discrete_names_.push_back("z" + std::to_string(k + 1));
    if (continuous_names_.empty())
      for (std::size_t j = 0; j < q_; ++j)
        continuous_names_.push_back("x" + std::to_string(j + 1));
    if (discrete_names_.size() != p_ || continuous_names_.size() != q_)
      throw std::invalid_argument("column name count does not match p, q");
  }

  std::size_t n() const { return n_; }
  std::size_t p() const { return p_; }
  std::size_t q() const { return q_; }

  std::span<const std::int64_t> z_row(std::size_t i) const
  {
    return { z_.data() + i * p_, p_ };
  }
  std::span<const double> x_row(std::size_t i) const
  {
    return { x_.data() + i * q_, q_ };
  }

  std::int64_t z(std::size_t i, std::size_t k) const { return z_[i * p_ + k]; }
  double x(std::size_t i, std::size_t j) const { return x_[i * q_ + j]; }

  const std::vector<std::int64_t>& z_values() const { return z_; }
  const std::vector<double>& x_values() const { return x_; }

  const std::vector<std::string>& discrete_names() const
  {
    return discrete_names_;
  }
  const std::vector<std::string>& continuous_names() const
  {
    return continuous_names_;
  }

  //! Sample standard deviation of continuous column j (n - 1 denominator).
  double x_stddev(std::size_t j) const
  {
    if (n_ < 2)
      return 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      mean += x(i, j);
    mean /= static_cast<double>(n_);
    double ss = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      ss += (x(i, j) - mean) * (x(i, j) - mean);
    return std::sqrt(ss / static_cast<double>(n_ - 1));
  }

  bool operator==(const MixedDataset&) const = default;

private:
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  std::size_t q_ = 0;
  std::vector<std::int64_t> z_;
  std::vector<double> x_;
  std::vector<std::string> discrete_names_;
  std::vector<std::string> continuous_names_;
};

//! Per-variable bandwidths: h for discrete columns, b for continuous ones.
struct Bandwidths
{
  std::vector<double> h;
  std::vector<double> b;

  bool operator==(const Bandwidths&) const = default;
};

inline void check_bandwidths(const Bandwidths& bw, std::size_t p, std::size_t q)
{
  if (bw.h.size() != p || bw.b.size() != q)
    throw std::invalid_argument(
      "bandwidth dimensions (" + std::to_string(bw.h.size()) + ", " +
      std::to_string(bw.b.size()) + ") do not match data (" +
      std::to_string(p) + ", " + std::to_string(q) + ")");
  for (double v : bw.h)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("discrete bandwidths must be positive");
  for (double v : bw.b)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("continuous bandwidths must be positive");
}

} // namespace jkde
