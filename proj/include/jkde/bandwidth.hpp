#pragma once

#include "dataset.hpp"
#include "estimator.hpp"
#include "kernels.hpp"
#include "noise.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace jkde {

//! Settings for likelihood cross-validation.
struct CvConfig
{
  //! candidates per dimension on the initial grid
  std::size_t grid_size = 15;
  //! grid spans [grid_lo, grid_hi] times the reference bandwidth
  double grid_lo = 0.1;
  double grid_hi = 10.0;
  //! golden-section steps per coordinate and number of coordinate sweeps
  int refine_iterations = 30;
  int sweeps = 2;
  //! density floor applied before taking logs
  double floor = 1e-10;
  //! discrete bandwidths are capped at h_cap_multiplier * min(g1, 1 - g2)
  double h_cap_multiplier = 4.0;
  //! full tensor grid up to this many nodes, coordinate-wise grid beyond
  std::size_t max_tensor_grid = 4096;
  std::uint64_t seed = 42;
  unsigned threads = 1;
};

inline void check_cv_config(const CvConfig& cfg)
{
  if (!(cfg.floor > 0.0))
    throw std::invalid_argument("cross-validation floor must be positive");
  if (cfg.grid_size < 2)
    throw std::invalid_argument("cross-validation grid needs >= 2 points");
  if (!(cfg.grid_lo > 0.0 && cfg.grid_lo < cfg.grid_hi))
    throw std::invalid_argument("cross-validation grid range is degenerate");
  if (cfg.refine_iterations < 0 || cfg.sweeps < 0)
    throw std::invalid_argument("refinement counts must be non-negative");
  if (!(cfg.h_cap_multiplier > 0.0))
    throw std::invalid_argument("discrete bandwidth cap must be positive");
}

//! Asymptotically optimal bandwidths: h_k = min(gamma1, 1 - gamma2) and
//! b_j = scale_j * n^(-1 / (2 ell + q)). An empty `scale` means all ones.
inline Bandwidths reference_bandwidths(std::size_t n,
                                       std::size_t p,
                                       std::size_t q,
                                       int ell,
                                       const NoiseSpec& noise,
                                       std::vector<double> scale = {})
{
  if (n < 1)
    throw std::invalid_argument("reference bandwidths need n >= 1");
  if (scale.empty())
    scale.assign(q, 1.0);
  if (scale.size() != q)
    throw std::invalid_argument("one scale per continuous column required");
  Bandwidths bw;
  bw.h.assign(p, plateau_bandwidth(noise));
  const double rate =
    std::pow(static_cast<double>(n), -1.0 / (2.0 * ell + static_cast<double>(q)));
  for (double s : scale)
    bw.b.push_back(s * rate);
  return bw;
}

//! Reference bandwidths scaled by the sample standard deviations.
inline Bandwidths reference_bandwidths(const MixedDataset& data,
                                       const KernelSpec& kernel,
                                       const NoiseSpec& noise)
{
  std::vector<double> scale;
  for (std::size_t j = 0; j < data.q(); ++j) {
    const double s = data.x_stddev(j);
    scale.push_back(s > 0.0 ? s : 1.0);
  }
  return reference_bandwidths(data.n(), data.p(), data.q(), kernel.order,
                              noise, scale);
}

namespace detail {

//! Leave-one-out log-likelihood for a fixed jitter realization. The score
//! for observation i is evaluated at its own jittered point.
inline double loo_loglik_jittered(const MixedDataset& data,
                                  const std::vector<double>& jitter,
                                  const KernelSpec& kernel,
                                  const Bandwidths& bw,
                                  double floor)
{
  const std::size_t n = data.n(), p = data.p(), q = data.q();
  if (n < 2)
    throw std::invalid_argument("leave-one-out likelihood needs n >= 2");
  check_bandwidths(bw, p, q);
  if (jitter.size() != n * p)
    throw std::invalid_argument("jitter matrix must be n x p");

  std::vector<double> acc(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double prod = 1.0;
      for (std::size_t k = 0; k < p && prod != 0.0; ++k) {
        const double d = static_cast<double>(data.z(i, k) - data.z(j, k)) +
                         (jitter[i * p + k] - jitter[j * p + k]);
        prod *= kernel_eval(kernel, d / bw.h[k]);
      }
      for (std::size_t l = 0; l < q && prod != 0.0; ++l)
        prod *= kernel_eval(kernel, (data.x(i, l) - data.x(j, l)) / bw.b[l]);
      acc[i] += prod;
      acc[j] += prod;
    }
  }
  double norm = static_cast<double>(n - 1);
  for (double h : bw.h)
    norm *= h;
  for (double b : bw.b)
    norm *= b;
  double score = 0.0;
  for (double a : acc)
    score += std::log(std::max(a / norm, floor));
  return score;
}

//! Leave-one-out log-likelihood of the Li-Racine style baseline.
inline double loo_loglik_li_racine(const MixedDataset& data,
                                   const std::vector<double>& lambda,
                                   const std::vector<double>& b,
                                   const KernelSpec& kernel,
                                   double floor)
{
  const std::size_t n = data.n(), p = data.p(), q = data.q();
  if (n < 2)
    throw std::invalid_argument("leave-one-out likelihood needs n >= 2");
  // builds normalizers and validates parameters
  const LiRacineEstimator est(data, lambda, b, kernel);

  std::vector<std::int64_t> lo(p), hi(p);
  std::vector<std::vector<double>> powers(p);
  for (std::size_t k = 0; k < p; ++k) {
    lo[k] = hi[k] = data.z(0, k);
    for (std::size_t i = 1; i < n; ++i) {
      lo[k] = std::min(lo[k], data.z(i, k));
      hi[k] = std::max(hi[k], data.z(i, k));
    }
    for (std::int64_t d = 0; d <= hi[k] - lo[k]; ++d)
      powers[k].push_back(LiRacineEstimator::discrete_weight(lambda[k], d));
  }
  std::vector<double> inv_norm(n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < p; ++k)
      inv_norm[i] /= LiRacineEstimator::geometric_mass(lambda[k], data.z(i, k),
                                                       lo[k], hi[k]);

  std::vector<double> acc(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double prod = 1.0;
      for (std::size_t k = 0; k < p && prod != 0.0; ++k) {
        const auto d = data.z(i, k) - data.z(j, k);
        prod *= powers[k][static_cast<std::size_t>(d < 0 ? -d : d)];
      }
      for (std::size_t l = 0; l < q && prod != 0.0; ++l)
        prod *= kernel_eval(kernel, (data.x(i, l) - data.x(j, l)) / b[l]);
      acc[i] += prod * inv_norm[j];
      acc[j] += prod * inv_norm[i];
    }
  }
  double norm = static_cast<double>(n - 1);
  for (double v : b)
    norm *= v;
  double score = 0.0;
  for (double a : acc)
    score += std::log(std::max(a / norm, floor));
  return score;
}

//! One search coordinate: candidate values plus the admissible range.
//! Log-scaled axes are refined in log space.
struct SearchAxis
{
  std::vector<double> candidates;
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  bool log_scale = true;
  //! half-width of the refinement bracket (in log units when log-scaled)
  double step = 0.0;
};

struct SearchResult
{
  std::vector<double> point;
  double score = -std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
};

//! Grid search followed by coordinate-wise golden-section refinement.
//! Only strict improvements are accepted, so the returned score is at
//! least as large as every evaluated grid node.
inline SearchResult maximize_on_grid(
  const std::function<double(const std::vector<double>&)>& objective,
  const std::vector<SearchAxis>& axes,
  const CvConfig& cfg)
{
  const std::size_t dims = axes.size();
  SearchResult best;
  if (dims == 0)
    return best;
  auto consider = [&](const std::vector<double>& pt, double s) {
    if (s > best.score || best.point.empty()) {
      best.score = s;
      best.point = pt;
    }
  };

  std::size_t tensor = 1;
  for (const auto& a : axes) {
    tensor *= a.candidates.size();
    if (tensor > cfg.max_tensor_grid)
      break;
  }

  if (tensor <= cfg.max_tensor_grid) {
    std::vector<std::vector<double>> nodes(tensor, std::vector<double>(dims));
    for (std::size_t idx = 0; idx < tensor; ++idx) {
      std::size_t rest = idx;
      for (std::size_t d = dims; d-- > 0;) {
        nodes[idx][d] = axes[d].candidates[rest % axes[d].candidates.size()];
        rest /= axes[d].candidates.size();
      }
    }
    std::vector<double> scores(tensor);
    parallel_for(tensor, cfg.threads,
                 [&](std::size_t i) { scores[i] = objective(nodes[i]); });
    best.evaluations += tensor;
    for (std::size_t i = 0; i < tensor; ++i)
      consider(nodes[i], scores[i]);
  } else {
    // coordinate-wise grid search starting from the middle candidates
    std::vector<double> cur(dims);
    for (std::size_t d = 0; d < dims; ++d)
      cur[d] = axes[d].candidates[axes[d].candidates.size() / 2];
    consider(cur, objective(cur));
    ++best.evaluations;
    for (int sweep = 0; sweep < std::max(cfg.sweeps, 1); ++sweep) {
      for (std::size_t d = 0; d < dims; ++d) {
        const auto& cand = axes[d].candidates;
        std::vector<double> scores(cand.size());
        parallel_for(cand.size(), cfg.threads, [&](std::size_t i) {
          auto pt = best.point;
          pt[d] = cand[i];
          scores[i] = objective(pt);
        });
        best.evaluations += cand.size();
        auto base = best.point;
        for (std::size_t i = 0; i < cand.size(); ++i) {
          auto pt = base;
          pt[d] = cand[i];
          if (scores[i] > best.score) {
            best.score = scores[i];
            best.point = pt;
          }
        }
      }
    }
  }

  // golden-section refinement around the incumbent, one coordinate at a time
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
    for (std::size_t d = 0; d < dims; ++d) {
      const auto& ax = axes[d];
      if (cfg.refine_iterations == 0 || ax.step <= 0.0)
        continue;
      auto to_param = [&](double v) { return ax.log_scale ? std::exp(v) : v; };
      const double center = ax.log_scale ? std::log(best.point[d]) : best.point[d];
      double a = center - ax.step, b = center + ax.step;
      if (ax.log_scale) {
        if (ax.lower > 0.0)
          a = std::max(a, std::log(ax.lower));
        if (std::isfinite(ax.upper))
          b = std::min(b, std::log(ax.upper));
      } else {
        a = std::max(a, ax.lower);
        b = std::min(b, ax.upper);
      }
      if (!(a < b))
        continue;
      auto eval_at = [&](double v) {
        auto pt = best.point;
        pt[d] = to_param(v);
        ++best.evaluations;
        return objective(pt);
      };
      double c = b - inv_phi * (b - a), e = a + inv_phi * (b - a);
      double fc = eval_at(c), fe = eval_at(e);
      for (int it = 0; it < cfg.refine_iterations; ++it) {
        if (fc >= fe) {
          b = e;
          e = c;
          fe = fc;
          c = b - inv_phi * (b - a);
          fc = eval_at(c);
        } else {
          a = c;
          c = e;
          fc = fe;
          e = a + inv_phi * (b - a);
          fe = eval_at(e);
        }
      }
      const double v = fc >= fe ? c : e;
      const double s = std::max(fc, fe);
      if (s > best.score) {
        best.score = s;
        best.point[d] = to_param(v);
      }
    }
  }
  return best;
}

inline std::vector<double> log_grid(double center,
                                    double lo,
                                    double hi,
                                    std::size_t count,
                                    double cap = std::numeric_limits<double>::infinity())
{
  std::vector<double> out;
  for (std::size_t g = 0; g < count; ++g) {
    const double mult =
      lo * std::pow(hi / lo, static_cast<double>(g) / static_cast<double>(count - 1));
    const double v = std::min(center * mult, cap);
    if (out.empty() || v > out.back())
      out.push_back(v);
  }
  return out;
}

} // namespace detail

//! Leave-one-out log-likelihood of the jittering estimator at the given
//! bandwidths. The jitter is drawn from `seed` exactly as fit() does, and
//! each left-out observation is scored at its jittered location.
inline double loo_loglik(const MixedDataset& data,
                         const KernelSpec& kernel,
                         const NoiseSpec& noise,
                         const Bandwidths& bandwidths,
                         std::uint64_t seed,
                         double floor = 1e-10)
{
  check_noise(noise);
  auto stream = jitter_stream(seed);
  const auto e = jitter(data, noise, stream);
  return detail::loo_loglik_jittered(data, e, kernel, bandwidths, floor);
}

struct CvResult
{
  Bandwidths bandwidths;
  double score = 0.0;
  std::size_t evaluations = 0;
};

//! Likelihood cross-validation for the jittering estimator: log-spaced grid
//! around the reference bandwidths, then golden-section refinement per
//! coordinate. The jitter is drawn once from cfg.seed and held fixed.
inline CvResult select_cv_detailed(const MixedDataset& data,
                                   const KernelSpec& kernel,
                                   const NoiseSpec& noise,
                                   const CvConfig& cfg = {})
{
  check_noise(noise);
  check_cv_config(cfg);
  const std::size_t n = data.n(), p = data.p(), q = data.q();
  if (n < 2)
    throw std::invalid_argument("cross-validation needs n >= 2");

  const Bandwidths ref = reference_bandwidths(data, kernel, noise);
  const double h_cap = cfg.h_cap_multiplier * plateau_bandwidth(noise);
  const double log_step =
    std::log(cfg.grid_hi / cfg.grid_lo) / static_cast<double>(cfg.grid_size - 1);

  std::vector<detail::SearchAxis> axes;
  for (std::size_t k = 0; k < p; ++k) {
    detail::SearchAxis ax;
    ax.candidates =
      detail::log_grid(ref.h[k], cfg.grid_lo, cfg.grid_hi, cfg.grid_size, h_cap);
    ax.upper = h_cap;
    ax.step = log_step;
    axes.push_back(std::move(ax));
  }
  for (std::size_t j = 0; j < q; ++j) {
    detail::SearchAxis ax;
    ax.candidates =
      detail::log_grid(ref.b[j], cfg.grid_lo, cfg.grid_hi, cfg.grid_size);
    ax.step = log_step;
    axes.push_back(std::move(ax));
  }

  auto stream = jitter_stream(cfg.seed);
  const auto e = jitter(data, noise, stream);
  auto objective = [&](const std::vector<double>& pt) {
    Bandwidths bw;
    bw.h.assign(pt.begin(), pt.begin() + static_cast<std::ptrdiff_t>(p));
    bw.b.assign(pt.begin() + static_cast<std::ptrdiff_t>(p), pt.end());
    return detail::loo_loglik_jittered(data, e, kernel, bw, cfg.floor);
  };
  const auto best = detail::maximize_on_grid(objective, axes, cfg);

  CvResult out;
  out.bandwidths.h.assign(best.point.begin(),
                          best.point.begin() + static_cast<std::ptrdiff_t>(p));
  out.bandwidths.b.assign(best.point.begin() + static_cast<std::ptrdiff_t>(p),
                          best.point.end());
  out.score = best.score;
  out.evaluations = best.evaluations;
  return out;
}

inline Bandwidths select_cv(const MixedDataset& data,
                            const KernelSpec& kernel,
                            const NoiseSpec& noise,
                            const CvConfig& cfg = {})
{
  return select_cv_detailed(data, kernel, noise, cfg).bandwidths;
}

//! Smoothing parameters of the Li-Racine style baseline.
struct LiRacineBandwidths
{
  std::vector<double> lambda;
  std::vector<double> b;
};

//! Likelihood cross-validation for the baseline: lambda on a linear grid in
//! [0, 1], b on the same log grid as the jittering estimator, followed by
//! the same refinement.
inline LiRacineBandwidths select_cv_li_racine(const MixedDataset& data,
                                              const KernelSpec& kernel,
                                              const CvConfig& cfg = {})
{
  check_cv_config(cfg);
  const std::size_t n = data.n(), p = data.p(), q = data.q();
  if (n < 2)
    throw std::invalid_argument("cross-validation needs n >= 2");

  const Bandwidths ref = reference_bandwidths(data, kernel, uniform_noise());
  const double log_step =
    std::log(cfg.grid_hi / cfg.grid_lo) / static_cast<double>(cfg.grid_size - 1);
  const double lin_step = 1.0 / static_cast<double>(cfg.grid_size - 1);

  std::vector<detail::SearchAxis> axes;
  for (std::size_t k = 0; k < p; ++k) {
    detail::SearchAxis ax;
    for (std::size_t g = 0; g < cfg.grid_size; ++g)
      ax.candidates.push_back(static_cast<double>(g) * lin_step);
    ax.lower = 0.0;
    ax.upper = 1.0;
    ax.log_scale = false;
    ax.step = lin_step;
    axes.push_back(std::move(ax));
  }
  for (std::size_t j = 0; j < q; ++j) {
    detail::SearchAxis ax;
    ax.candidates =
      detail::log_grid(ref.b[j], cfg.grid_lo, cfg.grid_hi, cfg.grid_size);
    ax.step = log_step;
    axes.push_back(std::move(ax));
  }

  auto objective = [&](const std::vector<double>& pt) {
    std::vector<double> lambda(pt.begin(), pt.begin() + static_cast<std::ptrdiff_t>(p));
    std::vector<double> b(pt.begin() + static_cast<std::ptrdiff_t>(p), pt.end());
    return detail::loo_loglik_li_racine(data, lambda, b, kernel, cfg.floor);
  };
  const auto best = detail::maximize_on_grid(objective, axes, cfg);

  LiRacineBandwidths out;
  out.lambda.assign(best.point.begin(),
                    best.point.begin() + static_cast<std::ptrdiff_t>(p));
  out.b.assign(best.point.begin() + static_cast<std::ptrdiff_t>(p), best.point.end());
  return out;
}

} // namespace jkde
