#pragma once

#include "bandwidth.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "estimator.hpp"
#include "kernels.hpp"
#include "noise.hpp"
#include "parallel.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace jkde::sim {

inline double binomial_pmf(std::int64_t z, int m, double theta)
{
  if (z < 0 || z > m)
    return 0.0;
  double coef = 1.0;
  for (std::int64_t i = 1; i <= z; ++i)
    coef = coef * static_cast<double>(m - z + i) / static_cast<double>(i);
  return coef * std::pow(theta, static_cast<double>(z)) *
         std::pow(1.0 - theta, static_cast<double>(m - z));
}

inline double std_normal_pdf(double x)
{
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

//! Product of independent Binomial(m, theta) and N(0, 1) densities.
inline double true_density(std::span<const std::int64_t> z,
                           std::span<const double> x,
                           int m,
                           double theta = 0.3)
{
  double f = 1.0;
  for (auto zk : z)
    f *= binomial_pmf(zk, m, theta);
  for (double xj : x)
    f *= std_normal_pdf(xj);
  return f;
}

//! n draws from the independent Binomial x Normal model.
inline MixedDataset simulate_dataset(std::size_t n,
                                     std::size_t p,
                                     std::size_t q,
                                     int m,
                                     double theta,
                                     RngStream& stream)
{
  std::vector<std::int64_t> z;
  std::vector<double> x;
  z.reserve(n * p);
  x.reserve(n * q);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < p; ++k)
      z.push_back(stream.binomial(m, theta));
    for (std::size_t j = 0; j < q; ++j)
      x.push_back(stream.normal());
  }
  return MixedDataset(p, q, std::move(z), std::move(x));
}

//! Root of the sum (not the mean) of squared errors.
inline double rase(std::span<const double> estimates, std::span<const double> truths)
{
  if (estimates.size() != truths.size())
    throw std::invalid_argument("estimate and truth grids differ in size");
  double ss = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double d = estimates[i] - truths[i];
    ss += d * d;
  }
  return std::sqrt(ss);
}

inline double rase(const GridTensor& estimates, const GridTensor& truths)
{
  if (estimates.shape != truths.shape)
    throw std::invalid_argument("estimate and truth grids differ in shape");
  return rase(estimates.values, truths.values);
}

//! Z = {0, ..., m}^p, X = {-2, -1.6, ..., 2}^q.
inline GridSpec risk_grid(std::size_t p, std::size_t q, int m)
{
  GridSpec g;
  std::vector<std::int64_t> zs;
  for (int v = 0; v <= m; ++v)
    zs.push_back(v);
  std::vector<double> xs;
  for (int k = 0; k <= 10; ++k)
    xs.push_back(-2.0 + 0.4 * k);
  g.z_axes.assign(p, zs);
  g.x_axes.assign(q, xs);
  return g;
}

inline GridTensor true_density_grid(const GridSpec& grid, int m, double theta)
{
  return evaluate_grid_with(
    [&](std::span<const std::int64_t> z, std::span<const double> x) {
      return true_density(z, x, m, theta);
    },
    grid);
}

//! Estimators understood by run_scenario():
//!   jkde       uniform noise, cross-validated bandwidths
//!   jkde2      trapezoid noise (3/8, 5/8), cross-validated bandwidths
//!   liracine   ordered-discrete baseline, cross-validated
//!   jkde-ref   uniform noise, reference bandwidths
//!   jkde2-ref  trapezoid noise, reference bandwidths
//!   freq       sample frequency (q = 0 only)
inline const std::vector<std::string>& known_estimators()
{
  static const std::vector<std::string> names{ "jkde",     "jkde2",     "liracine",
                                               "jkde-ref", "jkde2-ref", "freq" };
  return names;
}

struct ScenarioConfig
{
  std::size_t p = 1;
  std::size_t q = 1;
  int m = 1;
  double theta = 0.3;
  std::vector<std::size_t> n_list{ 50, 200 };
  std::size_t n_sim = 200;
  std::vector<std::string> estimators{ "jkde", "jkde2", "liracine" };
  KernelSpec kernel{ KernelFamily::epanechnikov };
  CvConfig cv{};
  std::uint64_t seed = 42;
  unsigned threads = 1;

  std::string label() const
  {
    return "p" + std::to_string(p) + "q" + std::to_string(q) + "m" +
           std::to_string(m);
  }
};

inline void check_scenario(const ScenarioConfig& cfg)
{
  if (cfg.p + cfg.q == 0)
    throw std::invalid_argument("scenario needs p + q >= 1");
  if (cfg.n_sim < 1)
    throw std::invalid_argument("scenario needs nsim >= 1");
  if (cfg.m < 1)
    throw std::invalid_argument("scenario needs m >= 1");
  if (!(cfg.theta > 0.0 && cfg.theta < 1.0))
    throw std::invalid_argument("binomial probability must be in (0, 1)");
  if (cfg.n_list.empty())
    throw std::invalid_argument("scenario needs at least one sample size");
  for (auto n : cfg.n_list)
    if (n < 2)
      throw std::invalid_argument("scenario sample sizes must be >= 2");
  if (cfg.estimators.empty())
    throw std::invalid_argument("scenario needs at least one estimator");
  const auto& known = known_estimators();
  for (const auto& e : cfg.estimators) {
    if (std::find(known.begin(), known.end(), e) == known.end())
      throw std::invalid_argument("unknown estimator '" + e + "'");
    if (e == "freq" && cfg.q != 0)
      throw std::invalid_argument("estimator 'freq' requires q = 0");
  }
}

struct RiskRecord
{
  std::string estimator;
  std::size_t n = 0;
  std::size_t replicate = 0;
  double rase = 0.0;
};

//! Monte Carlo RASE values of one scenario, ordered by (n, replicate,
//! estimator as listed in the config).
struct RiskTable
{
  std::string scenario;
  std::vector<RiskRecord> records;

  std::vector<double> values(const std::string& estimator, std::size_t n) const
  {
    std::vector<double> out;
    for (const auto& r : records)
      if (r.estimator == estimator && r.n == n)
        out.push_back(r.rase);
    return out;
  }

  double quantile(const std::string& estimator, std::size_t n, double prob) const
  {
    auto v = values(estimator, n);
    if (v.empty())
      throw std::invalid_argument("no results for estimator '" + estimator + "'");
    std::sort(v.begin(), v.end());
    // linear interpolation between order statistics
    const double pos = prob * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  }

  double median(const std::string& estimator, std::size_t n) const
  {
    return quantile(estimator, n, 0.5);
  }
};

namespace detail {

enum : std::uint64_t
{
  data_key = 0x64617461ULL,
  estimator_key = 0x657374ULL
};

inline GridTensor fit_and_evaluate(const std::string& name,
                                   const MixedDataset& data,
                                   const ScenarioConfig& cfg,
                                   const GridSpec& grid,
                                   std::uint64_t seed)
{
  const NoiseSpec jkde2_noise = trapezoid_noise(0.375, 0.625);
  if (name == "jkde" || name == "jkde2") {
    const NoiseSpec noise = name == "jkde" ? uniform_noise() : jkde2_noise;
    CvConfig cv = cfg.cv;
    cv.seed = seed;
    cv.threads = 1;
    const auto bw = select_cv(data, cfg.kernel, noise, cv);
    return evaluate_grid(fit(data, cfg.kernel, noise, bw, seed), grid);
  }
  if (name == "jkde-ref" || name == "jkde2-ref") {
    const NoiseSpec noise = name == "jkde-ref" ? uniform_noise() : jkde2_noise;
    const auto bw = reference_bandwidths(data, cfg.kernel, noise);
    return evaluate_grid(fit(data, cfg.kernel, noise, bw, seed), grid);
  }
  if (name == "liracine") {
    CvConfig cv = cfg.cv;
    cv.threads = 1;
    const auto bw = select_cv_li_racine(data, cfg.kernel, cv);
    return evaluate_grid_with(LiRacineEstimator(data, bw.lambda, bw.b, cfg.kernel),
                              grid);
  }
  if (name == "freq") {
    return evaluate_grid_with(
      [&](std::span<const std::int64_t> z, std::span<const double>) {
        return sample_frequency(data, z);
      },
      grid);
  }
  throw std::invalid_argument("unknown estimator '" + name + "'");
}

} // namespace detail

//! Runs every (n, replicate) task of a scenario. Replicate r at sample size
//! n draws its data and all estimator seeds from streams keyed by
//! (seed, n, r), so results do not depend on the execution order.
inline RiskTable run_scenario(const ScenarioConfig& cfg)
{
  check_scenario(cfg);
  const GridSpec grid = risk_grid(cfg.p, cfg.q, cfg.m);
  const GridTensor truth = true_density_grid(grid, cfg.m, cfg.theta);
  const std::size_t n_est = cfg.estimators.size();
  const std::size_t tasks = cfg.n_list.size() * cfg.n_sim;

  RiskTable table;
  table.scenario = cfg.label();
  table.records.resize(tasks * n_est);
  parallel_for(tasks, cfg.threads, [&](std::size_t task) {
    const std::size_t n = cfg.n_list[task / cfg.n_sim];
    const std::size_t r = task % cfg.n_sim;
    RngStream stream(cfg.seed, { n, r, detail::data_key });
    const auto data = simulate_dataset(n, cfg.p, cfg.q, cfg.m, cfg.theta, stream);
    for (std::size_t e = 0; e < n_est; ++e) {
      const auto seed = derive_seed(cfg.seed, { n, r, detail::estimator_key, e });
      const auto est =
        detail::fit_and_evaluate(cfg.estimators[e], data, cfg, grid, seed);
      table.records[task * n_est + e] =
        RiskRecord{ cfg.estimators[e], n, r, rase(est, truth) };
    }
  });
  return table;
}

enum class ErrorMode
{
  pointwise,
  sup_grid
};

struct RateConfig
{
  std::size_t p = 1;
  std::size_t q = 0;
  int ell = 2;
  int m = 1;
  double theta = 0.3;
  //! evaluation point; empty means the origin
  std::vector<std::int64_t> z;
  std::vector<double> x;
  std::vector<std::size_t> ladder{ 500, 1000, 2000, 4000, 8000, 16000 };
  std::size_t replicates = 400;
  ErrorMode mode = ErrorMode::pointwise;
  KernelSpec kernel{ KernelFamily::epanechnikov };
  NoiseSpec noise = uniform_noise();
  //! b = bandwidth_scale * n^(-1 / (2 ell + q))
  double bandwidth_scale = 1.0;
  std::uint64_t seed = 42;
  unsigned threads = 1;
};

struct RateRow
{
  std::size_t n = 0;
  double rmse = 0.0;
};

struct RateResult
{
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
  std::vector<RateRow> rows;
};

//! Least-squares fit of log(y) on log(x); returns {slope, stderr, intercept}.
inline RateResult log_log_fit(const std::vector<RateRow>& rows)
{
  if (rows.size() < 3)
    throw std::invalid_argument("slope fit needs at least 3 points");
  const double k = static_cast<double>(rows.size());
  double mx = 0.0, my = 0.0;
  for (const auto& r : rows) {
    if (!(r.rmse > 0.0))
      throw NumericError("RMSE must be positive for a log-log fit");
    mx += std::log(static_cast<double>(r.n));
    my += std::log(r.rmse);
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& r : rows) {
    const double dx = std::log(static_cast<double>(r.n)) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(r.rmse) - my);
  }
  RateResult out;
  out.rows = rows;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ssr = 0.0;
  for (const auto& r : rows) {
    const double fit =
      out.intercept + out.slope * std::log(static_cast<double>(r.n));
    ssr += (std::log(r.rmse) - fit) * (std::log(r.rmse) - fit);
  }
  out.stderr_slope = std::sqrt(ssr / (k - 2.0) / sxx);
  return out;
}

inline void check_rate_config(const RateConfig& cfg)
{
  if (cfg.p + cfg.q == 0)
    throw std::invalid_argument("rate experiment needs p + q >= 1");
  if (cfg.ell != cfg.kernel.order)
    throw std::invalid_argument("ell must match the kernel order (2)");
  if (cfg.ladder.size() < 4)
    throw std::invalid_argument("sample-size ladder needs at least 4 entries");
  for (std::size_t i = 0; i < cfg.ladder.size(); ++i) {
    if (cfg.ladder[i] < 1 || (i > 0 && cfg.ladder[i] <= cfg.ladder[i - 1]))
      throw std::invalid_argument("sample-size ladder must be strictly increasing");
  }
  if (cfg.replicates < 2)
    throw std::invalid_argument("rate experiment needs >= 2 replicates");
  if ((!cfg.z.empty() && cfg.z.size() != cfg.p) ||
      (!cfg.x.empty() && cfg.x.size() != cfg.q))
    throw std::invalid_argument("evaluation point has wrong dimensions");
  check_noise(cfg.noise);
}

//! Empirical convergence rate with reference bandwidths: RMSE per n over
//! independent replicates (pointwise error, or max error over the risk
//! grid), then the slope of log RMSE against log n.
inline RateResult rate_experiment(const RateConfig& cfg)
{
  check_rate_config(cfg);
  const std::vector<std::int64_t> z0 =
    cfg.z.empty() ? std::vector<std::int64_t>(cfg.p, 0) : cfg.z;
  const std::vector<double> x0 = cfg.x.empty() ? std::vector<double>(cfg.q, 0.0) : cfg.x;
  const GridSpec grid = risk_grid(cfg.p, cfg.q, cfg.m);
  const GridTensor truth_grid = true_density_grid(grid, cfg.m, cfg.theta);
  const double truth_point = true_density(z0, x0, cfg.m, cfg.theta);

  std::vector<RateRow> rows;
  for (std::size_t n : cfg.ladder) {
    std::vector<double> sq(cfg.replicates);
    parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
      RngStream stream(cfg.seed, { n, r, detail::data_key });
      auto data = simulate_dataset(n, cfg.p, cfg.q, cfg.m, cfg.theta, stream);
      const auto bw = reference_bandwidths(n, cfg.p, cfg.q, cfg.ell, cfg.noise,
                                           std::vector<double>(cfg.q, cfg.bandwidth_scale));
      const auto model = fit(std::move(data), cfg.kernel, cfg.noise, bw,
                             derive_seed(cfg.seed, { n, r, detail::estimator_key }));
      double err = 0.0;
      if (cfg.mode == ErrorMode::pointwise) {
        err = model(z0, x0) - truth_point;
      } else {
        const auto est = evaluate_grid(model, grid);
        for (std::size_t i = 0; i < est.values.size(); ++i)
          err = std::max(err, std::abs(est.values[i] - truth_grid.values[i]));
      }
      sq[r] = err * err;
    });
    double mean = 0.0;
    for (double v : sq)
      mean += v;
    rows.push_back({ n, std::sqrt(mean / static_cast<double>(sq.size())) });
  }
  return log_log_fit(rows);
}

} // namespace jkde::sim
