#pragma once

#include "bandwidth.hpp"
#include "error.hpp"
#include "estimator.hpp"
#include "io.hpp"
#include "kernels.hpp"
#include "noise.hpp"
#include "simharness.hpp"
#include "theory.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace jkde::cli {

enum ExitCode : int
{
  ok = 0,
  usage_error = 2,
  data_error = 3,
  numeric_error = 4
};

inline constexpr std::uint64_t default_seed = 42;

namespace detail {

struct NoiseOptions
{
  std::string shape;
  std::optional<double> gamma1;
  std::optional<double> gamma2;

  void attach(CLI::App& cmd)
  {
    cmd.add_option("--noise", shape, "Noise density: uniform|trapezoid");
    cmd.add_option("--gamma1", gamma1, "Plateau half-width");
    cmd.add_option("--gamma2", gamma2, "Support half-width");
  }

  //! Without --noise the shape follows the gammas: 0.5/0.5 (or none) is
  //! uniform, anything else a trapezoid. A trapezoid without gammas uses
  //! 3/8 and 5/8.
  NoiseSpec raw() const
  {
    NoiseShape s = NoiseShape::uniform;
    if (!shape.empty())
      s = noise_shape_from_string(shape);
    else if ((gamma1 && *gamma1 != 0.5) || (gamma2 && *gamma2 != 0.5))
      s = NoiseShape::trapezoid;
    if (s == NoiseShape::uniform)
      return { s, gamma1.value_or(0.5), gamma2.value_or(0.5) };
    const double g1 = gamma1.value_or(gamma2 ? 1.0 - *gamma2 : 0.375);
    const double g2 = gamma2.value_or(1.0 - g1);
    return { s, g1, g2 };
  }

  NoiseSpec checked() const
  {
    auto spec = raw();
    check_noise(spec);
    return spec;
  }
};

struct Outputs
{
  std::ostream& out;
  std::ostream& err;
};

inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed,
                                  std::ostream& err)
{
  if (seed)
    return *seed;
  err << "jkde: no --seed given, using default seed " << default_seed << '\n';
  return default_seed;
}

//! Writes to --out when given, else to the command's stdout.
template <typename Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn)
{
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file)
    throw DataError("cannot write '" + path + "'");
  fn(file);
  if (!file)
    throw DataError("failed writing '" + path + "'");
}

inline std::vector<double> parse_double_list(const std::string& text, const char* what)
{
  std::vector<double> out;
  if (text.empty())
    return out;
  for (const auto& tok : io::split(text, ',')) {
    double v = 0.0;
    if (!io::parse_double(tok, v))
      throw std::invalid_argument(std::string(what) + ": cannot parse '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

inline std::vector<std::size_t> parse_size_list(const std::string& text, const char* what)
{
  std::vector<std::size_t> out;
  for (const auto& tok : io::split(text, ',')) {
    std::int64_t v = 0;
    if (!io::parse_int(tok, v) || v < 0)
      throw std::invalid_argument(std::string(what) + ": cannot parse '" + tok + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

//! "start:ratio:stop" geometric ladder, or an explicit comma list.
inline std::vector<std::size_t> parse_ladder(const std::string& text)
{
  if (text.find(':') == std::string::npos)
    return parse_size_list(text, "--ladder");
  const auto parts = io::split(text, ':');
  double start = 0, ratio = 0, stop = 0;
  if (parts.size() != 3 || !io::parse_double(parts[0], start) ||
      !io::parse_double(parts[1], ratio) || !io::parse_double(parts[2], stop) ||
      !(start >= 1.0) || !(ratio > 1.0) || stop < start)
    throw std::invalid_argument("--ladder must be start:ratio:stop with ratio > 1");
  std::vector<std::size_t> out;
  for (double v = start; v <= stop * (1.0 + 1e-12); v *= ratio)
    out.push_back(static_cast<std::size_t>(std::llround(v)));
  return out;
}

//! "p=1,q=1,m=15"
inline sim::ScenarioConfig parse_scenario(const std::string& text)
{
  sim::ScenarioConfig cfg;
  for (const auto& part : io::split(text, ',')) {
    const auto eq = part.find('=');
    std::int64_t v = 0;
    if (eq == std::string::npos || !io::parse_int(part.substr(eq + 1), v) || v < 0)
      throw std::invalid_argument("--scenario entry '" + part + "' is not key=integer");
    const auto key = part.substr(0, eq);
    if (key == "p")
      cfg.p = static_cast<std::size_t>(v);
    else if (key == "q")
      cfg.q = static_cast<std::size_t>(v);
    else if (key == "m")
      cfg.m = static_cast<int>(v);
    else
      throw std::invalid_argument("--scenario key '" + key + "' (expected p, q, m)");
  }
  return cfg;
}

inline std::string fixed(double v, int digits)
{
  // avoid printing "-0.000..."
  if (std::abs(v) < 0.5 * std::pow(10.0, -digits))
    v = 0.0;
  return io::format("%.*f", digits, v);
}

} // namespace detail

//! Entry point of the command-line tool. Returns the process exit code.
inline int dispatch(int argc,
                    const char* const* argv,
                    std::ostream& out = std::cout,
                    std::ostream& err = std::cerr)
{
  CLI::App app{ "Jittering kernel density estimation for mixed discrete/continuous data",
                "jkde" };
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  unsigned threads = 1;
  app.add_option("--threads", threads, "Maximum worker threads")->check(CLI::PositiveNumber);

  // fit ----------------------------------------------------------------------
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model to a CSV dataset");
  std::string fit_data, fit_discrete, fit_out, fit_h, fit_b;
  std::string fit_kernel = "epanechnikov";
  detail::NoiseOptions fit_noise;
  bool fit_cv = false;
  std::size_t cv_grid = 15;
  double cv_floor = 1e-10;
  std::optional<std::uint64_t> fit_seed;
  fit_cmd->add_option("--data", fit_data, "CSV file with a header row")->required();
  fit_cmd->add_option("--discrete", fit_discrete, "Comma-separated integer columns");
  fit_cmd->add_option("--kernel", fit_kernel, "uniform|epanechnikov|biweight");
  fit_noise.attach(*fit_cmd);
  fit_cmd->add_option("--h", fit_h, "Discrete bandwidths (comma-separated)");
  fit_cmd->add_option("--b", fit_b, "Continuous bandwidths (comma-separated)");
  fit_cmd->add_flag("--cv", fit_cv, "Select bandwidths by likelihood cross-validation");
  fit_cmd->add_option("--cv-grid", cv_grid, "Grid points per dimension")->check(CLI::Range(2, 1000));
  fit_cmd->add_option("--cv-floor", cv_floor, "Density floor before logs");
  fit_cmd->add_option("--seed", fit_seed, "Master seed");
  fit_cmd->add_option("--out", fit_out, "Model JSON output (default stdout)");
  fit_cmd->add_option("--threads", threads, "Maximum worker threads");

  // eval ---------------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a fitted model on a grid");
  std::string eval_model, eval_grid, eval_out;
  eval_cmd->add_option("--model", eval_model, "Model JSON from 'fit'")->required();
  eval_cmd->add_option("--grid", eval_grid, "e.g. \"z1=0:15;x1=-2:0.4:2\"")->required();
  eval_cmd->add_option("--out", eval_out, "CSV output (default stdout)");
  eval_cmd->add_option("--threads", threads, "Maximum worker threads");

  // simulate -----------------------------------------------------------------
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo RASE comparison");
  std::vector<std::string> sim_scenarios;
  std::string sim_n = "50,200", sim_out, sim_estimators = "jkde,jkde2,liracine";
  std::string sim_kernel = "epanechnikov";
  std::size_t sim_nsim = 200;
  std::optional<std::uint64_t> sim_seed;
  sim_cmd->add_option("--scenario", sim_scenarios, "e.g. p=1,q=1,m=15 (repeatable)")
    ->required()
    ->take_all();
  sim_cmd->add_option("--n", sim_n, "Sample sizes (comma-separated)");
  sim_cmd->add_option("--nsim", sim_nsim, "Replicates per sample size")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--estimators", sim_estimators, "jkde,jkde2,liracine,jkde-ref,jkde2-ref,freq");
  sim_cmd->add_option("--kernel", sim_kernel, "uniform|epanechnikov|biweight");
  sim_cmd->add_option("--cv-grid", cv_grid, "Grid points per dimension")->check(CLI::Range(2, 1000));
  sim_cmd->add_option("--cv-floor", cv_floor, "Density floor before logs");
  sim_cmd->add_option("--seed", sim_seed, "Master seed");
  sim_cmd->add_option("--out", sim_out, "Long-format CSV output (default stdout)");
  sim_cmd->add_option("--threads", threads, "Maximum worker threads");

  // rates --------------------------------------------------------------------
  auto* rates_cmd = app.add_subcommand("rates", "Empirical convergence-rate slope");
  std::size_t rates_p = 1, rates_q = 0, rates_reps = 400;
  int rates_ell = 2, rates_m = 1;
  double rates_scale = 1.0;
  std::string rates_ladder = "500:2:16000", rates_out, rates_mode = "pointwise";
  std::string rates_kernel = "epanechnikov";
  detail::NoiseOptions rates_noise;
  std::optional<std::uint64_t> rates_seed;
  rates_cmd->add_option("--p", rates_p, "Number of discrete variables");
  rates_cmd->add_option("--q", rates_q, "Number of continuous variables");
  rates_cmd->add_option("--ell", rates_ell, "Kernel order");
  rates_cmd->add_option("--m", rates_m, "Binomial size of discrete variables")->check(CLI::PositiveNumber);
  rates_cmd->add_option("--ladder", rates_ladder, "start:ratio:stop or comma list");
  rates_cmd->add_option("--reps", rates_reps, "Replicates per sample size");
  rates_cmd->add_option("--mode", rates_mode, "pointwise|sup");
  rates_cmd->add_option("--scale", rates_scale, "b = scale * n^(-1/(2 ell + q))")->check(CLI::PositiveNumber);
  rates_cmd->add_option("--kernel", rates_kernel, "uniform|epanechnikov|biweight");
  rates_noise.attach(*rates_cmd);
  rates_cmd->add_option("--seed", rates_seed, "Master seed");
  rates_cmd->add_option("--out", rates_out, "CSV output (default stdout)");
  rates_cmd->add_option("--threads", threads, "Maximum worker threads");

  // bias ---------------------------------------------------------------------
  auto* bias_cmd = app.add_subcommand("bias", "Finite-sample bias of the discrete estimator");
  std::string bias_pmf, bias_kernel = "epanechnikov";
  std::int64_t bias_zmin = 0, bias_z = 0;
  double bias_h = 0.5;
  detail::NoiseOptions bias_noise;
  bias_cmd->add_option("--pmf", bias_pmf, "Probabilities, comma-separated")->required();
  bias_cmd->add_option("--zmin", bias_zmin, "Support offset of the first probability");
  bias_cmd->add_option("--z", bias_z, "Evaluation point")->required();
  bias_cmd->add_option("--h", bias_h, "Discrete bandwidth")->required();
  bias_cmd->add_option("--kernel", bias_kernel, "uniform|epanechnikov|biweight");
  bias_noise.attach(*bias_cmd);

  // are ----------------------------------------------------------------------
  auto* are_cmd = app.add_subcommand("are", "Asymptotic relative efficiency vs sample frequency");
  double are_f = 0.5;
  std::string are_kernel = "epanechnikov";
  detail::NoiseOptions are_noise;
  are_cmd->add_option("--f", are_f, "Probability f(z)")->required();
  are_cmd->add_option("--kernel", are_kernel, "uniform|epanechnikov|biweight");
  are_noise.attach(*are_cmd);

  // validate-noise -------------------------------------------------------------
  auto* val_cmd = app.add_subcommand("validate-noise", "Check noise class membership");
  detail::NoiseOptions val_noise;
  val_noise.attach(*val_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage_error;
  }

  try {
    if (*fit_cmd) {
      const auto seed = detail::resolve_seed(fit_seed, err);
      const KernelSpec kernel(kernel_family_from_string(fit_kernel));
      const auto noise = fit_noise.checked();
      const auto discrete =
        fit_discrete.empty() ? std::vector<std::string>{} : io::split(fit_discrete, ',');
      const auto schema = io::schema_from_header(io::read_header(fit_data), discrete);
      auto data = io::parse_dataset(fit_data, schema);

      Bandwidths bw;
      if (fit_cv) {
        if (!fit_h.empty() || !fit_b.empty())
          throw std::invalid_argument("--cv cannot be combined with --h/--b");
        CvConfig cfg;
        cfg.grid_size = cv_grid;
        cfg.floor = cv_floor;
        cfg.seed = seed;
        cfg.threads = threads;
        bw = select_cv(data, kernel, noise, cfg);
      } else if (!fit_h.empty() || !fit_b.empty() ||
                 (data.p() == 0 && data.q() == 0)) {
        bw.h = detail::parse_double_list(fit_h, "--h");
        bw.b = detail::parse_double_list(fit_b, "--b");
      } else {
        bw = reference_bandwidths(data, kernel, noise);
      }
      const auto model = fit(std::move(data), kernel, noise, bw, seed);
      const auto path = std::filesystem::absolute(fit_data).lexically_normal();
      detail::with_output(fit_out, out, [&](std::ostream& os) {
        os << io::model_to_json(model, path).dump(2) << '\n';
      });
      return ok;
    }

    if (*eval_cmd) {
      const auto model = io::load_model(eval_model);
      const auto grid = io::parse_grid(eval_grid, model.data().discrete_names(),
                                       model.data().continuous_names());
      const auto values = evaluate_grid(model, grid, threads);
      detail::with_output(eval_out, out, [&](std::ostream& os) {
        io::write_grid_csv(os, grid, values, model.data().discrete_names(),
                           model.data().continuous_names());
      });
      return ok;
    }

    if (*sim_cmd) {
      const auto seed = detail::resolve_seed(sim_seed, err);
      std::vector<sim::RiskTable> tables;
      for (const auto& text : sim_scenarios) {
        auto cfg = detail::parse_scenario(text);
        cfg.n_list = detail::parse_size_list(sim_n, "--n");
        cfg.n_sim = sim_nsim;
        cfg.estimators = io::split(sim_estimators, ',');
        cfg.kernel = KernelSpec(kernel_family_from_string(sim_kernel));
        cfg.cv.grid_size = cv_grid;
        cfg.cv.floor = cv_floor;
        cfg.seed = seed;
        cfg.threads = threads;
        tables.push_back(sim::run_scenario(cfg));
      }
      const bool csv_to_stdout = sim_out.empty() || sim_out == "-";
      detail::with_output(sim_out, out, [&](std::ostream& os) {
        os << "scenario,estimator,n,replicate,rase\n";
        for (const auto& t : tables)
          for (const auto& r : t.records)
            os << t.scenario << ',' << r.estimator << ',' << r.n << ',' << r.replicate
               << ',' << io::format("%.17g", r.rase) << '\n';
      });
      std::ostream& summary = csv_to_stdout ? err : out;
      for (const auto& t : tables) {
        std::vector<std::size_t> ns;
        std::vector<std::string> ests;
        for (const auto& r : t.records) {
          if (std::find(ns.begin(), ns.end(), r.n) == ns.end())
            ns.push_back(r.n);
          if (std::find(ests.begin(), ests.end(), r.estimator) == ests.end())
            ests.push_back(r.estimator);
        }
        for (auto n : ns)
          for (const auto& e : ests)
            summary << t.scenario << " n=" << n << ' ' << e
                    << " median_rase=" << io::format("%.6g", t.median(e, n)) << '\n';
      }
      return ok;
    }

    if (*rates_cmd) {
      sim::RateConfig cfg;
      cfg.p = rates_p;
      cfg.q = rates_q;
      cfg.ell = rates_ell;
      cfg.m = rates_m;
      cfg.ladder = detail::parse_ladder(rates_ladder);
      cfg.replicates = rates_reps;
      if (rates_mode == "pointwise")
        cfg.mode = sim::ErrorMode::pointwise;
      else if (rates_mode == "sup")
        cfg.mode = sim::ErrorMode::sup_grid;
      else
        throw std::invalid_argument("--mode must be pointwise or sup");
      cfg.kernel = KernelSpec(kernel_family_from_string(rates_kernel));
      cfg.noise = rates_noise.checked();
      cfg.bandwidth_scale = rates_scale;
      cfg.seed = detail::resolve_seed(rates_seed, err);
      cfg.threads = threads;
      const auto res = sim::rate_experiment(cfg);
      const auto summary = io::format("# slope=%.6f stderr=%.6f", res.slope, res.stderr_slope);
      const bool csv_to_stdout = rates_out.empty() || rates_out == "-";
      detail::with_output(rates_out, out, [&](std::ostream& os) {
        os << "n,rmse\n";
        for (const auto& row : res.rows)
          os << row.n << ',' << io::format("%.10g", row.rmse) << '\n';
        os << summary << '\n';
      });
      if (!csv_to_stdout)
        out << summary.substr(2) << '\n';
      return ok;
    }

    if (*bias_cmd) {
      const KernelSpec kernel(kernel_family_from_string(bias_kernel));
      const auto noise = bias_noise.checked();
      const theory::DiscretePmf pmf(bias_zmin, detail::parse_double_list(bias_pmf, "--pmf"));
      if (!(bias_h > 0.0))
        throw std::invalid_argument("--h must be positive");
      const std::string cor =
        noise.shape == NoiseShape::uniform
          ? detail::fixed(theory::bias_corollary1(pmf, bias_z, bias_h, kernel), 12)
          : std::string("n/a");
      out << "corollary1 " << cor << '\n';
      out << "lemma2     "
          << detail::fixed(theory::bias_lemma2(pmf, bias_z, bias_h, kernel, noise), 12) << '\n';
      out << "oracle     "
          << detail::fixed(theory::bias_oracle_quadrature(pmf, bias_z, bias_h, kernel, noise), 12)
          << '\n';
      return ok;
    }

    if (*are_cmd) {
      const KernelSpec kernel(kernel_family_from_string(are_kernel));
      out << detail::fixed(theory::are(are_f, are_noise.checked(), kernel), 6) << '\n';
      return ok;
    }

    if (*val_cmd) {
      const auto report = validate_noise_class(val_noise.raw());
      for (const auto& c : report.checks)
        out << c.name << ": " << (c.passed ? "pass" : "FAIL") << " (residual "
            << io::format("%.3g", c.residual) << ")\n";
      out << "noise class: " << (report.passed() ? "pass" : "FAIL") << '\n';
      return ok;
    }
  } catch (const DataError& e) {
    err << "jkde: error: " << e.what() << '\n';
    return data_error;
  } catch (const NumericError& e) {
    err << "jkde: error: " << e.what() << '\n';
    return numeric_error;
  } catch (const std::invalid_argument& e) {
    err << "jkde: error: " << e.what() << '\n';
    return usage_error;
  } catch (const std::exception& e) {
    err << "jkde: error: " << e.what() << '\n';
    return numeric_error;
  }
  return usage_error;
}

} // namespace jkde::cli
