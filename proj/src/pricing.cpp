#include "jumpdiff/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "jumpdiff/errors.hpp"
#include "jumpdiff/parallel.hpp"

namespace jumpdiff {

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double black_scholes(double s0, double k, double t, double r, double sigma) {
  const double df = std::exp(-r * t);
  if (sigma == 0.0) return std::max(s0 - k * df, 0.0);
  const double sd = sigma * std::sqrt(t);
  const double d1 = (std::log(s0 / k) + (r + 0.5 * sigma * sigma) * t) / sd;
  const double d2 = d1 - sd;
  return s0 * norm_cdf(d1) - k * df * norm_cdf(d2);
}

void check_grid_matches(double spec_start, double spec_maturity, const SimGrid& grid,
                        const char* what) {
  require(grid.s0 == spec_start, std::string(what) + ": grid s0 must equal the contract's start value");
  require(std::fabs(grid.horizon_years - spec_maturity) <= 1e-12 * spec_maturity,
          std::string(what) + ": grid horizon must equal the maturity");
}

}  // namespace

void CallSpec::validate() const {
  require(std::isfinite(s0) && s0 > 0.0, "call: s0 must be > 0");
  require(std::isfinite(strike) && strike > 0.0, "call: strike must be > 0");
  require(std::isfinite(maturity_years) && maturity_years > 0.0, "call: maturity must be > 0");
  require(std::isfinite(discount_rate) && discount_rate >= 0.0, "call: discount rate must be >= 0");
}

double bs_call(const CallSpec& spec, double sigma) {
  spec.validate();
  require(std::isfinite(sigma) && sigma >= 0.0, "bs_call: sigma must be >= 0");
  return black_scholes(spec.s0, spec.strike, spec.maturity_years, spec.discount_rate, sigma);
}

double merton_call(const CallSpec& spec, const MertonParams& params, int n_terms) {
  spec.validate();
  params.validate();
  require(n_terms >= 1, "merton_call: n_terms must be >= 1");
  const double t = spec.maturity_years;
  const double log_mgf = params.mu_j + 0.5 * params.sigma_j * params.sigma_j;
  const double kappa = std::expm1(log_mgf);
  const double lt = params.lambda * (1.0 + kappa) * t;
  const double base_r = spec.discount_rate - params.lambda * kappa;
  const double var = params.gbm.sigma * params.gbm.sigma;
  double price = 0.0;
  for (int n = 0; n < n_terms; ++n) {
    double w;
    if (n == 0) {
      w = std::exp(-lt);
    } else {
      if (lt == 0.0) break;
      w = std::exp(n * std::log(lt) - lt - std::lgamma(n + 1.0));
    }
    const double rn = base_r + n * log_mgf / t;
    const double sn = std::sqrt(var + n * params.sigma_j * params.sigma_j / t);
    price += w * black_scholes(spec.s0, spec.strike, t, rn, sn);
  }
  return price;
}

McEstimate estimate_from_samples(const std::vector<double>& x, std::uint64_t seed) {
  McEstimate e;
  e.n_paths = x.size();
  e.seed = seed;
  if (x.empty()) return e;
  double sum = 0.0;
  for (double v : x) sum += v;
  e.mean = sum / static_cast<double>(x.size());
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - e.mean) * (v - e.mean);
    e.std_error = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  }
  return e;
}

McEstimate mc_call_price(const CallSpec& spec, const ModelParams& model, const SimGrid& grid) {
  spec.validate();
  validate(model);
  grid.validate();
  check_grid_matches(spec.s0, spec.maturity_years, grid, "mc_call_price");
  const double df = std::exp(-spec.discount_rate * spec.maturity_years);
  std::vector<double> payoff(grid.n_paths);
  parallel_for(grid.n_paths, grid.workers, [&](std::uint64_t p) {
    std::vector<double> inc(grid.n_steps);
    log_increments(model, grid, p, inc);
    const double st = terminal_from_increments(grid.s0, inc);
    payoff[p] = df * std::max(st - spec.strike, 0.0);
  });
  return estimate_from_samples(payoff, grid.seed);
}

ModelParams surface_cell_model(const GbmParams& base, double lambda, double intensity,
                               const SurfaceOptions& opts, double discount_rate) {
  ModelParams m;
  if (opts.kind == SurfaceModel::merton) {
    m = MertonParams{base, lambda, intensity, opts.jump_sd};
  } else if (intensity > 0.0) {
    m = SplitJumpParams{base, lambda, 1.0 / intensity, 0.0, 2.0};
  } else {
    m = base;
  }
  return opts.risk_neutral ? risk_neutral(m, discount_rate) : m;
}

PayoffSurface payoff_surface(const CallSpec& spec, const GbmParams& base,
                             const std::vector<double>& lambda_axis,
                             const std::vector<double>& intensity_axis, const SimGrid& grid,
                             const SurfaceOptions& opts) {
  const auto check_axis = [](const std::vector<double>& axis, const char* name) {
    require(!axis.empty(), std::string("payoff_surface: empty ") + name + " axis");
    for (std::size_t i = 0; i < axis.size(); ++i) {
      require(std::isfinite(axis[i]) && axis[i] >= 0.0,
              std::string("payoff_surface: ") + name + " axis must be nonnegative");
      require(i == 0 || axis[i - 1] < axis[i],
              std::string("payoff_surface: ") + name + " axis must be ascending");
    }
  };
  check_axis(lambda_axis, "lambda");
  check_axis(intensity_axis, "intensity");
  require(opts.jump_sd >= 0.0, "payoff_surface: jump sd must be >= 0");

  PayoffSurface s;
  s.lambda_axis = lambda_axis;
  s.intensity_axis = intensity_axis;
  s.baseline = mc_call_price(spec, surface_cell_model(base, 0.0, 0.0, {SurfaceModel::merton, 0.0,
                                                                       opts.risk_neutral},
                                                      spec.discount_rate),
                             grid);
  s.values.assign(lambda_axis.size(), std::vector<double>(intensity_axis.size()));
  s.std_errors = s.values;
  for (std::size_t i = 0; i < lambda_axis.size(); ++i) {
    for (std::size_t j = 0; j < intensity_axis.size(); ++j) {
      const auto m = surface_cell_model(base, lambda_axis[i], intensity_axis[j], opts, spec.discount_rate);
      const auto e = mc_call_price(spec, m, grid);
      s.values[i][j] = e.mean;
      s.std_errors[i][j] = e.std_error;
    }
  }
  return s;
}

void write_surface_csv(std::ostream& os, const PayoffSurface& s) {
  os << "lambda,intensity,expected_payoff,std_error\n";
  char buf[160];
  const auto row = [&](double l, double m, double v, double se) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", l, m, v, se);
    os << buf;
  };
  row(0.0, 0.0, s.baseline.mean, s.baseline.std_error);
  for (std::size_t i = 0; i < s.lambda_axis.size(); ++i)
    for (std::size_t j = 0; j < s.intensity_axis.size(); ++j)
      row(s.lambda_axis[i], s.intensity_axis[j], s.values[i][j], s.std_errors[i][j]);
}

void AnnuitySpec::validate() const {
  require(std::isfinite(a0) && a0 > 0.0, "annuity: a0 must be > 0");
  require(std::isfinite(fee_c) && fee_c >= 0.0, "annuity: fee c must be >= 0");
  require(std::isfinite(contribution_k) && contribution_k >= 0.0, "annuity: contribution k must be >= 0");
  require(std::isfinite(guarantee_g) && guarantee_g >= 0.0, "annuity: roll-up rate g must be >= 0");
  require(std::isfinite(maturity_years) && maturity_years > 0.0, "annuity: maturity must be > 0");
  require(std::isfinite(discount_rate) && discount_rate >= 0.0, "annuity: discount rate must be >= 0");
  require(discount_rate == 0.0 || guarantee_g < discount_rate,
          "annuity: roll-up rate g must be below the discount rate");
}

namespace {

// Account path for one simulation path; returns whether it was absorbed at 0.
bool account_path(const AnnuitySpec& spec, const ModelParams& model, const SimGrid& grid,
                  std::uint64_t path, std::vector<double>& inc, std::vector<double>& out) {
  log_increments(model, grid, path, inc);
  const double dt = grid.dt();
  const double fee = spec.fee_c * dt;
  const double add = spec.contribution_k * dt;
  bool absorbed = false;
  out[0] = spec.a0;
  for (std::uint32_t s = 0; s < grid.n_steps; ++s) {
    double a = absorbed ? 0.0 : out[s] * std::exp(inc[s] - fee) + add;
    if (!(a > 0.0)) {
      a = 0.0;
      absorbed = true;
    }
    out[s + 1] = a;
  }
  return absorbed;
}

void check_annuity_inputs(const AnnuitySpec& spec, const ModelParams& model, const SimGrid& grid) {
  spec.validate();
  validate(model);
  grid.validate();
  check_grid_matches(spec.a0, spec.maturity_years, grid, "annuity");
}

}  // namespace

AnnuityPaths simulate_annuity(const AnnuitySpec& spec, const ModelParams& model, const SimGrid& grid) {
  check_annuity_inputs(spec, model, grid);
  AnnuityPaths out;
  PathSet& ps = out.accounts;
  ps.model_tag = "annuity:" + std::string(model_tag(model));
  ps.seed = grid.seed;
  ps.times.resize(grid.n_steps + 1);
  for (std::uint32_t i = 0; i <= grid.n_steps; ++i)
    ps.times[i] = grid.horizon_years * i / grid.n_steps;
  ps.values.assign(grid.n_paths, std::vector<double>(grid.n_steps + 1));
  std::vector<unsigned char> absorbed(grid.n_paths, 0);
  parallel_for(grid.n_paths, grid.workers, [&](std::uint64_t p) {
    std::vector<double> inc(grid.n_steps);
    absorbed[p] = account_path(spec, model, grid, p, inc, ps.values[p]);
  });
  out.absorbed.assign(absorbed.begin(), absorbed.end());
  return out;
}

double guarantee_value(const AnnuitySpec& spec, double t) {
  spec.validate();
  require(t >= 0.0 && t <= spec.maturity_years * (1.0 + 1e-12), "guarantee_value: t outside [0, T]");
  const double g = spec.guarantee_g;
  if (g == 0.0) return spec.a0 + spec.contribution_k * t;
  return spec.a0 * std::exp(g * t) + spec.contribution_k * std::expm1(g * t) / g;
}

double annuity_payoff(double account, double guarantee) {
  require(std::isfinite(account) && account >= 0.0, "annuity_payoff: account must be finite and >= 0");
  require(std::isfinite(guarantee) && guarantee >= 0.0,
          "annuity_payoff: guarantee must be finite and >= 0");
  return std::max(guarantee - account, 0.0);
}

std::vector<double> annuity_payoffs(const AnnuitySpec& spec, const ModelParams& model,
                                    const SimGrid& grid, AnnuityEvaluation evaluation) {
  check_annuity_inputs(spec, model, grid);
  std::vector<double> times(grid.n_steps + 1), guar(grid.n_steps + 1), df(grid.n_steps + 1);
  for (std::uint32_t i = 0; i <= grid.n_steps; ++i) {
    times[i] = grid.horizon_years * i / grid.n_steps;
    guar[i] = guarantee_value(spec, times[i]);
    df[i] = std::exp(-spec.discount_rate * times[i]);
  }
  std::vector<double> payoff(grid.n_paths);
  parallel_for(grid.n_paths, grid.workers, [&](std::uint64_t p) {
    std::vector<double> inc(grid.n_steps), acct(grid.n_steps + 1);
    account_path(spec, model, grid, p, inc, acct);
    if (evaluation == AnnuityEvaluation::at_maturity) {
      payoff[p] = df.back() * annuity_payoff(acct.back(), guar.back());
    } else {
      double best = 0.0;
      for (std::size_t i = 0; i < acct.size(); ++i)
        best = std::max(best, df[i] * annuity_payoff(acct[i], guar[i]));
      payoff[p] = best;
    }
  });
  return payoff;
}

McEstimate price_annuity_guarantee(const AnnuitySpec& spec, const ModelParams& model,
                                   const SimGrid& grid, AnnuityEvaluation evaluation) {
  return estimate_from_samples(annuity_payoffs(spec, model, grid, evaluation), grid.seed);
}

nlohmann::json to_json(const McEstimate& e) {
  return {{"mean", e.mean}, {"std_error", e.std_error}, {"n_paths", e.n_paths}, {"seed", e.seed}};
}

}  // namespace jumpdiff
