#include "jumpdiff/inference.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "jumpdiff/errors.hpp"
#include "jumpdiff/random.hpp"

namespace jumpdiff {

namespace {

constexpr double kDt = 1.0 / kTradingDaysPerYear;

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Sample variance (n - 1 denominator).
double variance_of(std::span<const double> x, double mean) {
  if (x.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size() - 1);
}

double median_of(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 == 1 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - d * d / (2.0 * var);
}

}  // namespace

std::vector<double> log_returns(const PriceSeries& series) {
  if (series.size() < 2) throw DataError("log_returns: series too short (need >= 2 closes)");
  std::vector<double> r(series.size() - 1);
  for (std::size_t k = 0; k + 1 < series.size(); ++k)
    r[k] = std::log(series.closes[k + 1] / series.closes[k]);
  return r;
}

DriftVol drift_vol_from_returns(std::span<const double> r) {
  if (r.size() < 2) throw DataError("drift/vol: need at least 2 returns");
  const double m = mean_of(r);
  const double vol = std::sqrt(variance_of(r, m) * kTradingDaysPerYear);
  return {m * kTradingDaysPerYear + 0.5 * vol * vol, vol};
}

DriftVol estimate_drift_vol(const PriceSeries& series) {
  if (series.size() < 3) throw DataError("estimate_drift_vol: series too short (need >= 3 closes)");
  const auto r = log_returns(series);
  return drift_vol_from_returns(r);
}

JumpDetection detect_jumps(const PriceSeries& series, double threshold_multiple) {
  require(std::isfinite(threshold_multiple) && threshold_multiple > 0.0,
          "detect_jumps: threshold_multiple must be > 0");
  if (series.size() < 3) throw DataError("detect_jumps: series too short (need >= 3 closes)");

  const std::size_t n = series.size() - 1;
  std::vector<double> diff(n);
  std::vector<double> pos, neg;
  for (std::size_t k = 0; k < n; ++k) {
    diff[k] = series.closes[k + 1] - series.closes[k];
    if (diff[k] > 0.0) pos.push_back(diff[k]);
    if (diff[k] < 0.0) neg.push_back(diff[k]);
  }

  JumpDetection d;
  d.threshold_multiple = threshold_multiple;
  d.n_returns = n;
  d.up_median_defined = !pos.empty();
  d.down_median_defined = !neg.empty();
  if (d.up_median_defined) d.up_median = median_of(pos);
  if (d.down_median_defined) d.down_median = median_of(neg);

  const auto r = log_returns(series);
  std::vector<double> remainder;
  remainder.reserve(n);
  double up_rel = 0.0, down_rel = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double rel = std::fabs(diff[k]) / series.closes[k];
    if (d.up_median_defined && diff[k] > threshold_multiple * d.up_median) {
      ++d.up_count;
      up_rel += rel;
    } else if (d.down_median_defined && diff[k] < threshold_multiple * d.down_median) {
      ++d.down_count;
      down_rel += rel;
    } else {
      remainder.push_back(r[k]);
    }
  }
  if (d.up_count > 0) d.up_intensity = up_rel / static_cast<double>(d.up_count);
  if (d.down_count > 0) d.down_intensity = down_rel / static_cast<double>(d.down_count);
  const double per_year = kTradingDaysPerYear / static_cast<double>(n);
  d.lambda_up = static_cast<double>(d.up_count) * per_year;
  d.lambda_down = static_cast<double>(d.down_count) * per_year;

  if (remainder.size() >= 2) {
    const auto dv = drift_vol_from_returns(remainder);
    d.drift = dv.drift;
    d.vol = dv.vol;
  } else if (remainder.size() == 1) {
    d.drift = remainder[0] * kTradingDaysPerYear;
  }
  return d;
}

SplitJumpParams to_split_params(const JumpDetection& d) {
  SplitJumpParams p;
  p.gbm = {d.drift, d.vol};
  p.lambda_up = d.lambda_up;
  p.lambda_down = d.lambda_down;
  if (d.up_intensity > 0.0) p.eta_up = 1.0 / d.up_intensity;
  if (d.down_intensity > 0.0) p.eta_down = 1.0 / d.down_intensity;
  return p;
}

nlohmann::json to_json(const JumpDetection& d) {
  return {
      {"up_count", d.up_count},
      {"down_count", d.down_count},
      {"lambda_up", d.lambda_up},
      {"lambda_down", d.lambda_down},
      {"up_intensity", d.up_intensity},
      {"down_intensity", d.down_intensity},
      {"drift", d.drift},
      {"vol", d.vol},
      {"threshold_multiple", d.threshold_multiple},
      {"up_median", d.up_median},
      {"down_median", d.down_median},
      {"up_median_defined", d.up_median_defined},
      {"down_median_defined", d.down_median_defined},
      {"n_returns", d.n_returns},
  };
}

void PriorSpec::validate() const {
  require(drift.variance > 0.0, "prior: drift variance must be > 0");
  require(variance.shape > 0.0 && variance.scale > 0.0, "prior: variance shape/scale must be > 0");
  require(lambda.shape > 0.0 && lambda.rate > 0.0, "prior: lambda shape/rate must be > 0");
  require(jump_mean.variance > 0.0, "prior: jump-mean variance must be > 0");
  require(jump_variance.shape > 0.0 && jump_variance.scale > 0.0,
          "prior: jump-variance shape/scale must be > 0");
}

void GibbsConfig::validate() const {
  require(iterations >= 1, "gibbs: iterations must be >= 1");
  require(burn_in < iterations, "gibbs: burn_in must be < iterations");
  require(thinning >= 1, "gibbs: thinning must be >= 1");
  priors.validate();
}

// Model, with dt = 1/252 and one jump at most per day:
//   J_k ~ Bernoulli(lambda dt),  xi_k ~ N(mu_j, sigma_j^2)
//   r_k = (mu - sigma^2/2) dt + sigma sqrt(dt) eps_k + J_k xi_k
// Sweep: (J_k, xi_k) jointly per day, then mu, sigma^2, lambda, mu_j, sigma_j^2.
// mu, mu_j and sigma_j^2 have conjugate conditionals. sigma^2 enters the mean
// as well as the variance, and the Bernoulli likelihood for lambda is not
// gamma-conjugate, so those two blocks use Metropolis-Hastings with a
// near-conjugate proposal.
PosteriorChain gibbs_fit(const PriceSeries& series, const GibbsConfig& config) {
  config.validate();
  series.validate();
  require(series.size() >= kMinGibbsObservations,
          "gibbs: series needs at least " + std::to_string(kMinGibbsObservations) + " closes");

  const auto r = log_returns(series);
  for (double x : r)
    if (!std::isfinite(x)) throw NumericError("gibbs: non-finite log return in input");
  const std::size_t n = r.size();
  const double nd = static_cast<double>(n);
  const PriorSpec& pr = config.priors;
  constexpr double s_floor = kSigmaFloor * kSigmaFloor;

  PosteriorChain chain;
  chain.config = config;
  auto& diag = chain.diagnostics;

  // Moment-based starting point.
  const double rm = mean_of(r);
  const double rv = variance_of(r, rm);
  double s = rv / kDt;
  if (!(s > s_floor)) {
    diag.degenerate_returns = true;
    s = s_floor;
  }
  double mu = rm / kDt + 0.5 * s;
  double lambda = std::min(pr.lambda.shape / pr.lambda.rate, 0.5 / kDt);
  double mj = pr.jump_mean.mean;
  double vj = pr.jump_variance.shape > 1.0 ? pr.jump_variance.scale / (pr.jump_variance.shape - 1.0)
                                           : pr.jump_variance.scale;

  std::vector<unsigned char> jump(n, 0);
  std::vector<double> xi(n, 0.0);
  Stream rng(config.seed, {0, 0, Purpose::gibbs});

  const auto inv_gamma = [&](double shape, double scale) { return scale / rng.gamma(shape); };

  const std::uint64_t kept = (config.iterations - config.burn_in + config.thinning - 1) / config.thinning;
  chain.draws.reserve(kept);
  chain.iters.reserve(kept);
  double jump_day_total = 0.0;

  for (std::uint64_t it = 0; it < config.iterations; ++it) {
    // 1. Jump indicators and sizes.
    const double ldt = lambda * kDt;
    const double log_p_jump = ldt > 0.0 ? std::log(ldt) : -INFINITY;
    const double log_p_none = std::log1p(-ldt);
    const double alpha = (mu - 0.5 * s) * kDt;
    const double vd = s * kDt;
    std::size_t n_jump = 0;
    double sum_xi = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double l1 = log_p_jump + log_normal_pdf(r[k], alpha + mj, vd + vj);
      const double l0 = log_p_none + log_normal_pdf(r[k], alpha, vd);
      const double p1 = 1.0 / (1.0 + std::exp(l0 - l1));
      if (std::isnan(p1)) throw NumericError("gibbs: non-finite jump-indicator probability");
      jump[k] = rng.uniform() < p1;
      if (jump[k]) {
        const double prec = 1.0 / vj + 1.0 / vd;
        const double m = (mj / vj + (r[k] - alpha) / vd) / prec;
        xi[k] = m + rng.normal() / std::sqrt(prec);
        ++n_jump;
        sum_xi += xi[k];
      } else {
        xi[k] = 0.0;
      }
    }
    jump_day_total += static_cast<double>(n_jump);

    // 2. Drift: z_k = r_k - J_k xi_k + s dt / 2 ~ N(mu dt, s dt).
    double sum_y = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum_y += r[k] - xi[k];
    {
      const double sum_z = sum_y + 0.5 * s * kDt * nd;
      const double prec = 1.0 / pr.drift.variance + nd * kDt / s;
      const double m = (pr.drift.mean / pr.drift.variance + sum_z / s) / prec;
      mu = m + rng.normal() / std::sqrt(prec);
    }

    // 3. Diffusion variance. With w_k = y_k - mu dt the residual sum of
    // squares at variance s is SS(s) = sum w^2 + s dt sum w + n (s dt / 2)^2.
    {
      double sum_w = 0.0, sum_w2 = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double w = r[k] - xi[k] - mu * kDt;
        sum_w += w;
        sum_w2 += w * w;
      }
      const double shape = pr.variance.shape + 0.5 * nd;
      const auto scale_at = [&](double v) {
        const double h = 0.5 * v * kDt;
        return pr.variance.scale + (sum_w2 + v * kDt * sum_w + nd * h * h) / (2.0 * kDt);
      };
      const double b_cur = scale_at(s);
      double prop = inv_gamma(shape, b_cur);
      if (prop < s_floor) {
        prop = s_floor;
        ++diag.sigma_floor_hits;
      }
      const double b_prop = scale_at(prop);
      const double log_ratio = -b_prop / prop + b_cur / s + shape * (std::log(b_prop) - std::log(b_cur)) -
                               b_prop / s + b_cur / prop;
      ++diag.proposals;
      if (std::isnan(log_ratio)) throw NumericError("gibbs: non-finite variance acceptance ratio");
      if (std::log(rng.uniform()) < log_ratio) {
        s = prop;
        ++chain.accept_count;
      }
    }

    // 4. Jump arrival rate. Proposal Gamma(a + nJ, b + (n - nJ) dt) replaces
    // (1 - lambda dt)^(n - nJ) by exp(-lambda dt (n - nJ)); the weight w below
    // is the log of the neglected factor.
    {
      const double quiet = nd - static_cast<double>(n_jump);
      const double shape = pr.lambda.shape + static_cast<double>(n_jump);
      const double rate = pr.lambda.rate + quiet * kDt;
      const double prop = rng.gamma(shape) / rate;
      const auto weight = [&](double l) { return quiet * (std::log1p(-l * kDt) + l * kDt); };
      ++diag.proposals;
      if (prop * kDt < 1.0 && std::log(rng.uniform()) < weight(prop) - weight(lambda)) {
        lambda = prop;
        ++chain.accept_count;
      }
    }

    // 5. Jump mean and 6. jump variance, from the sizes on jump days.
    {
      const double prec = 1.0 / pr.jump_mean.variance + static_cast<double>(n_jump) / vj;
      const double m = (pr.jump_mean.mean / pr.jump_mean.variance + sum_xi / vj) / prec;
      mj = m + rng.normal() / std::sqrt(prec);
      double ss = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        if (jump[k]) ss += (xi[k] - mj) * (xi[k] - mj);
      vj = inv_gamma(pr.jump_variance.shape + 0.5 * static_cast<double>(n_jump),
                     pr.jump_variance.scale + 0.5 * ss);
    }

    if (!std::isfinite(mu) || !std::isfinite(s) || !std::isfinite(mj) || !std::isfinite(vj))
      throw NumericError("gibbs: non-finite parameter draw at sweep " + std::to_string(it));

    if (it >= config.burn_in && (it - config.burn_in) % config.thinning == 0) {
      chain.draws.push_back({mu, std::sqrt(s), lambda, mj, std::sqrt(vj)});
      chain.iters.push_back(it);
    }
  }
  diag.mean_jump_days = jump_day_total / static_cast<double>(config.iterations);
  return chain;
}

ParamSummary summarize(std::span<const double> values) {
  if (values.empty()) throw ValidationError("posterior_summary: empty chain");
  ParamSummary out;
  out.mean = mean_of(values);
  out.sd = std::sqrt(variance_of(values, out.mean));
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  // Linear interpolation between order statistics (Hyndman-Fan type 7).
  const auto quantile = [&](double q) {
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  out.q05 = quantile(0.05);
  out.q95 = quantile(0.95);
  if (out.sd == 0.0) out.q05 = out.q95 = out.mean;
  return out;
}

namespace {

std::vector<double> column(const std::vector<Draw>& draws, double Draw::*field) {
  std::vector<double> out(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) out[i] = draws[i].*field;
  return out;
}

}  // namespace

PosteriorSummary posterior_summary(const PosteriorChain& chain) {
  if (chain.draws.empty()) throw ValidationError("posterior_summary: empty chain");
  return {summarize(column(chain.draws, &Draw::mu)), summarize(column(chain.draws, &Draw::sigma)),
          summarize(column(chain.draws, &Draw::lambda)), summarize(column(chain.draws, &Draw::mu_j)),
          summarize(column(chain.draws, &Draw::sigma_j))};
}

Draw split_half_discrepancy(const PosteriorChain& chain) {
  if (chain.draws.size() < 4) throw ValidationError("split-half check: need at least 4 draws");
  const std::size_t half = chain.draws.size() / 2;
  const auto one = [&](double Draw::*f) {
    const auto all = column(chain.draws, f);
    const std::span<const double> a(all.data(), half);
    const std::span<const double> b(all.data() + half, all.size() - half);
    const double sd = std::sqrt(variance_of(all, mean_of(all)));
    return sd > 0.0 ? std::fabs(mean_of(a) - mean_of(b)) / sd : 0.0;
  };
  return {one(&Draw::mu), one(&Draw::sigma), one(&Draw::lambda), one(&Draw::mu_j),
          one(&Draw::sigma_j)};
}

void write_chain_csv(std::ostream& os, const PosteriorChain& chain) {
  os << "iter,mu,sigma,lambda,mu_j,sigma_j\n";
  char buf[64];
  const auto put = [&](double v) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    os << ',' << std::string_view(buf, p - buf);
  };
  for (std::size_t i = 0; i < chain.draws.size(); ++i) {
    const Draw& d = chain.draws[i];
    os << chain.iters[i];
    put(d.mu);
    put(d.sigma);
    put(d.lambda);
    put(d.mu_j);
    put(d.sigma_j);
    os << '\n';
  }
}

nlohmann::json to_json(const PosteriorSummary& s) {
  const auto one = [](const ParamSummary& p) {
    return nlohmann::json{{"mean", p.mean}, {"sd", p.sd}, {"q05", p.q05}, {"q95", p.q95}};
  };
  return {{"mu", one(s.mu)},
          {"sigma", one(s.sigma)},
          {"lambda", one(s.lambda)},
          {"mu_j", one(s.mu_j)},
          {"sigma_j", one(s.sigma_j)}};
}

}  // namespace jumpdiff
