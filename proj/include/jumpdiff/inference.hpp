#pragma once

// Calibration from daily closes: moment estimators, the median-multiple jump
// detector, and a Metropolis-within-Gibbs sampler for the Merton model with
// latent per-day jump indicators.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "jumpdiff/models.hpp"
#include "jumpdiff/price_series.hpp"

namespace jumpdiff {

std::vector<double> log_returns(const PriceSeries& series);

struct DriftVol {
  double drift = 0.0;  // annualized arithmetic drift
  double vol = 0.0;    // annualized volatility
};

// vol = sd(r) * sqrt(252), drift = mean(r) * 252 + vol^2 / 2. Needs >= 2 returns.
DriftVol drift_vol_from_returns(std::span<const double> returns);
DriftVol estimate_drift_vol(const PriceSeries& series);

struct JumpDetection {
  std::size_t up_count = 0;
  std::size_t down_count = 0;
  double lambda_up = 0.0;  // counts annualized by 252 / n_returns
  double lambda_down = 0.0;
  double up_intensity = 0.0;  // mean |spike| / price before the spike
  double down_intensity = 0.0;
  double drift = 0.0;  // on the non-spike remainder
  double vol = 0.0;
  double threshold_multiple = 4.0;
  double up_median = 0.0;  // median positive difference
  double down_median = 0.0;  // median negative difference (<= 0)
  bool up_median_defined = true;
  bool down_median_defined = true;
  std::size_t n_returns = 0;
};

// Differences above threshold_multiple * (median positive difference) are up
// spikes; differences below threshold_multiple * (median negative difference)
// are down spikes. A side without any differences of its sign reports zero
// spikes and clears its `*_median_defined` flag.
JumpDetection detect_jumps(const PriceSeries& series, double threshold_multiple = 4.0);

// Split-jump parameters implied by a detection (eta = 1 / intensity).
SplitJumpParams to_split_params(const JumpDetection& d);

nlohmann::json to_json(const JumpDetection& d);

struct NormalPrior {
  double mean = 0.0;
  double variance = 1.0;
};
struct InvGammaPrior {
  double shape = 2.5;
  double scale = 0.1;
};
struct GammaPrior {
  double shape = 2.0;
  double rate = 0.2;
};

struct PriorSpec {
  NormalPrior drift{0.0, 1.0};
  InvGammaPrior variance{2.5, 0.1};
  GammaPrior lambda{2.0, 0.2};
  NormalPrior jump_mean{0.0, 0.25};
  InvGammaPrior jump_variance{2.5, 0.01};

  void validate() const;
};

struct GibbsConfig {
  std::uint64_t iterations = 20000;
  std::uint64_t burn_in = 5000;
  std::uint64_t thinning = 5;
  std::uint64_t seed = 0;
  PriorSpec priors;

  void validate() const;
};

struct Draw {
  double mu = 0.0;
  double sigma = 0.0;
  double lambda = 0.0;
  double mu_j = 0.0;
  double sigma_j = 0.0;
};

struct GibbsDiagnostics {
  // Sample variance of the returns is zero; sigma was floored at 1e-8.
  bool degenerate_returns = false;
  std::uint64_t sigma_floor_hits = 0;
  std::uint64_t proposals = 0;  // Metropolis proposals (sigma^2 and lambda blocks)
  double mean_jump_days = 0.0;  // average count of days flagged as jump days
};

struct PosteriorChain {
  std::vector<Draw> draws;
  std::vector<std::uint64_t> iters;  // sweep index of each retained draw
  std::uint64_t accept_count = 0;
  GibbsConfig config;
  GibbsDiagnostics diagnostics;
};

inline constexpr std::size_t kMinGibbsObservations = 30;
inline constexpr double kSigmaFloor = 1e-8;

PosteriorChain gibbs_fit(const PriceSeries& series, const GibbsConfig& config);

struct ParamSummary {
  double mean = 0.0;
  double sd = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
};

struct PosteriorSummary {
  ParamSummary mu, sigma, lambda, mu_j, sigma_j;
};

ParamSummary summarize(std::span<const double> values);
PosteriorSummary posterior_summary(const PosteriorChain& chain);

// |mean(first half) - mean(second half)| / sd(whole chain), per parameter
// (0 where the sd is 0).
Draw split_half_discrepancy(const PosteriorChain& chain);

// `iter,mu,sigma,lambda,mu_j,sigma_j` with shortest round-trip decimals.
void write_chain_csv(std::ostream& os, const PosteriorChain& chain);
nlohmann::json to_json(const PosteriorSummary& s);

}  // namespace jumpdiff
