#pragma once

// Monte Carlo pricing of European calls and roll-up annuity guarantees under
// any of the jump models, with closed-form oracles for the no-jump and Merton
// cases.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "jumpdiff/models.hpp"

namespace jumpdiff {

struct CallSpec {
  double s0 = 100.0;
  double strike = 100.0;
  double maturity_years = 1.0;
  double discount_rate = 0.0;

  void validate() const;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample sd / sqrt(n_paths)
  std::uint64_t n_paths = 0;
  std::uint64_t seed = 0;
};

// Black-Scholes call. sigma = 0 gives max(s0 - K e^{-rT}, 0).
double bs_call(const CallSpec& spec, double sigma);

// Merton's Poisson-weighted Black-Scholes series under the risk-neutral
// measure, truncated after n_terms jump counts.
inline constexpr int kMertonSeriesTerms = 60;
double merton_call(const CallSpec& spec, const MertonParams& params, int n_terms = kMertonSeriesTerms);

// Mean of e^{-rT} max(S_T - K, 0). The model drift is used as given; pass the
// output of risk_neutral() for arbitrage-free prices.
McEstimate mc_call_price(const CallSpec& spec, const ModelParams& model, const SimGrid& grid);

enum class SurfaceModel {
  merton,    // normal jump exponents with mean = intensity, sd = jump_sd
  split_up,  // upward-only exponential jump exponents with mean = intensity
};

struct SurfaceOptions {
  SurfaceModel kind = SurfaceModel::merton;
  double jump_sd = 0.0;
  bool risk_neutral = false;
};

struct PayoffSurface {
  std::vector<double> lambda_axis;
  std::vector<double> intensity_axis;
  std::vector<std::vector<double>> values;  // [lambda][intensity]
  std::vector<std::vector<double>> std_errors;
  McEstimate baseline;  // lambda = 0
};

// Jump model for one surface cell.
ModelParams surface_cell_model(const GbmParams& base, double lambda, double intensity,
                               const SurfaceOptions& opts, double discount_rate);

// Every cell reuses the grid seed, so all cells see the same random numbers.
PayoffSurface payoff_surface(const CallSpec& spec, const GbmParams& base,
                             const std::vector<double>& lambda_axis,
                             const std::vector<double>& intensity_axis, const SimGrid& grid,
                             const SurfaceOptions& opts = {});

// `lambda,intensity,expected_payoff,std_error`; the first data row is the
// lambda = 0 baseline.
void write_surface_csv(std::ostream& os, const PayoffSurface& s);

struct AnnuitySpec {
  double a0 = 100.0;
  double fee_c = 0.0;
  double contribution_k = 0.0;
  double guarantee_g = 0.0;
  double maturity_years = 1.0;
  double discount_rate = 0.0;  // 0 disables discounting

  void validate() const;
};

struct AnnuityPaths {
  PathSet accounts;
  std::vector<bool> absorbed;  // account hit zero and was held there
};

// A_{k+1} = A_k * exp(x_k - c dt) + k dt, where x_k is the asset's log step
// from the chosen model. The fee is compounded over the step.
AnnuityPaths simulate_annuity(const AnnuitySpec& spec, const ModelParams& model, const SimGrid& grid);

// Roll-up guarantee a0 e^{gt} + (k/g)(e^{gt} - 1), with the k t limit at g = 0.
double guarantee_value(const AnnuitySpec& spec, double t);

// max(G - A, 0).
double annuity_payoff(double account, double guarantee);

enum class AnnuityEvaluation {
  at_maturity,     // payoff at T
  max_over_dates,  // running maximum of the discounted payoff over grid dates
};

McEstimate price_annuity_guarantee(const AnnuitySpec& spec, const ModelParams& model,
                                   const SimGrid& grid,
                                   AnnuityEvaluation evaluation = AnnuityEvaluation::at_maturity);

// Per-path discounted payoffs behind price_annuity_guarantee.
std::vector<double> annuity_payoffs(const AnnuitySpec& spec, const ModelParams& model,
                                    const SimGrid& grid, AnnuityEvaluation evaluation);

McEstimate estimate_from_samples(const std::vector<double>& x, std::uint64_t seed);

nlohmann::json to_json(const McEstimate& e);

}  // namespace jumpdiff
