#pragma once

// Jump-diffusion parameterizations and seeded path simulation.
//
// All models share the exact log-normal diffusion step
//   S_{k+1} = S_k * exp((mu - sigma^2/2) dt + sigma sqrt(dt) Z + sum of jump exponents)
// and differ only in how the per-step jump exponents are generated. Jumps that
// arrive within a step are applied at the step end.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace jumpdiff {

inline constexpr double kTradingDaysPerYear = 252.0;

struct GbmParams {
  double mu = 0.0;     // drift per year
  double sigma = 0.0;  // volatility per sqrt(year)

  void validate() const;
};

// Normal jump exponents Y ~ N(mu_j, sigma_j^2) arriving at rate lambda.
struct MertonParams {
  GbmParams gbm;
  double lambda = 0.0;
  double mu_j = 0.0;
  double sigma_j = 0.0;

  void validate() const;
};

// Double-exponential jump exponents: +Exp(eta1) with probability p,
// -Exp(eta2) with probability q = 1 - p.
struct KouParams {
  GbmParams gbm;
  double lambda = 0.0;
  double p = 0.5;
  double eta1 = 2.0;
  double eta2 = 2.0;

  double q() const { return 1.0 - p; }
  void validate() const;
};

// Independent upward and downward Poisson streams, each with its own
// exponential jump law: up exponents +Exp(eta_up), down exponents -Exp(eta_down).
struct SplitJumpParams {
  GbmParams gbm;
  double lambda_up = 0.0;
  double eta_up = 2.0;
  double lambda_down = 0.0;
  double eta_down = 2.0;

  void validate() const;
};

using ModelParams = std::variant<GbmParams, MertonParams, KouParams, SplitJumpParams>;

std::string_view model_tag(const ModelParams& m);
void validate(const ModelParams& m);
const GbmParams& diffusion(const ModelParams& m);
ModelParams with_drift(ModelParams m, double mu);

// lambda * (E[e^Y] - 1), summed over jump streams.
double jump_compensator(const ModelParams& m);

// Replaces the drift with r - jump_compensator, making e^{-rt} S_t a martingale.
ModelParams risk_neutral(const ModelParams& m, double r);

struct SimGrid {
  double s0 = 100.0;
  double horizon_years = 1.0;
  std::uint32_t n_steps = 1;
  std::uint64_t n_paths = 1;
  std::uint64_t seed = 0;
  // Execution hint only; results are identical for every value.
  unsigned workers = 1;

  double dt() const { return horizon_years / n_steps; }
  void validate() const;
};

struct PathSet {
  std::vector<double> times;                // n_steps + 1 points, times[0] == 0
  std::vector<std::vector<double>> values;  // n_paths rows of n_steps + 1 prices
  std::string model_tag;
  std::uint64_t seed = 0;
};

// Fills `out` (size n_steps) with the log increments of path `path`. Draws come
// from substreams addressed by (path, step, purpose), so the result depends
// only on (model, grid.seed, dt, path).
void log_increments(const ModelParams& m, const SimGrid& grid, std::uint64_t path,
                    std::span<double> out);

// Runs the price recurrence over precomputed increments and returns S_T.
double terminal_from_increments(double s0, std::span<const double> increments);

PathSet simulate_gbm(const GbmParams& params, const SimGrid& grid);
PathSet simulate_merton(const MertonParams& params, const SimGrid& grid);
PathSet simulate_kou(const KouParams& params, const SimGrid& grid);
PathSet simulate_split(const SplitJumpParams& params, const SimGrid& grid);
PathSet simulate(const ModelParams& m, const SimGrid& grid);

// n independent draws from the double-exponential jump law.
std::vector<double> sample_kou_jump(const KouParams& params, std::size_t n, std::uint64_t seed);

// CSV with header `time,path_0,...`; times to 9 decimals, prices to 12
// significant digits.
void write_pathset_csv(std::ostream& os, const PathSet& ps);

}  // namespace jumpdiff
