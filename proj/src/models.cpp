#include "jumpdiff/models.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "jumpdiff/errors.hpp"
#include "jumpdiff/parallel.hpp"
#include "jumpdiff/random.hpp"

namespace jumpdiff {

namespace {

bool finite(double x) { return std::isfinite(x); }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// Per-model step generator. Holds the constants for one dt.
struct StepKernel {
  double drift_dt;
  double vol_sqdt;
  double dt;
  std::uint64_t seed;
  const ModelParams* model;

  double diffusion_part(std::uint64_t path, std::uint32_t step) const {
    Stream z(seed, {path, step, Purpose::diffusion});
    return drift_dt + vol_sqdt * z.normal();
  }

  double jumps(std::uint64_t path, std::uint32_t step) const {
    return std::visit(
        overloaded{
            [](const GbmParams&) { return 0.0; },
            [&](const MertonParams& p) {
              const auto n = Stream(seed, {path, step, Purpose::jump_count}).poisson(p.lambda * dt);
              if (n == 0) return 0.0;
              Stream sizes(seed, {path, step, Purpose::jump_size});
              double sum = 0.0;
              for (std::uint32_t j = 0; j < n; ++j) sum += p.mu_j + p.sigma_j * sizes.normal();
              return sum;
            },
            [&](const KouParams& p) {
              const auto n = Stream(seed, {path, step, Purpose::jump_count}).poisson(p.lambda * dt);
              if (n == 0) return 0.0;
              Stream sizes(seed, {path, step, Purpose::jump_size});
              double sum = 0.0;
              for (std::uint32_t j = 0; j < n; ++j) {
                const bool up = sizes.uniform() < p.p;
                const double e = sizes.exponential();
                sum += up ? e / p.eta1 : -e / p.eta2;
              }
              return sum;
            },
            [&](const SplitJumpParams& p) {
              double sum = 0.0;
              const auto nu = Stream(seed, {path, step, Purpose::up_count}).poisson(p.lambda_up * dt);
              if (nu > 0) {
                Stream sizes(seed, {path, step, Purpose::up_size});
                for (std::uint32_t j = 0; j < nu; ++j) sum += sizes.exponential() / p.eta_up;
              }
              const auto nd =
                  Stream(seed, {path, step, Purpose::down_count}).poisson(p.lambda_down * dt);
              if (nd > 0) {
                Stream sizes(seed, {path, step, Purpose::down_size});
                for (std::uint32_t j = 0; j < nd; ++j) sum -= sizes.exponential() / p.eta_down;
              }
              return sum;
            },
        },
        *model);
  }
};

StepKernel make_kernel(const ModelParams& m, const SimGrid& grid) {
  const GbmParams& g = diffusion(m);
  const double dt = grid.dt();
  return {(g.mu - 0.5 * g.sigma * g.sigma) * dt, g.sigma * std::sqrt(dt), dt, grid.seed, &m};
}

bool has_jumps(const ModelParams& m) {
  return std::visit(overloaded{
                        [](const GbmParams&) { return false; },
                        [](const MertonParams& p) { return p.lambda > 0.0; },
                        [](const KouParams& p) { return p.lambda > 0.0; },
                        [](const SplitJumpParams& p) {
                          return p.lambda_up > 0.0 || p.lambda_down > 0.0;
                        },
                    },
                    m);
}

}  // namespace

void GbmParams::validate() const {
  require(finite(mu) && finite(sigma), "gbm: mu and sigma must be finite");
  require(sigma >= 0.0, "gbm: sigma must be >= 0");
}

void MertonParams::validate() const {
  gbm.validate();
  require(finite(lambda) && finite(mu_j) && finite(sigma_j), "merton: parameters must be finite");
  require(lambda >= 0.0, "merton: lambda must be >= 0");
  require(sigma_j >= 0.0, "merton: sigma_j must be >= 0");
}

void KouParams::validate() const {
  gbm.validate();
  require(finite(lambda) && finite(p) && finite(eta1) && finite(eta2),
          "kou: parameters must be finite");
  require(lambda >= 0.0, "kou: lambda must be >= 0");
  require(p >= 0.0 && p <= 1.0, "kou: p must lie in [0, 1]");
  require(eta1 > 1.0, "kou: eta1 must be > 1");
  require(eta2 > 0.0, "kou: eta2 must be > 0");
}

void SplitJumpParams::validate() const {
  gbm.validate();
  require(finite(lambda_up) && finite(eta_up) && finite(lambda_down) && finite(eta_down),
          "split: parameters must be finite");
  require(lambda_up >= 0.0 && lambda_down >= 0.0, "split: jump rates must be >= 0");
  require(eta_up > 1.0, "split: eta_up must be > 1");
  require(eta_down > 0.0, "split: eta_down must be > 0");
}

void SimGrid::validate() const {
  require(finite(s0) && s0 > 0.0, "grid: s0 must be > 0");
  require(finite(horizon_years) && horizon_years > 0.0, "grid: horizon must be > 0");
  require(n_steps >= 1, "grid: n_steps must be >= 1");
  require(n_paths >= 1, "grid: n_paths must be >= 1");
}

std::string_view model_tag(const ModelParams& m) {
  return std::visit(overloaded{
                        [](const GbmParams&) { return std::string_view("gbm"); },
                        [](const MertonParams&) { return std::string_view("merton"); },
                        [](const KouParams&) { return std::string_view("kou"); },
                        [](const SplitJumpParams&) { return std::string_view("split"); },
                    },
                    m);
}

void validate(const ModelParams& m) {
  std::visit([](const auto& p) { p.validate(); }, m);
}

const GbmParams& diffusion(const ModelParams& m) {
  return std::visit(
      overloaded{
          [](const GbmParams& p) -> const GbmParams& { return p; },
          [](const auto& p) -> const GbmParams& { return p.gbm; },
      },
      m);
}

ModelParams with_drift(ModelParams m, double mu) {
  std::visit(overloaded{
                 [&](GbmParams& p) { p.mu = mu; },
                 [&](auto& p) { p.gbm.mu = mu; },
             },
             m);
  return m;
}

double jump_compensator(const ModelParams& m) {
  return std::visit(
      overloaded{
          [](const GbmParams&) { return 0.0; },
          [](const MertonParams& p) {
            return p.lambda * std::expm1(p.mu_j + 0.5 * p.sigma_j * p.sigma_j);
          },
          [](const KouParams& p) {
            const double mgf = p.p * p.eta1 / (p.eta1 - 1.0) + p.q() * p.eta2 / (p.eta2 + 1.0);
            return p.lambda * (mgf - 1.0);
          },
          [](const SplitJumpParams& p) {
            return p.lambda_up / (p.eta_up - 1.0) - p.lambda_down / (p.eta_down + 1.0);
          },
      },
      m);
}

ModelParams risk_neutral(const ModelParams& m, double r) {
  return with_drift(m, r - jump_compensator(m));
}

void log_increments(const ModelParams& m, const SimGrid& grid, std::uint64_t path,
                    std::span<double> out) {
  const StepKernel k = make_kernel(m, grid);
  const bool jumps = has_jumps(m);
  for (std::uint32_t s = 0; s < out.size(); ++s) {
    double x = k.diffusion_part(path, s);
    if (jumps) x += k.jumps(path, s);
    out[s] = x;
  }
}

double terminal_from_increments(double s0, std::span<const double> increments) {
  double s = s0;
  for (double x : increments) s *= std::exp(x);
  return s;
}

PathSet simulate(const ModelParams& m, const SimGrid& grid) {
  validate(m);
  grid.validate();
  PathSet ps;
  ps.model_tag = std::string(model_tag(m));
  ps.seed = grid.seed;
  ps.times.resize(grid.n_steps + 1);
  for (std::uint32_t i = 0; i <= grid.n_steps; ++i)
    ps.times[i] = grid.horizon_years * i / grid.n_steps;
  ps.values.assign(grid.n_paths, std::vector<double>(grid.n_steps + 1));
  parallel_for(grid.n_paths, grid.workers, [&](std::uint64_t p) {
    std::vector<double> inc(grid.n_steps);
    log_increments(m, grid, p, inc);
    auto& row = ps.values[p];
    row[0] = grid.s0;
    for (std::uint32_t s = 0; s < grid.n_steps; ++s) row[s + 1] = row[s] * std::exp(inc[s]);
  });
  return ps;
}

PathSet simulate_gbm(const GbmParams& params, const SimGrid& grid) {
  return simulate(ModelParams{params}, grid);
}
PathSet simulate_merton(const MertonParams& params, const SimGrid& grid) {
  return simulate(ModelParams{params}, grid);
}
PathSet simulate_kou(const KouParams& params, const SimGrid& grid) {
  return simulate(ModelParams{params}, grid);
}
PathSet simulate_split(const SplitJumpParams& params, const SimGrid& grid) {
  return simulate(ModelParams{params}, grid);
}

std::vector<double> sample_kou_jump(const KouParams& params, std::size_t n, std::uint64_t seed) {
  params.validate();
  require(n >= 1, "sample_kou_jump: n must be >= 1");
  std::vector<double> out(n);
  Stream s(seed, {0, 0, Purpose::kou_sample});
  for (auto& y : out) {
    const bool up = s.uniform() < params.p;
    const double e = s.exponential();
    y = up ? e / params.eta1 : -e / params.eta2;
  }
  return out;
}

void write_pathset_csv(std::ostream& os, const PathSet& ps) {
  os << "time";
  for (std::size_t p = 0; p < ps.values.size(); ++p) os << ",path_" << p;
  os << '\n';
  char buf[64];
  for (std::size_t t = 0; t < ps.times.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%.9f", ps.times[t]);
    os << buf;
    for (const auto& row : ps.values) {
      std::snprintf(buf, sizeof buf, "%.12g", row[t]);
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace jumpdiff
