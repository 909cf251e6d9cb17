#include <doctest.h>

#include <cmath>
#include <sstream>

#include "jumpdiff/errors.hpp"
#include "jumpdiff/models.hpp"

using namespace jumpdiff;

namespace {

struct Stats {
  double mean = 0.0, se = 0.0;
};

Stats stats(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  const double m = s / x.size();
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / (x.size() - 1) / x.size())};
}

std::vector<double> terminals(const PathSet& ps) {
  std::vector<double> out;
  for (const auto& row : ps.values) out.push_back(row.back());
  return out;
}

bool all_positive(const PathSet& ps) {
  for (const auto& row : ps.values)
    for (double v : row)
      if (!(v > 0.0) || !std::isfinite(v)) return false;
  return true;
}

}  // namespace

TEST_CASE("gbm degenerate cases") {
  SUBCASE("zero volatility grows at exp(mu T) on every path") {
    const auto ps = simulate_gbm({0.08, 0.0}, {100.0, 1.0, 1, 5, 11});
    for (const auto& row : ps.values) {
      CHECK(row[0] == 100.0);
      CHECK(row[1] == 100.0 * std::exp(0.08));
    }
    CHECK(ps.values[0][1] == doctest::Approx(108.3287067674959).epsilon(1e-14));
  }
  SUBCASE("no drift, no volatility is constant") {
    const auto ps = simulate_gbm({0.0, 0.0}, {100.0, 2.0, 10, 3, 5});
    for (const auto& row : ps.values)
      for (double v : row) CHECK(v == 100.0);
  }
}

TEST_CASE("gbm terminal mean matches S0 exp(mu T)") {
  const auto ps = simulate_gbm({0.08, 0.4}, {100.0, 1.0, 4, 100000, 123});
  const auto st = stats(terminals(ps));
  CHECK(std::fabs(st.mean - 100.0 * std::exp(0.08)) < 3.0 * st.se);
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(simulate_gbm({0.0, 0.1}, {100.0, 1.0, 0, 1, 1}), ValidationError);
  CHECK_THROWS_AS(simulate_gbm({0.0, 0.1}, {0.0, 1.0, 1, 1, 1}), ValidationError);
  CHECK_THROWS_AS(simulate_gbm({0.0, 0.1}, {-5.0, 1.0, 1, 1, 1}), ValidationError);
  CHECK_THROWS_AS(simulate_gbm({0.0, -0.1}, {100.0, 1.0, 1, 1, 1}), ValidationError);
  CHECK_THROWS_AS(simulate_merton({{0.0, 0.1}, -1.0, 0.0, 0.1}, {100.0, 1.0, 1, 1, 1}), ValidationError);
  CHECK_THROWS_AS(simulate_kou({{0.0, 0.1}, 1.0, 0.5, 1.0, 2.0}, {100.0, 1.0, 1, 1, 1}), ValidationError);
  CHECK_THROWS_AS(simulate_kou({{0.0, 0.1}, 1.0, 1.5, 3.0, 2.0}, {100.0, 1.0, 1, 1, 1}), ValidationError);
  CHECK_THROWS_AS(simulate_split({{0.0, 0.1}, 1.0, 0.9, 1.0, 2.0}, {100.0, 1.0, 1, 1, 1}), ValidationError);
}

TEST_CASE("no-jump reduction is bit-identical to gbm") {
  const GbmParams g{0.05, 0.3};
  for (std::uint64_t seed : {0ull, 1ull, 0xdeadbeefcafeull}) {
    const SimGrid grid{100.0, 2.0, 50, 20, seed};
    const auto base = simulate_gbm(g, grid);
    CHECK(simulate_merton({g, 0.0, 0.1, 0.2}, grid).values == base.values);
    CHECK(simulate_split({g, 0.0, 5.0, 0.0, 3.0}, grid).values == base.values);
    CHECK(simulate_kou({g, 0.0, 0.3, 5.0, 3.0}, grid).values == base.values);
  }
}

TEST_CASE("seed determinism, path-count extension and worker independence") {
  const ModelParams m = MertonParams{{0.08, 0.4}, 3.0, -0.02, 0.1};
  SimGrid grid{100.0, 1.0, 30, 40, 77};
  const auto a = simulate(m, grid);
  CHECK(simulate(m, grid).values == a.values);

  SimGrid more = grid;
  more.n_paths = 65;
  const auto b = simulate(m, more);
  for (std::size_t p = 0; p < a.values.size(); ++p) CHECK(b.values[p] == a.values[p]);

  SimGrid threaded = grid;
  threaded.workers = 4;
  CHECK(simulate(m, threaded).values == a.values);

  SimGrid other = grid;
  other.seed = 78;
  CHECK(simulate(m, other).values != a.values);
}

TEST_CASE("merton terminal mean matches the compound-Poisson moment") {
  const MertonParams p{{0.08, 0.4}, 2.0, 0.1, 0.05};
  const double t = 1.0;
  const double closed = 100.0 * std::exp((p.gbm.mu + p.lambda * std::expm1(p.mu_j + 0.5 * p.sigma_j * p.sigma_j)) * t);
  // Direct expectation: condition on the jump count and sum the Poisson series.
  double direct = 0.0;
  for (int n = 0; n < 80; ++n) {
    const double w = std::exp(n * std::log(p.lambda * t) - p.lambda * t - std::lgamma(n + 1.0));
    direct += w * std::exp(n * (p.mu_j + 0.5 * p.sigma_j * p.sigma_j));
  }
  direct *= 100.0 * std::exp(p.gbm.mu * t);
  CHECK(direct == doctest::Approx(closed).epsilon(1e-12));

  const auto st = stats(terminals(simulate_merton(p, {100.0, t, 12, 100000, 2024})));
  CHECK(std::fabs(st.mean - closed) < 3.0 * st.se);
}

TEST_CASE("kou jump sampler") {
  SUBCASE("pure upward law has mean 1/eta1") {
    const auto y = sample_kou_jump({{}, 1.0, 1.0, 2.0, 4.0}, 1000000, 5);
    const auto st = stats(y);
    CHECK(std::fabs(st.mean - 0.5) < 3.0 * st.se);
    for (double v : y) REQUIRE(v >= 0.0);
  }
  SUBCASE("p = 0 forces downward jumps") {
    const auto y = sample_kou_jump({{}, 1.0, 0.0, 2.0, 4.0}, 10000, 6);
    for (double v : y) REQUIRE(v < 0.0);
  }
  SUBCASE("mixed law has mean p/eta1 - q/eta2") {
    const auto st = stats(sample_kou_jump({{}, 1.0, 0.5, 2.0, 4.0}, 1000000, 7));
    CHECK(std::fabs(st.mean - 0.125) < 3.0 * st.se);
  }
  CHECK_THROWS_AS(sample_kou_jump({{}, 1.0, 0.5, 2.0, 4.0}, 0, 7), ValidationError);
}

TEST_CASE("split model: calibrated 2007 scenario log-return moment") {
  const SplitJumpParams p{{-0.0043, 0.1454}, 1.0, 1.0 / 0.012, 5.0, 1.0 / 0.0107};
  const auto ps = simulate_split(p, {100.0, 1.0, 252, 20000, 31});
  CHECK(all_positive(ps));
  std::vector<double> logret;
  for (const auto& row : ps.values) logret.push_back(std::log(row.back() / row.front()));
  const auto st = stats(logret);
  const double expected = (p.gbm.mu - 0.5 * p.gbm.sigma * p.gbm.sigma) + p.lambda_up / p.eta_up -
                          p.lambda_down / p.eta_down;
  CHECK(std::fabs(st.mean - expected) < 3.0 * st.se);
}

TEST_CASE("split model with heavy upward jumps stays finite and positive") {
  const auto ps = simulate_split({{0.0, 0.2}, 1000.0, 2.0, 0.0, 2.0}, {100.0, 1.0, 252, 200, 8});
  CHECK(all_positive(ps));
}

TEST_CASE("positivity holds for every model") {
  const SimGrid grid{50.0, 3.0, 100, 200, 99};
  CHECK(all_positive(simulate_gbm({-0.5, 1.2}, grid)));
  CHECK(all_positive(simulate_merton({{0.1, 0.6}, 20.0, -0.3, 0.4}, grid)));
  CHECK(all_positive(simulate_kou({{0.1, 0.6}, 20.0, 0.3, 3.0, 2.0}, grid)));
  CHECK(all_positive(simulate_split({{0.1, 0.6}, 10.0, 3.0, 20.0, 2.0}, grid)));
}

TEST_CASE("risk-neutral drift makes the discounted price a martingale") {
  const double r = 0.03;
  const ModelParams models[] = {
      GbmParams{0.2, 0.3},
      MertonParams{{0.2, 0.3}, 2.0, -0.1, 0.15},
      KouParams{{0.2, 0.3}, 3.0, 0.4, 10.0, 5.0},
      SplitJumpParams{{0.2, 0.3}, 1.0, 20.0, 4.0, 15.0},
  };
  for (const auto& m : models) {
    const auto rn = risk_neutral(m, r);
    const auto st = stats(terminals(simulate(rn, {100.0, 1.0, 1, 100000, 4242})));
    CHECK(std::fabs(st.mean - 100.0 * std::exp(r)) < 3.0 * st.se);
  }
}

TEST_CASE("pathset csv layout") {
  const auto ps = simulate_gbm({0.0, 0.0}, {100.0, 1.0, 2, 2, 1});
  std::ostringstream os;
  write_pathset_csv(os, ps);
  CHECK(os.str() ==
        "time,path_0,path_1\n"
        "0.000000000,100,100\n"
        "0.500000000,100,100\n"
        "1.000000000,100,100\n");
  CHECK(ps.model_tag == "gbm");
  CHECK(ps.times.front() == 0.0);
}
