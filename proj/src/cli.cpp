#include "jumpdiff/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "jumpdiff/data_io.hpp"
#include "jumpdiff/errors.hpp"
#include "jumpdiff/inference.hpp"
#include "jumpdiff/models.hpp"
#include "jumpdiff/pricing.hpp"

#ifndef JUMPDIFF_VERSION
#define JUMPDIFF_VERSION "0.0.0"
#endif

namespace jumpdiff::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest decimal that parses back to the same double.
std::string num(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

// Flag values after defaults, keyed by flag name without dashes. Replaying a
// manifest turns this map back into a command line.
using Resolved = std::map<std::string, std::string>;

struct RunRecord {
  std::string subcommand;
  std::vector<std::string> positional;
  Resolved args;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::map<std::string, std::string> inputs;  // path -> sha256
  std::vector<std::string> outputs;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("error writing " + path.string());
}

void write_manifest(const fs::path& dir, const RunRecord& rec) {
  json j;
  j["tool"] = "jumpdiff";
  j["version"] = JUMPDIFF_VERSION;
  j["subcommand"] = rec.subcommand;
  j["positional"] = rec.positional;
  j["args"] = rec.args;
  if (rec.has_seed) j["seed"] = rec.seed;
  j["inputs"] = json::object();
  for (const auto& [path, digest] : rec.inputs) j["inputs"][path] = {{"sha256", digest}};
  j["outputs"] = rec.outputs;
  write_text(dir / kManifestName, j.dump(2) + "\n");
}

fs::path prepare_out(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out + ": " + ec.message());
  return dir;
}

std::uint64_t resolve_seed(CLI::Option* opt, std::uint64_t given) {
  if (opt->count() > 0) return given;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

// ---------------------------------------------------------------------------
// Model flags shared by simulate, price.

struct ModelFlags {
  std::string model = "gbm";
  double mu = 0.08, sigma = 0.4;
  double lambda = 0.0, mu_j = 0.0, sigma_j = 0.0;
  double p = 0.5, eta1 = 2.0, eta2 = 2.0;
  double lambda_up = 0.0, eta_up = 2.0, lambda_down = 0.0, eta_down = 2.0;
  std::vector<std::pair<std::string, CLI::Option*>> opts;

  void add(CLI::App& app) {
    app.add_option("--model", model, "gbm | merton | kou | split")
        ->check(CLI::IsMember({"gbm", "merton", "kou", "split"}));
    opts = {
        {"mu", app.add_option("--mu", mu, "drift per year")},
        {"sigma", app.add_option("--sigma", sigma, "volatility per sqrt(year)")},
        {"lambda", app.add_option("--lambda", lambda, "jump arrivals per year (merton, kou)")},
        {"mu-j", app.add_option("--mu-j", mu_j, "mean jump exponent (merton)")},
        {"sigma-j", app.add_option("--sigma-j", sigma_j, "jump exponent sd (merton)")},
        {"p", app.add_option("--p", p, "upward jump probability (kou)")},
        {"eta1", app.add_option("--eta1", eta1, "upward exponential rate (kou)")},
        {"eta2", app.add_option("--eta2", eta2, "downward exponential rate (kou)")},
        {"lambda-up", app.add_option("--lambda-up", lambda_up, "upward arrivals per year (split)")},
        {"eta-up", app.add_option("--eta-up", eta_up, "upward exponential rate (split)")},
        {"lambda-down", app.add_option("--lambda-down", lambda_down, "downward arrivals per year (split)")},
        {"eta-down", app.add_option("--eta-down", eta_down, "downward exponential rate (split)")},
    };
  }

  static std::vector<std::string> allowed(const std::string& m) {
    std::vector<std::string> a{"mu", "sigma"};
    if (m == "merton") a.insert(a.end(), {"lambda", "mu-j", "sigma-j"});
    if (m == "kou") a.insert(a.end(), {"lambda", "p", "eta1", "eta2"});
    if (m == "split") a.insert(a.end(), {"lambda-up", "eta-up", "lambda-down", "eta-down"});
    return a;
  }

  double value(const std::string& name) const {
    static const std::map<std::string, double ModelFlags::*> fields{
        {"mu", &ModelFlags::mu},           {"sigma", &ModelFlags::sigma},
        {"lambda", &ModelFlags::lambda},   {"mu-j", &ModelFlags::mu_j},
        {"sigma-j", &ModelFlags::sigma_j}, {"p", &ModelFlags::p},
        {"eta1", &ModelFlags::eta1},       {"eta2", &ModelFlags::eta2},
        {"lambda-up", &ModelFlags::lambda_up}, {"eta-up", &ModelFlags::eta_up},
        {"lambda-down", &ModelFlags::lambda_down}, {"eta-down", &ModelFlags::eta_down},
    };
    return this->*fields.at(name);
  }

  // Rejects flags that do not belong to the chosen model, records the
  // resolved values and returns the parameter set (risk-neutral drift applied
  // when requested).
  ModelParams build(Resolved& res, bool risk_neutral_drift, double r) const {
    const auto ok = allowed(model);
    for (const auto& [name, opt] : opts) {
      if (opt->count() == 0) continue;
      if (std::find(ok.begin(), ok.end(), name) == ok.end())
        throw UsageError("--" + name + " is not a parameter of --model " + model);
      if (name == "mu" && risk_neutral_drift)
        throw UsageError("--mu conflicts with --risk-neutral (the drift is implied by --r)");
    }
    res["model"] = model;
    for (const auto& name : ok) {
      if (name == "mu" && risk_neutral_drift) continue;
      res[name] = num(value(name));
    }
    const GbmParams g{mu, sigma};
    ModelParams m;
    if (model == "gbm") m = g;
    else if (model == "merton") m = MertonParams{g, lambda, mu_j, sigma_j};
    else if (model == "kou") m = KouParams{g, lambda, p, eta1, eta2};
    else m = SplitJumpParams{g, lambda_up, eta_up, lambda_down, eta_down};
    validate(m);
    return risk_neutral_drift ? risk_neutral(m, r) : m;
  }
};

json model_json(const ModelParams& m) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GbmParams>) {
          return {{"kind", "gbm"}, {"mu", p.mu}, {"sigma", p.sigma}};
        } else if constexpr (std::is_same_v<T, MertonParams>) {
          return {{"kind", "merton"}, {"mu", p.gbm.mu}, {"sigma", p.gbm.sigma}, {"lambda", p.lambda},
                  {"mu_j", p.mu_j}, {"sigma_j", p.sigma_j}};
        } else if constexpr (std::is_same_v<T, KouParams>) {
          return {{"kind", "kou"}, {"mu", p.gbm.mu}, {"sigma", p.gbm.sigma}, {"lambda", p.lambda},
                  {"p", p.p}, {"eta1", p.eta1}, {"eta2", p.eta2}};
        } else {
          return {{"kind", "split"}, {"mu", p.gbm.mu}, {"sigma", p.gbm.sigma},
                  {"lambda_up", p.lambda_up}, {"eta_up", p.eta_up},
                  {"lambda_down", p.lambda_down}, {"eta_down", p.eta_down}};
        }
      },
      m);
}

// Grid flags shared by every randomized command.
struct GridFlags {
  double t = 1.0;
  std::uint32_t steps = 252;
  std::uint64_t paths = 1;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  CLI::Option* steps_opt = nullptr;
  CLI::Option* seed_opt = nullptr;

  void add(CLI::App& app, std::uint64_t default_paths) {
    paths = default_paths;
    app.add_option("--t", t, "horizon / maturity in years");
    steps_opt = app.add_option("--steps", steps, "time steps per path");
    app.add_option("--paths", paths, "number of paths");
    seed_opt = app.add_option("--seed", seed, "64-bit seed (recorded in run.json when omitted)");
    app.add_option("--workers", workers, "worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber);
  }

  SimGrid build(double s0, std::uint32_t default_steps, Resolved& res, RunRecord& rec) {
    if (steps_opt->count() == 0) steps = default_steps;
    seed = resolve_seed(seed_opt, seed);
    rec.seed = seed;
    rec.has_seed = true;
    res["t"] = num(t);
    res["steps"] = std::to_string(steps);
    res["paths"] = std::to_string(paths);
    res["seed"] = std::to_string(seed);
    res["workers"] = std::to_string(workers);
    SimGrid g{s0, t, steps, paths, seed, workers};
    g.validate();
    return g;
  }
};

struct SeriesFlags {
  std::string input;
  std::string date_column = "Date";
  std::string price_column = "Close";
  std::string start, end;

  void add(CLI::App& app) {
    app.add_option("--input", input, "daily price CSV")->required();
    app.add_option("--date-column", date_column, "date column name");
    app.add_option("--price-column", price_column, "price column name");
    app.add_option("--start", start, "first date kept (inclusive, YYYY-MM-DD)");
    app.add_option("--end", end, "last date kept (inclusive, YYYY-MM-DD)");
  }

  PriceSeries load(Resolved& res, RunRecord& rec) const {
    res["input"] = input;
    res["date-column"] = date_column;
    res["price-column"] = price_column;
    rec.inputs[input] = file_sha256(input);
    PriceSeries s = load_price_csv(input, date_column, price_column);
    if (!start.empty() || !end.empty()) {
      const auto parse = [](const std::string& text, const char* what) {
        const auto d = parse_date(text);
        if (!d) throw UsageError(std::string("bad --") + what + " date '" + text + "'");
        return *d;
      };
      const Date lo = start.empty() ? s.dates.front() : parse(start, "start");
      const Date hi = end.empty() ? s.dates.back() : parse(end, "end");
      if (!start.empty()) res["start"] = start;
      if (!end.empty()) res["end"] = end;
      s = slice_period(s, lo, hi).series;
    }
    return s;
  }
};

// ---------------------------------------------------------------------------
// Surface axes.

std::vector<double> parse_axis(const std::string& spec, const char* name) {
  const auto bad = [&] {
    return UsageError(std::string("malformed --") + name + " '" + spec + "' (expected start:stop:count)");
  };
  const auto a = spec.find(':');
  const auto b = a == std::string::npos ? a : spec.find(':', a + 1);
  if (b == std::string::npos) throw bad();
  double lo = 0.0, hi = 0.0;
  std::uint64_t count = 0;
  const auto parse_d = [&](std::string_view s, double& v) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc{} && p == s.data() + s.size() && std::isfinite(v);
  };
  const std::string_view sv(spec);
  const auto cs = sv.substr(b + 1);
  auto [pc, ecc] = std::from_chars(cs.data(), cs.data() + cs.size(), count);
  if (!parse_d(sv.substr(0, a), lo) || !parse_d(sv.substr(a + 1, b - a - 1), hi) ||
      ecc != std::errc{} || pc != cs.data() + cs.size() || count < 1 || hi < lo || lo < 0.0 ||
      (count > 1 && hi == lo))
    throw bad();
  std::vector<double> axis(count);
  for (std::uint64_t i = 0; i < count; ++i)
    axis[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  axis.back() = count == 1 ? lo : hi;
  return axis;
}

// count points i * stop / count, i = 1..count: a uniform grid over (0, stop].
std::vector<double> open_axis(double stop, int count) {
  std::vector<double> axis(count);
  for (int i = 0; i < count; ++i) axis[i] = stop * (i + 1) / count;
  return axis;
}

// ---------------------------------------------------------------------------
// Subcommands. Each returns after writing its outputs and manifest.

struct SimulateCmd {
  CLI::App* app;
  ModelFlags model;
  GridFlags grid;
  double s0 = 100.0;
  std::string out = ".";

  explicit SimulateCmd(CLI::App& root) {
    app = root.add_subcommand("simulate", "simulate price paths and write them as CSV");
    model.add(*app);
    grid.add(*app, 1);
    app->add_option("--s0", s0, "initial price");
    app->add_option("--out", out, "output directory");
  }

  int run(RunRecord& rec, std::ostream& os) {
    rec.subcommand = "simulate";
    const auto m = model.build(rec.args, false, 0.0);
    rec.args["s0"] = num(s0);
    const auto g = grid.build(s0, 252, rec.args, rec);
    const auto dir = prepare_out(out);
    std::ostringstream csv;
    write_pathset_csv(csv, simulate(m, g));
    write_text(dir / "paths.csv", csv.str());
    rec.outputs = {"paths.csv"};
    write_manifest(dir, rec);
    os << (dir / "paths.csv").string() << '\n';
    return kOk;
  }
};

struct FitCmd {
  CLI::App* app;
  SeriesFlags series;
  GibbsConfig cfg;
  CLI::Option* seed_opt = nullptr;
  std::string out = ".";

  explicit FitCmd(CLI::App& root) {
    app = root.add_subcommand("fit", "Gibbs calibration of the Merton model to daily closes");
    series.add(*app);
    app->add_option("--iterations", cfg.iterations, "total sweeps");
    app->add_option("--burn-in", cfg.burn_in, "discarded initial sweeps");
    app->add_option("--thinning", cfg.thinning, "keep every n-th sweep after burn-in");
    seed_opt = app->add_option("--seed", cfg.seed, "64-bit seed");
    auto& pr = cfg.priors;
    app->add_option("--prior-drift-mean", pr.drift.mean);
    app->add_option("--prior-drift-var", pr.drift.variance);
    app->add_option("--prior-var-shape", pr.variance.shape);
    app->add_option("--prior-var-scale", pr.variance.scale);
    app->add_option("--prior-lambda-shape", pr.lambda.shape);
    app->add_option("--prior-lambda-rate", pr.lambda.rate);
    app->add_option("--prior-jump-mean", pr.jump_mean.mean);
    app->add_option("--prior-jump-mean-var", pr.jump_mean.variance);
    app->add_option("--prior-jump-var-shape", pr.jump_variance.shape);
    app->add_option("--prior-jump-var-scale", pr.jump_variance.scale);
    app->add_option("--out", out, "output directory");
  }

  int run(RunRecord& rec, std::ostream& os, std::ostream& warn) {
    rec.subcommand = "fit";
    cfg.seed = resolve_seed(seed_opt, cfg.seed);
    rec.seed = cfg.seed;
    rec.has_seed = true;
    auto& a = rec.args;
    a["iterations"] = std::to_string(cfg.iterations);
    a["burn-in"] = std::to_string(cfg.burn_in);
    a["thinning"] = std::to_string(cfg.thinning);
    a["seed"] = std::to_string(cfg.seed);
    const auto& pr = cfg.priors;
    a["prior-drift-mean"] = num(pr.drift.mean);
    a["prior-drift-var"] = num(pr.drift.variance);
    a["prior-var-shape"] = num(pr.variance.shape);
    a["prior-var-scale"] = num(pr.variance.scale);
    a["prior-lambda-shape"] = num(pr.lambda.shape);
    a["prior-lambda-rate"] = num(pr.lambda.rate);
    a["prior-jump-mean"] = num(pr.jump_mean.mean);
    a["prior-jump-mean-var"] = num(pr.jump_mean.variance);
    a["prior-jump-var-shape"] = num(pr.jump_variance.shape);
    a["prior-jump-var-scale"] = num(pr.jump_variance.scale);
    cfg.validate();
    const PriceSeries s = series.load(a, rec);
    const auto chain = gibbs_fit(s, cfg);
    const auto summary = posterior_summary(chain);

    const auto dir = prepare_out(out);
    std::ostringstream csv;
    write_chain_csv(csv, chain);
    write_text(dir / "chain.csv", csv.str());
    const json sj = to_json(summary);
    write_text(dir / "summary.json", sj.dump(2) + "\n");
    const auto& d = chain.diagnostics;
    const auto half = split_half_discrepancy(chain);
    const json dj{
        {"degenerate_returns", d.degenerate_returns},
        {"sigma_floor", kSigmaFloor},
        {"sigma_floor_hits", d.sigma_floor_hits},
        {"accept_count", chain.accept_count},
        {"proposals", d.proposals},
        {"mean_jump_days", d.mean_jump_days},
        {"draws", chain.draws.size()},
        {"observations", s.size()},
        {"split_half", {{"mu", half.mu}, {"sigma", half.sigma}, {"lambda", half.lambda},
                        {"mu_j", half.mu_j}, {"sigma_j", half.sigma_j}}},
    };
    write_text(dir / "diagnostics.json", dj.dump(2) + "\n");
    rec.outputs = {"chain.csv", "summary.json", "diagnostics.json"};
    write_manifest(dir, rec);
    os << sj.dump(2) << '\n';
    if (d.degenerate_returns) warn << "warning: zero-variance returns, sigma floored at 1e-8\n";
    return kOk;
  }
};

struct DetectCmd {
  CLI::App* app;
  SeriesFlags series;
  double threshold = 4.0;
  std::string out = ".";

  explicit DetectCmd(CLI::App& root) {
    app = root.add_subcommand("detect", "median-multiple jump detection");
    series.add(*app);
    app->add_option("--threshold-multiple", threshold, "spike threshold as a multiple of the median");
    app->add_option("--out", out, "output directory");
  }

  int run(RunRecord& rec, std::ostream& os) {
    rec.subcommand = "detect";
    rec.args["threshold-multiple"] = num(threshold);
    const PriceSeries s = series.load(rec.args, rec);
    const auto det = detect_jumps(s, threshold);
    const json j = to_json(det);
    const auto dir = prepare_out(out);
    write_text(dir / "detection.json", j.dump(2) + "\n");
    rec.outputs = {"detection.json"};
    write_manifest(dir, rec);
    os << j.dump(2) << '\n';
    return kOk;
  }
};

struct PriceCmd {
  CLI::App* app;
  std::string instrument;
  ModelFlags model;
  GridFlags grid;
  double r = 0.0;
  bool risk_neutral_drift = false;
  double s0 = 100.0, k = 100.0;
  double a0 = 100.0, c = 0.0, g = 0.0;
  std::string evaluation = "at-maturity";
  std::string out = ".";
  CLI::Option *s0_opt, *a0_opt, *c_opt, *g_opt, *eval_opt, *k_opt;

  explicit PriceCmd(CLI::App& root) {
    app = root.add_subcommand("price", "Monte Carlo price of a call or an annuity guarantee");
    app->add_option("instrument", instrument, "call | annuity")
        ->required()
        ->check(CLI::IsMember({"call", "annuity"}));
    model.add(*app);
    grid.add(*app, 10000);
    app->add_option("--r", r, "discount rate");
    app->add_flag("--risk-neutral", risk_neutral_drift, "replace the drift by r minus the jump compensator");
    s0_opt = app->add_option("--s0", s0, "call: initial price");
    k_opt = app->add_option("--k", k, "call: strike; annuity: contribution rate");
    a0_opt = app->add_option("--a0", a0, "annuity: initial account value");
    c_opt = app->add_option("--c", c, "annuity: continuous fee rate");
    g_opt = app->add_option("--g", g, "annuity: roll-up rate of the guarantee");
    eval_opt = app->add_option("--evaluation", evaluation, "annuity: at-maturity | max-over-dates")
                   ->check(CLI::IsMember({"at-maturity", "max-over-dates"}));
    app->add_option("--out", out, "output directory");
  }

  int run(RunRecord& rec, std::ostream& os) {
    rec.subcommand = "price";
    rec.positional = {instrument};
    auto& a = rec.args;
    const bool is_call = instrument == "call";
    if (is_call) {
      for (auto* o : {a0_opt, c_opt, g_opt, eval_opt})
        if (o->count() > 0) throw UsageError(o->get_name() + " applies to annuity pricing only");
    } else if (s0_opt->count() > 0) {
      throw UsageError("--s0 applies to call pricing only (use --a0)");
    }
    a["r"] = num(r);
    a["risk-neutral"] = risk_neutral_drift ? "true" : "false";
    const auto m = model.build(a, risk_neutral_drift, r);
    json result;
    if (is_call) {
      a["s0"] = num(s0);
      a["k"] = num(k);
      const CallSpec spec{s0, k, grid.t, r};
      spec.validate();
      const auto sg = grid.build(s0, 1, a, rec);
      const auto est = mc_call_price(spec, m, sg);
      result = to_json(est);
      result["spec"] = {{"instrument", "call"}, {"s0", s0}, {"strike", k}, {"maturity_years", grid.t},
                        {"discount_rate", r}};
    } else {
      const double contribution = k_opt->count() > 0 ? k : 0.0;
      a["a0"] = num(a0);
      a["c"] = num(c);
      a["k"] = num(contribution);
      a["g"] = num(g);
      a["evaluation"] = evaluation;
      const AnnuitySpec spec{a0, c, contribution, g, grid.t, r};
      spec.validate();
      const auto sg = grid.build(a0, 252, a, rec);
      const auto ev = evaluation == "at-maturity" ? AnnuityEvaluation::at_maturity
                                                  : AnnuityEvaluation::max_over_dates;
      const auto est = price_annuity_guarantee(spec, m, sg, ev);
      result = to_json(est);
      result["spec"] = {{"instrument", "annuity"}, {"a0", a0}, {"fee_c", c},
                        {"contribution_k", contribution}, {"guarantee_g", g},
                        {"maturity_years", grid.t}, {"discount_rate", r},
                        {"evaluation", evaluation}};
    }
    result["model"] = model_json(m);
    const auto dir = prepare_out(out);
    write_text(dir / "estimate.json", result.dump(2) + "\n");
    rec.outputs = {"estimate.json"};
    write_manifest(dir, rec);
    os << result.dump(2) << '\n';
    return kOk;
  }
};

struct SurfaceCmd {
  CLI::App* app;
  std::string preset;
  std::string lambda_axis, intensity_axis;
  std::string kind = "merton";
  double jump_sd = 0.0;
  double mu = 0.08, sigma = 0.4, s0 = 100.0, k = 100.0, r = 0.0;
  bool risk_neutral_drift = false;
  GridFlags grid;
  std::string out = ".";
  CLI::Option* mu_opt = nullptr;

  explicit SurfaceCmd(CLI::App& root) {
    app = root.add_subcommand("surface", "expected call payoff over a (lambda, jump size) grid");
    app->add_option("--preset", preset, "fig5: 17x17 over (0,4]x(0,0.8]; sec34: 17x17 over (0,4]x(0,0.08]")
        ->check(CLI::IsMember({"fig5", "sec34"}));
    app->add_option("--lambda-axis", lambda_axis, "start:stop:count");
    app->add_option("--intensity-axis", intensity_axis, "start:stop:count");
    app->add_option("--kind", kind, "merton | split-up")->check(CLI::IsMember({"merton", "split-up"}));
    app->add_option("--jump-sd", jump_sd, "jump exponent sd (merton kind)");
    mu_opt = app->add_option("--mu", mu, "drift per year");
    app->add_option("--sigma", sigma, "volatility");
    app->add_option("--s0", s0, "initial price");
    app->add_option("--k", k, "strike");
    app->add_option("--r", r, "discount rate");
    app->add_flag("--risk-neutral", risk_neutral_drift, "risk-neutral drift per cell");
    grid.add(*app, 10000);
    app->add_option("--out", out, "output directory");
  }

  int run(RunRecord& rec, std::ostream& os) {
    rec.subcommand = "surface";
    auto& a = rec.args;
    if (risk_neutral_drift && mu_opt->count() > 0)
      throw UsageError("--mu conflicts with --risk-neutral");
    std::vector<double> la, ia;
    const std::string p = preset.empty() && lambda_axis.empty() && intensity_axis.empty() ? "fig5" : preset;
    if (!p.empty()) {
      a["preset"] = p;
      la = open_axis(4.0, 17);
      ia = open_axis(p == "fig5" ? 0.8 : 0.08, 17);
    }
    if (!lambda_axis.empty()) {
      la = parse_axis(lambda_axis, "lambda-axis");
      a["lambda-axis"] = lambda_axis;
    }
    if (!intensity_axis.empty()) {
      ia = parse_axis(intensity_axis, "intensity-axis");
      a["intensity-axis"] = intensity_axis;
    }
    if (la.empty() || ia.empty()) throw UsageError("both axes are needed (or a --preset)");
    a["kind"] = kind;
    a["jump-sd"] = num(jump_sd);
    if (!risk_neutral_drift) a["mu"] = num(mu);
    a["sigma"] = num(sigma);
    a["s0"] = num(s0);
    a["k"] = num(k);
    a["r"] = num(r);
    a["risk-neutral"] = risk_neutral_drift ? "true" : "false";
    const CallSpec spec{s0, k, grid.t, r};
    spec.validate();
    const GbmParams base{risk_neutral_drift ? r : mu, sigma};
    base.validate();
    const auto sg = grid.build(s0, 1, a, rec);
    const SurfaceOptions opts{kind == "merton" ? SurfaceModel::merton : SurfaceModel::split_up, jump_sd,
                              risk_neutral_drift};
    const auto surf = payoff_surface(spec, base, la, ia, sg, opts);

    const auto dir = prepare_out(out);
    std::ostringstream csv;
    write_surface_csv(csv, surf);
    write_text(dir / "surface.csv", csv.str());
    const json side{
        {"baseline", surf.baseline.mean},
        {"baseline_std_error", surf.baseline.std_error},
        {"seed", sg.seed},
        {"n_paths", sg.n_paths},
        {"n_steps", sg.n_steps},
        {"kind", kind},
        {"lambda_axis", la},
        {"intensity_axis", ia},
    };
    write_text(dir / "surface.json", side.dump(2) + "\n");
    rec.outputs = {"surface.csv", "surface.json"};
    write_manifest(dir, rec);
    os << (dir / "surface.csv").string() << '\n';
    return kOk;
  }
};

// Rebuilds the command line recorded in a manifest.
std::vector<std::string> replay_args(const fs::path& manifest, const std::string& out) {
  std::ifstream in(manifest);
  if (!in) throw DataError("cannot open manifest " + manifest.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("manifest " + manifest.string() + ": " + e.what());
  }
  std::vector<std::string> args;
  try {
    args.push_back(j.at("subcommand").get<std::string>());
    for (const auto& p : j.at("positional")) args.push_back(p.get<std::string>());
    for (const auto& [key, value] : j.at("args").items()) {
      const auto v = value.get<std::string>();
      if (key == "risk-neutral") {
        if (v == "true") args.push_back("--risk-neutral");
        continue;
      }
      args.push_back("--" + key);
      args.push_back(v);
    }
  } catch (const json::exception& e) {
    throw DataError("manifest " + manifest.string() + ": " + e.what());
  }
  args.push_back("--out");
  args.push_back(out);
  return args;
}

}  // namespace

std::string file_sha256(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  if (!args.empty() && args[0] == "replay") {
    CLI::App app{"re-run a recorded command"};
    std::string manifest, dir;
    app.add_option("manifest", manifest, "run.json")->required();
    app.add_option("--out", dir, "output directory (default: the manifest's directory)");
    std::vector<std::string> rest(args.begin() + 1, args.end());
    std::reverse(rest.begin(), rest.end());
    try {
      app.parse(rest);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kOk : kUsage;
    }
    if (dir.empty()) dir = fs::path(manifest).parent_path().string();
    if (dir.empty()) dir = ".";
    try {
      return run(replay_args(manifest, dir), out, err);
    } catch (const DataError& e) {
      err << "error: " << e.what() << '\n';
      return kInputData;
    }
  }

  CLI::App app{"jump-diffusion simulation, calibration and pricing"};
  app.set_version_flag("--version", JUMPDIFF_VERSION);
  app.require_subcommand(1);
  app.footer("replay RUN_JSON [--out DIR]  re-run a recorded command");
  SimulateCmd simulate_cmd(app);
  FitCmd fit_cmd(app);
  DetectCmd detect_cmd(app);
  PriceCmd price_cmd(app);
  SurfaceCmd surface_cmd(app);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  RunRecord rec;
  try {
    if (*simulate_cmd.app) return simulate_cmd.run(rec, out);
    if (*fit_cmd.app) return fit_cmd.run(rec, out, err);
    if (*detect_cmd.app) return detect_cmd.run(rec, out);
    if (*price_cmd.app) return price_cmd.run(rec, out);
    if (*surface_cmd.app) return surface_cmd.run(rec, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputData;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace jumpdiff::cli
