#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "jumpdiff/cli.hpp"
#include "jumpdiff/data_io.hpp"
#include "jumpdiff/models.hpp"
#include "jumpdiff/pricing.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace jumpdiff;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("jumpdiff_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) { return json::parse(slurp(path)); }

std::string write_series(const TempDir& dir, const std::string& name, const std::vector<double>& closes) {
  const auto path = dir / name;
  std::ofstream os(path);
  write_price_csv(os, make_series(closes));
  return path;
}

}  // namespace

TEST_CASE("cli simulate") {
  TempDir d;
  SUBCASE("flat gbm writes a single row of 100,100") {
    const auto r = run({"simulate", "--model", "gbm", "--mu", "0", "--sigma", "0", "--s0", "100", "--paths", "1",
                        "--steps", "1", "--t", "1", "--seed", "1", "--out", d.path.string()});
    REQUIRE(r.code == 0);
    std::istringstream csv(slurp(d / "paths.csv"));
    std::string header, row0, row1, extra;
    std::getline(csv, header);
    std::getline(csv, row0);
    std::getline(csv, row1);
    CHECK(header == "time,path_0");
    CHECK(row0.substr(row0.find(',') + 1) == "100");
    CHECK(row1.substr(row1.find(',') + 1) == "100");
    CHECK_FALSE(std::getline(csv, extra));
    const auto m = read_json(d / "run.json");
    CHECK(m["subcommand"] == "simulate");
    CHECK(m["seed"] == 1);
    CHECK(m["args"]["model"] == "gbm");
  }
  SUBCASE("repeat runs are byte-identical and independent of workers") {
    TempDir e;
    const std::vector<std::string> base{"simulate", "--model", "merton", "--mu", "0.1", "--sigma", "0.5",
                                        "--lambda", "10", "--mu-j", "0.05", "--sigma-j", "0.025", "--paths", "8",
                                        "--steps", "252", "--seed", "99"};
    auto a = base, b = base;
    a.insert(a.end(), {"--out", d.path.string(), "--workers", "1"});
    b.insert(b.end(), {"--out", e.path.string(), "--workers", "4"});
    REQUIRE(run(a).code == 0);
    REQUIRE(run(b).code == 0);
    CHECK(slurp(d / "paths.csv") == slurp(e / "paths.csv"));
    REQUIRE(run(a).code == 0);
    CHECK(slurp(d / "paths.csv") == slurp(e / "paths.csv"));
  }
  SUBCASE("a missing seed is generated and recorded") {
    REQUIRE(run({"simulate", "--paths", "2", "--steps", "3", "--out", d.path.string()}).code == 0);
    const auto m = read_json(d / "run.json");
    CHECK(m.contains("seed"));
    CHECK(m["args"]["seed"].get<std::string>() == std::to_string(m["seed"].get<std::uint64_t>()));
  }
  SUBCASE("usage errors") {
    CHECK(run({"simulate", "--model", "gbm", "--eta-up", "5", "--out", d.path.string()}).code == 2);
    CHECK(run({"simulate", "--model", "heston", "--out", d.path.string()}).code == 2);
    CHECK(run({"simulate", "--sigma", "-1", "--seed", "1", "--out", d.path.string()}).code == 2);
    CHECK(run({"simulate", "--bogus"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"--help"}).code == 0);
  }
}

TEST_CASE("cli fit") {
  TempDir d;
  SUBCASE("burn-in equal to iterations is a usage error") {
    const auto in = write_series(d, "flat.csv", std::vector<double>(40, 100.0));
    CHECK(run({"fit", "--input", in, "--burn-in", "100", "--iterations", "100", "--out", d.path.string()}).code == 2);
  }
  SUBCASE("missing input file") {
    CHECK(run({"fit", "--input", d / "nope.csv", "--out", d.path.string()}).code == 3);
  }
  SUBCASE("constant series flags the volatility floor") {
    const auto in = write_series(d, "flat.csv", std::vector<double>(40, 100.0));
    const auto r = run({"fit", "--input", in, "--iterations", "400", "--burn-in", "100", "--seed", "5", "--out",
                        d.path.string()});
    REQUIRE(r.code == 0);
    CHECK(read_json(d / "diagnostics.json")["degenerate_returns"] == true);
    CHECK(r.err.find("warning") != std::string::npos);
    CHECK(read_json(d / "summary.json").contains("sigma"));
  }
  SUBCASE("period slicing, digests and replay") {
    const auto ps = simulate_merton({{0.1, 0.5}, 10.0, 0.05, 0.025}, {100.0, 1.0, 252, 1, 1});
    const auto in = write_series(d, "prices.csv", ps.values[0]);
    const auto r = run({"fit", "--input", in, "--start", "2000-01-20", "--end", "2000-06-30", "--iterations", "600",
                        "--burn-in", "200", "--thinning", "2", "--seed", "3", "--out", d.path.string()});
    REQUIRE(r.code == 0);
    const auto chain = slurp(d / "chain.csv");
    CHECK(chain.rfind("iter,mu,sigma,lambda,mu_j,sigma_j\n", 0) == 0);
    const auto m = read_json(d / "run.json");
    CHECK(m["inputs"][in]["sha256"] == cli::file_sha256(in));
    TempDir e;
    REQUIRE(run({"replay", d / "run.json", "--out", e.path.string()}).code == 0);
    CHECK(slurp(e / "chain.csv") == chain);
    CHECK(slurp(e / "summary.json") == slurp(d / "summary.json"));
    CHECK(run({"fit", "--input", in, "--start", "2001-01-01", "--end", "2000-01-01", "--out", d.path.string()})
              .code == 2);
  }
  SUBCASE("unreadable price cell") {
    std::ofstream(d / "bad.csv") << "Date,Close\n2001-01-02,100\n2001-01-03,abc\n";
    const auto r = run({"fit", "--input", d / "bad.csv", "--out", d.path.string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("line 3") != std::string::npos);
  }
}

TEST_CASE("cli detect") {
  TempDir d;
  std::vector<double> closes{100.0};
  for (int i = 0; i < 251; ++i) closes.push_back(closes.back() + (i == 100 ? 10.0 : 0.1));
  const auto in = write_series(d, "spike.csv", closes);
  const auto r = run({"detect", "--input", in, "--out", d.path.string()});
  REQUIRE(r.code == 0);
  const auto j = read_json(d / "detection.json");
  CHECK(j["up_count"] == 1);
  CHECK(j["down_count"] == 0);
  CHECK(json::parse(r.out) == j);

  const auto flat = write_series(d, "flat.csv", std::vector<double>(30, 5.0));
  REQUIRE(run({"detect", "--input", flat, "--out", d.path.string()}).code == 0);
  CHECK(read_json(d / "detection.json")["up_count"] == 0);
  CHECK(run({"detect", "--input", in, "--threshold-multiple", "0", "--out", d.path.string()}).code == 2);
}

TEST_CASE("cli price") {
  TempDir d;
  SUBCASE("worthless call") {
    REQUIRE(run({"price", "call", "--model", "gbm", "--sigma", "0", "--mu", "0", "--s0", "100", "--k", "100",
                 "--seed", "1", "--out", d.path.string()})
                .code == 0);
    const auto j = read_json(d / "estimate.json");
    CHECK(j["mean"] == 0.0);
    CHECK(j["std_error"] == 0.0);
    CHECK(j["spec"]["strike"] == 100.0);
    CHECK(j["model"]["kind"] == "gbm");
  }
  SUBCASE("risk-neutral call against Black-Scholes") {
    REQUIRE(run({"price", "call", "--model", "gbm", "--risk-neutral", "--r", "0.08", "--sigma", "0.4", "--s0",
                 "100", "--k", "100", "--paths", "100000", "--seed", "4", "--out", d.path.string()})
                .code == 0);
    const auto j = read_json(d / "estimate.json");
    const double bs = bs_call({100, 100, 1, 0.08}, 0.4);
    CHECK(std::fabs(j["mean"].get<double>() - bs) <= 3 * j["std_error"].get<double>());
    CHECK(run({"price", "call", "--risk-neutral", "--mu", "0.1", "--out", d.path.string()}).code == 2);
  }
  SUBCASE("annuity under split jumps") {
    REQUIRE(run({"price", "annuity", "--g", "0.02", "--c", "0.01", "--k", "0", "--model", "split", "--mu", "0.03",
                 "--sigma", "0.15", "--lambda-down", "2", "--eta-down", "20", "--lambda-up", "1", "--eta-up", "20",
                 "--t", "10", "--paths", "2000", "--seed", "8", "--evaluation", "max-over-dates", "--out",
                 d.path.string()})
                .code == 0);
    const auto j = read_json(d / "estimate.json");
    CHECK(j["mean"].get<double>() >= 0.0);
    TempDir e;
    REQUIRE(run({"replay", d / "run.json", "--out", e.path.string()}).code == 0);
    CHECK(slurp(e / "estimate.json") == slurp(d / "estimate.json"));
  }
  SUBCASE("flags for the other instrument are rejected") {
    CHECK(run({"price", "call", "--a0", "100", "--out", d.path.string()}).code == 2);
    CHECK(run({"price", "annuity", "--s0", "100", "--out", d.path.string()}).code == 2);
    CHECK(run({"price", "swap", "--out", d.path.string()}).code == 2);
  }
}

TEST_CASE("cli surface") {
  TempDir d;
  SUBCASE("single zero-arrival cell equals the baseline") {
    REQUIRE(run({"surface", "--lambda-axis", "0:0:1", "--intensity-axis", "0.1:0.1:1", "--paths", "2000",
                 "--seed", "2", "--out", d.path.string()})
                .code == 0);
    std::istringstream csv(slurp(d / "surface.csv"));
    std::string header, base, cell;
    std::getline(csv, header);
    std::getline(csv, base);
    std::getline(csv, cell);
    CHECK(header == "lambda,intensity,expected_payoff,std_error");
    CHECK(base.substr(base.find(',', 2)) == cell.substr(cell.find(',', 2)));
    CHECK(read_json(d / "surface.json")["seed"] == 2);
  }
  SUBCASE("replay reproduces the csv bytes") {
    REQUIRE(run({"surface", "--lambda-axis", "1:4:3", "--intensity-axis", "0.1:0.8:3", "--paths", "500",
                 "--kind", "split-up", "--risk-neutral", "--r", "0.02", "--seed", "6", "--out", d.path.string()})
                .code == 0);
    TempDir e;
    REQUIRE(run({"replay", d / "run.json", "--out", e.path.string()}).code == 0);
    CHECK(slurp(e / "surface.csv") == slurp(d / "surface.csv"));
    // Replaying in place overwrites with the same bytes.
    const auto before = slurp(d / "surface.csv");
    REQUIRE(run({"replay", d / "run.json"}).code == 0);
    CHECK(slurp(d / "surface.csv") == before);
  }
  SUBCASE("preset axes") {
    REQUIRE(run({"surface", "--preset", "sec34", "--paths", "20", "--seed", "1", "--out", d.path.string()}).code == 0);
    const auto j = read_json(d / "surface.json");
    CHECK(j["lambda_axis"].size() == 17);
    CHECK(j["intensity_axis"].back().get<double>() == doctest::Approx(0.08));
    CHECK(j["lambda_axis"].front().get<double>() == doctest::Approx(4.0 / 17));
  }
  SUBCASE("malformed axes") {
    CHECK(run({"surface", "--lambda-axis", "0:4", "--out", d.path.string()}).code == 2);
    CHECK(run({"surface", "--lambda-axis", "a:b:3", "--out", d.path.string()}).code == 2);
    CHECK(run({"surface", "--lambda-axis", "4:0:3", "--out", d.path.string()}).code == 2);
    CHECK(run({"surface", "--lambda-axis", "0:4:0", "--out", d.path.string()}).code == 2);
  }
  SUBCASE("broken manifest") {
    std::ofstream(d / "run.json") << "{not json";
    CHECK(run({"replay", d / "run.json"}).code == 3);
  }
}
