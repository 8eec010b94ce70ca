#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "kerrq/cli.hpp"
#include "kerrq/presets.hpp"
#include "kerrq/protocol.hpp"

using namespace kerrq;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Parsed CSV: '#' lines collected as key=value where possible, then header + rows.
struct Csv {
  std::map<std::string, std::string> echo;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    FAIL("missing column " << name);
    return -1;
  }
  double num(std::size_t row, const std::string& name) const { return std::stod(rows[row][col(name)]); }
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

Csv parse_csv(const std::string& text) {
  Csv c;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) c.echo[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    if (c.header.empty())
      c.header = split(line, ',');
    else
      c.rows.push_back(split(line, ','));
  }
  return c;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("kerrq_test_" + name)).string();
}

}  // namespace

TEST_CASE("design prints the root table") {
  SUBCASE("high-distinguishability qutrit roots sit at +-pi/3 from the Kerr phase") {
    const Result r = run_cli({"design", "--preset", "maxent-k2-high"});
    REQUIRE(r.code == 0);
    const Csv c = parse_csv(r.out);
    REQUIRE(c.rows.size() == 2);
    std::vector<double> rel{c.num(0, "arg_rel"), c.num(1, "arg_rel")};
    std::sort(rel.begin(), rel.end());
    CHECK(rel[0] == doctest::Approx(-std::numbers::pi / 3).epsilon(1e-9));
    CHECK(rel[1] == doctest::Approx(std::numbers::pi / 3).epsilon(1e-9));
    CHECK(c.num(0, "root_abs") == doctest::Approx(0.1));
  }
  SUBCASE("photon-correlated s=2, K=2 echoes c = (e^{i chi}, -1 - e^{i chi}, 1)") {
    const Result r = run_cli({"design", "--preset", "photon-correlated", "--s", "2", "--K", "2"});
    REQUIRE(r.code == 0);
    const Csv c = parse_csv(r.out);
    const auto parts = split(c.echo.at("c"), ' ');
    REQUIRE(parts.size() == 3);
    auto val = [](const std::string& t) {
      const auto p = split(t, ':');
      return cplx(std::stod(p[0]), std::stod(p[1]));
    };
    const cplx e = std::exp(cplx(0.0, std::numbers::pi / 2));
    CHECK(std::abs(val(parts[0]) - e) < 1e-9);
    CHECK(std::abs(val(parts[1]) - (-1.0 - e)) < 1e-9);
    CHECK(std::abs(val(parts[2]) - 1.0) < 1e-9);
  }
  SUBCASE("--out writes a scheme that loads back") {
    const std::string path = temp_path("scheme.json");
    const Result r = run_cli({"design", "--preset", "bell-k1", "--out", path});
    REQUIRE(r.code == 0);
    std::ifstream f(path);
    std::stringstream buf;
    buf << f.rdbuf();
    const DetectionScheme s = scheme_from_json(buf.str());
    CHECK(s.K == 1);
    CHECK(std::abs(s.gamma - cplx(0.1)) < 1e-15);
    std::remove(path.c_str());
  }
}

TEST_CASE("invalid input maps to exit code 2") {
  CHECK(run_cli({"design", "--c", "1,0"}).code == cli::kInvalid);
  CHECK(run_cli({"design", "--c", "1,abc"}).code == cli::kInvalid);
  CHECK(run_cli({"design", "--c", "1"}).code == cli::kInvalid);
  CHECK(run_cli({"design", "--preset", "nope"}).code == cli::kInvalid);
  CHECK(run_cli({"design", "--preset", "bell-k1", "--c", "1,1"}).code == cli::kInvalid);
  CHECK(run_cli({"design", "--preset", "bell-k1", "--delta", "1.5"}).code == cli::kInvalid);
  CHECK(run_cli({"simulate", "--c", "1,-1"}).code == cli::kInvalid);
  CHECK(run_cli({"simulate", "--preset", "bell-k1", "--format", "xml"}).code == cli::kInvalid);
  CHECK(run_cli({"feasibility", "--K", "3"}).code == cli::kInvalid);
  CHECK(run_cli({"bogus"}).code == cli::kInvalid);
  CHECK(run_cli({}).code == cli::kInvalid);
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("an oversized probe is reported as a truncation overflow") {
  const Result r = run_cli({"simulate", "--preset", "bell-k1", "--gamma", "8", "--no-oracle"});
  CHECK(r.code == cli::kTruncation);
  CHECK(r.err.find("truncation") != std::string::npos);
}

TEST_CASE("simulate emits one row per pattern") {
  SUBCASE("bell-k1 at |gamma| = 0.1") {
    const Result r = run_cli({"simulate", "--preset", "bell-k1", "--gamma", "0.1"});
    REQUIRE(r.code == 0);
    const Csv c = parse_csv(r.out);
    REQUIRE(c.rows.size() == 2);
    CHECK(c.echo.at("target") == "bell-k1");
    double sum = 0.0;
    for (std::size_t i = 0; i < c.rows.size(); ++i) sum += c.num(i, "probability");
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(c.rows[1][c.col("pattern")] == "1");
    CHECK(c.num(1, "fidelity") >= 0.99);
    CHECK(c.num(1, "oracle_td") < 1e-5);
  }
  SUBCASE("photon-correlated s=2, K=2 reaches the photon-number state") {
    const Result r = run_cli({"simulate", "--preset", "photon-correlated", "--alpha", "0.1"});
    REQUIRE(r.code == 0);
    const Csv c = parse_csv(r.out);
    REQUIRE(c.rows.size() == 4);
    CHECK(c.rows[3][c.col("pattern")] == "11");
    CHECK(c.num(3, "fidelity_photon_number") >= 0.95);
  }
  SUBCASE("a designed scheme file reproduces the preset run") {
    const std::string path = temp_path("bell.json");
    REQUIRE(run_cli({"design", "--preset", "bell-k1", "--out", path}).code == 0);
    const Preset p = bell_k1();
    const std::string a = std::to_string(p.alpha.real()), chi = std::to_string(p.chi);
    const Csv direct = parse_csv(run_cli({"simulate", "--preset", "bell-k1"}).out);
    const Result r = run_cli({"simulate", "--scheme", path, "--alpha", a, "--chi", chi, "--no-oracle"});
    REQUIRE(r.code == 0);
    const Csv from_file = parse_csv(r.out);
    REQUIRE(from_file.rows.size() == 2);
    // --alpha/--chi go through 6-digit text here, so compare loosely.
    CHECK(from_file.num(1, "probability") == doctest::Approx(direct.num(1, "probability")).epsilon(1e-4));
    CHECK(from_file.num(1, "fidelity") > 0.99);
    std::remove(path.c_str());
  }
}

TEST_CASE("json output carries the same rows") {
  const Result r = run_cli({"simulate", "--preset", "bell-k1", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("command") == "simulate");
  CHECK(j.at("params").at("target") == "bell-k1");
  REQUIRE(j.at("rows").size() == 2);
  CHECK(j["rows"][1]["fidelity"].get<double>() >= 0.99);
}

namespace {

using ScanTable = std::map<std::pair<int, std::string>, std::map<std::string, double>>;  // (K, x) -> class -> E

ScanTable scan_table(const Csv& c) {
  ScanTable E;
  for (std::size_t i = 0; i < c.rows.size(); ++i)
    E[{std::stoi(c.rows[i][c.col("K")]), c.rows[i][c.col("x")]}][c.rows[i][c.col("class")]] = c.num(i, "E");
  return E;
}

}  // namespace

TEST_CASE("entangle-scan endpoints and determinism") {
  const std::vector<std::string> args{"entangle-scan", "--K",      "1,2", "--x-min",    "1e-4", "--x-max",
                                      "100",           "--points", "2",   "--restarts", "6"};
  const Result a = run_cli(args);
  REQUIRE(a.code == 0);
  CHECK(run_cli(args).out == a.out);
  ScanTable E = scan_table(parse_csv(a.out));
  CHECK(E[{1, "0.0001"}]["all"] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(E[{1, "100"}]["all"] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(E[{2, "0.0001"}]["all"] == doctest::Approx(1.5).epsilon(5e-3));
  CHECK(E[{2, "100"}]["all"] == doctest::Approx(std::log2(3.0)).epsilon(5e-3));
}

TEST_CASE("entangle-scan K=3 with two silent detectors matches K=1") {
  const Result r = run_cli({"entangle-scan", "--K", "1,3", "--x-min", "1e-2", "--x-max", "100", "--points", "3",
                            "--restarts", "6"});
  const Csv c = parse_csv(r.out);
  bool flagged = false;
  for (std::size_t i = 0; i < c.rows.size(); ++i) flagged = flagged || c.rows[i][c.col("converged")] == "0";
  CHECK(r.code == (flagged ? cli::kNonConvergence : cli::kOk));
  ScanTable E = scan_table(c);
  for (const std::string& x : {"0.01", "1", "100"}) {
    double best = 0.0;
    for (const char* cls : {"miss:1+2", "miss:1+3", "miss:2+3"}) best = std::max(best, E[{3, x}][cls]);
    CHECK(std::abs(best - E[{1, x}]["all"]) < 1e-3);
  }
}

TEST_CASE("feasibility sweep") {
  SUBCASE("K=1, F=0.9: probability stays nonzero up to the dark-count cutoff") {
    const Result r = run_cli({"feasibility", "--K", "1", "--db-step", "0.25"});
    REQUIRE(r.code == 0);
    const Csv c = parse_csv(r.out);
    const double cutoff = std::stod(c.echo.at("dark_count_cutoff_db"));
    CHECK(cutoff >= 27.0);
    CHECK(cutoff <= 28.0);
    double last_nonzero = 0.0;
    for (std::size_t i = 0; i < c.rows.size(); ++i) {
      if (c.rows[i][c.col("sweep")] != "loss") continue;
      const double db = c.num(i, "loss_db");
      if (c.num(i, "p_K") > 0.0) last_nonzero = db;
      if (db >= cutoff) CHECK(c.num(i, "p_K") == 0.0);
    }
    CHECK(last_nonzero > cutoff - 0.25);
    CHECK(c.echo.count("zeta"));
  }
  SUBCASE("zero loss uses the capped |gamma|^2 in the success probability") {
    const Result r = run_cli({"feasibility", "--K", "2", "--db-max", "0", "--gamma2-max", "0.5"});
    REQUIRE(r.code == 0);
    const Csv c = parse_csv(r.out);
    const double a2 = 10.0, x = a2 * 0.01 / a2;
    const Preset p = qutrit_low(a2, x);
    const double expect = success_probability(p.target, p.alpha, p.beta, p.chi, std::sqrt(0.5), 1e-2, 1 / std::sqrt(2.0));
    CHECK(c.num(0, "gamma2") == doctest::Approx(0.5));
    CHECK(c.num(0, "p_K") == doctest::Approx(expect).epsilon(1e-9));
  }
  SUBCASE("detector preset B") {
    const Csv c = parse_csv(run_cli({"feasibility", "--detector", "B", "--db-max", "1"}).out);
    CHECK(std::stod(c.echo.at("zeta")) == doctest::Approx(1e-6));
    CHECK(std::stod(c.echo.at("lambda_det")) == doctest::Approx(0.1));
  }
}
