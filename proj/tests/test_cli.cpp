#include "pucci/cli.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pucci;
using nlohmann::json;

namespace {
struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pucci_radial");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "pucci_cli_test" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}
}  // namespace

TEST_CASE("solve on the plus branch reports a decay class") {
  const Run r = cli({"solve", "--op", "plus", "--lambda", "1", "--Lambda", "2", "--dim", "4", "--p",
                     "6.5", "--alpha", "0.05", "--domain", "exterior"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("classification").at("tag") == "finite_zero");
  CHECK(j.at("constants").contains("n_tilde_plus"));
  CHECK(j.at("schema_version") == "1");
}

TEST_CASE("critical semilinear solve notes the closed-form match") {
  const Run r = cli({"solve", "--op", "semilinear", "--dim", "3", "--p", "5", "--alpha", "1",
                     "--domain", "entire"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  bool found = false;
  for (const auto& a : j.at("audits"))
    if (a.at("name") == "closed_form_bubble_rel_error") {
      found = true;
      CHECK(a.at("passed") == true);
    }
  CHECK(found);
  CHECK(j.at("fits").size() == 1);
}

TEST_CASE("validation errors exit with 2") {
  CHECK(cli({"solve", "--lambda", "2", "--Lambda", "1", "--p", "3", "--alpha", "1"}).code == 2);
  CHECK(cli({"solve", "--p", "3"}).code == 2);
  CHECK(cli({"solve", "--bogus", "1"}).code == 2);
  CHECK(cli({"critical-exponent", "--p", "3"}).code == 2);
  CHECK(cli({}).code == 2);
  const Run r = cli({"solve", "--lambda", "2", "--Lambda", "1", "--p", "3", "--alpha", "1"});
  CHECK(r.err.find("lambda") != std::string::npos);
}

TEST_CASE("undetermined and numerical failures have their own exit codes") {
  CHECK(cli({"solve", "--p", "6", "--alpha", "0.2", "--horizon", "1", "--max-horizon", "1"}).code == 3);
  CHECK(cli({"solve", "--p", "6", "--alpha", "0.2", "--max-steps", "5"}).code == 4);
}

TEST_CASE("config file with flag override") {
  const auto dir = scratch("config");
  {
    std::ofstream f(dir / "run.json");
    f << R"({"op": "semilinear", "dim": 3, "p": 3, "alpha": 2, "domain": "entire"})";
  }
  const Run r = cli({"solve", "--config", (dir / "run.json").string(), "--alpha", "1"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("inputs").at("alpha") == 1.0);
  CHECK(j.at("classification").at("rho").get<double>() == doctest::Approx(6.8968486).epsilon(1e-7));
  {
    std::ofstream f(dir / "bad.json");
    f << R"({"alpha": 1, "colour": "red"})";
  }
  CHECK(cli({"solve", "--config", (dir / "bad.json").string()}).code == 2);
}

TEST_CASE("alpha-star and critical-exponent commands") {
  const json a = json::parse(cli({"alpha-star", "--dim", "3", "--p", "4"}).out);
  CHECK(a.at("bisection").at("value") == 0.0);
  const Run c = cli({"critical-exponent", "--dim", "3"});
  REQUIRE(c.code == 0);
  const json j = json::parse(c.out);
  CHECK(j.at("bisection").at("value").get<double>() == doctest::Approx(5.0).epsilon(2e-4));
}

TEST_CASE("phase-plane writes deterministic files") {
  const auto dir = scratch("phase");
  const std::vector<std::string> args{"phase-plane", "--op", "plus", "--Lambda", "2", "--dim", "4",
                                      "--p", "6.5", "--alpha", "0.05", "--out",
                                      (dir / "run").string()};
  REQUIRE(cli(args).code == 0);
  const std::string svg1 = slurp(dir / "run.phase.svg");
  REQUIRE(cli(args).code == 0);
  CHECK(slurp(dir / "run.phase.svg") == svg1);
  CHECK(std::filesystem::exists(dir / "run.phase.csv"));
  CHECK(std::filesystem::exists(dir / "run.curves.csv"));
  const json rep = json::parse(slurp(dir / "run.report.json"));
  CHECK(rep.at("files").size() == 4);
}

TEST_CASE("verify filtering") {
  const auto dir = scratch("verify");
  const Run r = cli({"verify", "--only", "energy-dissipation", "--out-dir", dir.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("[PASS]  9 energy-dissipation") != std::string::npos);
  CHECK(r.out.find("critical-bubble") == std::string::npos);
  CHECK(std::filesystem::exists(dir / "energy-dissipation.json"));
  CHECK(cli({"verify", "--only", "no-such-criterion"}).code == 2);
  const Run t = cli({"verify", "--only", "10,11", "--tol-scale", "0.1", "--json"});
  CHECK(t.code == 0);
  CHECK(json::parse(t.out).size() == 2);
}
