#include "pucci/cli.hpp"
#include "pucci/io.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace pucci;
using nlohmann::json;

TEST_CASE("config round-trips through JSON") {
  RunConfig c;
  c.branch = Branch::PucciMinus;
  c.Lambda = 2.0;
  c.dim = 4.0;
  c.p = 2.5;
  c.alpha = 0.3;
  c.domain = Domain::Entire;
  c.integrator.rel_tol = 1e-9;
  c.classify.min_c_crossings = 12;
  c.out = "runs/a";
  c.formats = {"csv"};
  const RunConfig back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.spec() == c.spec());
  CHECK(back.integrator.rel_tol == 1e-9);
}

TEST_CASE("config rejects unknown keys and wrong types") {
  CHECK_THROWS_AS(config_from_json(json{{"lamda", 1.0}}), InvalidSpec);
  CHECK_THROWS_AS(config_from_json(json{{"lambda", "one"}}), InvalidSpec);
  CHECK_THROWS_AS(config_from_json(json{{"op", "max"}}), InvalidSpec);
  CHECK_THROWS_AS(config_from_json(json::array()), InvalidSpec);
}

TEST_CASE("validation per command") {
  RunConfig c;
  CHECK_NOTHROW(validate(c, Command::CriticalExponent));
  CHECK_THROWS_AS(validate(c, Command::Solve), InvalidSpec);
  c.p = 3.0;
  CHECK_THROWS_AS(validate(c, Command::CriticalExponent), InvalidSpec);
  CHECK_NOTHROW(validate(c, Command::AlphaStar));
  CHECK_THROWS_AS(validate(c, Command::PhasePlane), InvalidSpec);
  c.alpha = 1.0;
  CHECK_NOTHROW(validate(c, Command::Solve));
  CHECK_THROWS_AS(validate(c, Command::AlphaStar), InvalidSpec);
  c.p = 1.0;
  CHECK_THROWS_AS(validate(c, Command::Solve), InvalidSpec);
  c.p = 3.0;
  c.lambda = 2.0;
  CHECK_THROWS_AS(validate(c, Command::Solve), InvalidSpec);
  c.lambda = 1.0;
  c.formats = {"png"};
  CHECK_THROWS_AS(validate(c, Command::Solve), InvalidSpec);
  c.formats = {"json"};
  c.integrator.rel_tol = 0.0;
  CHECK_THROWS_AS(validate(c, Command::Solve), InvalidSpec);
}

TEST_CASE("report serialization is lossless") {
  RunConfig c;
  c.p = 3.0;
  c.alpha = 1.0;
  c.domain = Domain::Entire;
  const RunReport r = cmd_solve(c);
  const json j = to_json(r);
  CHECK(j.at("schema_version") == "1");
  const RunReport back = report_from_json(json::parse(j.dump()));
  CHECK(back == r);

  RunReport b;
  b.command = "alpha-star";
  b.bisection = BisectionResult{0.5, 0.49, 0.51, {}, {}, 30, 1e-8};
  b.bisection->hi_class.tag = DecayTag::FiniteZero;
  b.bisection->hi_class.rho = 12.5;
  b.notes = {"x"};
  CHECK(report_from_json(json::parse(to_json(b).dump())) == b);
  json bad = to_json(b);
  bad["schema_version"] = "0";
  CHECK_THROWS(report_from_json(bad));
}

TEST_CASE("named constants are echoed") {
  const auto j = named_constants(OperatorSpec::make(1.0, 2.0, 4.0, Branch::PucciPlus), 6.0);
  for (const char* key : {"n_tilde_plus", "n_tilde_minus", "serrin_plus", "serrin_minus",
                          "critical_plus", "critical_minus", "c_star", "lambda_1", "ef"})
    CHECK(j.contains(key));
  CHECK(j.at("critical_plus").get<double>() == doctest::Approx(9.0));
  const auto below = named_constants(OperatorSpec::semilinear(3.0), 2.0);
  CHECK(below.at("c_star").is_null());
}

TEST_CASE("trajectory CSV layout") {
  const auto sol = solve_entire(OperatorSpec::semilinear(3.0), 3.0, 1.0);
  std::ostringstream radial, phase;
  write_trajectory_csv(radial, sol, false);
  write_trajectory_csv(phase, sol, true);
  const std::string r = radial.str();
  CHECK(r.rfind("t_or_r,u_or_x,derivative,regime,nearest_event\n", 0) == 0);
  CHECK(r.find('\r') == std::string::npos);
  CHECK(phase.str().find("u_zero") != std::string::npos);
  std::size_t lines = 0;
  for (char ch : r) lines += ch == '\n';
  CHECK(lines == static_cast<std::size_t>(sol.radial_table().rows()) + 1);
  std::istringstream in(r);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  int commas = 0;
  for (char ch : row) commas += ch == ',';
  CHECK(commas == 4);
}

TEST_CASE("curve CSV") {
  std::ostringstream os;
  write_curves_csv(os, OperatorSpec::semilinear(3.0), 6.0, 1.0, 10);
  const std::string s = os.str();
  CHECK(s.rfind("curve,x,value\n", 0) == 0);
  CHECK(s.find("\nL,") != std::string::npos);
  CHECK(s.find("\nC,") != std::string::npos);
}

TEST_CASE("SVG figure is deterministic and self-contained") {
  const auto plus = OperatorSpec::make(1.0, 2.0, 4.0, Branch::PucciPlus);
  const std::string a = phase_plane_svg(solve_exterior(plus, 6.5, 0.05));
  const std::string b = phase_plane_svg(solve_exterior(plus, 6.5, 0.05));
  CHECK(a == b);
  CHECK(a.rfind("<svg", 0) == 0);
  CHECK(a.find("</svg>") != std::string::npos);
  CHECK(a.find("http://www.w3.org/2000/svg") != std::string::npos);
}

TEST_CASE("format_double is shortest round-trip") {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}
