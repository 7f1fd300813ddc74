#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

#include "smilewings/error.hpp"
#include "smilewings/io.hpp"

using namespace smilewings;
using namespace smilewings::io;

namespace {

int parse_error_line(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("format_double keeps 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");
  for (double v : {0.079655674554058, -1e-300, 3.0e300, 1.0 / 3.0}) {
    double back = 0.0;
    REQUIRE(parse_double(format_double(v), back));
    CHECK(back == v);
  }
  double v = 0.0;
  CHECK(parse_double(" +2.5 ", v));
  CHECK(v == 2.5);
  CHECK_FALSE(parse_double("2.5x", v));
  CHECK_FALSE(parse_double("", v));
}

TEST_CASE("deterministic json") {
  nlohmann::ordered_json j;
  j["z"] = 0.1;
  j["a"] = {1, 2.5, "s"};
  j["inf"] = std::numeric_limits<double>::infinity();
  j["empty"] = nlohmann::ordered_json::array();
  j["nested"] = {{"k", true}};
  const std::string text = dump_json(j);
  CHECK(text == dump_json(j));
  CHECK(text.find("\"z\": 0.10000000000000001") < text.find("\"a\""));
  CHECK(text.find("\"inf\": \"inf\"") != std::string::npos);
  CHECK(text.find("\"empty\": []") != std::string::npos);
  const auto back = nlohmann::ordered_json::parse(text);
  CHECK(back["z"].get<double>() == 0.1);
  CHECK(back["nested"]["k"].get<bool>());
  CHECK(dump_json(j, -1).find('\n') == std::string::npos);
}

TEST_CASE("smile file round trip") {
  SmileFile f;
  f.metadata = {{"model", "test"}, {"certified_q", "1.5"}};
  f.x = {-3.0, -1.0 / 3.0, 0.0, 0.7};
  f.iv = {0.41, 0.3, 0.25, 0.2 + 1e-17};
  std::ostringstream out;
  write_smile(out, f);
  std::istringstream in(out.str());
  const auto g = parse_smile(in);
  CHECK(g.metadata == f.metadata);
  CHECK(g.x == f.x);
  CHECK(g.iv == f.iv);
  CHECK(g.lines == std::vector<int>{4, 5, 6, 7});

  const auto curve = to_curve(g);
  CHECK(curve.certified_q().value() == 1.5);
  CHECK(std::holds_alternative<PowerTailWing>(curve.left_wing()));
  std::ostringstream again;
  write_smile(again, from_curve(curve, {{"model", "test"}}));
  std::istringstream in2(again.str());
  const auto h = parse_smile(in2);
  CHECK(h.x == f.x);
  CHECK(h.iv == f.iv);
  CHECK(h.meta("left_wing") == "power_tail:1.5");
  CHECK(h.meta("interpolation") == "monotone_cubic");
}

TEST_CASE("smile metadata selects the curve") {
  SmileFile f;
  f.x = {-2.0, -1.0, 0.0};
  f.iv = {0.3, 0.25, 0.2};
  CHECK(std::holds_alternative<ClampWing>(to_curve(f).left_wing()));
  f.set_meta("left_wing", "corollary:2");
  CHECK(std::get<CorollaryWing>(to_curve(f).left_wing()).q == 2.0);
  f.set_meta("interpolation", "linear");
  CHECK(to_curve(f).interpolation() == Interpolation::Linear);
  f.set_meta("certified_q", "inf");
  CHECK(std::isinf(*to_curve(f).certified_q()));
  f.set_meta("left_wing", "power_tail");
  CHECK_THROWS_AS(to_curve(f), ParseError);
  f.set_meta("left_wing", "spline");
  CHECK_THROWS_AS(to_curve(f), ParseError);
}

TEST_CASE("smile file errors carry line numbers") {
  auto parse = [](const std::string& text) {
    return [text] {
      std::istringstream in(text);
      const auto f = parse_smile(in, "s.csv");
      to_curve(f, "s.csv");
    };
  };
  CHECK(parse_error_line(parse("# a=b\nx,y\n")) == 2);
  CHECK(parse_error_line(parse("log_moneyness,implied_vol\n0,0.2\n1,zz\n")) == 3);
  CHECK(parse_error_line(parse("log_moneyness,implied_vol\n0,0.2,9\n")) == 2);
  CHECK(parse_error_line(parse("log_moneyness,implied_vol\n0,0.2\n\n-1,0.2\n")) == 4);
  CHECK(parse_error_line(parse("log_moneyness,implied_vol\n0,0.2\n1,0\n")) == 3);
  CHECK(parse_error_line(parse("")) == 0);
  try {
    parse("log_moneyness,implied_vol\n0,0.2\n1,zz\n")();
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).rfind("s.csv:3:", 0) == 0);
  }
  CHECK_THROWS_AS(read_smile("/nonexistent/smile.csv"), IoError);
}

TEST_CASE("chain file rows and issues") {
  std::istringstream in(
      "# comment\n"
      "log_moneyness,value,value_kind\n"
      "0,0.079655674554058,put_price\n"
      "-1,0.3,implied_vol\n"
      "0.2,abc,put_price\n"
      "0.3,0.1,call_price\n"
      "0.4,0.1\n"
      "0.5,-0.1,implied_vol\n");
  const auto c = parse_chain(in, "c.csv");
  REQUIRE(c.rows.size() == 2);
  CHECK(c.rows[0].line == 3);
  CHECK(c.rows[0].value_kind == ValueKind::PutPrice);
  CHECK(c.rows[1].value_kind == ValueKind::ImpliedVol);
  REQUIRE(c.issues.size() == 4);
  CHECK(c.issues[0].line == 5);
  CHECK(c.issues[0].message.find("c.csv:5") == 0);
  CHECK(c.issues[3].line == 8);

  std::ostringstream out;
  write_chain(out, c.rows);
  std::istringstream back(out.str());
  const auto d = parse_chain(back);
  REQUIRE(d.rows.size() == 2);
  CHECK(d.rows[0].value == c.rows[0].value);
  CHECK(d.rows[1].value_kind == ValueKind::ImpliedVol);

  std::istringstream bad_header("x,value,value_kind\n");
  CHECK(parse_error_line([&] { parse_chain(bad_header); }) == 1);
}

TEST_CASE("config precedence and validation") {
  const RunConfig defaults;
  CHECK(defaults.tol == 1e-8);
  CHECK(defaults.q_ceiling == 1e3);
  CHECK(defaults.seed == 42);
  CHECK(defaults.z_range == 12.0);
  CHECK(defaults.output_format == OutputFormat::Json);

  std::istringstream in("# run\ntol = 1e-6\nseed=7\noutput_format=csv\n\n");
  std::vector<std::string> keys;
  const auto cfg = parse_config(in, defaults, "cfg", &keys);
  CHECK(cfg.tol == 1e-6);
  CHECK(cfg.seed == 7);
  CHECK(cfg.q_ceiling == 1e3);
  CHECK(cfg.output_format == OutputFormat::Csv);
  CHECK(keys == std::vector<std::string>{"tol", "seed", "output_format"});

  std::istringstream unknown("tol=1\nwat=2\n");
  CHECK(parse_error_line([&] { parse_config(unknown); }) == 2);
  std::istringstream no_eq("tol 1\n");
  CHECK(parse_error_line([&] { parse_config(no_eq); }) == 1);
  std::istringstream neg_seed("seed=-3\n");
  CHECK(parse_error_line([&] { parse_config(neg_seed); }) == 1);

  RunConfig bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.tol = 1e-8;
  bad.z_range = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}
