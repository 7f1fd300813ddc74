#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("smilewings_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_file(const std::string& name, const std::string& text) {
  const auto p = work_dir() / name;
  std::ofstream(p) << text;
  return p;
}

Run run(const std::string& args) {
  const auto err_path = work_dir() / "stderr.txt";
  const std::string cmd = std::string(SMILEWINGS_CLI) + " " + args + " 2>" + err_path.string();
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_path);
  return r;
}

json parse(const Run& r) {
  INFO(r.out);
  return json::parse(r.out);
}

double as_double(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    return NAN;
  }
  return v.get<double>();
}

const std::string chain_header = "log_moneyness,value,value_kind\n";
const std::string smile_header = "log_moneyness,implied_vol\n";

std::string flat_smile(double sigma) {
  std::string s = smile_header;
  for (int i = 0; i <= 40; ++i) s += std::to_string(-4.0 + 0.2 * i) + "," + std::to_string(sigma) + "\n";
  return s;
}

}  // namespace

TEST_CASE("iv inverts put prices and passes vols through") {
  const auto in = write_file("chain.csv", chain_header +
                                              "0,0.079655674554058,put_price\n"
                                              "-0.5,0.25,implied_vol\n"
                                              "0.5,0.6487212707001282,put_price\n");
  const auto r = run("iv " + in.string());
  REQUIRE(r.code == 0);
  const auto j = parse(r);
  REQUIRE(j["rows"].size() == 3);
  CHECK(j["rows"][0]["implied_vol"].get<double>() == doctest::Approx(0.2).epsilon(1e-10));
  CHECK(j["rows"][1]["implied_vol"].get<double>() == 0.25);
  CHECK(j["rows"][2]["implied_vol"].get<double>() == 0.0);
  CHECK(j["failed"] == 0);

  const auto csv = run("iv " + in.string() + " --format csv");
  REQUIRE(csv.code == 0);
  CHECK(csv.out.find(smile_header) != std::string::npos);
}

TEST_CASE("iv reports malformed rows with line numbers") {
  const auto in = write_file("bad_chain.csv", chain_header +
                                                  "0,0.079655674554058,put_price\n"
                                                  "0.1,oops,put_price\n"
                                                  "0,1.5,put_price\n");
  const auto r = run("iv " + in.string());
  CHECK(r.code == 2);
  const auto j = parse(r);
  REQUIRE(j["rows"].size() == 3);
  CHECK(j["rows"][0].contains("implied_vol"));
  CHECK(j["rows"][1]["line"] == 3);
  CHECK(j["rows"][1].contains("error"));
  CHECK(j["rows"][2].contains("error"));
  CHECK(j["failed"] == 2);
  CHECK(r.err.find(":3:") != std::string::npos);
}

TEST_CASE("smile-gen writes certified smiles") {
  const auto ln = run("smile-gen --model lognormal --sigma 0.2 --x-grid -3:1:9");
  REQUIRE(ln.code == 0);
  CHECK(ln.out.find("# certified_q=inf") != std::string::npos);
  CHECK(ln.out.find("0.20000000000") != std::string::npos);

  const auto fmls = run("smile-gen --model fmls --alpha 1.5 --scale 0.2");
  REQUIRE(fmls.code == 0);
  CHECK(fmls.out.find("# certified_q=1.5") != std::string::npos);
  const auto via_params = run("smile-gen --model fmls --params alpha=1.5,scale=0.2");
  CHECK(via_params.out == fmls.out);

  CHECK(run("smile-gen --model fmls --alpha 2.5").code == 1);
  CHECK(run("smile-gen --model nope").code == 1);
}

TEST_CASE("varswap routes agree") {
  const auto flat = write_file("flat.csv", flat_smile(0.2));
  const auto r = run("varswap " + flat.string());
  REQUIRE(r.code == 0);
  const auto j = parse(r);
  CHECK(j["strip"].get<double>() == doctest::Approx(0.04).epsilon(1e-9));
  CHECK(j["gf"].get<double>() == doctest::Approx(0.04).epsilon(1e-9));
  CHECK(j["discrepancy"].get<double>() < 1e-9);

  const auto gen = run("smile-gen --model fmls --alpha 1.5 --scale 0.2 -o " + (work_dir() / "fmls.csv").string());
  REQUIRE(gen.code == 0);
  const auto f = run("varswap " + (work_dir() / "fmls.csv").string() + " --method both");
  REQUIRE(f.code == 0);
  CHECK(parse(f)["discrepancy"].get<double>() < 1e-4);
}

TEST_CASE("varswap refuses a non-monotone gf transform") {
  const auto bad = write_file("notmono.csv", smile_header +
                                                 "-1.1,0.2\n"
                                                 "-1,0.05\n"
                                                 "0,0.05\n"
                                                 "# interpolation=linear\n");
  const auto r = run("varswap " + bad.string() + " --method gf");
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
  CHECK(run("varswap " + bad.string() + " --method strip").code == 0);
}

TEST_CASE("wing-fit recovers the tail index") {
  // Smile with the exact wing form for q = 1.5 on 60 log-spaced points.
  std::string syn = smile_header;
  for (int i = 0; i < 60; ++i) {
    const double x = -2000.0 * std::pow(1e-3, i / 59.0);
    const double l = std::log(-x);
    syn += std::to_string(x) + "," + std::to_string(std::sqrt(3.0 * l - 2.0 * x) - std::sqrt(3.0 * l)) + "\n";
  }
  const auto syn_path = write_file("syn.csv", syn);
  for (const char* method : {"min", "ls"}) {
    const auto r = run("wing-fit " + syn_path.string() + " --method " + method);
    REQUIRE(r.code == 0);
    const auto j = parse(r);
    CHECK(as_double(j["q_hat"]) == doctest::Approx(1.5).epsilon(1e-4));
    CHECK_FALSE(j["no_finite_q"].get<bool>());
  }

  // FMLS wing: the finite-window statistic sits above the true index.
  const auto gen = run("smile-gen --model fmls --alpha 1.5 --scale 0.2 -o " + (work_dir() / "fmls_wf.csv").string());
  REQUIRE(gen.code == 0);
  const auto fm = parse(run("wing-fit " + (work_dir() / "fmls_wf.csv").string()));
  CHECK(as_double(fm["q_hat"]) >= 1.5);
  CHECK(as_double(fm["q_hat"]) < 1.75);

  const auto flat = write_file("flat_wf.csv", flat_smile(0.2));
  const auto r = run("wing-fit " + flat.string());
  REQUIRE(r.code == 0);
  const auto j = parse(r);
  CHECK(j["no_finite_q"].get<bool>());
  CHECK(as_double(j["q_hat"]) == 1000.0);

  CHECK(run("wing-fit " + flat.string() + " --x-min -10 --x-max -20").code == 2);
}

TEST_CASE("input errors exit with status 1") {
  CHECK(run("varswap /nonexistent/smile.csv").code == 1);
  const auto unsorted = write_file("unsorted.csv", smile_header + "0,0.2\n-1,0.2\n");
  const auto r = run("varswap " + unsorted.string());
  CHECK(r.code == 1);
  CHECK(r.err.find(":3:") != std::string::npos);
  CHECK(run("frobnicate").code != 0);
}

TEST_CASE("config file and flag precedence") {
  const auto in = write_file("cfg_chain.csv", chain_header + "0,0.079655674554058,put_price\n");
  const auto cfg = write_file("run.cfg", "tol=1e-6\nseed=9\n");
  auto j = parse(run("iv " + in.string() + " --config " + cfg.string()));
  CHECK(j["config"]["tol"].get<double>() == 1e-6);
  CHECK(j["config"]["seed"] == 9);
  j = parse(run("iv " + in.string() + " --config " + cfg.string() + " --tol 1e-7"));
  CHECK(j["config"]["tol"].get<double>() == 1e-7);
  CHECK(j["config"]["seed"] == 9);
  j = parse(run("iv " + in.string()));
  CHECK(j["config"]["tol"].get<double>() == 1e-8);
  CHECK(j["config"]["seed"] == 42);
}

TEST_CASE("verify runs selected checks deterministically") {
  const auto a = run("verify --only gf");
  REQUIRE(a.code == 0);
  const auto j = parse(a);
  CHECK(j["passed"].get<bool>());
  std::vector<int> ids;
  for (const auto& c : j["checks"]) ids.push_back(c["id"]);
  CHECK(ids == std::vector<int>{2, 3, 7, 8});
  CHECK(run("verify --only gf").out == a.out);
  CHECK(a.err.find("PASS [7]") != std::string::npos);

  const auto loose = parse(run("verify --only 1 --tol 1e-2"));
  CHECK(loose["tol_override"].get<double>() == 1e-2);
  CHECK(loose["checks"][0]["measurements"][0]["limit"].get<double>() == 1e-2);

  CHECK(run("verify --only nosuchcheck").code != 0);
}

TEST_CASE("verify passes every check") {
  const auto r = run("verify --format csv");
  INFO(r.err);
  CHECK(r.code == 0);
  CHECK(r.out.rfind("id,name,check_passed,label,value,comparison,limit,margin\n", 0) == 0);
  for (int id = 1; id <= 10; ++id) CHECK(r.err.find("PASS [" + std::to_string(id) + "]") != std::string::npos);
}
