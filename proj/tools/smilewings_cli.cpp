// smilewings command-line front end.
//
// Exit codes: 0 success, 1 environment or parse problem, 2 domain or
// validation failure (including failed rows and failed verify checks).

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "smilewings/blackscholes.hpp"
#include "smilewings/error.hpp"
#include "smilewings/gf.hpp"
#include "smilewings/io.hpp"
#include "smilewings/models.hpp"
#include "smilewings/replication.hpp"
#include "smilewings/verify.hpp"
#include "smilewings/wings.hpp"

using namespace smilewings;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitParse = 1;
constexpr int kExitDomain = 2;

// Options every subcommand shares. Precedence: flags > --config > defaults.
struct Common {
  std::string config_path;
  double tol = 0.0;
  double q_ceiling = 0.0;
  std::uint64_t seed = 0;
  double z_range = 0.0;
  std::string format;
  std::string output;
  CLI::Option* tol_opt = nullptr;
  CLI::Option* q_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* z_opt = nullptr;
  CLI::Option* format_opt = nullptr;

  io::RunConfig config;
  bool tol_explicit = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "key=value config file")->check(CLI::ExistingFile);
  c.tol_opt = sub->add_option("--tol", c.tol, "numerical tolerance (default 1e-8)");
  c.q_opt = sub->add_option("--q-ceiling", c.q_ceiling, "q estimate cap (default 1000)");
  c.seed_opt = sub->add_option("--seed", c.seed, "random seed (default 42)");
  c.z_opt = sub->add_option("--z-range", c.z_range, "recorded z range (default 12)");
  c.format_opt = sub->add_option("--format", c.format, "json or csv (default json)")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("-o,--output", c.output, "output file (default stdout)");
}

void resolve(Common& c) {
  io::RunConfig cfg;
  if (!c.config_path.empty()) {
    std::vector<std::string> keys;
    cfg = io::read_config(c.config_path, cfg, &keys);
    for (const auto& k : keys) c.tol_explicit = c.tol_explicit || k == "tol";
  }
  if (c.tol_opt->count() > 0) {
    cfg.tol = c.tol;
    c.tol_explicit = true;
  }
  if (c.q_opt->count() > 0) cfg.q_ceiling = c.q_ceiling;
  if (c.seed_opt->count() > 0) cfg.seed = c.seed;
  if (c.z_opt->count() > 0) cfg.z_range = c.z_range;
  if (c.format_opt->count() > 0) cfg.output_format = c.format == "csv" ? io::OutputFormat::Csv : io::OutputFormat::Json;
  cfg.validate();
  c.config = cfg;
}

json config_json(const io::RunConfig& cfg) {
  json j;
  j["tol"] = cfg.tol;
  j["q_ceiling"] = cfg.q_ceiling;
  j["seed"] = cfg.seed;
  j["z_range"] = cfg.z_range;
  return j;
}

void emit(const Common& c, const std::string& text) {
  if (c.output.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(c.output);
  if (!out) throw io::IoError("cannot open " + c.output + " for writing");
  out << text;
  if (!out) throw io::IoError("write error on " + c.output);
}

bool csv(const Common& c) { return c.config.output_format == io::OutputFormat::Csv; }

// ---- iv ----------------------------------------------------------------

struct IvArgs {
  Common common;
  std::string input;
};

int cmd_iv(IvArgs& a) {
  resolve(a.common);
  const auto chain = io::read_chain(a.input);

  struct Row {
    int line;
    std::optional<io::ChainFileRow> in;
    double iv = std::nan("");
    std::string error;
  };
  std::vector<Row> rows;
  std::size_t r = 0;
  std::size_t k = 0;
  // Merge parsed rows and malformed rows back into file order.
  while (r < chain.rows.size() || k < chain.issues.size()) {
    const bool take_row = k >= chain.issues.size() || (r < chain.rows.size() && chain.rows[r].line < chain.issues[k].line);
    if (take_row) {
      rows.push_back({chain.rows[r].line, chain.rows[r], std::nan(""), ""});
      ++r;
    } else {
      rows.push_back({chain.issues[k].line, std::nullopt, std::nan(""), chain.issues[k].message});
      ++k;
    }
  }
  std::size_t failed = 0;
  for (auto& row : rows) {
    if (row.in) {
      const auto& in = *row.in;
      try {
        if (in.value_kind == io::ValueKind::ImpliedVol) {
          row.iv = in.value;
        } else {
          row.iv = bs::implied_vol(in.log_moneyness, NormalizedPutPrice::from_value(in.log_moneyness, in.value));
        }
      } catch (const Error& e) {
        row.error = a.input + ":" + std::to_string(row.line) + ": " + e.what();
      }
    }
    if (!row.error.empty()) {
      ++failed;
      std::cerr << row.error << '\n';
    }
  }

  std::ostringstream os;
  if (csv(a.common)) {
    os << "# command=iv\n# input=" << a.input << '\n' << "log_moneyness,implied_vol\n";
    for (const auto& row : rows) {
      if (row.in) {
        os << io::format_double(row.in->log_moneyness) << ',' << io::format_double(row.iv) << '\n';
      } else {
        os << "# error " << row.error << '\n';
      }
    }
  } else {
    json j;
    j["command"] = "iv";
    j["input"] = a.input;
    j["config"] = config_json(a.common.config);
    auto arr = json::array();
    for (const auto& row : rows) {
      json e;
      e["line"] = row.line;
      if (row.in) {
        e["log_moneyness"] = row.in->log_moneyness;
        e["value"] = row.in->value;
        e["value_kind"] = io::to_string(row.in->value_kind);
      }
      if (row.error.empty()) {
        e["implied_vol"] = row.iv;
      } else {
        e["error"] = row.error;
      }
      arr.push_back(std::move(e));
    }
    j["rows"] = std::move(arr);
    j["failed"] = failed;
    os << io::dump_json(j) << '\n';
  }
  emit(a.common, os.str());
  return failed == 0 ? 0 : kExitDomain;
}

// ---- wing-fit ----------------------------------------------------------

struct WingArgs {
  Common common;
  std::string input;
  double x_min = -1000.0;
  double x_max = -100.0;
  std::string method = "min";
};

int cmd_wing_fit(WingArgs& a) {
  resolve(a.common);
  if (!(a.x_min < a.x_max)) throw_domain("wing-fit: --x-min must be below --x-max");
  if (!(a.x_max < 0.0)) throw_domain("wing-fit: the window must lie in the left wing (x < 0)");
  const auto file = io::read_smile(a.input);
  const auto curve = io::to_curve(file, a.input);

  std::vector<double> tail;
  for (double x : curve.grid_x()) {
    if (x >= a.x_min && x <= a.x_max) tail.push_back(x);
  }
  std::string source = "grid";
  if (tail.size() < 2) {
    // No grid support in the window: sample the extrapolated wing.
    tail.clear();
    const int n = 64;
    for (int i = 0; i < n; ++i) tail.push_back(a.x_min + (a.x_max - a.x_min) * i / (n - 1));
    source = "extrapolated";
  }
  const auto method = a.method == "ls" ? wings::EstimateMethod::LeastSquares : wings::EstimateMethod::MinStatistic;
  auto report = wings::estimate_q(curve, tail, method, a.common.config.q_ceiling);

  std::ostringstream os;
  if (csv(a.common)) {
    os << "# command=wing-fit\n# input=" << a.input << "\n# method=" << wings::to_string(report.method)
       << "\n# q_hat=" << io::format_double(report.q_hat) << "\n# no_finite_q=" << (report.no_finite_q ? "true" : "false")
       << "\n# residual=" << io::format_double(report.residual) << '\n';
    for (const auto& n : report.notes) os << "# note=" << n << '\n';
    for (const auto& v : report.bound_violations) os << "# violation=" << io::format_double(v.x) << ' ' << v.description << '\n';
    os << "log_moneyness,statistic\n";
    for (const auto& [x, s] : report.statistic_samples) os << io::format_double(x) << ',' << io::format_double(s) << '\n';
  } else {
    json j;
    j["command"] = "wing-fit";
    j["input"] = a.input;
    j["config"] = config_json(a.common.config);
    j["window"] = {{"x_min", a.x_min}, {"x_max", a.x_max}, {"points", tail.size()}, {"source", source}};
    j["method"] = wings::to_string(report.method);
    j["q_hat"] = report.q_hat;
    j["no_finite_q"] = report.no_finite_q;
    j["residual"] = report.residual;
    j["notes"] = report.notes;
    auto stats = json::array();
    for (const auto& [x, s] : report.statistic_samples) stats.push_back({{"x", x}, {"statistic", s}});
    j["statistics"] = std::move(stats);
    auto viol = json::array();
    for (const auto& v : report.bound_violations) viol.push_back({{"x", v.x}, {"description", v.description}});
    j["bound_violations"] = std::move(viol);
    os << io::dump_json(j) << '\n';
  }
  emit(a.common, os.str());
  return 0;
}

// ---- varswap -----------------------------------------------------------

struct VarswapArgs {
  Common common;
  std::string input;
  std::string method = "both";
};

int cmd_varswap(VarswapArgs& a) {
  resolve(a.common);
  const auto curve = io::to_curve(io::read_smile(a.input), a.input);
  const double tol = a.common.config.tol;
  std::optional<double> strip;
  std::optional<double> gf_value;
  if (a.method != "gf") strip = varswap_strip(curve, tol);
  if (a.method != "strip") gf_value = gf::gf_varswap(gf::build_transform(curve), tol);
  std::ostringstream os;
  if (csv(a.common)) {
    os << "method,value\n";
    if (strip) os << "strip," << io::format_double(*strip) << '\n';
    if (gf_value) os << "gf," << io::format_double(*gf_value) << '\n';
    if (strip && gf_value) os << "discrepancy," << io::format_double(std::abs(*strip - *gf_value)) << '\n';
  } else {
    json j;
    j["command"] = "varswap";
    j["input"] = a.input;
    j["config"] = config_json(a.common.config);
    j["method"] = a.method;
    if (strip) j["strip"] = *strip;
    if (gf_value) j["gf"] = *gf_value;
    if (strip && gf_value) j["discrepancy"] = std::abs(*strip - *gf_value);
    os << io::dump_json(j) << '\n';
  }
  emit(a.common, os.str());
  return 0;
}

// ---- smile-gen ---------------------------------------------------------

struct GenArgs {
  Common common;
  std::string model;
  std::string params;
  std::string x_grid;
  double sigma = 0.2;
  double alpha = 1.5;
  double scale = 0.25;
  double x_sigma = 0.2;
  double y_shape = 3.0;
  double y_scale = 1.0;
};

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  auto bad = [&] { return io::ParseError("--x-grid", 0, "expected lo:hi:n or a comma list, got '" + spec + "'"); };
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    double lo = 0.0;
    double hi = 0.0;
    double n = 0.0;
    if (parts.size() != 3 || !io::parse_double(parts[0], lo) || !io::parse_double(parts[1], hi) ||
        !io::parse_double(parts[2], n) || n < 2.0 || n != std::floor(n)) {
      throw bad();
    }
    const int count = static_cast<int>(n);
    for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
    return out;
  }
  std::stringstream ss(spec);
  std::string p;
  while (std::getline(ss, p, ',')) {
    double v = 0.0;
    if (!io::parse_double(p, v)) throw bad();
    out.push_back(v);
  }
  return out;
}

void apply_params(GenArgs& a) {
  std::stringstream ss(a.params);
  std::string kv;
  while (std::getline(ss, kv, ',')) {
    if (kv.empty()) continue;
    const auto eq = kv.find('=');
    double v = 0.0;
    if (eq == std::string::npos || !io::parse_double(kv.substr(eq + 1), v)) {
      throw io::ParseError("--params", 0, "expected key=value pairs, got '" + kv + "'");
    }
    const std::string key = kv.substr(0, eq);
    if (key == "sigma") {
      a.sigma = v;
    } else if (key == "alpha") {
      a.alpha = v;
    } else if (key == "scale") {
      a.scale = v;
    } else if (key == "x_sigma") {
      a.x_sigma = v;
    } else if (key == "y_shape") {
      a.y_shape = v;
    } else if (key == "y_scale") {
      a.y_scale = v;
    } else {
      throw io::ParseError("--params", 0, "unknown parameter '" + key + "'");
    }
  }
}

int cmd_smile_gen(GenArgs& a) {
  resolve(a.common);
  apply_params(a);
  models::ModelSpec spec;
  if (a.model == "lognormal") {
    spec = models::Lognormal{a.sigma};
  } else if (a.model == "fmls") {
    spec = models::Fmls{a.alpha, a.scale};
  } else {
    spec = models::LogMixture{a.x_sigma, a.y_shape, a.y_scale};
  }
  try {
    models::validate(spec);
  } catch (const Error& e) {
    std::cerr << "smile-gen: " << e.what() << '\n';
    return kExitParse;
  }
  const auto grid = a.x_grid.empty() ? models::default_smile_grid(spec) : parse_grid(a.x_grid);
  std::vector<std::string> warnings;
  const auto curve = models::model_smile(spec, grid, a.common.config.tol, &warnings);
  if (!warnings.empty()) {
    std::cerr << "smile-gen: " << warnings.size() << " grid points dropped; first: " << warnings.front() << '\n';
    if (warnings.size() > 1) std::cerr << "smile-gen: last: " << warnings.back() << '\n';
  }
  io::Metadata meta{{"model", models::model_name(spec)}, {"tol", io::format_double(a.common.config.tol)}};
  if (!warnings.empty()) meta.emplace_back("dropped_points", std::to_string(warnings.size()));
  const auto file = io::from_curve(curve, meta);
  std::ostringstream os;
  io::write_smile(os, file);
  emit(a.common, os.str());
  return 0;
}

// ---- verify ------------------------------------------------------------

struct VerifyArgs {
  Common common;
  std::vector<std::string> only;
  bool timings = false;
};

int cmd_verify(VerifyArgs& a) {
  resolve(a.common);
  verify::Options opts;
  for (const auto& tok : a.only) {
    std::stringstream ss(tok);
    std::string t;
    while (std::getline(ss, t, ',')) {
      if (!t.empty()) opts.only.push_back(t);
    }
  }
  if (a.common.tol_explicit) opts.tol = a.common.config.tol;
  opts.seed = a.common.config.seed;
  std::vector<verify::CheckResult> results;
  for (int id : verify::select(opts.only)) {
    results.push_back(verify::run_check(id, opts));
    std::cerr << verify::summary_line(results.back()) << '\n';
  }
  bool ok = true;
  for (const auto& r : results) ok = ok && r.passed();
  std::ostringstream os;
  if (csv(a.common)) {
    os << "id,name,check_passed,label,value,comparison,limit,margin\n";
    for (const auto& r : results) {
      for (const auto& m : r.measurements) {
        os << r.info.id << ',' << r.info.name << ',' << (r.passed() ? "true" : "false") << ",\"" << m.label << "\","
           << io::format_double(m.value) << ',' << (m.strict ? "<" : "<=") << ',' << io::format_double(m.limit) << ','
           << io::format_double(m.margin()) << '\n';
      }
    }
  } else {
    os << io::dump_json(verify::to_json(results, opts, a.timings)) << '\n';
  }
  emit(a.common, os.str());
  return ok ? 0 : kExitDomain;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-free implied-volatility wings, variance swaps and generalized payoffs"};
  app.name("smilewings");
  app.require_subcommand(1);

  IvArgs iv;
  auto* s_iv = app.add_subcommand("iv", "implied vols for a chain file (log_moneyness,value,value_kind)");
  s_iv->add_option("input", iv.input, "chain CSV")->required();
  add_common(s_iv, iv.common);

  WingArgs wf;
  auto* s_wf = app.add_subcommand("wing-fit", "estimate the log-moment index q from the left wing of a smile file");
  s_wf->add_option("input", wf.input, "smile CSV")->required();
  s_wf->add_option("--x-min", wf.x_min, "deep end of the tail window")->capture_default_str();
  s_wf->add_option("--x-max", wf.x_max, "shallow end of the tail window")->capture_default_str();
  s_wf->add_option("--method", wf.method, "min (minimum statistic) or ls (least squares)")
      ->check(CLI::IsMember({"min", "ls"}))
      ->capture_default_str();
  add_common(s_wf, wf.common);

  VarswapArgs vs;
  auto* s_vs = app.add_subcommand("varswap", "variance swap from a smile file by strip and/or gf integral");
  s_vs->add_option("input", vs.input, "smile CSV")->required();
  s_vs->add_option("--method", vs.method, "strip, gf or both")
      ->check(CLI::IsMember({"strip", "gf", "both"}))
      ->capture_default_str();
  add_common(s_vs, vs.common);

  GenArgs gen;
  auto* s_gen = app.add_subcommand("smile-gen", "write a model smile file");
  s_gen->add_option("--model", gen.model, "lognormal, fmls or mixture")
      ->required()
      ->check(CLI::IsMember({"lognormal", "fmls", "mixture"}));
  s_gen->add_option("--params", gen.params, "comma list of key=value model parameters");
  s_gen->add_option("--x-grid", gen.x_grid, "lo:hi:n or comma list (default: model grid)");
  s_gen->add_option("--sigma", gen.sigma, "lognormal volatility")->capture_default_str();
  s_gen->add_option("--alpha", gen.alpha, "FMLS stability index in (1, 2)")->capture_default_str();
  s_gen->add_option("--scale", gen.scale, "FMLS scale")->capture_default_str();
  s_gen->add_option("--x-sigma", gen.x_sigma, "mixture Gaussian volatility")->capture_default_str();
  s_gen->add_option("--y-shape", gen.y_shape, "mixture inverse-gamma shape")->capture_default_str();
  s_gen->add_option("--y-scale", gen.y_scale, "mixture inverse-gamma scale")->capture_default_str();
  add_common(s_gen, gen.common);

  VerifyArgs ver;
  auto* s_ver = app.add_subcommand("verify", "run the acceptance checks");
  s_ver->add_option("--only", ver.only, "check ids, names or modules (comma separated)");
  s_ver->add_flag("--timings", ver.timings, "include wall-clock runtimes in the JSON");
  add_common(s_ver, ver.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  try {
    if (s_iv->parsed()) return cmd_iv(iv);
    if (s_wf->parsed()) return cmd_wing_fit(wf);
    if (s_vs->parsed()) return cmd_varswap(vs);
    if (s_gen->parsed()) return cmd_smile_gen(gen);
    if (s_ver->parsed()) return cmd_verify(ver);
  } catch (const io::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const io::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  }
  return kExitParse;
}
