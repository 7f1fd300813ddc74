#include "smilewings/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "smilewings/blackscholes.hpp"
#include "smilewings/error.hpp"
#include "smilewings/gf.hpp"
#include "smilewings/io.hpp"
#include "smilewings/models.hpp"
#include "smilewings/numerics.hpp"
#include "smilewings/replication.hpp"
#include "smilewings/wings.hpp"

namespace smilewings::verify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Limits and working tolerances under an optional --tol override.
struct Tolerances {
  std::optional<double> tol;
  double limit(double spec) const { return tol ? std::max(spec, *tol) : spec; }
  double work(double dflt) const { return tol ? std::max(dflt, 1e-2 * *tol) : dflt; }
};

using Out = std::vector<Measurement>;

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return v;
}

models::ModelSpec fmls(double alpha) { return models::Fmls{alpha, 0.25}; }

SmileCurve model_smile(const models::ModelSpec& m, double tol) {
  return models::model_smile(m, models::default_smile_grid(m), tol);
}

void iv_roundtrip(const Tolerances& t, Out& out) {
  double worst = 0.0;
  for (double x : linspace(-10.0, 3.0, 200)) {
    for (double s : linspace(0.01, 3.0, 50)) {
      const double iv = bs::implied_vol(x, bs::put_price(x, s));
      worst = std::max(worst, std::abs(iv - s));
    }
  }
  out.push_back({"max |implied_vol(put_price(x, s)) - s|", worst, t.limit(1e-9)});
}

void flat_varswap(const Tolerances& t, Out& out) {
  for (double s : {0.1, 0.2, 0.5}) {
    const auto smile = SmileCurve::flat(s);
    const std::string tag = "sigma=" + io::format_double(s);
    out.push_back({tag + " |strip - sigma^2|", std::abs(varswap_strip(smile, t.work(1e-10)) - s * s), t.limit(1e-7)});
    const auto ts = gf::build_transform(smile);
    out.push_back({tag + " |gf - sigma^2|", std::abs(gf::gf_varswap(ts, t.work(1e-10)) - s * s), t.limit(1e-7)});
  }
}

void fmls_routes(const Tolerances& t, Out& out) {
  const auto m = fmls(1.5);
  const auto smile = model_smile(m, t.work(1e-10));
  const double gf_value = gf::gf_varswap(gf::build_transform(smile), t.work(1e-10));
  const double strip = log_contract_strip(smile, t.work(1e-10));
  const auto lm = models::log_mean(m, t.work(1e-10));
  if (lm.infinite) throw Error(ErrorKind::DivergentWing, "log mean reported infinite");
  out.push_back({"|gf - 2 strip|", std::abs(gf_value - 2.0 * strip), t.limit(1e-4)});
  out.push_back({"|gf + 2 E[log S]|", std::abs(gf_value + 2.0 * lm.value), t.limit(1e-4)});
  out.push_back({"|2 strip + 2 E[log S]|", std::abs(2.0 * strip + 2.0 * lm.value), t.limit(1e-4)});
}

void put_bound(const Tolerances& t, Out& out) {
  const double alpha = 1.5;
  int violations = 0;
  double worst = -kInf;
  for (const models::ModelSpec& m : {models::ModelSpec{models::Lognormal{0.2}}, fmls(alpha)}) {
    for (double q : {0.5, 1.0, alpha - 0.1}) {
      const auto mom = models::log_moment_oracle(m, q, t.work(1e-10));
      for (double x : {-2.0, -5.0, -10.0, -15.0}) {
        // log(put) - log(e^x |x|^-q E|log S|^q)
        const double lp = models::model_put(x, m, t.work(1e-10)).log_time_value;
        const double gap = lp - (x - q * std::log(-x) + std::log(mom.value));
        worst = std::max(worst, gap);
        if (!(gap <= 0.0)) ++violations;
      }
    }
  }
  out.push_back({"violations", static_cast<double>(violations), 0.0, false});
  out.push_back({"max log(put / bound)", worst, 0.0, false});
}

void wing_bounds(const Tolerances& t, Out& out) {
  std::vector<double> lee;
  for (double x = -15.0; x <= -2.0 + 1e-12; x += 0.5) lee.push_back(x);
  int lee_violations = 0;
  double worst = -kInf;
  for (double alpha : {1.2, 1.5, 1.8}) {
    const auto smile = model_smile(fmls(alpha), t.work(1e-10));
    lee_violations += static_cast<int>(wings::lee_bound_check(smile, 2.0, lee).size());
    for (double x : {-10.0, -15.0}) worst = std::max(worst, smile(x) - wings::iv_wing_bound(x, alpha - 0.5));
  }
  out.push_back({"Lee bound violations", static_cast<double>(lee_violations), 0.0, false});
  out.push_back({"max I(x) - iv_wing_bound(x, alpha - 0.5)", worst, 0.0});
}

void wing_estimator(const Tolerances& t, Out& out) {
  std::vector<double> xs;
  for (int i = 0; i < 60; ++i) xs.push_back(-std::exp(std::log(2000.0) + (std::log(2.0) - std::log(2000.0)) * i / 59.0));
  for (double q : {0.5, 1.5, 3.0}) {
    std::vector<double> iv;
    for (double x : xs) iv.push_back(wings::wing_expansion(x, q).exact_form);
    const SmileCurve smile(xs, iv);
    const auto r = wings::estimate_q(smile, xs);
    out.push_back({"q=" + io::format_double(q) + " |q_hat - q|", std::abs(r.q_hat - q), t.limit(1e-4)});
  }
  int order_violations = 0;
  double prev = -kInf;
  for (double alpha : {1.2, 1.5, 1.8}) {
    const double s = wings::log_moment_statistic(-15.0, model_smile(fmls(alpha), t.work(1e-10)));
    if (!(s > prev)) ++order_violations;
    prev = s;
  }
  out.push_back({"statistic ordering violations", static_cast<double>(order_violations), 0.0, false});
}

void gf_payoffs(const Tolerances& t, Out& out) {
  const double s = 0.2;
  const auto flat = gf::build_transform(SmileCurve::flat(s));
  const double w = t.work(1e-12);
  out.push_back({"flat |c2(x^2) - 0.0404|", std::abs(gf::price_psi_c2(gf::payoffs::square(), flat, w) - 0.0404),
                 t.limit(1e-8)});
  out.push_back({"flat |ac(x) - c2(x)|",
                 std::abs(gf::price_psi_ac(gf::payoffs::linear(), flat, w) - gf::price_psi_c2(gf::payoffs::linear(), flat, w)),
                 t.limit(1e-8)});
  const auto fm = gf::build_transform(model_smile(fmls(1.5), t.work(1e-10)));
  out.push_back({"FMLS |ac(x) - c2(x)|",
                 std::abs(gf::price_psi_ac(gf::payoffs::linear(), fm, w) - gf::price_psi_c2(gf::payoffs::linear(), fm, w)),
                 t.limit(1e-8)});
  // E[(log S + 0.5)^+] with log S ~ N(-s^2/2, s^2), by quadrature in z.
  auto g = [s](double z) { return std::max(s * z - 0.5 * s * s + 0.5, 0.0) * numerics::norm_pdf(z); };
  numerics::QuadratureOptions o;
  o.abs_tol = 1e-13;
  const double kink = (0.5 * s * s - 0.5) / s;
  const double oracle = numerics::integrate(g, kink, kInf, o).value;
  out.push_back({"flat |ac((x + 0.5)^+) - oracle|",
                 std::abs(gf::price_psi_ac(gf::payoffs::log_call(-0.5), flat, t.work(1e-10)) - oracle), t.limit(1e-6)});
}

void deriv_identity(const Tolerances& t, Out& out) {
  const auto smile = model_smile(fmls(1.5), t.work(1e-10));
  auto put_k = [&](double k) {
    const double x = std::log(k);
    return bs::put_price(x, smile(x)).value;
  };
  double worst = 0.0;
  double worst_bound = -kInf;
  for (int i = 0; i < 50; ++i) {
    const double x = -12.0 + 13.0 * (i + 0.37) / 50.0;
    const double k = std::exp(x);
    const double h = 1e-5 * k;
    const double fd = (put_k(k + h) - put_k(k - h)) / (2.0 * h);
    const auto pt = smile.evaluate(x);
    const double identity = numerics::norm_cdf(-pt.delta) + numerics::norm_pdf(pt.delta) * pt.slope;
    worst = std::max(worst, std::abs(fd - identity));
    worst_bound = std::max(worst_bound, -pt.delta * pt.slope);
  }
  out.push_back({"max |dP/dK - (Phi(-d) + phi(d) I')|", worst, t.limit(1e-5)});
  out.push_back({"max f(x) I'(x)", worst_bound, 1.0});
}

void discrete_varswap(const Options& opts, Out& out) {
  const double s = 0.2;
  const std::size_t n = 252;
  const std::size_t paths = 100000;
  const auto ps = models::sample_paths(models::Lognormal{s}, n, paths, opts.seed);
  double mean = 0.0;
  std::vector<double> v;
  v.reserve(ps.size());
  for (const auto& p : ps) {
    v.push_back(discrete_varswap_payoff(p, static_cast<double>(n), static_cast<double>(n)));
    mean += v.back();
  }
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double a : v) ss += (a - mean) * (a - mean);
  const double se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  const double exact = s * s * (1.0 + s * s / (4.0 * static_cast<double>(n)));
  out.push_back({"|mean - s^2 (1 + s^2 / 4n)| / standard error", std::abs(mean - exact) / se, 3.0});
}

void special_functions(const Tolerances& t, Out& out) {
  double worst = numerics::lambert_residual(numerics::lambert_w_m1(-std::exp(-1.0)), -std::exp(-1.0));
  // 1000 log-spaced |z| from just inside e^-1 down to 1e-300.
  const double lo = -1.0 - 1e-12;
  for (int i = 0; i < 1000; ++i) {
    const double lz = lo + (std::log(1e-300) - lo) * i / 999.0;
    const double z = -std::exp(lz);
    worst = std::max(worst, numerics::lambert_residual(numerics::lambert_w_m1(z), z));
  }
  out.push_back({"max Lambert W-1 relative residual", worst, t.limit(1e-12)});

  int mills = 0;
  double prev = kInf;
  double at5 = 0.0;
  for (double z : {5.0, 10.0, 20.0, 38.0}) {
    const double gap = std::abs(z * numerics::norm_cdf(-z) / numerics::norm_pdf(z) - 1.0);
    if (!(gap < prev)) ++mills;
    if (z == 5.0) at5 = gap;
    prev = gap;
  }
  out.push_back({"Mills ratio monotonicity violations", static_cast<double>(mills), 0.0, false});
  out.push_back({"Mills ratio gap at z=5", at5, 0.05});

  int lims = 0;
  double last_gap = 0.0;
  for (double q : {0.5, 1.0, 1.5, 3.0}) {
    double prev_gap = kInf;
    for (double x : {-10.0, -50.0, -200.0}) {
      // (1/q) v |log v|^{1-q} / (k |log k|^{-q}) with k = e^x
      const double lv = wings::log_v_q(x, q);
      const double log_ratio = -std::log(q) + lv + (1.0 - q) * std::log(-lv) - x + q * std::log(-x);
      const double gap = std::abs(std::expm1(log_ratio));
      if (!(gap < prev_gap)) ++lims;
      prev_gap = gap;
    }
    last_gap = std::max(last_gap, prev_gap);
  }
  out.push_back({"limit-ratio monotonicity violations", static_cast<double>(lims), 0.0, false});
  out.push_back({"max |ratio - 1| at k = e^-200", last_gap, 1.0});
}

std::string describe(const Measurement& m) {
  char buf[96];
  std::snprintf(buf, sizeof buf, " = %.3g (%s %g)", m.value, m.strict ? "<" : "<=", m.limit);
  return m.label + buf;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

const std::vector<CheckInfo>& catalog() {
  static const std::vector<CheckInfo> checks{
      {1, "iv-roundtrip", {"blackscholes", "numerics"}, "implied vol inverts the put price on a 200 x 50 grid", 5.0},
      {2, "flat-varswap", {"replication", "gf"}, "strip and gf variance swap equal sigma^2 on flat smiles", 2.0},
      {3, "fmls-routes", {"gf", "replication", "models"}, "gf, strip and density E[log S] agree on FMLS(1.5)", 60.0},
      {4, "put-bound", {"wings", "models"}, "model puts stay below e^x |x|^-q E|log S|^q", kInf},
      {5, "wing-bounds", {"wings", "models"}, "Lee bound and implied-vol wing bound on FMLS smiles", kInf},
      {6, "wing-estimator", {"wings", "models"}, "estimate_q on exact synthetic wings; FMLS statistic ordering", kInf},
      {7, "gf-payoffs", {"gf"}, "generalized payoff routes on flat and FMLS smiles", kInf},
      {8, "deriv-identity", {"gf", "blackscholes"}, "strike derivative identity and f I' < 1 on FMLS", kInf},
      {9, "discrete-varswap", {"replication", "models"}, "discrete variance swap Monte Carlo bias", 30.0},
      {10, "special-functions", {"numerics", "wings"}, "Lambert W-1 residuals, Mills ratio, limit ratio", kInf},
  };
  return checks;
}

std::vector<int> select(const std::vector<std::string>& only) {
  std::vector<int> ids;
  if (only.empty()) {
    for (const auto& c : catalog()) ids.push_back(c.id);
    return ids;
  }
  std::vector<bool> picked(catalog().size() + 1, false);
  for (const auto& raw : only) {
    const std::string tok = lower(raw);
    bool matched = false;
    for (const auto& c : catalog()) {
      bool hit = tok == std::to_string(c.id) || tok == c.name;
      for (const auto& m : c.modules) hit = hit || tok == m;
      if (hit) {
        picked[static_cast<std::size_t>(c.id)] = true;
        matched = true;
      }
    }
    if (!matched) throw_domain("verify: unknown check or module '" + raw + "'");
  }
  for (const auto& c : catalog()) {
    if (picked[static_cast<std::size_t>(c.id)]) ids.push_back(c.id);
  }
  return ids;
}

bool CheckResult::passed() const {
  if (!error.empty() || measurements.empty()) return false;
  if (!(runtime_s < info.runtime_limit_s)) return false;
  for (const auto& m : measurements) {
    if (!m.passed()) return false;
  }
  return true;
}

CheckResult run_check(int id, const Options& options) {
  CheckResult r;
  for (const auto& c : catalog()) {
    if (c.id == id) r.info = c;
  }
  if (r.info.id != id) throw_domain("verify: no check with id " + std::to_string(id));
  const Tolerances t{options.tol};
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (id) {
      case 1: iv_roundtrip(t, r.measurements); break;
      case 2: flat_varswap(t, r.measurements); break;
      case 3: fmls_routes(t, r.measurements); break;
      case 4: put_bound(t, r.measurements); break;
      case 5: wing_bounds(t, r.measurements); break;
      case 6: wing_estimator(t, r.measurements); break;
      case 7: gf_payoffs(t, r.measurements); break;
      case 8: deriv_identity(t, r.measurements); break;
      case 9: discrete_varswap(options, r.measurements); break;
      default: special_functions(t, r.measurements); break;
    }
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<CheckResult> run(const Options& options) {
  std::vector<CheckResult> out;
  for (int id : select(options.only)) out.push_back(run_check(id, options));
  return out;
}

std::string summary_line(const CheckResult& r) {
  std::ostringstream os;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f s", r.runtime_s);
  os << (r.passed() ? "PASS" : "FAIL") << " [" << r.info.id << "] " << r.info.name << "  (" << buf;
  if (std::isfinite(r.info.runtime_limit_s)) {
    std::snprintf(buf, sizeof buf, " < %g s", r.info.runtime_limit_s);
    os << buf;
  }
  os << ")";
  if (!r.error.empty()) {
    os << "  error: " << r.error;
    return os.str();
  }
  for (const auto& m : r.measurements) {
    if (!m.passed()) {
      os << "  " << describe(m);
      return os.str();
    }
  }
  // Tightest tolerance-type measurement, as value/limit.
  double worst = -1.0;
  const Measurement* tight = nullptr;
  for (const auto& m : r.measurements) {
    if (m.limit > 0.0 && m.value / m.limit > worst) {
      worst = m.value / m.limit;
      tight = &m;
    }
  }
  if (!tight && !r.measurements.empty()) tight = &r.measurements.front();
  if (tight) os << "  " << describe(*tight);
  return os.str();
}

nlohmann::ordered_json to_json(const std::vector<CheckResult>& results, const Options& options, bool timings) {
  nlohmann::ordered_json j;
  j["command"] = "verify";
  j["tol_override"] = options.tol ? nlohmann::ordered_json(*options.tol) : nlohmann::ordered_json(nullptr);
  j["seed"] = options.seed;
  std::size_t failed = 0;
  auto checks = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    if (!r.passed()) ++failed;
    nlohmann::ordered_json c;
    c["id"] = r.info.id;
    c["name"] = r.info.name;
    c["summary"] = r.info.summary;
    c["passed"] = r.passed();
    if (std::isfinite(r.info.runtime_limit_s)) {
      c["runtime_limit_s"] = r.info.runtime_limit_s;
      c["within_runtime_limit"] = r.runtime_s < r.info.runtime_limit_s;
    }
    if (timings) c["runtime_s"] = r.runtime_s;
    if (!r.error.empty()) c["error"] = r.error;
    auto ms = nlohmann::ordered_json::array();
    for (const auto& m : r.measurements) {
      nlohmann::ordered_json e;
      e["label"] = m.label;
      e["value"] = m.value;
      e["limit"] = m.limit;
      e["comparison"] = m.strict ? "<" : "<=";
      e["margin"] = m.margin();
      e["passed"] = m.passed();
      ms.push_back(std::move(e));
    }
    c["measurements"] = std::move(ms);
    checks.push_back(std::move(c));
  }
  j["passed"] = failed == 0;
  j["failed"] = failed;
  j["checks"] = std::move(checks);
  return j;
}

}  // namespace smilewings::verify
