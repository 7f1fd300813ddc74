#include "smilewings/wings.hpp"

#include <algorithm>
#include <cmath>

#include "smilewings/blackscholes.hpp"
#include "smilewings/error.hpp"
#include "smilewings/numerics.hpp"

namespace smilewings::wings {

namespace {

using numerics::kInf;

void require_deep(double x, const char* what) {
  if (!(x < -1.0)) throw_domain(std::string(what) + ": requires x < -1");
}

// sqrt(a + b) - sqrt(b) for a, b >= 0 without cancellation.
double root_gap(double a, double b) {
  const double s = std::sqrt(a + b) + std::sqrt(b);
  return s > 0.0 ? a / s : 0.0;
}

}  // namespace

double lee_p_to_beta(double p) {
  if (!(p >= 0.0)) throw_domain("lee_p_to_beta: p must be non-negative");
  if (p == kInf) return 0.0;
  // sqrt(p^2 + p) - p = p / (sqrt(p^2 + p) + p)
  const double gap = p == 0.0 ? 0.0 : p / (std::sqrt(p * p + p) + p);
  return 2.0 - 4.0 * gap;
}

double lee_beta_to_p(double beta) {
  if (!(beta > 0.0 && beta <= 2.0)) throw_domain("lee_beta_to_p: beta must lie in (0, 2]");
  return 1.0 / (2.0 * beta) + beta / 8.0 - 0.5;
}

std::vector<BoundViolation> lee_bound_check(const SmileCurve& smile, double beta, std::span<const double> x_range,
                                            bool no_mass_at_zero) {
  if (!(beta > 2.0 || (beta == 2.0 && no_mass_at_zero))) {
    throw_domain("lee_bound_check: beta must exceed 2, or equal 2 when S_T has no mass at zero");
  }
  std::vector<BoundViolation> out;
  for (double x : x_range) {
    if (!(x < 0.0)) throw_domain("lee_bound_check: x_range must be negative");
    const double iv = smile(x);
    const double bound = std::sqrt(beta * -x);
    if (iv >= bound) {
      out.push_back({x, "I(x)=" + std::to_string(iv) + " >= sqrt(beta|x|)=" + std::to_string(bound)});
    }
  }
  return out;
}

double log_v_q(double log_k, double q) {
  if (!(q > 0.0)) throw_domain("v_q: q must be positive");
  const double log_k_max = q < 1.0 ? q - 1.0 : 0.0;
  if (!(log_k <= log_k_max) || std::isnan(log_k)) throw_domain("v_q: k outside (0, k_max]");
  const double level = std::log(q) + log_k - q;  // log of -z
  if (level > -1.0) throw_domain("v_q: Lambert argument below -1/e");
  double w;
  if (level > -700.0) {
    w = numerics::lambert_w_m1(-std::exp(level));
  } else {
    // w + log(-w) = level, Newton from the two-term asymptotic guess.
    w = level - std::log(-level);
    for (int it = 0; it < 50; ++it) {
      const double g = w + std::log(-w) - level;
      const double step = g / (1.0 + 1.0 / w);
      w -= step;
      if (std::abs(step) <= 1e-16 * std::abs(w)) break;
    }
  }
  return w + q;
}

double v_q(double k, double q) {
  if (!(k > 0.0)) throw_domain("v_q: k must be positive");
  return std::exp(log_v_q(std::log(k), q));
}

PutBound put_upper_bound(double x, double q, double log_moment) {
  if (!(q >= 0.0)) throw_domain("put_upper_bound: q must be non-negative");
  if (!(log_moment >= 0.0)) throw_domain("put_upper_bound: log-moment must be non-negative");
  const double x_max = q < 1.0 ? q - 1.0 : 0.0;
  if (!(x < x_max)) throw_domain("put_upper_bound: x must be below (q - 1) 1{q < 1}");
  PutBound b;
  const double log_m = std::log(log_moment);
  if (q == 0.0) {
    b.log_loose = b.log_tight = x + log_m;
  } else {
    b.log_loose = x - q * std::log(-x) + log_m;
    const double lv = log_v_q(x, q);
    b.log_tight = lv - std::log(q) + (1.0 - q) * std::log(-lv) + log_m;
  }
  b.loose = std::exp(b.log_loose);
  b.tight = std::exp(b.log_tight);
  return b;
}

double iv_wing_bound(double x, double p) {
  require_deep(x, "iv_wing_bound");
  if (!(p >= 0.0)) throw_domain("iv_wing_bound: p must be non-negative");
  return root_gap(-2.0 * x, 2.0 * p * std::log(-x));
}

double log_moment_statistic(double x, const SmileCurve& smile) {
  require_deep(x, "log_moment_statistic");
  const double iv = smile(x);
  if (!(iv > 0.0)) throw Error(ErrorKind::NonPositiveVol, "log_moment_statistic: zero implied volatility");
  return bs::d_minus(x, iv) / std::sqrt(2.0 * std::log(-x));
}

WingExpansion wing_expansion(double x, double q) {
  require_deep(x, "wing_expansion");
  if (!(q >= 0.0)) throw_domain("wing_expansion: q must be non-negative");
  const double lx = std::log(-x);
  const double exact = root_gap(-2.0 * x, 2.0 * q * lx);
  const double r = std::sqrt(-2.0 * x);
  const double series = r - std::sqrt(2.0 * q * lx) + q * lx / r;
  return {exact, series};
}

const char* to_string(EstimateMethod m) noexcept {
  return m == EstimateMethod::MinStatistic ? "min-statistic" : "least-squares";
}

WingReport estimate_q(const SmileCurve& smile, std::span<const double> x_tail, EstimateMethod method,
                      double q_ceiling) {
  if (x_tail.empty()) throw Error(ErrorKind::EmptyTail, "estimate_q: empty tail");
  if (!(q_ceiling > 0.0)) throw_domain("estimate_q: q_ceiling must be positive");
  std::vector<double> xs(x_tail.begin(), x_tail.end());
  for (double x : xs) require_deep(x, "estimate_q");
  std::sort(xs.begin(), xs.end(), std::greater<>());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  WingReport report;
  report.method = method;
  std::vector<double> ivs;
  std::size_t extrapolated = 0;
  for (double x : xs) {
    const double iv = smile(x);
    if (!(iv > 0.0)) throw Error(ErrorKind::NonPositiveVol, "estimate_q: zero implied volatility at x=" + std::to_string(x));
    ivs.push_back(iv);
    report.statistic_samples.emplace_back(x, log_moment_statistic(x, smile));
    if (x < smile.x_min()) ++extrapolated;
  }
  if (extrapolated > 0) {
    report.notes.push_back(std::to_string(extrapolated) + " of " + std::to_string(xs.size()) +
                           " tail points lie in the extrapolated wing");
  }
  report.bound_violations = lee_bound_check(smile, 2.0, xs);

  auto objective = [&](double q) {
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ivs[i] - wing_expansion(xs[i], q).exact_form;
      s += r * r;
    }
    return s;
  };

  double q_hat;
  if (method == EstimateMethod::MinStatistic) {
    double smin = kInf;
    for (const auto& [x, s] : report.statistic_samples) smin = std::min(smin, s);
    q_hat = smin > 0.0 ? smin * smin : 0.0;
  } else {
    // Coarse scan on a geometric grid, then Brent inside the best cell.
    std::vector<double> grid{0.0};
    const int n = 240;
    for (int i = 0; i <= n; ++i) grid.push_back(1e-4 * std::pow(q_ceiling / 1e-4, static_cast<double>(i) / n));
    std::size_t best = 0;
    double best_val = objective(grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double v = objective(grid[i]);
      if (v < best_val) {
        best_val = v;
        best = i;
      }
    }
    if (best + 1 == grid.size()) {
      q_hat = kInf;
    } else {
      const double lo = grid[best == 0 ? 0 : best - 1];
      const double hi = grid[best + 1];
      const auto m = numerics::minimize_scalar(objective, {lo, hi}, 1e-13);
      q_hat = m.value <= best_val ? m.x : grid[best];
    }
  }
  if (q_hat > q_ceiling) {
    report.no_finite_q = true;
    report.notes.push_back("no finite q detected");
    q_hat = q_ceiling;
  }
  report.q_hat = q_hat;
  report.residual = std::sqrt(objective(q_hat) / static_cast<double>(xs.size()));
  return report;
}

}  // namespace smilewings::wings
