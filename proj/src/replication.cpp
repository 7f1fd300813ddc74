#include "smilewings/replication.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smilewings/error.hpp"
#include "smilewings/numerics.hpp"

namespace smilewings {

namespace {

using numerics::kInf;

// Time value of the option on the out-of-the-money side at x.
double log_otm(const SmileCurve& smile, double x) {
  if (x <= 0.0) return bs::log_otm_price_from_delta(x, smile.delta(x));
  return bs::log_otm_price(x, smile(x));
}

double otm_price(const SmileCurve& smile, double x) { return std::exp(log_otm(smile, x)); }

double put_value(const SmileCurve& smile, double x) { return bs::put_intrinsic(x) + otm_price(smile, x); }

double call_value(const SmileCurve& smile, double x) {
  const double tv = otm_price(smile, x);
  return x > 0.0 ? tv : tv - std::expm1(x);
}

numerics::QuadratureOptions strip_opts(double tol) {
  numerics::QuadratureOptions o;
  o.abs_tol = tol;
  o.rel_tol = 0.0;
  o.max_intervals = 4000;
  return o;
}

// Throws DivergentWing when |x| g(x) does not decay along the left wing.
void check_left_decay(const numerics::RealFunction& g) {
  const double near = 1e6 * std::abs(g(-1e6));
  const double far = 1e12 * std::abs(g(-1e12));
  if (far > 1e-300 && far >= 0.5 * near) {
    throw Error(ErrorKind::DivergentWing, "left-wing integrand does not decay faster than 1/|x|");
  }
}

// Integral of g over (-inf, hi], in u = log(-x) beyond min(hi, -1).
double left_integral(const numerics::RealFunction& g, double hi, const numerics::QuadratureOptions& opts) {
  const double split = std::min(hi, -1.0);
  double total = 0.0;
  if (hi > split) total += numerics::integrate(g, split, hi, opts).value;
  // |x| g(x) decays by the check above.
  total += numerics::integrate_left_log(g, split, opts).value;
  return total;
}

// Integral of g over [lo, hi] with breakpoints at the smile grid ends.
double body_integral(const numerics::RealFunction& g, double lo, double hi, const SmileCurve& smile,
                     const numerics::QuadratureOptions& opts) {
  std::vector<double> pts{lo, hi};
  for (double p : {smile.x_min(), smile.x_max(), 0.0}) {
    if (p > lo && p < hi) pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) total += numerics::integrate(g, pts[k], pts[k + 1], opts).value;
  return total;
}

// Integral of g over [lo, inf).
double right_integral(const numerics::RealFunction& g, double lo, const SmileCurve& smile,
                      const numerics::QuadratureOptions& opts) {
  const double split = std::max(lo, smile.x_max());
  double total = 0.0;
  if (split > lo) total += body_integral(g, lo, split, smile, opts);
  total += numerics::integrate(g, split, kInf, opts).value;
  return total;
}

}  // namespace

void PricePath::validate() const {
  if (times.size() != values.size()) throw_domain("PricePath: times and values differ in length");
  if (times.empty()) throw_domain("PricePath: empty path");
  if (times.front() != 0.0) throw_domain("PricePath: first time must be 0");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) throw_domain("PricePath: values must be positive");
    if (i > 0 && !(times[i] > times[i - 1])) throw_domain("PricePath: times must be strictly increasing");
  }
}

OptionChain::OptionChain(std::vector<ChainPoint> points, ChainSource source)
    : points_(std::move(points)), source_(source) {
  for (std::size_t k = 0; k < points_.size(); ++k) {
    const auto& p = points_[k];
    if (!std::isfinite(p.x)) throw_domain("OptionChain: non-finite log-moneyness");
    if (p.put.value < bs::put_intrinsic(p.x)) {
      throw Error(ErrorKind::PriceBelowIntrinsic, "OptionChain: put below intrinsic at x=" + std::to_string(p.x));
    }
    if (p.put.value >= std::exp(p.x)) {
      throw Error(ErrorKind::PriceAtOrAboveCap, "OptionChain: put at or above cap at x=" + std::to_string(p.x));
    }
    if (k > 0) {
      if (!(p.x > points_[k - 1].x)) throw_domain("OptionChain: log-moneyness must be strictly increasing");
      if (p.put.value < points_[k - 1].put.value) throw_domain("OptionChain: put values must be nondecreasing");
    }
  }
}

double replicate_convex(const ConvexPayoff& payoff, const SmileCurve& smile, double tol) {
  if (!(payoff.pivot_x0 > 0.0)) throw_domain("replicate_convex: pivot must be positive");
  if (!payoff.f || !payoff.f_prime || !payoff.second_derivative_density) {
    throw_domain("replicate_convex: payoff functions missing");
  }
  const double x0 = payoff.pivot_x0;
  const double log_x0 = std::log(x0);
  const auto& mu = payoff.second_derivative_density;
  // mu(k) k^2 as a function of x = log k.
  auto w2 = [&](double x) {
    if (payoff.scaled_density) return payoff.scaled_density(x);
    const double k = std::exp(x);
    const double w = mu(k) * k * k;
    return std::isfinite(w) ? w : 0.0;
  };
  auto puts = [&](double x) {
    if (x <= 0.0) {
      // P(k) mu(k) k = (P / k) mu(k) k^2.
      const double w = w2(x);
      return w == 0.0 ? 0.0 : std::exp(bs::log_scaled_put_from_delta(x, smile.delta(x))) * w;
    }
    const double k = std::exp(x);
    const double w = mu(k) * k;
    return w == 0.0 ? 0.0 : put_value(smile, x) * w;
  };
  auto calls = [&](double x) {
    const double k = std::exp(x);
    const double w = mu(k) * k;
    return w == 0.0 ? 0.0 : call_value(smile, x) * w;
  };
  const auto opts = strip_opts(0.25 * tol);
  check_left_decay(puts);
  const double left = left_integral(puts, std::min(log_x0, smile.x_min()), opts) +
                      (log_x0 > smile.x_min() ? body_integral(puts, smile.x_min(), log_x0, smile, opts) : 0.0);
  const double right = right_integral(calls, log_x0, smile, opts);
  return payoff.f(x0) + payoff.f_prime(x0) * (1.0 - x0) + left + right;
}

double log_contract_strip(const SmileCurve& smile, double tol) {
  auto g = [&smile](double x) {
    if (x <= 0.0) return std::exp(bs::log_scaled_put_from_delta(x, smile.delta(x)));
    return std::exp(log_otm(smile, x) - x);
  };
  check_left_decay(g);
  const auto opts = strip_opts(0.25 * tol);
  const double x_lo = std::min(smile.x_min(), 0.0);
  double total = left_integral(g, x_lo, opts);
  if (x_lo < 0.0) total += body_integral(g, x_lo, 0.0, smile, opts);
  total += right_integral(g, 0.0, smile, opts);
  return total;
}

double varswap_strip(const SmileCurve& smile, double tol) { return 2.0 * log_contract_strip(smile, 0.5 * tol); }

double discrete_varswap_payoff(const PricePath& path, double annualization, double horizon_T) {
  path.validate();
  if (path.values.size() < 2) throw_domain("discrete_varswap_payoff: need at least two observations");
  if (!(horizon_T > 0.0)) throw_domain("discrete_varswap_payoff: horizon must be positive");
  if (!(annualization > 0.0)) throw_domain("discrete_varswap_payoff: annualization must be positive");
  double sum = 0.0;
  for (std::size_t i = 1; i < path.values.size(); ++i) {
    const double r = std::log(path.values[i] / path.values[i - 1]);
    sum += r * r;
  }
  return annualization / horizon_T * sum;
}

}  // namespace smilewings
