#include "smilewings/blackscholes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smilewings/error.hpp"
#include "smilewings/numerics.hpp"
#include "smilewings/smile_curve.hpp"

namespace smilewings {

using numerics::kInf;
using numerics::log1mexp;
using numerics::log_norm_cdf;

NormalizedPutPrice NormalizedPutPrice::from_value(double x, double p) {
  const double intrinsic = bs::put_intrinsic(x);
  if (!(p >= intrinsic)) {
    throw Error(ErrorKind::PriceBelowIntrinsic,
                "put price " + std::to_string(p) + " below intrinsic at x=" + std::to_string(x));
  }
  if (p >= std::exp(x)) {
    throw Error(ErrorKind::PriceAtOrAboveCap,
                "put price " + std::to_string(p) + " at or above cap e^x at x=" + std::to_string(x));
  }
  NormalizedPutPrice out;
  out.value = p;
  const double tv = p - intrinsic;
  out.log_time_value = tv > 0.0 ? std::log(tv) : -kInf;
  return out;
}

namespace bs {

double d_minus(double x, double sigma) {
  if (!(sigma > 0.0)) throw_domain("d_minus: sigma must be positive");
  return -x / sigma - 0.5 * sigma;
}

double put_intrinsic(double x) noexcept { return x > 0.0 ? std::expm1(x) : 0.0; }

double log_otm_price(double x, double sigma) noexcept {
  if (!(sigma > 0.0)) return -kInf;
  if (sigma == kInf) return x > 0.0 ? 0.0 : x;
  const double d = -x / sigma - 0.5 * sigma;
  if (x <= 0.0) {
    // put = e^x Phi(-d) - Phi(-d - sigma)
    const double a = x + log_norm_cdf(-d);
    const double b = log_norm_cdf(-d - sigma);
    if (!(b < a)) return -kInf;
    return a + log1mexp(b - a);
  }
  // call = Phi(d + sigma) - e^x Phi(d)
  const double a = log_norm_cdf(d + sigma);
  const double b = x + log_norm_cdf(d);
  if (!(b < a)) return -kInf;
  return a + log1mexp(b - a);
}

double sigma_from_delta(double x, double delta) noexcept {
  const double root = std::sqrt(delta * delta - 2.0 * x);
  // sqrt(delta^2 - 2x) - delta = -2x / (sqrt(delta^2 - 2x) + delta)
  return delta > 0.0 ? -2.0 * x / (root + delta) : root - delta;
}

double log_scaled_put_from_delta(double x, double delta) noexcept {
  const double root = std::sqrt(delta * delta - 2.0 * x);  // = delta + sigma
  // P e^{-x} = Phi(-delta) - Phi(-root) e^{-x}, and e^{-x} phi(root) = phi(delta).
  const double b = numerics::log_mills_ratio(root) - 0.5 * delta * delta - numerics::kLogSqrt2Pi;
  const double a = log_norm_cdf(-delta);
  const double gap = delta > 0.0 ? numerics::log_mills_ratio(root) - numerics::log_mills_ratio(delta) : b - a;
  if (!(gap < 0.0)) return -kInf;
  return a + log1mexp(gap);
}

double log_otm_price_from_delta(double x, double delta) noexcept {
  const double root = std::sqrt(delta * delta - 2.0 * x);  // = delta + sigma
  if (x <= 0.0) return x + log_scaled_put_from_delta(x, delta);
  const double a = log_norm_cdf(root);
  const double b = x + log_norm_cdf(delta);
  if (!(b < a)) return -kInf;
  return a + log1mexp(b - a);
}

NormalizedPutPrice put_price(double x, double sigma) {
  NormalizedPutPrice out;
  out.log_time_value = log_otm_price(x, sigma);
  out.value = put_intrinsic(x) + std::exp(out.log_time_value);
  return out;
}

double call_price(double x, double sigma) {
  const double tv = std::exp(log_otm_price(x, sigma));
  if (x > 0.0) return tv;
  return tv - std::expm1(x);
}

double vega(double x, double sigma) {
  if (!(sigma > 0.0)) return 0.0;
  return std::exp(x) * numerics::norm_pdf(d_minus(x, sigma));
}

double implied_vol_from_log_otm(double x, double log_otm) {
  if (log_otm == -kInf) return 0.0;
  const double cap = x > 0.0 ? 0.0 : x;  // log of the time-value limit as sigma -> inf
  if (!(log_otm < cap)) {
    throw Error(ErrorKind::PriceAtOrAboveCap, "implied_vol: price at or above cap at x=" + std::to_string(x));
  }
  auto g = [x, log_otm](double s) { return log_otm_price(x, s) - log_otm; };

  double hi = std::max(1.0, 2.0 * std::sqrt(2.0 * std::abs(x)));
  while (g(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e150) throw Error(ErrorKind::PriceAtOrAboveCap, "implied_vol: price not attainable");
  }
  double lo = 0.5 * hi;
  while (!(g(lo) < 0.0)) {
    hi = lo;
    lo *= 0.5;
    if (lo < 1e-300) return 0.0;
  }
  numerics::RootOptions opts;
  opts.x_tol = 1e-300;
  return numerics::find_root(g, {lo, hi}, opts);
}

double implied_vol(double x, const NormalizedPutPrice& p) {
  if (p.value < put_intrinsic(x)) {
    throw Error(ErrorKind::PriceBelowIntrinsic, "implied_vol: price below intrinsic at x=" + std::to_string(x));
  }
  if (p.value >= std::exp(x)) {
    throw Error(ErrorKind::PriceAtOrAboveCap, "implied_vol: price at or above cap at x=" + std::to_string(x));
  }
  return implied_vol_from_log_otm(x, p.log_time_value);
}

double implied_vol(double x, double put_value) {
  return implied_vol(x, NormalizedPutPrice::from_value(x, put_value));
}

double f_transform(double x, const SmileCurve& smile) {
  const double iv = smile(x);
  if (!(iv > 0.0)) throw_domain("f_transform: zero implied volatility");
  return -smile.delta(x);
}

}  // namespace bs
}  // namespace smilewings
