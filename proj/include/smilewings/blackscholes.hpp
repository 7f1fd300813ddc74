#pragma once

namespace smilewings {

class SmileCurve;

/// Normalized put price E[(e^x - S_T)^+] together with the log of its time
/// value (price minus intrinsic). The log form keeps deep-wing quotes exact
/// where the price itself rounds to zero or to intrinsic.
struct NormalizedPutPrice {
  double value = 0.0;
  double log_time_value = -1.0 / 0.0;

  /// Validates (e^x - 1)^+ <= p < e^x. Throws PriceBelowIntrinsic or
  /// PriceAtOrAboveCap.
  static NormalizedPutPrice from_value(double x, double p);
};

namespace bs {

/// d(x, sigma) = -x / sigma - sigma / 2. Throws Domain for sigma <= 0.
double d_minus(double x, double sigma);

/// (e^x - 1)^+
double put_intrinsic(double x) noexcept;

/// log of the out-of-the-money option price (put for x <= 0, call for x > 0),
/// which is the time value of both the put and the call. -inf at sigma = 0.
double log_otm_price(double x, double sigma) noexcept;

/// Same quantity parametrized by delta = d(x, sigma), for x <= 0 only: there
/// every real delta corresponds to sigma = sqrt(delta^2 - 2x) - delta > 0.
/// For x > 0 the map sigma -> delta is not one-to-one.
double log_otm_price_from_delta(double x, double delta) noexcept;

/// log(P e^{-x}) of the put for x <= 0 in the delta parametrization, computed
/// through Mills ratios so that it stays exact for |x| up to 1e300.
double log_scaled_put_from_delta(double x, double delta) noexcept;

/// sigma = sqrt(delta^2 - 2x) - delta, written to avoid cancellation.
double sigma_from_delta(double x, double delta) noexcept;

NormalizedPutPrice put_price(double x, double sigma);
double call_price(double x, double sigma);

/// Vega of the normalized put, e^x phi(d).
double vega(double x, double sigma);

/// Unique sigma >= 0 with put_price(x, sigma) = p.
double implied_vol(double x, const NormalizedPutPrice& p);
double implied_vol(double x, double put_value);

/// Volatility that reproduces a given log time value (log OTM price).
double implied_vol_from_log_otm(double x, double log_otm);

/// f(x) = -d(x, I(x)) = x / I(x) + I(x) / 2 for the smile's value at x.
double f_transform(double x, const SmileCurve& smile);

}  // namespace bs
}  // namespace smilewings
