#include "smilewings/smile_curve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smilewings/blackscholes.hpp"
#include "smilewings/error.hpp"
#include "smilewings/numerics.hpp"

namespace smilewings {

namespace {

double sign(double v) { return (v > 0.0) - (v < 0.0); }

// Fritsch-Butland (PCHIP) slopes: monotone on monotone data, zero at extrema.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> h(n - 1);
  std::vector<double> secant(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x[k + 1] - x[k];
    secant[k] = (y[k + 1] - y[k]) / h[k];
  }
  std::vector<double> d(n, 0.0);
  if (n == 2) {
    d[0] = d[1] = secant[0];
    return d;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (secant[k - 1] * secant[k] <= 0.0) continue;
    const double w1 = 2.0 * h[k] + h[k - 1];
    const double w2 = h[k] + 2.0 * h[k - 1];
    d[k] = (w1 + w2) / (w1 / secant[k - 1] + w2 / secant[k]);
  }
  auto endpoint = [](double h0, double h1, double s0, double s1) {
    double v = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if (sign(v) != sign(s0)) return 0.0;
    if (sign(s0) != sign(s1) && std::abs(v) > 3.0 * std::abs(s0)) return 3.0 * s0;
    return v;
  };
  d[0] = endpoint(h[0], h[1], secant[0], secant[1]);
  d[n - 1] = endpoint(h[n - 2], h[n - 3], secant[n - 2], secant[n - 3]);
  return d;
}

double delta_of(double x, double iv) { return -x / iv - 0.5 * iv; }

}  // namespace

SmileCurve::SmileCurve(std::vector<double> x, std::vector<double> iv, Interpolation interpolation,
                       LeftWing left_wing)
    : x_(std::move(x)), iv_(std::move(iv)), interpolation_(interpolation), left_wing_(left_wing) {
  if (x_.size() != iv_.size()) throw_domain("SmileCurve: grid and vol sizes differ");
  if (x_.size() < 2) throw_domain("SmileCurve: at least two grid points required");
  for (std::size_t k = 0; k < x_.size(); ++k) {
    if (!std::isfinite(x_[k])) throw_domain("SmileCurve: non-finite log-moneyness");
    if (!(iv_[k] > 0.0) || !std::isfinite(iv_[k])) {
      throw Error(ErrorKind::NonPositiveVol, "SmileCurve: implied vol must be positive at x=" + std::to_string(x_[k]));
    }
    if (k > 0 && !(x_[k] > x_[k - 1])) throw_domain("SmileCurve: grid must be strictly increasing");
  }
  if (interpolation_ == Interpolation::MonotoneCubic) slopes_ = pchip_slopes(x_, iv_);

  const double x0 = x_.front();
  const double iv0 = iv_.front();
  if (const auto* w = std::get_if<CorollaryWing>(&left_wing_)) {
    if (!(w->q >= 0.0)) throw_domain("SmileCurve: wing q must be non-negative");
    if (!(x0 < -1.0)) throw_domain("SmileCurve: corollary wing needs a grid starting below -1");
    const double d0 = delta_of(x0, iv0);
    if (!(d0 > 0.0)) throw_domain("SmileCurve: boundary point violates d(x, I(x)) > 0");
    anchor_delta_sq_shift_ = d0 * d0 - 2.0 * w->q * std::log(-x0);
  } else if (const auto* p = std::get_if<PowerTailWing>(&left_wing_)) {
    if (!(p->q >= 0.0)) throw_domain("SmileCurve: wing q must be non-negative");
    if (!(x0 < 0.0)) throw_domain("SmileCurve: power-tail wing needs a grid starting below 0");
    anchor_log_put_ = bs::log_otm_price(x0, iv0);
  }
}

SmileCurve SmileCurve::flat(double sigma) {
  return SmileCurve({-1.0, 0.0, 1.0}, {sigma, sigma, sigma}, Interpolation::MonotoneCubic);
}

SmilePoint SmileCurve::evaluate(double x) const {
  if (std::isnan(x)) throw_domain("SmileCurve: NaN log-moneyness");
  if (x < x_.front()) return left_extrapolation(x);
  if (x >= x_.back()) return {iv_.back(), 0.0, delta_of(x, iv_.back())};
  return interior(x);
}

SmilePoint SmileCurve::interior(double x) const {
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double h = x_[k + 1] - x_[k];
  const double t = (x - x_[k]) / h;
  double iv;
  double slope;
  if (interpolation_ == Interpolation::Linear) {
    slope = (iv_[k + 1] - iv_[k]) / h;
    iv = iv_[k] + slope * (x - x_[k]);
  } else {
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    iv = h00 * iv_[k] + h10 * h * slopes_[k] + h01 * iv_[k + 1] + h11 * h * slopes_[k + 1];
    const double dh00 = (6.0 * t2 - 6.0 * t) / h;
    const double dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    const double dh01 = (-6.0 * t2 + 6.0 * t) / h;
    const double dh11 = 3.0 * t2 - 2.0 * t;
    slope = dh00 * iv_[k] + dh10 * slopes_[k] + dh01 * iv_[k + 1] + dh11 * slopes_[k + 1];
  }
  return {iv, slope, delta_of(x, iv)};
}

SmilePoint SmileCurve::left_extrapolation(double x) const {
  if (std::holds_alternative<ClampWing>(left_wing_)) {
    return {iv_.front(), 0.0, delta_of(x, iv_.front())};
  }
  if (const auto* w = std::get_if<CorollaryWing>(&left_wing_)) {
    const double delta_sq = 2.0 * w->q * std::log(-x) + anchor_delta_sq_shift_;
    const double delta = std::sqrt(delta_sq);
    const double root = std::sqrt(delta_sq - 2.0 * x);
    const double ddelta = w->q / (x * delta);
    const double slope = (delta * ddelta - 1.0) / root - ddelta;
    return {bs::sigma_from_delta(x, delta), slope, delta};
  }
  const double q = std::get<PowerTailWing>(left_wing_).q;
  const double x0 = x_.front();
  // Target for log(P e^{-x}).
  const double target = anchor_log_put_ - x0 - q * std::log(x / x0);
  auto h = [x, target](double d) { return bs::log_scaled_put_from_delta(x, d) - target; };
  const double guess = std::sqrt(std::max(0.0, -2.0 * target));
  double lo = guess - 1.0;
  double hi = guess + 1.0;
  while (h(lo) < 0.0) lo -= 2.0 * (hi - lo);
  while (h(hi) > 0.0) hi += 2.0 * (hi - lo);
  numerics::RootOptions opts;
  opts.x_tol = 1e-300;
  const double delta = numerics::find_root(h, {lo, hi}, opts);
  const double root = std::sqrt(delta * delta - 2.0 * x);
  // I'(x) = [P (1 + q/|x|) - e^x Phi(-delta)] / (e^x phi(delta)), expanded so
  // that the two Phi(-delta) terms cancel analytically; the remaining
  // Phi(-root) e^{-x} / phi(delta) is the Mills ratio at root.
  const double log_pdf = -0.5 * delta * delta - numerics::kLogSqrt2Pi;
  const double t_put = std::exp(target + std::log(q / -x) - log_pdf);
  const double t_far = std::exp(numerics::log_mills_ratio(root));
  const double slope = (q > 0.0 ? t_put : 0.0) - t_far;
  return {bs::sigma_from_delta(x, delta), slope, delta};
}

}  // namespace smilewings
