#include "smilewings/gf.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>
#include <variant>

#include "smilewings/error.hpp"
#include "smilewings/numerics.hpp"

namespace smilewings::gf {

namespace {

using numerics::kInf;

constexpr double kFarLeft = -1e300;
// phi(z) is about 1e-306 here; further out every integrand is zero in doubles.
constexpr double kZFloor = -37.5;

numerics::QuadratureOptions opts_for(double tol) {
  numerics::QuadratureOptions o;
  o.abs_tol = tol;
  o.rel_tol = 0.0;
  o.max_intervals = 4000;
  return o;
}

// Sorted, deduplicated breakpoints strictly inside (lo, hi).
std::vector<double> cut_points(double lo, double hi, std::vector<double> pts) {
  std::vector<double> out{lo};
  std::sort(pts.begin(), pts.end());
  for (double p : pts) {
    if (p > lo && p < hi && std::isfinite(p) && p > out.back()) out.push_back(p);
  }
  out.push_back(hi);
  return out;
}

double integrate_pieces(const numerics::RealFunction& g, const std::vector<double>& pts, double tol) {
  const auto o = opts_for(tol / static_cast<double>(pts.size()));
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) total += numerics::integrate(g, pts[k], pts[k + 1], o).value;
  return total;
}

// Integral over z of fn(f^{-1}(z), z) phi(z) from the lowest resolvable z to +inf.
double f_side_integral(const TransformedSmile& ts, const std::function<double(double, double)>& fn,
                       const std::vector<double>& x_breaks, double tol) {
  const double z_lo = std::max(ts.f_floor(), kZFloor);
  auto g = [&](double z) {
    const double phi = numerics::norm_pdf(z);
    if (phi == 0.0) return 0.0;
    return fn(ts.f_inv(z), z) * phi;
  };
  // Crude bound on the part below z_lo, which is not integrated.
  const double rem = std::abs(fn(ts.f_inv(z_lo), z_lo)) * numerics::norm_cdf(z_lo);
  if (!(rem <= 0.1 * tol)) {
    throw ConvergenceError(ErrorKind::ToleranceNotReached,
                           "left tail below the representable range is not negligible", 0.0, rem);
  }
  std::vector<double> zs{0.0};
  for (double x : x_breaks) zs.push_back(ts.f_of(x));
  const double z_hi = std::max(ts.f_of(ts.smile().x_max()), std::max(z_lo, 0.0)) + 1.0;
  auto pts = cut_points(z_lo, z_hi, zs);
  const double body = integrate_pieces(g, pts, 0.45 * tol);
  const double tail = numerics::integrate(g, z_hi, kInf, opts_for(0.45 * tol)).value;
  return body + tail;
}

void check_growth(const PayoffSpec& payoff, const TransformedSmile& ts, std::vector<std::string>* notes) {
  const double p = payoff.growth_order_q;
  if (!(p >= 0.0)) throw_domain("payoff growth order must be non-negative");
  if (!payoff.psi || !payoff.psi_prime) throw_domain("payoff functions missing");
  const auto certified = ts.smile().certified_q();
  if (certified) {
    if (p > *certified) {
      throw Error(ErrorKind::GrowthViolation, "payoff growth order " + std::to_string(p) +
                                                  " exceeds the log-moment index " + std::to_string(*certified));
    }
    if (p == *certified && notes) {
      notes->push_back("payoff growth order equals the log-moment index; the price may be infinite");
    }
  } else if (p > ts.wing_q() && notes) {
    notes->push_back("GrowthViolation (advisory): payoff growth order " + std::to_string(p) +
                     " exceeds the wing order " + std::to_string(ts.wing_q()));
  }
}

}  // namespace

namespace payoffs {

PayoffSpec linear() {
  PayoffSpec p;
  p.psi = [](double x) { return x; };
  p.psi_prime = [](double) { return 1.0; };
  p.psi_double_prime = [](double) { return 0.0; };
  p.growth_order_q = 1.0;
  return p;
}

PayoffSpec square() {
  PayoffSpec p;
  p.psi = [](double x) { return x * x; };
  p.psi_prime = [](double x) { return 2.0 * x; };
  p.psi_double_prime = [](double) { return 2.0; };
  p.growth_order_q = 2.0;
  return p;
}

PayoffSpec log_call(double strike) {
  PayoffSpec p;
  p.psi = [strike](double x) { return std::max(x - strike, 0.0); };
  p.psi_prime = [strike](double x) { return x > strike ? 1.0 : 0.0; };
  p.growth_order_q = 0.0;
  p.kinks = {strike};
  p.smoothness = Smoothness::AbsolutelyContinuous;
  return p;
}

}  // namespace payoffs

double TransformedSmile::f_of(double x) const { return -smile_.delta(x); }

double TransformedSmile::g_of(double x) const {
  const auto pt = smile_.evaluate(x);
  return -pt.delta - pt.iv;
}

double TransformedSmile::wing_q() const {
  if (const auto c = smile_.certified_q()) return *c;
  return std::visit(
      [](const auto& w) -> double {
        using W = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<W, ClampWing>) {
          return kInf;
        } else {
          return w.q;
        }
      },
      smile_.left_wing());
}

double TransformedSmile::invert(const std::vector<double>& values, double z, bool use_f) const {
  if (std::isnan(z)) throw_domain("TransformedSmile: NaN argument");
  if (z < values.front()) return -kInf;
  if (z >= values.back()) {
    // Flat right wing: f = x / s + s / 2, f - I = x / s - s / 2.
    const double s = smile_(smile_.x_max());
    const double x = use_f ? s * z - 0.5 * s * s : s * z + 0.5 * s * s;
    return std::max(x, smile_.x_max());
  }
  const auto it = std::upper_bound(values.begin(), values.end(), z);
  const std::size_t i = static_cast<std::size_t>(it - values.begin()) - 1;
  if (values[i] == z) return x_[i];
  auto r = [&](double x) { return (use_f ? f_of(x) : g_of(x)) - z; };
  numerics::RootOptions o;
  o.x_tol = tol_ * std::max(1.0, std::abs(x_[i]));
  return numerics::find_root(r, {x_[i], x_[i + 1]}, o);
}

double TransformedSmile::f_inv(double z) const { return invert(f_, z, true); }

double TransformedSmile::h_inv(double z) const { return invert(g_, z, false); }

TransformedSmile build_transform(const SmileCurve& smile, double tol) {
  if (!(tol > 0.0)) throw_domain("build_transform: tol must be positive");
  TransformedSmile ts(smile);
  ts.tol_ = std::min(tol, 1e-12);
  const auto grid = smile.grid_x();

  std::vector<double> xs;
  const double start = std::min(smile.x_min(), -1.0);
  for (int k = 1;; ++k) {
    const double x = start * std::pow(10.0, k / 20.0);
    if (x < kFarLeft) break;
    xs.push_back(x);
  }
  xs.push_back(kFarLeft);
  std::reverse(xs.begin(), xs.end());
  for (double x = start; x < smile.x_min(); x += 0.05) xs.push_back(x);
  const int sub = 8;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    for (int j = 0; j < sub; ++j) xs.push_back(grid[i] + (grid[i + 1] - grid[i]) * j / sub);
  }
  xs.push_back(grid.back());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  ts.x_ = xs;
  ts.f_.reserve(xs.size());
  ts.g_.reserve(xs.size());
  for (double x : xs) {
    const auto pt = smile.evaluate(x);
    if (!(pt.iv > 0.0)) {
      throw Error(ErrorKind::NonPositiveVol, "build_transform: zero implied volatility at x=" + std::to_string(x));
    }
    ts.f_.push_back(-pt.delta);
    ts.g_.push_back(-pt.delta - pt.iv);
  }

  // Reports the smile grid interval (or wing sample interval) holding a reversal.
  auto enclosing = [&](std::size_t i, const char* what) {
    double a = xs[i];
    double b = xs[i + 1];
    if (a >= smile.x_min()) {
      const auto it = std::upper_bound(grid.begin(), grid.end(), a);
      const std::size_t j = std::min(static_cast<std::size_t>(it - grid.begin()), grid.size() - 1);
      a = grid[j - 1];
      b = grid[j];
    }
    throw NotMonotoneError(a, b,
                           std::string(what) + " fails to increase on [" + std::to_string(a) + ", " +
                               std::to_string(b) + "]");
  };
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (!(ts.f_[i + 1] > ts.f_[i])) enclosing(i, "f = -d(x, I(x))");
  }
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (!(ts.g_[i + 1] > ts.g_[i])) enclosing(i, "f - I");
  }
  return ts;
}

double gf_varswap(const TransformedSmile& ts, double tol) {
  if (!(tol > 0.0)) throw_domain("gf_varswap: tol must be positive");
  if (ts.wing_q() < 1.0) throw Error(ErrorKind::DivergentWing, "gf_varswap: left wing too heavy for a finite log contract");
  auto fn = [&ts](double x, double) {
    const double iv = ts.smile()(x);
    return iv * iv;
  };
  return f_side_integral(ts, fn, {ts.smile().x_min(), ts.smile().x_max()}, tol);
}

double price_psi_c2(const PayoffSpec& payoff, const TransformedSmile& ts, double tol,
                    std::vector<std::string>* notes) {
  if (!(tol > 0.0)) throw_domain("price_psi_c2: tol must be positive");
  if (!payoff.psi_double_prime) throw_domain("price_psi_c2: second derivative missing");
  check_growth(payoff, ts, notes);
  const auto& smile = ts.smile();

  // x + I^2 / 2 = -d I, and d = -z on the f-side.
  auto fn = [&](double x, double z) { return payoff.psi(x) - payoff.psi_prime(x) * z * smile(x); };
  std::vector<double> breaks{smile.x_min(), smile.x_max()};
  breaks.insert(breaks.end(), payoff.kinks.begin(), payoff.kinks.end());
  const double first = f_side_integral(ts, fn, breaks, 0.5 * tol);

  auto second_x = [&](double x) {
    const double w = payoff.psi_double_prime(x);
    if (w == 0.0) return 0.0;
    const auto pt = smile.evaluate(x);
    return w * pt.iv * numerics::norm_pdf(pt.delta);
  };
  const double split = std::min(smile.x_min(), -1.0);
  const double right_end = smile.x_max() + 1.0;
  std::vector<double> xb{smile.x_min(), smile.x_max(), 0.0};
  xb.insert(xb.end(), payoff.kinks.begin(), payoff.kinks.end());
  const double t = 0.1 * tol;
  double second = numerics::integrate_left_log(second_x, split, opts_for(t)).value;
  second += integrate_pieces(second_x, cut_points(split, right_end, xb), t);
  second += numerics::integrate(second_x, right_end, kInf, opts_for(t)).value;
  return first + second;
}

double price_psi_ac(const PayoffSpec& payoff, const TransformedSmile& ts, double tol,
                    std::vector<std::string>* notes) {
  if (!(tol > 0.0)) throw_domain("price_psi_ac: tol must be positive");
  check_growth(payoff, ts, notes);
  const auto& smile = ts.smile();

  auto fn = [&](double x, double) { return payoff.psi(x) - payoff.psi_prime(x); };
  std::vector<double> breaks{smile.x_min(), smile.x_max()};
  breaks.insert(breaks.end(), payoff.kinks.begin(), payoff.kinks.end());
  const double first = f_side_integral(ts, fn, breaks, 0.5 * tol);

  // psi'(h) e^{-h} phi(z) = psi'(h) phi(d(h)) with h = h(z); the tail in z is
  // algebraic, so the range is the whole line.
  auto second_z = [&](double z) {
    const double x = ts.h_inv(z);
    if (!std::isfinite(x)) return 0.0;
    const double w = payoff.psi_prime(x);
    if (w == 0.0) return 0.0;
    return w * numerics::norm_pdf(smile.delta(x));
  };
  std::vector<double> zb{0.0};
  for (double x : breaks) zb.push_back(ts.g_of(x));
  const double z_lo = ts.g_of(smile.x_min()) - 1.0;
  const double z_hi = std::max(ts.g_of(smile.x_max()), z_lo + 1.0) + 1.0;
  const double t = 0.1 * tol;
  double second = numerics::integrate(second_z, -kInf, z_lo, opts_for(t)).value;
  second += integrate_pieces(second_z, cut_points(z_lo, z_hi, zb), t);
  second += numerics::integrate(second_z, z_hi, kInf, opts_for(t)).value;
  return first + second;
}

}  // namespace smilewings::gf
