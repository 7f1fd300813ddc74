#pragma once

#include <functional>
#include <string>
#include <vector>

#include "smilewings/smile_curve.hpp"

namespace smilewings::gf {

enum class Smoothness { TwiceDifferentiable, AbsolutelyContinuous };

/// Payoff Psi of the log-price with at most polynomial growth of order
/// growth_order_q at -inf.
struct PayoffSpec {
  std::function<double(double)> psi;
  std::function<double(double)> psi_prime;
  std::function<double(double)> psi_double_prime;  // empty for the absolutely continuous route
  double growth_order_q = 0.0;
  std::vector<double> kinks;  // points where psi_prime jumps or bends
  Smoothness smoothness = Smoothness::TwiceDifferentiable;
};

namespace payoffs {
PayoffSpec linear();                 // Psi(x) = x
PayoffSpec square();                 // Psi(x) = x^2
PayoffSpec log_call(double strike);  // Psi(x) = (x - strike)^+
}  // namespace payoffs

/// Smile together with f(x) = -d(x, I(x)), its inverse, and the inverse h of
/// x -> f(x) - I(x). Both maps are increasing for arbitrage-free smiles.
/// Immutable; the lookup tables are built eagerly.
class TransformedSmile {
 public:
  const SmileCurve& smile() const { return smile_; }

  double f_of(double x) const;
  double g_of(double x) const;  // f(x) - I(x)

  /// x with f(x) = z; -inf below the range representable in doubles.
  double f_inv(double z) const;
  /// x with f(x) - I(x) = z; -inf below the representable range.
  double h_inv(double z) const;

  /// f at the most negative tabulated x (about -1e300).
  double f_floor() const { return f_.front(); }
  double g_floor() const { return g_.front(); }

  /// Left-wing decay order of the smile (certified if known, else the wing
  /// extrapolation's order, +inf for a clamped wing).
  double wing_q() const;

 private:
  friend TransformedSmile build_transform(const SmileCurve& smile, double tol);
  explicit TransformedSmile(SmileCurve smile) : smile_(std::move(smile)) {}

  double invert(const std::vector<double>& values, double z, bool use_f) const;

  SmileCurve smile_;
  std::vector<double> x_;
  std::vector<double> f_;
  std::vector<double> g_;
  double tol_ = 1e-12;
};

/// Checks monotonicity of f (and of f - I) on a dense grid and builds the
/// inverse tables. Throws NotMonotoneError with the offending grid interval.
TransformedSmile build_transform(const SmileCurve& smile, double tol = 1e-12);

/// -2 E[log S_T] = integral of I(f^{-1}(z))^2 phi(z) dz.
double gf_varswap(const TransformedSmile& ts, double tol = 1e-10);

/// Twice-differentiable route. `notes` collects advisory messages.
double price_psi_c2(const PayoffSpec& payoff, const TransformedSmile& ts, double tol = 1e-10,
                    std::vector<std::string>* notes = nullptr);

/// Absolutely-continuous route.
double price_psi_ac(const PayoffSpec& payoff, const TransformedSmile& ts, double tol = 1e-10,
                    std::vector<std::string>* notes = nullptr);

}  // namespace smilewings::gf
