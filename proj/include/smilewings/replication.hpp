#pragma once

#include <functional>
#include <vector>

#include "smilewings/blackscholes.hpp"
#include "smilewings/smile_curve.hpp"

namespace smilewings {

/// Price path on 0 = t0 < t1 < ... with strictly positive values.
struct PricePath {
  std::vector<double> times;
  std::vector<double> values;

  /// Throws DomainError when the invariants do not hold.
  void validate() const;
};

/// Convex payoff f of the terminal price with f'' absolutely continuous.
struct ConvexPayoff {
  std::function<double(double)> f;
  std::function<double(double)> f_prime;
  std::function<double(double)> second_derivative_density;
  /// Optional x -> mu(e^x) e^{2x}. Lets the left wing run past the range
  /// where e^x and mu(e^x) are representable; without it the strip stops
  /// where mu(k) k^2 overflows or k underflows.
  std::function<double(double)> scaled_density;
  double pivot_x0 = 1.0;
};

enum class ChainSource { Observed, ModelGenerated };

struct ChainPoint {
  double x;
  NormalizedPutPrice put;
};

/// Put quotes on a strictly increasing log-moneyness grid.
class OptionChain {
 public:
  OptionChain(std::vector<ChainPoint> points, ChainSource source = ChainSource::Observed);

  const std::vector<ChainPoint>& points() const { return points_; }
  ChainSource source() const { return source_; }

 private:
  std::vector<ChainPoint> points_;
  ChainSource source_;
};

/// Static replication price f(x0) + f'(x0)(1 - x0) + puts below x0 + calls
/// above x0, weighted by f''.
double replicate_convex(const ConvexPayoff& payoff, const SmileCurve& smile, double tol);

/// E[-log S_T] from the put/call strip weighted by K^-2.
double log_contract_strip(const SmileCurve& smile, double tol);

/// Twice the log-contract strip.
double varswap_strip(const SmileCurve& smile, double tol);

/// (annualization / horizon_T) * sum of squared log-returns.
double discrete_varswap_payoff(const PricePath& path, double annualization = 252.0, double horizon_T = 1.0);

}  // namespace smilewings
