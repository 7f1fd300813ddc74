#pragma once

#include <cstddef>
#include <functional>
#include <limits>

namespace smilewings::numerics {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
inline constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;

/// Standard Gaussian CDF. Total on the extended reals.
double norm_cdf(double z) noexcept;

/// log Phi(z), accurate far into the lower tail where Phi(z) underflows.
double log_norm_cdf(double z) noexcept;

/// log(Phi(-z) / phi(z)), free of the z^2 / 2 cancellation for large z.
double log_mills_ratio(double z) noexcept;

/// Standard Gaussian density.
double norm_pdf(double z) noexcept;

/// Lower real branch W_{-1} of the Lambert W function on [-1/e, 0).
/// Throws Error(Domain) outside that interval.
double lambert_w_m1(double z);

/// Relative residual |w e^w / z - 1|, evaluated in log form so that it stays
/// meaningful when e^w underflows.
double lambert_residual(double w, double z) noexcept;

struct Bracket {
  double lo;
  double hi;
};

using RealFunction = std::function<double(double)>;

struct RootOptions {
  double x_tol = 1e-14;
  int max_iterations = 300;
};

/// Brent's bracketing method. Throws Error(NoSignChange) when f(lo) and f(hi)
/// share a sign, ConvergenceError(MaxIterations) when it runs out of steps.
double find_root(const RealFunction& f, Bracket bracket, double tol);
double find_root(const RealFunction& f, Bracket bracket, const RootOptions& opts);

/// Brent's derivative-free minimizer on [lo, hi].
struct Minimum {
  double x;
  double value;
};
Minimum minimize_scalar(const RealFunction& f, Bracket bracket, double tol = 1e-10);

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  std::size_t max_intervals = 4000;
};

/// Adaptive 15-point Gauss-Kronrod quadrature. Either endpoint may be
/// infinite; infinite ranges are mapped onto (0, 1] by x = a + (1 - t) / t
/// (and its mirror images). Throws ConvergenceError(ToleranceNotReached)
/// carrying the best estimate when the error target is not met.
QuadratureResult integrate(const RealFunction& f, double lo, double hi, double tol);
QuadratureResult integrate(const RealFunction& f, double lo, double hi,
                           const QuadratureOptions& opts);

/// Same as integrate() but never throws on a missed tolerance; `converged`
/// reports whether the target was met.
struct QuadratureAttempt {
  QuadratureResult result;
  bool converged = false;
};
QuadratureAttempt try_integrate(const RealFunction& f, double lo, double hi,
                                const QuadratureOptions& opts);

/// Integral of f over (-inf, x_split], x_split < 0, in u = log(-x) on
/// dyadic pieces; truncated at |x| = e^690.
QuadratureResult integrate_left_log(const RealFunction& f, double x_split, const QuadratureOptions& opts);

/// log(1 - e^a) for a < 0.
double log1mexp(double a) noexcept;

/// log(e^a + e^b).
double log_add_exp(double a, double b) noexcept;

}  // namespace smilewings::numerics
