#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smilewings/smile_curve.hpp"

namespace smilewings::wings {

/// Lee's moment indices together with the log-moment index.
struct MomentIndices {
  double p = 0.0;
  double beta_l = 2.0;
  double q = 0.0;
};

/// beta_L = 2 - 4(sqrt(p^2 + p) - p); +inf maps to 0.
double lee_p_to_beta(double p);

/// p = 1 / (2 beta) + beta / 8 - 1/2 for beta in (0, 2].
double lee_beta_to_p(double beta);

struct BoundViolation {
  double x;
  std::string description;
};

/// Points of x_range where I(x) >= sqrt(beta |x|). beta = 2 requires the
/// caller to assert that S_T has no mass at zero.
std::vector<BoundViolation> lee_bound_check(const SmileCurve& smile, double beta, std::span<const double> x_range,
                                            bool no_mass_at_zero = true);

/// Solution v of k = v (1 - log(v) / q) with v -> 0 as k -> 0.
double v_q(double k, double q);

/// log v_q(e^{log_k}); usable where e^{log_k} underflows.
double log_v_q(double log_k, double q);

struct PutBound {
  double loose;
  double tight;
  double log_loose;
  double log_tight;
};

/// e^x |x|^{-q} m and (1/q) v |log v|^{1-q} m with v = v_q(e^x), m = E|log S_T|^q.
PutBound put_upper_bound(double x, double q, double log_moment);

/// sqrt(-2x + 2p log|x|) - sqrt(2p log|x|), for x < -1.
double iv_wing_bound(double x, double p);

/// d(x, I(x)) / sqrt(2 log|x|), for x < -1.
double log_moment_statistic(double x, const SmileCurve& smile);

struct WingExpansion {
  double exact_form;
  double series_form;
};

/// exact: sqrt(2q log|x| - 2x) - sqrt(2q log|x|);
/// series: sqrt(2|x|) - sqrt(2q log|x|) + q log|x| / sqrt(2|x|).
WingExpansion wing_expansion(double x, double q);

enum class EstimateMethod { MinStatistic, LeastSquares };

const char* to_string(EstimateMethod m) noexcept;

struct WingReport {
  double q_hat = 0.0;
  std::vector<std::pair<double, double>> statistic_samples;  // (x, s(x)), x decreasing
  EstimateMethod method = EstimateMethod::MinStatistic;
  double residual = 0.0;
  std::vector<BoundViolation> bound_violations;
  bool no_finite_q = false;
  std::vector<std::string> notes;
};

inline constexpr double kDefaultQCeiling = 1e3;

/// Estimates the log-moment index from the smile on the tail points.
WingReport estimate_q(const SmileCurve& smile, std::span<const double> x_tail,
                      EstimateMethod method = EstimateMethod::MinStatistic, double q_ceiling = kDefaultQCeiling);

}  // namespace smilewings::wings
