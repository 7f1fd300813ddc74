#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "smilewings/blackscholes.hpp"
#include "smilewings/replication.hpp"
#include "smilewings/smile_curve.hpp"

namespace smilewings::models {

struct Lognormal {
  double sigma = 0.2;
};

/// Finite-moment log-stable model: tail index alpha in (1,2), skew -1.
struct Fmls {
  double alpha = 1.5;
  double scale = 0.25;
};

/// log S_T = X - Y - log E[e^{X-Y}], X ~ N(0, x_sigma^2), Y inverse-Gamma.
struct LogMixture {
  double x_sigma = 0.2;
  double y_shape = 3.0;
  double y_scale = 1.0;
};

using ModelSpec = std::variant<Lognormal, Fmls, LogMixture>;

/// Throws DomainError on out-of-range parameters.
void validate(const ModelSpec& model);
std::string model_name(const ModelSpec& model);

/// Either a finite value or the explicit "infinite" tag.
struct MomentValue {
  bool infinite = false;
  double value = 0.0;

  static MomentValue finite(double v) { return {false, v}; }
  static MomentValue inf() { return {true, 0.0}; }
};

/// Analytic log-moment index of the model.
struct CertifiedQ {
  bool infinite = false;
  double q_true = 0.0;

  /// +inf as a double, for comparisons.
  double as_double() const;
};

CertifiedQ certified_q(const ModelSpec& model);

struct LevyTriplet {
  double xi = 0.0;
  double gamma = 0.0;
  std::function<double(double)> levy_density;
};

/// Levy-Khintchine triplet with truncation 1_{|x| <= 1}. Unsupported for the
/// mixture model.
LevyTriplet levy_triplet(const ModelSpec& model);

/// psi(u) with E[e^{iuL}] = e^{psi(u)}, evaluated at complex u. Martingale
/// normalized so that psi(-i) = 0. Unsupported for the mixture model.
std::complex<double> char_exponent(std::complex<double> u, const ModelSpec& model);

/// Density of log S_T.
double log_density(double l, const ModelSpec& model);

/// P(log S_T <= l).
double log_cdf(double l, const ModelSpec& model);

/// Time values below the pricer's absolute resolution (1e-9) are reported as
/// zero, with log_time_value = -inf.
NormalizedPutPrice model_put(double x, const ModelSpec& model, double tol = 1e-10);

/// Implied-vol smile of the model on the grid. Points whose price is not
/// resolved by the pricer are dropped and described in `warnings`. The left
/// wing extrapolates the model's power-law put decay beyond the grid.
SmileCurve model_smile(const ModelSpec& model, std::span<const double> x_grid, double tol = 1e-10,
                       std::vector<std::string>* warnings = nullptr);

/// Log-spaced left wing plus a uniform body, strictly increasing.
std::vector<double> default_smile_grid(const ModelSpec& model);

/// E[|log S_T|^q], infinite tag when q >= certified q.
MomentValue log_moment_oracle(const ModelSpec& model, double q, double tol = 1e-10);

/// E[|log S_T|^q 1{log S_T > -cutoff}], finite for every q.
double log_moment_truncated(const ModelSpec& model, double q, double cutoff, double tol = 1e-10);

/// E[log S_T] by density quadrature; infinite tag when it diverges.
MomentValue log_mean(const ModelSpec& model, double tol = 1e-10);

/// E[S_T^p] by density quadrature.
double power_moment(const ModelSpec& model, double p, double tol = 1e-10);

/// E[Y^r] for Y inverse-Gamma(shape, scale); infinite tag for r >= shape.
MomentValue ig_moment(double r, double shape_alpha, double scale_beta);

/// Inverse-Gamma density.
double ig_density(double y, double shape_alpha, double scale_beta);

/// E[e^{-Y}] by quadrature.
double ig_laplace(double shape_alpha, double scale_beta, double tol = 1e-13);

/// Equidistant paths on [0, 1], S_0 = 1. Deterministic per (seed, path index).
/// Unsupported for FMLS.
std::vector<PricePath> sample_paths(const ModelSpec& model, std::size_t n_steps, std::size_t n_paths,
                                    std::uint64_t seed);

}  // namespace smilewings::models
