#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "smilewings/blackscholes.hpp"
#include "smilewings/error.hpp"
#include "smilewings/models.hpp"
#include "smilewings/numerics.hpp"
#include "smilewings/replication.hpp"

using namespace smilewings;
using numerics::kInf;

namespace {

double lognormal_expectation(const numerics::RealFunction& f, double sigma, std::vector<double> kinks_s) {
  auto g = [&](double z) {
    const double phi = numerics::norm_pdf(z);
    return phi == 0.0 ? 0.0 : f(std::exp(sigma * z - 0.5 * sigma * sigma)) * phi;
  };
  std::vector<double> zs{-kInf};
  for (double s : kinks_s) zs.push_back((std::log(s) + 0.5 * sigma * sigma) / sigma);
  zs.push_back(kInf);
  numerics::QuadratureOptions o;
  o.abs_tol = 1e-13;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < zs.size(); ++k) total += numerics::integrate(g, zs[k], zs[k + 1], o).value;
  return total;
}

std::pair<double, double> mean_se(const std::vector<double>& v) {
  double m = 0.0;
  for (double a : v) m += a;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double a : v) s += (a - m) * (a - m);
  return {m, std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
}

std::vector<double> discrete_payoffs(double sigma, std::size_t n, std::size_t paths, std::uint64_t seed) {
  const auto ps = models::sample_paths(models::Lognormal{sigma}, n, paths, seed);
  std::vector<double> out;
  out.reserve(ps.size());
  for (const auto& p : ps) out.push_back(discrete_varswap_payoff(p, static_cast<double>(n), static_cast<double>(n)));
  return out;
}

}  // namespace

TEST_CASE("log-contract and variance-swap strips on flat smiles") {
  for (double s : {0.1, 0.2, 0.5}) {
    const auto smile = SmileCurve::flat(s);
    CHECK(std::abs(log_contract_strip(smile, 1e-10) - 0.5 * s * s) < 1e-8);
    CHECK(std::abs(varswap_strip(smile, 1e-10) - s * s) < 1e-8);
    CHECK(varswap_strip(smile, 1e-10) == 2.0 * log_contract_strip(smile, 0.5e-10));
  }
}

TEST_CASE("strip on an FMLS smile matches the density oracle") {
  const models::ModelSpec m = models::Fmls{1.5, 0.25};
  const auto smile = models::model_smile(m, models::default_smile_grid(m));
  const auto lm = models::log_mean(m);
  REQUIRE_FALSE(lm.infinite);
  CHECK(std::abs(log_contract_strip(smile, 1e-10) + lm.value) < 1e-4);
}

TEST_CASE("strip rejects a wing that decays too slowly") {
  SmileCurve heavy({-3.0, -2.0, -1.0, 0.0, 1.0}, {0.6, 0.5, 0.4, 0.3, 0.3}, Interpolation::MonotoneCubic,
                   PowerTailWing{0.5});
  try {
    log_contract_strip(heavy, 1e-8);
    FAIL("expected DivergentWing");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DivergentWing);
  }
}

TEST_CASE("replicate_convex closed forms") {
  const double s = 0.2;
  const auto smile = SmileCurve::flat(s);

  ConvexPayoff sq;
  sq.f = [](double k) { return (k - 1.0) * (k - 1.0); };
  sq.f_prime = [](double k) { return 2.0 * (k - 1.0); };
  sq.second_derivative_density = [](double) { return 2.0; };
  sq.pivot_x0 = 1.0;
  CHECK(std::abs(replicate_convex(sq, smile, 1e-10) - std::expm1(s * s)) < 1e-8);

  ConvexPayoff lin;
  lin.f = [](double k) { return k; };
  lin.f_prime = [](double) { return 1.0; };
  lin.second_derivative_density = [](double) { return 0.0; };
  for (double pivot : {0.5, 1.0, 3.0}) {
    lin.pivot_x0 = pivot;
    CHECK(std::abs(replicate_convex(lin, smile, 1e-10) - 1.0) < 1e-14);
  }

  ConvexPayoff lg;
  lg.f = [](double k) { return -std::log(k); };
  lg.f_prime = [](double k) { return -1.0 / k; };
  lg.second_derivative_density = [](double k) { return 1.0 / (k * k); };
  lg.scaled_density = [](double) { return 1.0; };
  lg.pivot_x0 = 1.0;
  CHECK(std::abs(replicate_convex(lg, smile, 1e-10) - 0.02) < 1e-8);
  // Any pivot prices the same payoff.
  lg.pivot_x0 = 0.7;
  CHECK(std::abs(replicate_convex(lg, smile, 1e-10) - 0.02) < 1e-8);
  // Without the scaled density the wing stops where k underflows.
  lg.scaled_density = nullptr;
  CHECK(std::abs(replicate_convex(lg, smile, 1e-10) - 0.02) < 1e-8);

  lg.pivot_x0 = 0.0;
  CHECK_THROWS_AS(replicate_convex(lg, smile, 1e-10), Error);
}

TEST_CASE("replicate_convex on the log-moment payoff") {
  // f(s) = |log s|^p 1{s < z_p} + |p - 1|^p with z_p = e^{p - 1} for p < 1,
  // else 1. For p < 1 that form jumps at z_p; its continuous version
  // |log min(s, z_p)|^p is used instead. For p < 2 the kink at z_p puts a
  // point mass of size -f'(z_p-) into the second-derivative measure; it is
  // priced as that mass times the put at z_p.
  const double sigma = 0.2;
  const auto smile = SmileCurve::flat(sigma);
  for (double p : {0.5, 1.0, 2.0}) {
    const double z = p < 1.0 ? std::exp(p - 1.0) : 1.0;
    const double c = std::pow(std::abs(p - 1.0), p);
    ConvexPayoff f;
    f.f = [p, z, c](double k) {
      if (p < 1.0) return std::pow(-std::log(std::min(k, z)), p);
      return (k < z ? std::pow(-std::log(k), p) : 0.0) + c;
    };
    f.f_prime = [](double) { return 0.0; };  // right derivative at the pivot
    f.second_derivative_density = [p, z](double k) {
      if (!(k < z)) return 0.0;
      const double u = -std::log(k);
      return p * std::pow(u, p - 2.0) * (u + p - 1.0) / (k * k);
    };
    f.scaled_density = [p](double x) {
      const double u = -x;
      const double a = p * std::pow(u, p - 1.0);
      return p == 1.0 ? a : a + p * (p - 1.0) * std::pow(u, p - 2.0);
    };
    f.pivot_x0 = z;
    const double left_slope = -p * std::pow(-std::log(z), p - 1.0) / z;
    const double jump = p < 2.0 ? -left_slope : 0.0;
    CAPTURE(p);
    const double value = replicate_convex(f, smile, 1e-10) + jump * bs::put_price(std::log(z), sigma).value;
    const double oracle = lognormal_expectation(f.f, sigma, {z});
    CHECK(std::abs(value - oracle) < 1e-6);
  }
}

TEST_CASE("option chain validation") {
  const double s = 0.2;
  std::vector<ChainPoint> pts;
  for (double x : {-1.0, -0.5, 0.0, 0.5}) pts.push_back({x, bs::put_price(x, s)});
  CHECK_NOTHROW(OptionChain(pts, ChainSource::ModelGenerated));
  auto below = pts;
  below[1].put.value = 0.0;
  below[3].put.value = bs::put_intrinsic(0.5) - 1e-3;
  CHECK_THROWS_AS(OptionChain(below, ChainSource::Observed), Error);
  auto cap = pts;
  cap[0].put.value = std::exp(-1.0);
  CHECK_THROWS_AS(OptionChain(cap, ChainSource::Observed), Error);
  auto order = pts;
  std::swap(order[0], order[1]);
  CHECK_THROWS_AS(OptionChain(order, ChainSource::Observed), Error);
}

TEST_CASE("discrete variance swap payoff") {
  PricePath flat{{0.0, 0.5, 1.0}, {1.0, 1.0, 1.0}};
  CHECK(discrete_varswap_payoff(flat) == 0.0);
  PricePath bump{{0.0, 0.5, 1.0}, {1.0, std::exp(0.1), 1.0}};
  CHECK(discrete_varswap_payoff(bump, 1.0, 1.0) == doctest::Approx(0.02).epsilon(1e-14));
  for (double c : {0.5, 2.0}) {
    PricePath scaled = bump;
    for (double& v : scaled.values) v *= c;
    CHECK(discrete_varswap_payoff(scaled, 1.0, 1.0) == doctest::Approx(0.02).epsilon(1e-14));
  }
  CHECK(discrete_varswap_payoff(bump, 252.0, 0.5) == doctest::Approx(0.02 * 504.0).epsilon(1e-14));

  PricePath bad{{0.0, 1.0}, {1.0, -1.0}};
  CHECK_THROWS_AS(discrete_varswap_payoff(bad), Error);
  PricePath single{{0.0}, {1.0}};
  CHECK_THROWS_AS(discrete_varswap_payoff(single), Error);
  PricePath unordered{{0.0, 0.5, 0.4}, {1.0, 1.0, 1.0}};
  CHECK_THROWS_AS(discrete_varswap_payoff(unordered), Error);
}

TEST_CASE("discrete variance swap Monte Carlo bias") {
  const double s = 0.2;
  const std::size_t n = 252;
  const auto v = discrete_payoffs(s, n, 100000, 20240611);
  const auto [mean, se] = mean_se(v);
  // Each squared increment has mean s^2 dt + s^4 dt^2 / 4.
  const double exact = s * s * (1.0 + s * s / (4.0 * static_cast<double>(n)));
  CHECK(std::abs(mean - exact) < 3.0 * se);
}

TEST_CASE("discrete variance swap converges in the monitoring frequency") {
  const double s = 0.2;
  double prev_dev = kInf;
  double prev_se = 0.0;
  for (std::size_t n : {12u, 52u, 252u}) {
    const auto v = discrete_payoffs(s, n, 100000, 77);
    const auto [mean, se] = mean_se(v);
    const double dev = std::abs(mean - s * s);
    CAPTURE(n);
    CHECK(dev <= prev_dev + 3.0 * std::hypot(se, prev_se));
    prev_dev = dev;
    prev_se = se;
  }
}
