#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "smilewings/blackscholes.hpp"
#include "smilewings/error.hpp"
#include "smilewings/gf.hpp"
#include "smilewings/models.hpp"
#include "smilewings/numerics.hpp"
#include "smilewings/replication.hpp"

using namespace smilewings;
using namespace smilewings::gf;
using numerics::kInf;

namespace {

const SmileCurve& fmls_smile() {
  static const SmileCurve smile = [] {
    const models::ModelSpec m = models::Fmls{1.5, 0.25};
    return models::model_smile(m, models::default_smile_grid(m));
  }();
  return smile;
}

const TransformedSmile& fmls_transform() {
  static const TransformedSmile ts = build_transform(fmls_smile());
  return ts;
}

bool has_note(const std::vector<std::string>& notes, const std::string& needle) {
  for (const auto& n : notes) {
    if (n.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("flat-smile inverse transforms") {
  for (double s : {0.2, 0.5}) {
    const auto ts = build_transform(SmileCurve::flat(s));
    for (double z : {-30.0, -5.0, -0.3, 0.0, 1.0, 4.0, 40.0}) {
      CHECK(ts.f_inv(z) == doctest::Approx(s * z - 0.5 * s * s).epsilon(1e-12));
      CHECK(ts.h_inv(z) == doctest::Approx(s * z + 0.5 * s * s).epsilon(1e-12));
      CHECK(std::abs(ts.f_of(ts.f_inv(z)) - z) < 1e-11 * std::max(1.0, std::abs(z)));
    }
  }
}

TEST_CASE("round trips on an FMLS smile") {
  const auto& ts = fmls_transform();
  for (double x : {-1e250, -1e40, -5e3, -20.0, -3.3, -1.0, 0.0, 0.4, 1.0, 5.0}) {
    CAPTURE(x);
    const double tol = 1e-10 * std::max(1.0, std::abs(x));
    CHECK(std::abs(ts.f_inv(ts.f_of(x)) - x) < tol);
    CHECK(std::abs(ts.h_inv(ts.g_of(x)) - x) < tol);
  }
  CHECK(ts.f_inv(ts.f_floor() - 1.0) == -kInf);
  CHECK(ts.wing_q() == 1.5);
}

TEST_CASE("a smile with a reversal in f is rejected") {
  // I drops from 0.2 to 0.05 between x = -1.1 and x = -1: f = x/I + I/2 goes
  // from -5.4 to -19.975.
  SmileCurve bad({-2.0, -1.5, -1.1, -1.0, -0.5, 0.0, 0.5}, {0.2, 0.2, 0.2, 0.05, 0.05, 0.05, 0.05},
                 Interpolation::Linear);
  try {
    build_transform(bad);
    FAIL("expected NotMonotone");
  } catch (const NotMonotoneError& e) {
    CHECK(e.kind() == ErrorKind::NotMonotone);
    CHECK(e.x_left() == -1.1);
    CHECK(e.x_right() == -1.0);
  }
}

TEST_CASE("variance swap on flat smiles") {
  for (double s : {0.1, 0.2, 0.5}) {
    const auto ts = build_transform(SmileCurve::flat(s));
    CHECK(std::abs(gf_varswap(ts) - s * s) < 1e-10);
  }
}

TEST_CASE("variance swap routes agree on model smiles") {
  const double gf_fmls = gf_varswap(fmls_transform());
  const double strip = log_contract_strip(fmls_smile(), 1e-10);
  CHECK(std::abs(gf_fmls - 2.0 * strip) < 1e-8);
  const auto lm = models::log_mean(models::Fmls{1.5, 0.25});
  CHECK(std::abs(gf_fmls + 2.0 * lm.value) < 1e-4);

  const models::ModelSpec mix = models::LogMixture{0.2, 3.0, 1.0};
  const auto smile = models::model_smile(mix, models::default_smile_grid(mix));
  const double g = gf_varswap(build_transform(smile));
  CHECK(std::abs(g - 2.0 * log_contract_strip(smile, 1e-10)) < 1e-8);
  CHECK(std::abs(g + 2.0 * models::log_mean(mix).value) < 1e-4);
}

TEST_CASE("twice-differentiable route") {
  const auto ts = build_transform(SmileCurve::flat(0.2));
  CHECK(std::abs(price_psi_c2(payoffs::linear(), ts) + 0.02) < 1e-10);
  CHECK(std::abs(price_psi_c2(payoffs::square(), ts) - 0.0404) < 1e-8);
  CHECK(std::abs(price_psi_c2(payoffs::linear(), fmls_transform()) + 0.5 * gf_varswap(fmls_transform())) < 1e-9);
  try {
    price_psi_c2(payoffs::square(), fmls_transform());
    FAIL("expected GrowthViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GrowthViolation);
  }
  auto no_second = payoffs::linear();
  no_second.psi_double_prime = nullptr;
  CHECK_THROWS_AS(price_psi_c2(no_second, ts), Error);
}

TEST_CASE("absolutely continuous route") {
  for (double s : {0.2, 0.5}) {
    const auto ts = build_transform(SmileCurve::flat(s));
    CHECK(std::abs(price_psi_ac(payoffs::linear(), ts) + 0.5 * s * s) < 1e-10);
    CHECK(std::abs(price_psi_ac(payoffs::linear(), ts) - price_psi_c2(payoffs::linear(), ts)) < 1e-8);
  }
  const auto& ts = fmls_transform();
  CHECK(std::abs(price_psi_ac(payoffs::linear(), ts) - price_psi_c2(payoffs::linear(), ts)) < 1e-8);
}

TEST_CASE("kinked payoff against a Gaussian oracle") {
  const double s = 0.2;
  const auto ts = build_transform(SmileCurve::flat(s));
  for (double strike : {-0.5, -0.1, 0.0, 0.2}) {
    // E[(X - strike)^+] for X ~ N(m, s^2) = (m - strike) Phi(d) + s phi(d).
    const double m = -0.5 * s * s;
    const double d = (m - strike) / s;
    const double oracle = (m - strike) * numerics::norm_cdf(d) + s * numerics::norm_pdf(d);
    CAPTURE(strike);
    CHECK(std::abs(price_psi_ac(payoffs::log_call(strike), ts) - oracle) < 1e-6);
  }
  // Same payoff on an FMLS smile against direct density quadrature.
  const models::ModelSpec m = models::Fmls{1.5, 0.25};
  numerics::QuadratureOptions o;
  o.abs_tol = 1e-12;
  const double oracle = numerics::integrate([&](double l) { return (l + 0.5) * models::log_density(l, m); },
                                            -0.5, kInf, o)
                            .value;
  CHECK(std::abs(price_psi_ac(payoffs::log_call(-0.5), fmls_transform()) - oracle) < 1e-5);
}

TEST_CASE("growth order notes") {
  std::vector<std::string> notes;
  auto edge = SmileCurve::flat(0.2);
  edge.set_certified_q(1.0);
  price_psi_c2(payoffs::linear(), build_transform(edge), 1e-10, &notes);
  CHECK(has_note(notes, "equals the log-moment index"));

  notes.clear();
  SmileCurve uncertified({-3.0, -2.0, -1.0, 0.0, 1.0}, {0.45, 0.38, 0.3, 0.25, 0.25}, Interpolation::MonotoneCubic,
                         PowerTailWing{2.5});
  const auto ts = build_transform(uncertified);
  auto cubic = payoffs::square();
  cubic.growth_order_q = 3.0;
  price_psi_ac(payoffs::linear(), ts, 1e-8, &notes);
  CHECK(notes.empty());
  CHECK_NOTHROW(price_psi_ac(cubic, ts, 1e-6, &notes));
  CHECK(has_note(notes, "advisory"));
}

TEST_CASE("payoff derivatives are consistent") {
  for (const auto& p : {payoffs::linear(), payoffs::square(), payoffs::log_call(-0.3)}) {
    for (double x : {-2.0, -0.7, 0.4, 1.5}) {
      const double h = 1e-6;
      CHECK(p.psi_prime(x) == doctest::Approx((p.psi(x + h) - p.psi(x - h)) / (2.0 * h)).epsilon(1e-6));
      if (p.psi_double_prime) {
        const double fd = (p.psi_prime(x + h) - p.psi_prime(x - h)) / (2.0 * h);
        CHECK(p.psi_double_prime(x) == doctest::Approx(fd).epsilon(1e-6));
      }
    }
    CHECK(p.growth_order_q >= 0.0);
  }
}

TEST_CASE("strike derivative identity and slope bounds") {
  const auto& smile = fmls_smile();
  auto put_k = [&](double k) {
    const double x = std::log(k);
    return bs::put_price(x, smile(x)).value;
  };
  // 50 points strictly between grid nodes across the body and the near wing.
  for (int i = 0; i < 50; ++i) {
    const double x = -12.0 + 13.0 * (i + 0.37) / 50.0;
    const double k = std::exp(x);
    const double h = 1e-5 * k;
    const double fd = (put_k(k + h) - put_k(k - h)) / (2.0 * h);
    const auto pt = smile.evaluate(x);
    const double identity = numerics::norm_cdf(-pt.delta) + numerics::norm_pdf(pt.delta) * pt.slope;
    CAPTURE(x);
    CHECK(std::abs(fd - identity) < 1e-5);
    CHECK(-pt.delta * pt.slope < 1.0);
  }
  for (double x : smile.grid_x()) CHECK(-smile.delta(x) * smile.derivative(x) < 1.0);
  // Left-wing slope bound for q = 1.5.
  for (double x : smile.grid_x()) {
    if (x < -5.0) CHECK(smile.derivative(x) > -1.0 / std::sqrt(3.0 * std::log(-x)));
  }
}

TEST_CASE("boundary terms vanish in the wings") {
  const auto& smile = fmls_smile();
  double prev = kInf;
  for (double x : {-1e4, -1e6, -1e12, -1e100}) {
    const double term = -x * numerics::norm_cdf(-smile.delta(x));
    CHECK(term < prev);
    prev = term;
  }
  CHECK(prev < 1e-6);
  const double right = smile.x_max() * numerics::norm_cdf(smile.delta(smile.x_max()));
  CHECK(std::abs(right) < 1e-6);
  const auto flat = SmileCurve::flat(0.2);
  CHECK(-flat.x_min() * numerics::norm_cdf(-flat.delta(flat.x_min())) < 1e-6);
  CHECK(flat.x_max() * numerics::norm_cdf(flat.delta(flat.x_max())) < 1e-6);
}
