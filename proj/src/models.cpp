#include "smilewings/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "smilewings/error.hpp"
#include "smilewings/numerics.hpp"
#include "smilewings/parallel.hpp"

namespace smilewings::models {

namespace {

using numerics::integrate;
using numerics::kInf;
using numerics::QuadratureOptions;
using cplx = std::complex<double>;

constexpr double kPi = std::numbers::pi;

double sum_pieces(const numerics::RealFunction& f, std::vector<double> points, const QuadratureOptions& opts) {
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    if (points[k + 1] > points[k]) total += integrate(f, points[k], points[k + 1], opts).value;
  }
  return total;
}

QuadratureOptions abs_opts(double abs_tol, double rel_tol = 0.0) {
  QuadratureOptions o;
  o.abs_tol = abs_tol;
  o.rel_tol = rel_tol;
  o.max_intervals = 4000;
  return o;
}

// E[|m + s Z|^q 1{Z > lower}] for standard normal Z.
double abs_normal_moment(double m, double s, double q, double lower = -kInf) {
  auto g = [m, s, q](double z) {
    const double v = std::abs(m + s * z);
    return (q == 0.0 ? 1.0 : std::pow(v, q)) * numerics::norm_pdf(z);
  };
  const double kink = -m / s;
  const auto o = abs_opts(1e-300, 1e-12);
  std::vector<double> pts{lower, kInf};
  if (kink > lower) pts.push_back(kink);
  return sum_pieces(g, pts, o);
}

// Finite-moment log-stable law of log S_T.
struct FmlsLaw {
  double alpha;
  double scale;
  double damp;   // scale^alpha
  double K;      // scale^alpha / |cos(pi alpha / 2)|
  double mu;     // martingale drift, -K
  double width;  // K^{1/alpha}
  double y_switch;
  double right_cut;
  double u_max;
  std::vector<double> coef;  // tail series coefficients a_k, k = 1..

  explicit FmlsLaw(const Fmls& m) : alpha(m.alpha), scale(m.scale) {
    damp = std::pow(scale, alpha);
    K = damp / std::abs(std::cos(0.5 * kPi * alpha));
    mu = -K;
    width = std::pow(K, 1.0 / alpha);
    const double c2 = std::exp(std::lgamma(2.0 * alpha + 1.0) - std::lgamma(alpha + 1.0));
    y_switch = std::max({std::pow(50.0 * K * c2, 1.0 / alpha), 10.0 * width, 12.0});
    right_cut = mu + width * alpha * std::pow(80.0 / (alpha - 1.0), (alpha - 1.0) / alpha);
    u_max = std::pow(38.0 / damp, 1.0 / alpha);
    for (int k = 1; k <= 60; ++k) {
      const double mag = std::exp(k * std::log(K) + std::lgamma(k * alpha + 1.0) - std::lgamma(k + 1.0));
      coef.push_back(-mag * std::sin(kPi * k * alpha) / kPi);
    }
  }

  cplx psi(cplx u) const {
    const cplx iu(-u.imag(), u.real());
    return cplx(0.0, mu) * u + K * std::pow(iu, alpha);
  }

  // Asymptotic series in y = mu - l > 0. power = 1 for the density, 0 for
  // the CDF (with the 1/(k alpha) factor).
  double tail_series(double y, bool cdf) const {
    double sum = 0.0;
    double prev_mag = kInf;
    const double ly = std::log(y);
    for (std::size_t j = 0; j < coef.size(); ++j) {
      const double k = static_cast<double>(j + 1);
      const double mag_k = std::exp(k * std::log(K) + std::lgamma(k * alpha + 1.0) - std::lgamma(k + 1.0) -
                                    k * alpha * ly);
      if (mag_k > prev_mag) break;
      double term = coef[j] * std::exp(-k * alpha * ly);
      if (cdf) term /= k * alpha;
      sum += term;
      if (mag_k < 1e-18 * std::abs(sum)) break;
      prev_mag = mag_k;
    }
    return cdf ? sum : sum / y;
  }

  double fourier_density(double l) const {
    const double phase = K * std::sin(0.5 * kPi * alpha);
    const double shift = mu - l;
    auto g = [&](double u) {
      const double ua = std::pow(u, alpha);
      return std::exp(-damp * ua) * std::cos(phase * ua + shift * u);
    };
    auto r = numerics::try_integrate(g, 0.0, u_max, abs_opts(1e-13));
    return r.result.value / kPi;
  }

  double density(double l) const {
    const double y = mu - l;
    if (y > y_switch) return tail_series(y, false);
    if (l > right_cut) return 0.0;
    return std::max(0.0, fourier_density(l));
  }

  double body_lo() const { return mu - y_switch; }

  // Integral of w(l) f(l) over the body [mu - y_switch, right_cut].
  double body_integral(const std::function<double(double)>& w, double lo, double hi, double tol) const {
    lo = std::max(lo, body_lo());
    hi = std::min(hi, right_cut);
    if (!(hi > lo)) return 0.0;
    auto g = [&](double l) { return w(l) * density(l); };
    std::vector<double> pts{lo, hi};
    for (double p : {mu, 0.0, mu - 3.0 * width, mu + 3.0 * width}) {
      if (p > lo && p < hi) pts.push_back(p);
    }
    return sum_pieces(g, pts, abs_opts(tol));
  }

  // Integral over y in [y_lo, y_hi] of w(mu - y) * tail density, in s = log y.
  double tail_integral(const std::function<double(double)>& w, double y_lo, double y_hi, double tol) const {
    if (!(y_hi > y_lo)) return 0.0;
    auto g = [&](double s) {
      const double y = std::exp(s);
      return w(mu - y) * tail_series(y, false) * y;
    };
    return integrate(g, std::log(y_lo), std::log(y_hi), abs_opts(tol, 1e-12)).value;
  }

  // E[|L|^q 1{L < mu - y_switch}] with an analytic tail beyond |L| ~ 1e8.
  double tail_abs_moment(double q, double tol) const {
    const double y_far = 1e8;
    const double near = tail_integral([q](double l) { return std::pow(std::abs(l), q); }, y_switch, y_far, tol);
    // (y + K)^q = sum_j binom(q, j) K^j y^{q - j}
    double far = 0.0;
    for (std::size_t j = 0; j < 6 && j < coef.size(); ++j) {
      const double ka = static_cast<double>(j + 1) * alpha;
      double binom = 1.0;
      for (int i = 0; i < 4; ++i) {
        const double e = q - i - ka;
        far += coef[j] * binom * std::pow(K, i) * std::pow(y_far, e) / -e;
        binom *= (q - i) / (i + 1);
      }
    }
    return near + far;
  }

  double cdf(double l) const {
    const double y = mu - l;
    if (y >= y_switch) return tail_series(y, true);
    const double base = tail_series(y_switch, true);
    return std::min(1.0, base + body_integral([](double) { return 1.0; }, body_lo(), l, 1e-13));
  }
};

// Log-mixture law. t = log Y has density exp(log_t_density(t)).
struct MixtureLaw {
  double sx;
  double a;
  double b;
  double log_m;  // log E[e^{X - Y}]

  explicit MixtureLaw(const LogMixture& m) : sx(m.x_sigma), a(m.y_shape), b(m.y_scale) {
    log_m = 0.5 * sx * sx + std::log(ig_laplace(a, b));
  }

  double log_t_density(double t) const { return a * std::log(b) - std::lgamma(a) - a * t - b * std::exp(-t); }
  double t_mode() const { return std::log(b / a); }

  // Integral over t of exp(log_t_density(t)) * g(t).
  double expect(const std::function<double(double)>& g, std::vector<double> extra, double rel_tol) const {
    auto h = [&](double t) {
      const double lt = log_t_density(t);
      if (lt < -745.0) return 0.0;
      return std::exp(lt) * g(t);
    };
    std::vector<double> pts{-kInf, kInf, t_mode()};
    for (double e : extra) pts.push_back(e);
    return sum_pieces(h, pts, abs_opts(1e-300, rel_tol));
  }
};

double lewis_integral(const FmlsLaw& law, double x, double tol) {
  auto g = [&](double u) {
    const cplx v = law.psi(cplx(u, -0.5)) - cplx(0.0, u * x);
    return (std::exp(v.real()) * std::cos(v.imag())) / (u * u + 0.25);
  };
  return integrate(g, 0.0, law.u_max, abs_opts(std::clamp(1e-3 * tol, 5e-14, 1e-6))).value;
}

// OTM price in log form plus a flag for whether the route resolves it.
struct LogOtm {
  double log_tv;
  bool resolved;
};

constexpr double kLewisSwitch = -3.0;
constexpr double kLewisFloor = 1e-9;

LogOtm fmls_log_otm(double x, const FmlsLaw& law, double tol) {
  if (x >= kLewisSwitch) {
    const double integral = lewis_integral(law, x, tol);
    const double tail = std::exp(0.5 * x) * integral / kPi;
    const double tv = x <= 0.0 ? std::exp(x) - tail : 1.0 - tail;
    if (!(tv > 0.0)) return {-kInf, false};
    return {std::log(tv), tv > kLewisFloor};
  }
  // put = e^x * J with J = integral of (1 - e^{l-x}) f(l) over l < x
  const double window = 60.0;
  const double l0 = x - window;
  const double y0 = law.mu - l0;
  if (y0 < law.y_switch) throw_domain("fmls pricing window does not reach the tail series");
  const double base = law.tail_series(y0, true);
  const double scale_guess = law.tail_series(std::max(law.mu - x, law.y_switch), true);
  auto w = [x](double l) { return -std::expm1(l - x); };
  const double abs_tol = std::max(1e-300, 1e-3 * tol * scale_guess);
  double body = 0.0;
  const double split = law.body_lo();
  if (x > split) {
    body += law.tail_integral(w, law.y_switch, y0, abs_tol);
    body += law.body_integral(w, split, x, std::max(abs_tol, 1e-13));
  } else {
    body += law.tail_integral(w, law.mu - x, y0, abs_tol);
  }
  const double j = base + body;
  if (!(j > 0.0)) return {-kInf, false};
  return {x + std::log(j), true};
}

double mixture_log_otm(double x, const MixtureLaw& law, double tol) {
  const double ref = x <= 0.0 ? x : 0.0;
  auto g = [&](double t) {
    const double y = std::exp(t);
    const double log_f = 0.5 * law.sx * law.sx - y - law.log_m;
    const double xp = x - log_f;
    const double tv = bs::log_otm_price(xp, law.sx);
    double e;
    if (x <= 0.0) {
      // log_f + xp = x exactly; keep it out of the sum so large y does not cancel.
      e = xp <= 0.0 ? log_f + tv - ref : numerics::log_add_exp(numerics::log1mexp(-xp), tv - xp);
    } else {
      e = log_f - ref + (xp > 0.0 ? tv : numerics::log_add_exp(numerics::log1mexp(xp), tv));
    }
    return e < -745.0 ? 0.0 : std::exp(e);
  };
  const double rel = std::clamp(1e-2 * tol, 1e-13, 1e-6);
  const double v = law.expect(g, {std::log(std::max(1e-3, -x)), std::log(std::max(1e-3, x + 1.0))}, rel);
  return ref + std::log(v);
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

void validate(const ModelSpec& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Lognormal>) {
          if (!(m.sigma > 0.0) || !std::isfinite(m.sigma)) throw_domain("lognormal: sigma must be positive");
        } else if constexpr (std::is_same_v<T, Fmls>) {
          if (!(m.alpha > 1.0 && m.alpha < 2.0)) throw_domain("fmls: alpha must lie strictly inside (1, 2)");
          if (!(m.scale > 0.0) || !std::isfinite(m.scale)) throw_domain("fmls: scale must be positive");
        } else {
          if (!(m.x_sigma > 0.0) || !std::isfinite(m.x_sigma)) throw_domain("mixture: x_sigma must be positive");
          if (!(m.y_shape > 0.0) || !std::isfinite(m.y_shape)) throw_domain("mixture: y_shape must be positive");
          if (!(m.y_scale > 0.0) || !std::isfinite(m.y_scale)) throw_domain("mixture: y_scale must be positive");
        }
      },
      model);
}

std::string model_name(const ModelSpec& model) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&os](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Lognormal>) {
          os << "lognormal(sigma=" << m.sigma << ")";
        } else if constexpr (std::is_same_v<T, Fmls>) {
          os << "fmls(alpha=" << m.alpha << ",scale=" << m.scale << ")";
        } else {
          os << "mixture(x_sigma=" << m.x_sigma << ",y_shape=" << m.y_shape << ",y_scale=" << m.y_scale << ")";
        }
      },
      model);
  return os.str();
}

double CertifiedQ::as_double() const { return infinite ? kInf : q_true; }

CertifiedQ certified_q(const ModelSpec& model) {
  validate(model);
  if (std::holds_alternative<Lognormal>(model)) return {true, 0.0};
  if (const auto* f = std::get_if<Fmls>(&model)) return {false, f->alpha};
  return {false, std::get<LogMixture>(model).y_shape};
}

LevyTriplet levy_triplet(const ModelSpec& model) {
  validate(model);
  if (const auto* ln = std::get_if<Lognormal>(&model)) {
    const double v = ln->sigma * ln->sigma;
    return {v, -0.5 * v, [](double) { return 0.0; }};
  }
  if (const auto* f = std::get_if<Fmls>(&model)) {
    const FmlsLaw law(*f);
    const double c = law.K / std::tgamma(-law.alpha);
    const double alpha = law.alpha;
    return {0.0, law.mu + c / (alpha - 1.0),
            [c, alpha](double x) { return x < 0.0 ? c * std::pow(-x, -1.0 - alpha) : 0.0; }};
  }
  throw Error(ErrorKind::Unsupported, "levy_triplet: the mixture model is not a Levy law at a single time");
}

std::complex<double> char_exponent(std::complex<double> u, const ModelSpec& model) {
  validate(model);
  if (const auto* ln = std::get_if<Lognormal>(&model)) {
    const double v = ln->sigma * ln->sigma;
    return -0.5 * v * u * u - cplx(0.0, 0.5 * v) * u;
  }
  if (const auto* f = std::get_if<Fmls>(&model)) return FmlsLaw(*f).psi(u);
  throw Error(ErrorKind::Unsupported, "char_exponent: not available for the mixture model");
}

double log_density(double l, const ModelSpec& model) {
  validate(model);
  if (const auto* ln = std::get_if<Lognormal>(&model)) {
    const double s = ln->sigma;
    return numerics::norm_pdf((l + 0.5 * s * s) / s) / s;
  }
  if (const auto* f = std::get_if<Fmls>(&model)) return FmlsLaw(*f).density(l);
  const MixtureLaw law(std::get<LogMixture>(model));
  auto g = [&](double t) { return numerics::norm_pdf((l + std::exp(t) + law.log_m) / law.sx) / law.sx; };
  return law.expect(g, {std::log(std::max(1e-3, -(l + law.log_m)))}, 1e-12);
}

double log_cdf(double l, const ModelSpec& model) {
  validate(model);
  if (const auto* ln = std::get_if<Lognormal>(&model)) {
    const double s = ln->sigma;
    return numerics::norm_cdf((l + 0.5 * s * s) / s);
  }
  if (const auto* f = std::get_if<Fmls>(&model)) return FmlsLaw(*f).cdf(l);
  const MixtureLaw law(std::get<LogMixture>(model));
  auto g = [&](double t) { return numerics::norm_cdf((l + std::exp(t) + law.log_m) / law.sx); };
  return law.expect(g, {std::log(std::max(1e-3, -(l + law.log_m)))}, 1e-12);
}

namespace {

LogOtm log_otm_of(double x, const ModelSpec& model, double tol) {
  if (const auto* ln = std::get_if<Lognormal>(&model)) return {bs::log_otm_price(x, ln->sigma), true};
  if (const auto* f = std::get_if<Fmls>(&model)) return fmls_log_otm(x, FmlsLaw(*f), tol);
  const double v = mixture_log_otm(x, MixtureLaw(std::get<LogMixture>(model)), tol);
  return {v, std::isfinite(v)};
}

NormalizedPutPrice from_log_otm(double x, double log_tv) {
  NormalizedPutPrice p;
  p.log_time_value = log_tv;
  p.value = bs::put_intrinsic(x) + std::exp(log_tv);
  return p;
}

}  // namespace

NormalizedPutPrice model_put(double x, const ModelSpec& model, double tol) {
  validate(model);
  if (!std::isfinite(x)) throw_domain("model_put: non-finite log-moneyness");
  if (const auto* ln = std::get_if<Lognormal>(&model)) return bs::put_price(x, ln->sigma);
  const LogOtm r = log_otm_of(x, model, tol);
  // Time value below the pricer's absolute resolution: report the intrinsic value.
  if (!r.resolved || !std::isfinite(r.log_tv)) return {bs::put_intrinsic(x), -kInf};
  // Cap: time value < min(e^x, 1).
  const double cap = x <= 0.0 ? x : 0.0;
  return from_log_otm(x, std::min(r.log_tv, cap - 1e-16));
}

SmileCurve model_smile(const ModelSpec& model, std::span<const double> x_grid, double tol,
                       std::vector<std::string>* warnings) {
  validate(model);
  for (std::size_t k = 1; k < x_grid.size(); ++k) {
    if (!(x_grid[k] > x_grid[k - 1])) throw_domain("model_smile: grid must be strictly increasing");
  }
  const std::size_t n = x_grid.size();
  std::vector<double> iv(n, 0.0);
  std::vector<std::string> notes(n);
  parallel_for(n, [&](std::size_t i) {
    const double x = x_grid[i];
    try {
      const LogOtm r = log_otm_of(x, model, tol);
      if (!r.resolved) {
        notes[i] = "dropped x=" + std::to_string(x) + ": price below pricer resolution";
        return;
      }
      iv[i] = bs::implied_vol_from_log_otm(x, r.log_tv);
      if (!(iv[i] > 0.0)) notes[i] = "dropped x=" + std::to_string(x) + ": zero implied volatility";
    } catch (const Error& e) {
      iv[i] = 0.0;
      notes[i] = "dropped x=" + std::to_string(x) + ": " + e.what();
    }
  });
  std::vector<double> xs;
  std::vector<double> ivs;
  for (std::size_t i = 0; i < n; ++i) {
    if (notes[i].empty() && iv[i] > 0.0) {
      xs.push_back(x_grid[i]);
      ivs.push_back(iv[i]);
    } else if (warnings) {
      warnings->push_back(notes[i]);
    }
  }
  if (xs.size() < 2) throw_domain("model_smile: fewer than two resolved grid points");
  const CertifiedQ cq = certified_q(model);
  LeftWing wing = ClampWing{};
  if (!cq.infinite && xs.front() < 0.0) wing = PowerTailWing{cq.q_true};
  SmileCurve smile(std::move(xs), std::move(ivs), Interpolation::MonotoneCubic, wing);
  smile.set_certified_q(cq.as_double());
  return smile;
}

std::vector<double> default_smile_grid(const ModelSpec& model) {
  validate(model);
  std::vector<double> out;
  const bool heavy = !std::holds_alternative<Lognormal>(model);
  const double body_lo = -3.0;
  const double body_hi = heavy ? 2.0 : 3.0;
  if (heavy) {
    // 40 points per decade from -1e4 up to the body.
    const int per_decade = 40;
    const double top = std::log10(-body_lo);
    const int count = static_cast<int>(std::ceil((4.0 - top) * per_decade));
    for (int i = count; i >= 1; --i) out.push_back(-std::pow(10.0, top + (4.0 - top) * i / count));
  }
  const int body_n = static_cast<int>(std::lround((body_hi - body_lo) / 0.05));
  for (int i = 0; i <= body_n; ++i) out.push_back(body_lo + (body_hi - body_lo) * i / body_n);
  return out;
}

MomentValue log_moment_oracle(const ModelSpec& model, double q, double tol) {
  validate(model);
  if (!(q >= 0.0)) throw_domain("log_moment_oracle: q must be non-negative");
  const CertifiedQ cq = certified_q(model);
  if (!cq.infinite && q >= cq.q_true) return MomentValue::inf();
  if (q == 0.0) return MomentValue::finite(1.0);
  if (const auto* ln = std::get_if<Lognormal>(&model)) {
    const double s = ln->sigma;
    const double m = -0.5 * s * s;
    if (q == 2.0) return MomentValue::finite(s * s + m * m);
    if (q == 1.0) {
      return MomentValue::finite(s * std::sqrt(2.0 / kPi) * std::exp(-0.5 * m * m / (s * s)) +
                                 m * (1.0 - 2.0 * numerics::norm_cdf(-m / s)));
    }
    return MomentValue::finite(abs_normal_moment(m, s, q));
  }
  if (const auto* f = std::get_if<Fmls>(&model)) {
    const FmlsLaw law(*f);
    const double body = law.body_integral([q](double l) { return std::pow(std::abs(l), q); }, law.body_lo(),
                                          law.right_cut, std::max(1e-3 * tol, 1e-13));
    return MomentValue::finite(body + law.tail_abs_moment(q, std::max(1e-3 * tol, 1e-14)));
  }
  const MixtureLaw law(std::get<LogMixture>(model));
  auto g = [&](double t) { return abs_normal_moment(-std::exp(t) - law.log_m, law.sx, q); };
  return MomentValue::finite(law.expect(g, {}, std::clamp(1e-2 * tol, 1e-12, 1e-6)));
}

double log_moment_truncated(const ModelSpec& model, double q, double cutoff, double tol) {
  validate(model);
  if (!(cutoff > 0.0)) throw_domain("log_moment_truncated: cutoff must be positive");
  auto w = [q](double l) { return std::pow(std::abs(l), q); };
  if (const auto* ln = std::get_if<Lognormal>(&model)) {
    const double s = ln->sigma;
    return abs_normal_moment(-0.5 * s * s, s, q, (-cutoff + 0.5 * s * s) / s);
  }
  if (const auto* f = std::get_if<Fmls>(&model)) {
    const FmlsLaw law(*f);
    const double t = std::max(1e-3 * tol, 1e-13);
    double total = law.body_integral(w, -cutoff, law.right_cut, t);
    if (-cutoff < law.body_lo()) total += law.tail_integral(w, law.y_switch, cutoff + law.mu, t);
    return total;
  }
  const MixtureLaw law(std::get<LogMixture>(model));
  auto g = [&](double t) {
    const double m = -std::exp(t) - law.log_m;
    return abs_normal_moment(m, law.sx, q, (-cutoff - m) / law.sx);
  };
  return law.expect(g, {std::log(cutoff)}, std::clamp(1e-2 * tol, 1e-12, 1e-6));
}

MomentValue log_mean(const ModelSpec& model, double tol) {
  validate(model);
  if (const auto* ln = std::get_if<Lognormal>(&model)) return MomentValue::finite(-0.5 * ln->sigma * ln->sigma);
  const CertifiedQ cq = certified_q(model);
  if (cq.q_true <= 1.0) return MomentValue::inf();
  if (const auto* f = std::get_if<Fmls>(&model)) {
    const FmlsLaw law(*f);
    const double t = std::max(1e-3 * tol, 1e-14);
    const double body = law.body_integral([](double l) { return l; }, law.body_lo(), law.right_cut, t);
    return MomentValue::finite(body - law.tail_abs_moment(1.0, t));
  }
  const MixtureLaw law(std::get<LogMixture>(model));
  const double ey = law.expect([](double t) { return std::exp(t); }, {}, std::clamp(1e-2 * tol, 1e-13, 1e-6));
  return MomentValue::finite(-ey - law.log_m);
}

double power_moment(const ModelSpec& model, double p, double tol) {
  validate(model);
  if (const auto* ln = std::get_if<Lognormal>(&model)) {
    const double s = ln->sigma;
    auto g = [s, p](double z) { return std::exp(p * (s * z - 0.5 * s * s)) * numerics::norm_pdf(z); };
    return integrate(g, -kInf, kInf, abs_opts(1e-300, 1e-13)).value;
  }
  if (const auto* f = std::get_if<Fmls>(&model)) {
    const FmlsLaw law(*f);
    auto w = [p](double l) { return std::exp(p * l); };
    const double t = std::max(1e-3 * tol, 1e-14);
    // Density noise is absolute, so the target scales with the weight's peak.
    const double body = law.body_integral(w, law.body_lo(), law.right_cut, t * std::max(1.0, w(law.right_cut)));
    auto g = [&](double y) { return w(law.mu - y) * law.tail_series(y, false); };
    return body + integrate(g, law.y_switch, kInf, abs_opts(t * std::abs(body), 1e-12)).value;
  }
  const MixtureLaw law(std::get<LogMixture>(model));
  const double laplace = law.expect([p](double t) { return std::exp(-p * std::exp(t)); }, {},
                                    std::clamp(1e-2 * tol, 1e-13, 1e-6));
  return std::exp(0.5 * p * p * law.sx * law.sx - p * law.log_m) * laplace;
}

MomentValue ig_moment(double r, double shape_alpha, double scale_beta) {
  if (!(shape_alpha > 0.0) || !(scale_beta > 0.0)) throw_domain("ig_moment: shape and scale must be positive");
  if (r >= shape_alpha) return MomentValue::inf();
  if (r == 0.0) return MomentValue::finite(1.0);
  return MomentValue::finite(
      std::exp(std::lgamma(shape_alpha - r) - std::lgamma(shape_alpha) + r * std::log(scale_beta)));
}

double ig_density(double y, double shape_alpha, double scale_beta) {
  if (!(y > 0.0)) return 0.0;
  return std::exp(shape_alpha * std::log(scale_beta) - std::lgamma(shape_alpha) -
                  (shape_alpha + 1.0) * std::log(y) - scale_beta / y);
}

double ig_laplace(double shape_alpha, double scale_beta, double tol) {
  if (!(shape_alpha > 0.0) || !(scale_beta > 0.0)) throw_domain("ig_laplace: shape and scale must be positive");
  const double a = shape_alpha;
  const double b = scale_beta;
  auto g = [a, b](double t) {
    const double e = a * std::log(b) - std::lgamma(a) - a * t - b * std::exp(-t) - std::exp(t);
    return e < -745.0 ? 0.0 : std::exp(e);
  };
  const double mode = std::log(b / a);
  auto o = abs_opts(1e-300, std::max(tol, 1e-14));
  return integrate(g, -kInf, mode, o).value + integrate(g, mode, kInf, o).value;
}

std::vector<PricePath> sample_paths(const ModelSpec& model, std::size_t n_steps, std::size_t n_paths,
                                    std::uint64_t seed) {
  validate(model);
  if (std::holds_alternative<Fmls>(model)) {
    throw Error(ErrorKind::Unsupported, "sample_paths: FMLS path simulation is not supported");
  }
  if (n_steps == 0) throw_domain("sample_paths: need at least one step");
  std::vector<PricePath> out(n_paths);
  if (n_paths == 0) return out;
  const double dt = 1.0 / static_cast<double>(n_steps);
  std::vector<double> times(n_steps + 1);
  for (std::size_t i = 0; i <= n_steps; ++i) times[i] = static_cast<double>(i) * dt;
  times.back() = 1.0;

  double sigma = 0.0;
  double drift = 0.0;  // per unit time, applied to log S
  std::optional<MixtureLaw> mix;
  if (const auto* ln = std::get_if<Lognormal>(&model)) {
    sigma = ln->sigma;
    drift = -0.5 * sigma * sigma;
  } else {
    mix.emplace(std::get<LogMixture>(model));
    sigma = mix->sx;
    drift = -mix->log_m;
  }
  const std::uint64_t base = splitmix64(seed);
  parallel_for(n_paths, [&](std::size_t p) {
    std::mt19937_64 rng(splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(p))));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    double jump = 0.0;
    double jump_time = kInf;
    if (mix) {
      // Y = b / G with G ~ Gamma(a, 1); one jump at a uniform time.
      std::gamma_distribution<double> gamma(mix->a, 1.0);
      jump = mix->b / gamma(rng);
      jump_time = uniform(rng);
    }
    PricePath& path = out[p];
    path.times = times;
    path.values.resize(n_steps + 1);
    path.values[0] = 1.0;
    double w = 0.0;
    const double sd = sigma * std::sqrt(dt);
    for (std::size_t i = 1; i <= n_steps; ++i) {
      w += sd * normal(rng);
      const double t = times[i];
      const double y = t >= jump_time ? jump : 0.0;
      path.values[i] = std::exp(w + drift * t - y);
    }
  });
  return out;
}

}  // namespace smilewings::models
