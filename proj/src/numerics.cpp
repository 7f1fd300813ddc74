#include "smilewings/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "smilewings/error.hpp"

namespace smilewings {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::NoSignChange: return "NoSignChange";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::ToleranceNotReached: return "ToleranceNotReached";
    case ErrorKind::PriceBelowIntrinsic: return "PriceBelowIntrinsic";
    case ErrorKind::PriceAtOrAboveCap: return "PriceAtOrAboveCap";
    case ErrorKind::NotMonotone: return "NotMonotone";
    case ErrorKind::DivergentWing: return "DivergentWing";
    case ErrorKind::GrowthViolation: return "GrowthViolation";
    case ErrorKind::EmptyTail: return "EmptyTail";
    case ErrorKind::NonPositiveVol: return "NonPositiveVol";
    case ErrorKind::Unsupported: return "Unsupported";
  }
  return "Unknown";
}

void throw_domain(const std::string& what) { throw Error(ErrorKind::Domain, what); }

}  // namespace smilewings

namespace smilewings::numerics {

namespace {

constexpr double kSqrt1_2 = 0.707106781186547524400844362105;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Asymptotic tail series Phi(z) ~ phi(z)/|z| * sum (-1)^k (2k-1)!! / z^{2k},
// summed until the terms stop shrinking.
double log_tail_series(double z) {
  const double inv_z2 = 1.0 / (z * z);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double next = -term * (2.0 * k - 1.0) * inv_z2;
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return std::log(sum);
}

double log_lower_tail_asymptotic(double z) {
  return -0.5 * z * z - kLogSqrt2Pi - std::log(-z) + log_tail_series(z);
}

}  // namespace

double norm_cdf(double z) noexcept {
  if (std::isnan(z)) return z;
  if (z == kInf) return 1.0;
  if (z == -kInf) return 0.0;
  if (z < -38.0) return std::exp(log_lower_tail_asymptotic(z));
  if (z > 38.0) return 1.0;
  return 0.5 * std::erfc(-z * kSqrt1_2);
}

double log_norm_cdf(double z) noexcept {
  if (std::isnan(z)) return z;
  if (z == kInf) return 0.0;
  if (z == -kInf) return -kInf;
  if (z < -20.0) return log_lower_tail_asymptotic(z);
  if (z > 5.0) return std::log1p(-0.5 * std::erfc(z * kSqrt1_2));
  return std::log(0.5 * std::erfc(-z * kSqrt1_2));
}

double log_mills_ratio(double z) noexcept {
  if (std::isnan(z)) return z;
  if (z == kInf) return -kInf;
  if (z > 20.0) return -std::log(z) + log_tail_series(z);
  return log_norm_cdf(-z) + 0.5 * z * z + kLogSqrt2Pi;
}

double norm_pdf(double z) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double log1mexp(double a) noexcept {
  // Maechler's split keeps both branches accurate.
  return a > -0.693147180559945309 ? std::log(-std::expm1(a)) : std::log1p(-std::exp(a));
}

double log_add_exp(double a, double b) noexcept {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double lambert_residual(double w, double z) noexcept {
  return std::abs(std::expm1(w + std::log(-w) - std::log(-z)));
}

double lambert_w_m1(double z) {
  const double inv_e = std::exp(-1.0);
  if (!(z < 0.0)) throw_domain("lambert_w_m1: argument must be negative");
  if (z < -inv_e * (1.0 + 4.0 * kEps)) throw_domain("lambert_w_m1: argument below -1/e");
  if (z <= -inv_e) return -1.0;

  const double log_mz = std::log(-z);
  const double q = std::fma(std::exp(1.0), z, 1.0);
  const double p = std::sqrt(2.0 * std::max(q, 0.0));

  double w;
  if (p < 0.5) {
    // Branch-point series in p = sqrt(2(1 + e z)), then Halley on w e^w - z.
    w = -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p * p * p - 43.0 / 540.0 * p * p * p * p;
    for (int it = 0; it < 20; ++it) {
      const double ew = std::exp(w);
      const double f = w * ew - z;
      const double fp = ew * (w + 1.0);
      if (fp == 0.0) break;
      const double fpp = ew * (w + 2.0);
      const double step = f / (fp - 0.5 * f * fpp / fp);
      w -= step;
      if (std::abs(step) < 4.0 * kEps * std::abs(w)) break;
    }
  } else {
    // Asymptotic start, then Halley on g(w) = w + log(-w) - log(-z), which
    // avoids underflow of e^w for tiny |z|.
    const double l1 = log_mz;
    const double l2 = std::log(-l1);
    w = l1 - l2 + l2 / l1;
    if (!(w < -1.0)) w = -2.0;
    for (int it = 0; it < 50; ++it) {
      const double g = w + std::log(-w) - log_mz;
      const double gp = 1.0 + 1.0 / w;
      const double gpp = -1.0 / (w * w);
      const double step = g / (gp - 0.5 * g * gpp / gp);
      double next = w - step;
      if (!(next < -1.0)) next = 0.5 * (w - 1.0);
      const bool done = std::abs(next - w) < 4.0 * kEps * std::abs(next);
      w = next;
      if (done) break;
    }
  }

  if (w <= -1.0 && lambert_residual(w, z) < 1e-13) return w;

  // Bisection fallback on g, which is increasing on (-inf, -1].
  auto g = [log_mz](double v) { return v + std::log(-v) - log_mz; };
  double hi = -1.0;
  double lo = std::min(-2.0, 2.0 * log_mz);
  while (g(lo) > 0.0) lo *= 2.0;
  for (int it = 0; it < 2000 && hi - lo > 2.0 * kEps * std::abs(lo); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > 0.0) hi = mid; else lo = mid;
  }
  return 0.5 * (lo + hi);
}

double find_root(const RealFunction& f, Bracket bracket, double tol) {
  RootOptions opts;
  opts.x_tol = tol;
  return find_root(f, bracket, opts);
}

double find_root(const RealFunction& f, Bracket bracket, const RootOptions& opts) {
  double a = bracket.lo;
  double b = bracket.hi;
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0) || std::isnan(fa) || std::isnan(fb)) {
    throw Error(ErrorKind::NoSignChange,
                "find_root: no sign change on [" + std::to_string(a) + ", " +
                    std::to_string(b) + "]");
  }
  double c = b;
  double fc = fb;
  double d = b - a;
  double e = d;
  for (int it = 0; it < opts.max_iterations; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * kEps * std::abs(b) + 0.5 * opts.x_tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p;
      double q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  throw ConvergenceError(ErrorKind::MaxIterations, "find_root: iteration limit reached", b,
                         std::abs(c - b));
}

Minimum minimize_scalar(const RealFunction& f, Bracket bracket, double tol) {
  constexpr double kGolden = 0.381966011250105151795;
  double a = bracket.lo;
  double b = bracket.hi;
  double x = a + kGolden * (b - a);
  double w = x;
  double v = x;
  double fx = f(x);
  double fw = fx;
  double fv = fx;
  double d = 0.0;
  double e = 0.0;
  for (int it = 0; it < 500; ++it) {
    const double xm = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + 1e-12 * tol + kEps;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) break;
    bool golden = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (!(std::abs(p) >= std::abs(0.5 * q * etemp) || p <= q * (a - x) || p >= q * (b - x))) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = xm >= x ? tol1 : -tol1;
        golden = false;
      }
    }
    if (golden) {
      e = (x >= xm ? a : b) - x;
      d = kGolden * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx};
}

namespace {

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod(const RealFunction& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double result_k = fc * kWgk[7];
  double result_g = fc * kWg[3];
  double resabs = std::abs(result_k);
  std::array<double, 7> f1{};
  std::array<double, 7> f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double v1 = f(center - dx);
    const double v2 = f(center + dx);
    f1[j] = v1;
    f2[j] = v2;
    result_k += kWgk[j] * (v1 + v2);
    resabs += kWgk[j] * (std::abs(v1) + std::abs(v2));
    if (j % 2 == 1) result_g += kWg[j / 2] * (v1 + v2);
  }
  const double mean = 0.5 * result_k;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  }
  result_k *= half;
  result_g *= half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs(result_k - result_g);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * resabs, err);
  }
  if (!std::isfinite(result_k)) err = kInf;
  return {a, b, result_k, err};
}

QuadratureAttempt adaptive(const RealFunction& f, double a, double b,
                           const QuadratureOptions& opts, std::size_t& evals) {
  std::priority_queue<Segment> heap;
  Segment first = gauss_kronrod(f, a, b);
  evals += 15;
  double total = first.value;
  double total_err = first.error;
  heap.push(first);
  auto target = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };
  bool converged = total_err <= target();
  while (!converged && heap.size() < opts.max_intervals) {
    Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval cannot be split further
    heap.pop();
    Segment left = gauss_kronrod(f, worst.a, mid);
    Segment right = gauss_kronrod(f, mid, worst.b);
    evals += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    if (total_err <= target()) {
      // Re-sum to shed accumulated cancellation before declaring success.
      double v = 0.0;
      double e = 0.0;
      auto copy = heap;
      while (!copy.empty()) {
        v += copy.top().value;
        e += copy.top().error;
        copy.pop();
      }
      total = v;
      total_err = e;
      converged = total_err <= target();
    }
  }
  QuadratureAttempt out;
  out.result.value = total;
  out.result.abs_error_estimate = std::max(0.0, total_err);
  out.converged = converged;
  return out;
}

}  // namespace

QuadratureAttempt try_integrate(const RealFunction& f, double lo, double hi,
                                const QuadratureOptions& opts) {
  if (std::isnan(lo) || std::isnan(hi)) throw_domain("integrate: NaN endpoint");
  if (lo == hi) return {{0.0, 0.0, 1}, true};
  if (lo > hi) {
    QuadratureAttempt flipped = try_integrate(f, hi, lo, opts);
    flipped.result.value = -flipped.result.value;
    return flipped;
  }
  std::size_t evals = 0;
  QuadratureAttempt out;
  const bool lo_inf = std::isinf(lo);
  const bool hi_inf = std::isinf(hi);
  if (lo_inf && hi_inf) {
    QuadratureOptions half = opts;
    half.abs_tol = 0.5 * opts.abs_tol;
    QuadratureAttempt left = try_integrate(f, -kInf, 0.0, half);
    QuadratureAttempt right = try_integrate(f, 0.0, kInf, half);
    out.result.value = left.result.value + right.result.value;
    out.result.abs_error_estimate = left.result.abs_error_estimate + right.result.abs_error_estimate;
    out.result.evaluations = left.result.evaluations + right.result.evaluations;
    out.converged = left.converged && right.converged;
    return out;
  }
  if (hi_inf) {
    RealFunction g = [&f, lo](double t) {
      if (t <= 0.0) return 0.0;
      const double x = lo + (1.0 - t) / t;
      const double v = f(x);
      return v == 0.0 ? 0.0 : v / (t * t);
    };
    out = adaptive(g, 0.0, 1.0, opts, evals);
  } else if (lo_inf) {
    RealFunction g = [&f, hi](double t) {
      if (t <= 0.0) return 0.0;
      const double x = hi - (1.0 - t) / t;
      const double v = f(x);
      return v == 0.0 ? 0.0 : v / (t * t);
    };
    out = adaptive(g, 0.0, 1.0, opts, evals);
  } else {
    out = adaptive(f, lo, hi, opts, evals);
  }
  out.result.evaluations = std::max<std::size_t>(evals, 1);
  return out;
}

QuadratureResult integrate(const RealFunction& f, double lo, double hi,
                           const QuadratureOptions& opts) {
  QuadratureAttempt attempt = try_integrate(f, lo, hi, opts);
  if (!attempt.converged) {
    throw ConvergenceError(ErrorKind::ToleranceNotReached,
                           "integrate: tolerance not reached (estimate " +
                               std::to_string(attempt.result.abs_error_estimate) + ")",
                           attempt.result.value, attempt.result.abs_error_estimate);
  }
  return attempt.result;
}

QuadratureResult integrate(const RealFunction& f, double lo, double hi, double tol) {
  QuadratureOptions opts;
  opts.abs_tol = tol;
  return integrate(f, lo, hi, opts);
}

QuadratureResult integrate_left_log(const RealFunction& f, double x_split, const QuadratureOptions& opts) {
  if (!(x_split < 0.0)) throw_domain("integrate_left_log: split must be negative");
  constexpr double kUMax = 690.0;  // |x| = e^690 is near the top of the double range
  const double u0 = std::log(-x_split);
  std::vector<double> us{u0};
  for (double w = 0.5; u0 + w < kUMax; w *= 2.0) us.push_back(u0 + w);
  if (u0 < kUMax) us.push_back(kUMax);
  auto g = [&f](double u) {
    const double x = -std::exp(u);
    return f(x) * -x;
  };
  QuadratureOptions piece = opts;
  piece.abs_tol = opts.abs_tol / static_cast<double>(std::max<std::size_t>(us.size(), 1));
  QuadratureResult total;
  for (std::size_t k = 0; k + 1 < us.size(); ++k) {
    const auto r = integrate(g, us[k], us[k + 1], piece);
    total.value += r.value;
    total.abs_error_estimate += r.abs_error_estimate;
    total.evaluations += r.evaluations;
  }
  return total;
}

}  // namespace smilewings::numerics
