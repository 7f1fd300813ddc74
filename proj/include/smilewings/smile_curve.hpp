#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace smilewings {

enum class Interpolation { MonotoneCubic, Linear };

/// Hold the boundary implied volatility.
struct ClampWing {};

/// I(x) = sqrt(delta^2 - 2x) - delta with delta(x)^2 = 2 q log|x| + c, where c
/// is fixed by the boundary grid point. This is the left-wing expansion
/// sqrt(2q log|x| - 2x) - sqrt(2q log|x|) shifted in delta^2 so that it
/// passes through the boundary value.
struct CorollaryWing {
  double q = 0.0;
};

/// Out-of-the-money put decays like e^x |x|^{-q}, anchored at the boundary
/// grid point; the volatility is recovered by inversion at every query.
struct PowerTailWing {
  double q = 0.0;
};

using LeftWing = std::variant<ClampWing, CorollaryWing, PowerTailWing>;

/// Value, slope and d(x, I(x)) of a smile at one point.
struct SmilePoint {
  double iv;
  double slope;
  double delta;
};

/// The map x -> I(x) on a finite grid, with declared interpolation and wing
/// extrapolation. Immutable after construction and total on the real line.
class SmileCurve {
 public:
  SmileCurve(std::vector<double> x, std::vector<double> iv,
             Interpolation interpolation = Interpolation::MonotoneCubic,
             LeftWing left_wing = ClampWing{});

  /// Flat smile at sigma on a small grid around the money.
  static SmileCurve flat(double sigma);

  double operator()(double x) const { return evaluate(x).iv; }
  double derivative(double x) const { return evaluate(x).slope; }
  double delta(double x) const { return evaluate(x).delta; }
  SmilePoint evaluate(double x) const;

  std::span<const double> grid_x() const { return x_; }
  std::span<const double> grid_iv() const { return iv_; }
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  Interpolation interpolation() const { return interpolation_; }
  const LeftWing& left_wing() const { return left_wing_; }

  /// The analytic log-moment index of the market behind the smile, when
  /// known (synthetic models). +inf means every log-moment is finite.
  std::optional<double> certified_q() const { return certified_q_; }
  SmileCurve& set_certified_q(std::optional<double> q) {
    certified_q_ = q;
    return *this;
  }

 private:
  SmilePoint interior(double x) const;
  SmilePoint left_extrapolation(double x) const;

  std::vector<double> x_;
  std::vector<double> iv_;
  std::vector<double> slopes_;
  Interpolation interpolation_;
  LeftWing left_wing_;
  std::optional<double> certified_q_;
  // Anchors for the left wing.
  double anchor_delta_sq_shift_ = 0.0;
  double anchor_log_put_ = 0.0;
};

}  // namespace smilewings
