#pragma once

// Call-duration laws and the survival quantities that drive the insertion
// rate: survival/density, moments, mean residual life and the conditional
// expectation E(D | D > t). All durations are in seconds except the
// linear approximation, which works in minutes.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lack/random.hpp"

namespace lack {

struct WeibullParams {
  double shape;  // k
  double scale;  // lambda, seconds

  WeibullParams(double shape, double scale);
};

// Piecewise density on [0, support_end] built from log-normal and two-term
// hyperexponential branches. Normalized on construction.
class EmpiricalPiecewise {
 public:
  enum class Branch { LogNormal, HyperExponential };

  // LogNormal:        1 / (c0 t sqrt(2 pi)) * exp(-(ln t - c1)^2 / c2)
  // HyperExponential: c0 exp(-c1 t) + c2 exp(-c3 t)
  struct Segment {
    double lo;
    double hi;
    Branch branch;
    std::array<double, 4> coefficients;
  };

  explicit EmpiricalPiecewise(std::vector<Segment> segments);

  // FastWeb call-duration fit with the middle branch read as
  // 27.5 < t <= 66.5.
  static EmpiricalPiecewise fastweb();

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  double normalization_constant() const noexcept { return normalization_; }
  double support_end() const noexcept { return segments_.back().hi; }

  double raw_density(double t) const;
  double density(double t) const;
  double cdf(double t) const;
  double survival(double t) const { return 1.0 - cdf(t); }
  double quantile(double p) const;

 private:
  std::vector<Segment> segments_;
  double normalization_ = 1.0;
  // Cumulative normalized mass at the left edge of each grid cell.
  std::vector<double> grid_;
  std::vector<double> cumulative_;
};

class SampleBased {
 public:
  explicit SampleBased(std::vector<double> durations);

  std::span<const double> sorted() const noexcept { return sorted_; }
  std::size_t size() const noexcept { return sorted_.size(); }
  // Number of observations strictly greater than t.
  std::size_t count_above(double t) const;

 private:
  std::vector<double> sorted_;
};

class DurationModel {
 public:
  using Variant = std::variant<WeibullParams, EmpiricalPiecewise, SampleBased>;

  DurationModel(WeibullParams p) : law_(p) {}
  DurationModel(EmpiricalPiecewise p) : law_(std::move(p)) {}
  DurationModel(SampleBased p) : law_(std::move(p)) {}

  static DurationModel weibull(double shape, double scale) {
    return DurationModel(WeibullParams(shape, scale));
  }
  static DurationModel exponential(double mean) { return weibull(1.0, mean); }

  const Variant& law() const noexcept { return law_; }
  std::string describe() const;

 private:
  Variant law_;
};

struct Evaluation {
  double survival;
  double density;
};

struct Moments {
  double mean;
  double sd;
  double cv;
  double second_moment;  // E(D^2)
};

// Mean residual life in both algebraic forms.
struct ResidualLife {
  double from_second_moment;  // E(D^2) / (2 E(D))
  double from_cv;             // (cv^2 + 1) / 2 * E(D)
};

struct Bracket {
  double lo;
  double hi;
};

// Survival threshold below which conditioning is refused.
inline constexpr double kMinSurvival = 1e-12;

Evaluation evaluate(const DurationModel& model, double t);
Moments moments(const DurationModel& model);

ResidualLife residual_life(const DurationModel& model);
// Throws ComputationError when the two forms disagree beyond 1e-9 relative.
double residual_mean(const DurationModel& model);
// Moment-specified form.
double residual_mean(double mean, double cv);

// Weibull: closed form through the upper incomplete gamma function.
// EmpiricalPiecewise: (1/S(t)) * integral_t^end x f(x) dx.
// SampleBased: mean of observations above t.
double conditional_mean(const DurationModel& model, double t);

// t + (1/S(t)) * integral_t^inf S(x) dx by adaptive quadrature. Independent of
// the path above; used to cross-check it.
double conditional_mean_quadrature(const DurationModel& model, double t);

Bracket conditional_mean_bounds(const DurationModel& model, double t);

// Linear approximation 1.32 cv + t sqrt(cv) + 0.59, minutes in and out.
double conditional_mean_approx(double cv, double t_minutes);
// Whether (cv, t) lies in the range the approximation was fitted over
// (Weibull cv 0.32..3.14, t up to the 455 s observation window).
bool conditional_mean_approx_calibrated(double cv, double t_minutes);

WeibullParams fit_weibull(double mean, double cv);

// Duration whose survival probability is u, u in (0, 1].
double inverse_survival(const DurationModel& model, double u);
double sample_duration(const DurationModel& model, RandomStream& rng);

// Weibull parameterizations with common mean 117.31 s, ordered by shape
// from 3.4 down to 0.4, with the printed coefficient of variation.
struct ReferenceWeibull {
  double shape;
  double scale;
  double printed_cv;
};
std::span<const ReferenceWeibull> reference_weibulls();

inline constexpr double kReferenceMeanDuration = 117.31;

}  // namespace lack
