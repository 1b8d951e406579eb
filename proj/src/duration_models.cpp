#include "lack/duration_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "lack/errors.hpp"
#include "lack/quadrature.hpp"

namespace lack {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kCellWidth = 0.5;

void require_time(double t, const char* where) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw DomainError(std::string(where) + ": time must be finite and >= 0");
  }
}

// cv of a Weibull law with the given shape; expm1 keeps precision for large k.
double weibull_cv(double shape) {
  const double lg1 = std::lgamma(1.0 + 1.0 / shape);
  const double lg2 = std::lgamma(1.0 + 2.0 / shape);
  return std::sqrt(std::expm1(lg2 - 2.0 * lg1));
}

double weibull_survival(const WeibullParams& w, double t) {
  return std::exp(-std::pow(t / w.scale, w.shape));
}

double weibull_density(const WeibullParams& w, double t) {
  const double u = t / w.scale;
  return w.shape / w.scale * std::pow(u, w.shape - 1.0) * std::exp(-std::pow(u, w.shape));
}

double sample_kde(const SampleBased& s, double t) {
  const auto xs = s.sorted();
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= n;
  // Silverman's rule; a degenerate sample gets a bandwidth relative to its value.
  double h = 1.06 * std::sqrt(var) * std::pow(n, -0.2);
  if (h <= 0.0) h = 1e-3 * mean;
  double acc = 0.0;
  for (double x : xs) {
    const double z = (t - x) / h;
    acc += std::exp(-0.5 * z * z);
  }
  return acc / (n * h * std::sqrt(2.0 * std::numbers::pi));
}

void require_conditionable(double survival) {
  if (!(survival > kMinSurvival)) {
    throw ConditioningError("conditional mean: P(D > t) is numerically zero");
  }
}

}  // namespace

WeibullParams::WeibullParams(double k, double lambda) : shape(k), scale(lambda) {
  if (!(k > 0.0) || !(lambda > 0.0) || !std::isfinite(k) || !std::isfinite(lambda)) {
    throw DomainError("Weibull parameters must satisfy k > 0 and lambda > 0");
  }
}

// ---------------------------------------------------------------------------
// EmpiricalPiecewise

EmpiricalPiecewise::EmpiricalPiecewise(std::vector<Segment> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) throw DomainError("piecewise density needs at least one segment");
  if (segments_.front().lo != 0.0) throw DomainError("piecewise density must start at t = 0");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (!(segments_[i].hi > segments_[i].lo)) throw DomainError("empty density segment");
    if (i > 0 && segments_[i].lo != segments_[i - 1].hi) {
      throw DomainError("density segments must be contiguous and non-overlapping");
    }
  }

  double mass = 0.0;
  for (const auto& seg : segments_) {
    mass += quadrature::integrate([this](double t) { return raw_density(t); }, seg.lo, seg.hi)
                .value;
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw ComputationError("piecewise density has no finite positive mass");
  }
  normalization_ = 1.0 / mass;

  grid_.push_back(0.0);
  for (const auto& seg : segments_) {
    const int cells = std::max(1, static_cast<int>(std::ceil((seg.hi - seg.lo) / kCellWidth)));
    for (int c = 1; c <= cells; ++c) {
      grid_.push_back(c == cells ? seg.hi : seg.lo + (seg.hi - seg.lo) * c / cells);
    }
  }
  cumulative_.assign(grid_.size(), 0.0);
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    cumulative_[i] = cumulative_[i - 1] +
                     quadrature::integrate([this](double t) { return density(t); }, grid_[i - 1],
                                           grid_[i])
                         .value;
  }
}

EmpiricalPiecewise EmpiricalPiecewise::fastweb() {
  using B = Branch;
  return EmpiricalPiecewise({
      {0.0, 27.5, B::LogNormal, {1.55, 3.8, 4.805, 0.0}},
      {27.5, 66.5, B::HyperExponential, {0.000114, 0.00114, 0.027252, 0.03028}},
      {66.5, 455.0, B::LogNormal, {1.55, 3.8, 4.805, 0.0}},
  });
}

double EmpiricalPiecewise::raw_density(double t) const {
  if (t < 0.0 || t > support_end()) return 0.0;
  // Each segment owns [lo, hi); the last one also owns its right edge.
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double v, const Segment& s) { return v < s.hi; });
  const Segment& seg = it == segments_.end() ? segments_.back() : *it;
  const auto& c = seg.coefficients;
  switch (seg.branch) {
    case Branch::LogNormal: {
      if (t <= 0.0) return 0.0;
      const double d = std::log(t) - c[1];
      return std::exp(-d * d / c[2]) / (c[0] * t * std::sqrt(2.0 * std::numbers::pi));
    }
    case Branch::HyperExponential:
      return c[0] * std::exp(-c[1] * t) + c[2] * std::exp(-c[3] * t);
  }
  return 0.0;
}

double EmpiricalPiecewise::density(double t) const { return normalization_ * raw_density(t); }

double EmpiricalPiecewise::cdf(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= support_end()) return 1.0;
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
  const auto cell = static_cast<std::size_t>(std::distance(grid_.begin(), it)) - 1;
  const double partial =
      quadrature::integrate([this](double x) { return density(x); }, grid_[cell], t).value;
  return std::clamp(cumulative_[cell] + partial, 0.0, 1.0);
}

double EmpiricalPiecewise::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile: probability outside [0,1]");
  if (p <= 0.0) return 0.0;
  if (p >= cumulative_.back()) return support_end();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), p);
  const auto cell = static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;
  double lo = grid_[cell];
  double hi = grid_[cell + 1];
  std::uintmax_t iterations = 100;
  const auto root = boost::math::tools::toms748_solve(
      [this, p](double x) { return cdf(x) - p; }, lo, hi, cumulative_[cell] - p,
      cumulative_[cell + 1] - p, boost::math::tools::eps_tolerance<double>(48), iterations);
  return 0.5 * (root.first + root.second);
}

// ---------------------------------------------------------------------------
// SampleBased

SampleBased::SampleBased(std::vector<double> durations) : sorted_(std::move(durations)) {
  if (sorted_.empty()) throw DomainError("sample-based model needs at least one duration");
  for (double d : sorted_) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw DomainError("sample-based durations must be finite and > 0");
    }
  }
  std::sort(sorted_.begin(), sorted_.end());
}

std::size_t SampleBased::count_above(double t) const {
  return static_cast<std::size_t>(sorted_.end() -
                                  std::upper_bound(sorted_.begin(), sorted_.end(), t));
}

std::string DurationModel::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const WeibullParams& w) {
                   os << "weibull(k=" << w.shape << ",lambda=" << w.scale << ")";
                 },
                 [&](const EmpiricalPiecewise&) { os << "empirical"; },
                 [&](const SampleBased& s) { os << "samples(n=" << s.size() << ")"; },
             },
             law_);
  return os.str();
}

// ---------------------------------------------------------------------------
// Operations

Evaluation evaluate(const DurationModel& model, double t) {
  require_time(t, "evaluate");
  return std::visit(
      Overloaded{
          [t](const WeibullParams& w) {
            return Evaluation{weibull_survival(w, t), weibull_density(w, t)};
          },
          [t](const EmpiricalPiecewise& e) { return Evaluation{e.survival(t), e.density(t)}; },
          [t](const SampleBased& s) {
            return Evaluation{static_cast<double>(s.count_above(t)) / s.size(), sample_kde(s, t)};
          },
      },
      model.law());
}

Moments moments(const DurationModel& model) {
  Moments m = std::visit(
      Overloaded{
          [](const WeibullParams& w) {
            const double mean = w.scale * std::tgamma(1.0 + 1.0 / w.shape);
            const double cv = weibull_cv(w.shape);
            const double second = w.scale * w.scale * std::tgamma(1.0 + 2.0 / w.shape);
            return Moments{mean, cv * mean, cv, second};
          },
          [](const EmpiricalPiecewise& e) {
            double m1 = 0.0;
            double m2 = 0.0;
            for (const auto& seg : e.segments()) {
              m1 += quadrature::integrate([&e](double t) { return t * e.density(t); }, seg.lo,
                                          seg.hi)
                        .value;
              m2 += quadrature::integrate([&e](double t) { return t * t * e.density(t); },
                                          seg.lo, seg.hi)
                        .value;
            }
            const double sd = std::sqrt(std::max(0.0, m2 - m1 * m1));
            return Moments{m1, sd, sd / m1, m2};
          },
          [](const SampleBased& s) {
            const auto xs = s.sorted();
            const double n = static_cast<double>(xs.size());
            const double m1 = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
            double m2 = 0.0;
            double var = 0.0;
            for (double x : xs) {
              m2 += x * x;
              var += (x - m1) * (x - m1);
            }
            m2 /= n;
            const double sd = std::sqrt(var / n);
            return Moments{m1, sd, sd / m1, m2};
          },
      },
      model.law());
  if (!std::isfinite(m.mean) || !std::isfinite(m.sd) || !std::isfinite(m.second_moment)) {
    throw ComputationError("moments: non-finite result for " + model.describe());
  }
  return m;
}

ResidualLife residual_life(const DurationModel& model) {
  const Moments m = moments(model);
  return {m.second_moment / (2.0 * m.mean), residual_mean(m.mean, m.cv)};
}

double residual_mean(const DurationModel& model) {
  const ResidualLife r = residual_life(model);
  if (std::abs(r.from_second_moment - r.from_cv) > 1e-9 * std::abs(r.from_cv)) {
    throw ComputationError("residual mean: E(D^2)/2E(D) and (cv^2+1)/2 E(D) disagree");
  }
  return r.from_second_moment;
}

double residual_mean(double mean, double cv) {
  if (!(mean > 0.0) || !(cv >= 0.0)) throw DomainError("residual mean: need mean > 0, cv >= 0");
  return (cv * cv + 1.0) / 2.0 * mean;
}

double conditional_mean(const DurationModel& model, double t) {
  require_time(t, "conditional_mean");
  if (t == 0.0) return moments(model).mean;
  return std::visit(
      Overloaded{
          [t](const WeibullParams& w) {
            const double z = std::pow(t / w.scale, w.shape);
            require_conditionable(std::exp(-z));
            // integral_t^inf S(x) dx = (lambda/k) * Gamma_upper(1/k, z)
            const double tail = w.scale / w.shape * boost::math::tgamma(1.0 / w.shape, z);
            return t + std::exp(z) * tail;
          },
          [t](const EmpiricalPiecewise& e) {
            const double surv = e.survival(t);
            require_conditionable(surv);
            double acc = 0.0;
            for (const auto& seg : e.segments()) {
              if (seg.hi <= t) continue;
              acc += quadrature::integrate([&e](double x) { return x * e.density(x); },
                                           std::max(seg.lo, t), seg.hi)
                         .value;
            }
            return acc / surv;
          },
          [t](const SampleBased& s) {
            const std::size_t above = s.count_above(t);
            require_conditionable(static_cast<double>(above) / s.size());
            const auto xs = s.sorted();
            return std::accumulate(xs.end() - static_cast<std::ptrdiff_t>(above), xs.end(), 0.0) /
                   static_cast<double>(above);
          },
      },
      model.law());
}

double conditional_mean_quadrature(const DurationModel& model, double t) {
  require_time(t, "conditional_mean_quadrature");
  return std::visit(
      Overloaded{
          [t](const WeibullParams& w) {
            const double z = std::pow(t / w.scale, w.shape);
            require_conditionable(std::exp(-z));
            // S(x) / S(t) stays in (0, 1]; no overflow for any admissible t.
            const auto tail = quadrature::integrate_to_infinity(
                [&w, z](double x) { return std::exp(z - std::pow(x / w.scale, w.shape)); }, t,
                w.scale);
            return t + tail.value;
          },
          [t](const EmpiricalPiecewise& e) {
            const double surv = e.survival(t);
            require_conditionable(surv);
            const double tail =
                quadrature::integrate([&e](double x) { return e.survival(x); }, t, e.support_end())
                    .value;
            return t + tail / surv;
          },
          [t](const SampleBased& s) {
            // The step survival function integrates exactly to the excess sum.
            const std::size_t above = s.count_above(t);
            require_conditionable(static_cast<double>(above) / s.size());
            const auto xs = s.sorted();
            double excess = 0.0;
            for (auto it = xs.end() - static_cast<std::ptrdiff_t>(above); it != xs.end(); ++it) {
              excess += *it - t;
            }
            return t + excess / static_cast<double>(above);
          },
      },
      model.law());
}

Bracket conditional_mean_bounds(const DurationModel& model, double t) {
  require_time(t, "conditional_mean_bounds");
  const double surv = evaluate(model, t).survival;
  require_conditionable(surv);
  return {t, moments(model).mean / surv};
}

double conditional_mean_approx(double cv, double t_minutes) {
  if (!(cv >= 0.0) || !(t_minutes >= 0.0)) {
    throw DomainError("conditional_mean_approx: cv and t must be >= 0");
  }
  return 1.32 * cv + t_minutes * std::sqrt(cv) + 0.59;
}

bool conditional_mean_approx_calibrated(double cv, double t_minutes) {
  return cv >= 0.32 && cv <= 3.14 && t_minutes >= 0.0 && t_minutes <= 455.0 / 60.0;
}

WeibullParams fit_weibull(double mean, double cv) {
  if (!(mean > 0.0) || !(cv > 0.0)) throw DomainError("fit_weibull: need mean > 0 and cv > 0");
  constexpr double kLo = 0.05;
  constexpr double kHi = 50.0;
  auto f = [cv](double k) { return weibull_cv(k) - cv; };
  const double f_lo = f(kLo);
  const double f_hi = f(kHi);
  if (f_lo * f_hi > 0.0) {
    throw FitRangeError("fit_weibull: cv target not bracketed for k in [0.05, 50]");
  }
  std::uintmax_t iterations = 200;
  const auto root = boost::math::tools::toms748_solve(
      f, kLo, kHi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(52), iterations);
  const double k = 0.5 * (root.first + root.second);
  return WeibullParams(k, mean / std::tgamma(1.0 + 1.0 / k));
}

double inverse_survival(const DurationModel& model, double u) {
  if (!(u > 0.0 && u <= 1.0)) throw DomainError("inverse_survival: u must lie in (0, 1]");
  return std::visit(
      Overloaded{
          [u](const WeibullParams& w) { return w.scale * std::pow(-std::log(u), 1.0 / w.shape); },
          [u](const EmpiricalPiecewise& e) { return e.quantile(1.0 - u); },
          [u](const SampleBased& s) {
            const auto xs = s.sorted();
            const auto n = static_cast<double>(xs.size());
            const auto idx = static_cast<std::size_t>(std::min(n - 1.0, std::floor((1.0 - u) * n)));
            return xs[idx];
          },
      },
      model.law());
}

double sample_duration(const DurationModel& model, RandomStream& rng) {
  if (const auto* s = std::get_if<SampleBased>(&model.law())) {
    std::uniform_int_distribution<std::size_t> pick(0, s->size() - 1);
    return s->sorted()[pick(rng)];
  }
  return inverse_survival(model, uniform_open_zero(rng));
}

std::span<const ReferenceWeibull> reference_weibulls() {
  static constexpr std::array<ReferenceWeibull, 8> kTable = {{
      {3.4, 130.57, 0.32},
      {2.0, 132.37, 0.52},
      {1.2, 124.71, 0.84},
      {1.0, 117.31, 1.0},
      {0.8, 103.54, 1.26},
      {0.6, 77.97, 1.76},
      {0.5, 58.65, 2.23},
      {0.4, 35.3, 3.14},
  }};
  return kTable;
}

}  // namespace lack
