#pragma once

// Time-dependent hidden-data insertion rate:
//   IR(t)  = S_R(t) / E(D | D > t), capped by voice-quality headroom,
//   S_R(t) = S - integral_0^t IR(x) dx.

#include <limits>
#include <memory>
#include <vector>

#include "lack/duration_models.hpp"
#include "lack/random.hpp"
#include "lack/voice_quality.hpp"

namespace lack {

enum class SchedulerMode {
  DistributionDriven,  // exact E(D | D > t)
  ApproxLinear,        // 1.32 cv + t sqrt(cv) + 0.59 minutes
  OnlineMeasurement,   // distribution-driven, cap refreshed from loss reports
  FixedRate,           // constant rate until the budget is spent
};

// E(D | D > t) as a callable. Piecewise-empirical laws are tabulated once
// (0.25 s grid, linear interpolation); the others evaluate directly.
class ConditionalMeanCurve {
 public:
  explicit ConditionalMeanCurve(DurationModel model);

  double operator()(double t) const;
  const DurationModel& model() const noexcept { return model_; }
  const Moments& model_moments() const noexcept { return moments_; }

 private:
  DurationModel model_;
  Moments moments_;
  double grid_step_ = 0.0;
  std::vector<double> table_;
};

struct SchedulerState {
  double s_total = 0.0;
  double s_remaining = 0.0;
  double elapsed = 0.0;
  std::shared_ptr<const ConditionalMeanCurve> curve;
  SchedulerMode mode = SchedulerMode::DistributionDriven;
  double ir_cap = std::numeric_limits<double>::infinity();
  double step_s = 0.02;
  double fixed_rate_bps = 0.0;
  double delivered = 0.0;  // integral of IR so far

  static SchedulerState start(double s_total, DurationModel model,
                              SchedulerMode mode = SchedulerMode::DistributionDriven,
                              double step_s = 0.02);
};

double initial_rate(double s_total, const DurationModel& model);
// Denominator of the rate rule at the state's elapsed time, in seconds.
double expected_duration_given_elapsed(const SchedulerState& state);
double rate_at(const SchedulerState& state);
SchedulerState advance(SchedulerState state, double dt);

struct SchedulePoint {
  double t;
  double ir;
  double s_remaining;
  double cond_mean;
};

struct RateSchedule {
  std::vector<SchedulePoint> points;
};

// Samples the schedule every `sample_every` seconds up to `horizon`, stopping
// early where conditioning on D > t becomes undefined.
RateSchedule build_schedule(SchedulerState state, double horizon, double sample_every);

// X(t) = IR(0) - IR(t), linear interpolation between schedule points.
double rate_reduction(const RateSchedule& schedule, double t);

double selection_probability(const SchedulerState& state, const CodecProfile& codec);
bool select_for_embedding(const SchedulerState& state, const CodecProfile& codec,
                          RandomStream& rng);

// Per-packet selection with either Bernoulli draws or deterministic spacing
// (credit accumulator, selects when accumulated probability reaches 1).
class EmbeddingSelector {
 public:
  enum class Kind { Bernoulli, Deterministic };
  explicit EmbeddingSelector(Kind kind = Kind::Bernoulli) : kind_(kind) {}

  bool select(const SchedulerState& state, const CodecProfile& codec, RandomStream& rng);

 private:
  Kind kind_;
  double credit_ = 0.0;
};

// Rate ceiling from the codec loss budget and a MOS floor. A floor at or below
// gamma means no MOS constraint.
double cap_from_quality(const CodecProfile& codec, const MosParams& mos_params, double p_network,
                        double mos_floor, bool plc);

}  // namespace lack
