#include "lack/insertion_scheduler.hpp"

#include <algorithm>
#include <cmath>

#include "lack/errors.hpp"

namespace lack {

ConditionalMeanCurve::ConditionalMeanCurve(DurationModel model)
    : model_(std::move(model)), moments_(moments(model_)) {
  if (const auto* e = std::get_if<EmpiricalPiecewise>(&model_.law())) {
    grid_step_ = 0.25;
    for (double t = 0.0; t < e->support_end(); t += grid_step_) {
      if (!(e->survival(t) > kMinSurvival)) break;
      table_.push_back(conditional_mean(model_, t));
    }
  }
}

double ConditionalMeanCurve::operator()(double t) const {
  if (table_.empty()) return conditional_mean(model_, t);
  if (!(t >= 0.0)) throw DomainError("conditional mean: time must be >= 0");
  const double pos = t / grid_step_;
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= table_.size()) {
    if (i + 1 == table_.size() && pos == static_cast<double>(i)) return table_[i];
    throw ConditioningError("conditional mean: beyond the support of the duration law");
  }
  const double w = pos - static_cast<double>(i);
  return table_[i] * (1.0 - w) + table_[i + 1] * w;
}

SchedulerState SchedulerState::start(double s_total, DurationModel model, SchedulerMode mode,
                                     double step_s) {
  if (!(s_total >= 0.0)) throw DomainError("steganogram size must be >= 0");
  if (!(step_s > 0.0)) throw DomainError("integration step must be > 0");
  SchedulerState s;
  s.s_total = s_total;
  s.s_remaining = s_total;
  s.curve = std::make_shared<const ConditionalMeanCurve>(std::move(model));
  s.mode = mode;
  s.step_s = step_s;
  return s;
}

double initial_rate(double s_total, const DurationModel& model) {
  if (!(s_total >= 0.0)) throw DomainError("steganogram size must be >= 0");
  if (s_total == 0.0) return 0.0;
  return s_total / moments(model).mean;
}

double expected_duration_given_elapsed(const SchedulerState& state) {
  if (state.mode == SchedulerMode::ApproxLinear) {
    const double cv = state.curve->model_moments().cv;
    return 60.0 * conditional_mean_approx(cv, state.elapsed / 60.0);
  }
  return (*state.curve)(state.elapsed);
}

double rate_at(const SchedulerState& state) {
  if (!(state.s_remaining > 0.0)) return 0.0;
  double ir = 0.0;
  if (state.mode == SchedulerMode::FixedRate) {
    ir = state.fixed_rate_bps;
  } else {
    ir = state.s_remaining / expected_duration_given_elapsed(state);
  }
  return std::min(state.ir_cap, ir);
}

SchedulerState advance(SchedulerState state, double dt) {
  if (!(dt > 0.0)) throw DomainError("advance: dt must be > 0");
  const auto steps = static_cast<long>(std::max(1.0, std::ceil(dt / state.step_s - 1e-9)));
  const double h = dt / static_cast<double>(steps);
  const double t0 = state.elapsed;
  // Explicit trapezoid (Heun) on dS/dt = -IR(S, t).
  for (long i = 0; i < steps; ++i) {
    const double ir0 = rate_at(state);
    SchedulerState probe = state;
    probe.s_remaining = std::max(0.0, state.s_remaining - h * ir0);
    probe.elapsed = t0 + static_cast<double>(i + 1) * h;
    const double ir1 = rate_at(probe);
    const double spent = std::min(state.s_remaining, 0.5 * h * (ir0 + ir1));
    state.s_remaining -= spent;
    state.delivered += spent;
    state.elapsed = probe.elapsed;
  }
  state.elapsed = t0 + dt;
  return state;
}

RateSchedule build_schedule(SchedulerState state, double horizon, double sample_every) {
  if (!(horizon > 0.0) || !(sample_every > 0.0)) {
    throw DomainError("schedule horizon and sampling interval must be > 0");
  }
  RateSchedule out;
  const auto& law = state.curve->model();
  auto conditionable = [&law](double t) { return evaluate(law, t).survival > kMinSurvival; };
  const auto samples = static_cast<long>(std::floor(horizon / sample_every + 1e-9));
  for (long i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) * sample_every;
    if (i > 0) {
      if (!conditionable(t)) break;
      state = advance(std::move(state), t - state.elapsed);
    }
    out.points.push_back({t, rate_at(state), state.s_remaining, (*state.curve)(t)});
  }
  return out;
}

double rate_reduction(const RateSchedule& schedule, double t) {
  const auto& pts = schedule.points;
  if (pts.empty() || !(t >= pts.front().t && t <= pts.back().t)) {
    throw DomainError("rate_reduction: t outside the schedule");
  }
  const auto it = std::lower_bound(pts.begin(), pts.end(), t,
                                   [](const SchedulePoint& p, double v) { return p.t < v; });
  double ir = it->ir;
  if (it->t != t) {
    const auto& a = *(it - 1);
    const auto& b = *it;
    const double w = (t - a.t) / (b.t - a.t);
    ir = a.ir * (1.0 - w) + b.ir * w;
  }
  return pts.front().ir - ir;
}

double selection_probability(const SchedulerState& state, const CodecProfile& codec) {
  if (state.s_remaining < 1.0) return 0.0;
  return std::clamp(rate_at(state) / codec.payload_rate(), 0.0, 1.0);
}

bool select_for_embedding(const SchedulerState& state, const CodecProfile& codec,
                          RandomStream& rng) {
  const double p = selection_probability(state, codec);
  if (p <= 0.0) return false;
  return std::bernoulli_distribution(p)(rng);
}

bool EmbeddingSelector::select(const SchedulerState& state, const CodecProfile& codec,
                               RandomStream& rng) {
  if (kind_ == Kind::Bernoulli) return select_for_embedding(state, codec, rng);
  credit_ += selection_probability(state, codec);
  if (credit_ >= 1.0) {
    credit_ -= 1.0;
    return true;
  }
  return false;
}

double cap_from_quality(const CodecProfile& codec, const MosParams& mos_params, double p_network,
                        double mos_floor, bool plc) {
  const double budget = loss_budget(codec, plc, p_network);
  const double quality = mos_floor <= mos_params.gamma
                             ? 1.0
                             : max_p_lack(mos_params, p_network, mos_floor);
  return codec.payload_rate() * std::min(budget, quality);
}

}  // namespace lack
