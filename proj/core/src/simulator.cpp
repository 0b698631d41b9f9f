#include "coachrl/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace coachrl {

std::map<std::string, ArchetypeParams> default_archetypes() {
  std::map<std::string, ArchetypeParams> out;
  ArchetypeParams negative;
  negative.name = "negative_responder";
  negative.response = {-0.30, -0.15, -0.10, 0.0};
  negative.female_prob = 0.50;
  out[negative.name] = negative;

  ArchetypeParams weak;
  weak.name = "weak_responder";
  weak.response = {-0.10, 0.07, 0.11, 0.0};
  weak.female_prob = 0.62;
  out[weak.name] = weak;

  ArchetypeParams positive;
  positive.name = "positive_responder";
  positive.response = {-0.05, 0.45, 0.60, 0.0};
  positive.female_prob = 0.17;
  out[positive.name] = positive;
  return out;
}

double habituation_freshness(double days_since_same_message, double tau) {
  if (!(tau > 0.0))
    throw ValidationError("habituation: tau must be > 0");
  if (days_since_same_message <= 0.0) return 0.0;
  return 1.0 - std::exp(-days_since_same_message / tau);
}

namespace {

// Splits day minutes into 1..3 non-overlapping walks within the waking
// window, with jittered durations that sum to the total.
std::vector<TrueWalk> realize_walks(double total_minutes, double cadence_today,
                                    int day, const SimParams& params,
                                    RngStream& rng) {
  std::vector<TrueWalk> walks;
  if (total_minutes <= 0.5) return walks;

  const double target = std::max(10.0, params.walk_session_target_minutes);
  int n;
  if (total_minutes < 1.5 * target) {
    n = 1;
  } else {
    const double more = std::min(1.0, total_minutes / (3.0 * target));
    const std::array<double, 3> weights = {1.0 - more, 0.7 + 0.3 * more,
                                           0.3 + 0.7 * more};
    n = 1 + static_cast<int>(rng.categorical(weights));
  }
  // With jittered splits the smallest share of n parts is 0.8/(0.8+1.2(n-1));
  // keep every part above the 10-minute sensing floor.
  if (n == 3 && total_minutes < 42.0) n = 2;
  if (n == 2 && total_minutes < 27.0) n = 1;

  std::array<double, 3> parts{};
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    parts[i] = rng.uniform(0.8, 1.2);
    sum += parts[i];
  }

  // Walks live between 08:00 and 21:00, one per equal slot of that window.
  const Timestamp base = day_start(params.epoch, day);
  const double window_start_h = 8.0;
  const double window_hours = 13.0;
  const double slot_hours = window_hours / n;
  for (int i = 0; i < n; ++i) {
    TrueWalk w;
    w.duration = total_minutes * parts[i] / sum;
    const double max_offset_h =
        std::max(0.0, slot_hours - w.duration / 60.0 - 0.25);
    const double start_h =
        window_start_h + i * slot_hours + rng.uniform() * max_offset_h;
    w.start = base + static_cast<Timestamp>(start_h * kSecondsPerHour);
    w.cadence = std::max(40.0, cadence_today +
                                   rng.normal(0.0, params.cadence_session_sd));
    walks.push_back(w);
  }
  return walks;
}

}  // namespace

std::vector<TrueWalk> step_patient(SimPatientState& state,
                                   std::optional<MessageKind> message,
                                   double days_since_same_message,
                                   int next_day, const SimParams& params,
                                   RngStream& rng) {
  const double daily_goal = state.profile.weekly_goal / 7.0;
  const double floor = std::max(params.sedentary_floor_fraction * daily_goal,
                                params.min_activity_minutes);
  const double cap = std::max(params.propensity_cap_fraction * daily_goal,
                              1.5 * params.min_activity_minutes);

  double effect = 0.0;
  double freshness = 0.0;
  if (message.has_value()) {
    effect = state.archetype.response[static_cast<std::size_t>(
        daily_index(*message))];
    freshness = std::isinf(days_since_same_message)
                    ? 1.0
                    : habituation_freshness(days_since_same_message,
                                            state.archetype.habituation_tau);
  }

  const double noise = rng.lognormal_mean_one(state.archetype.daily_noise_sd);
  state.propensity =
      std::max(0.0, state.habit * (1.0 + effect * freshness) * noise);

  // Habit ratchets toward today's realized propensity and decays toward the
  // sedentary floor when unsupported.
  state.habit += params.habit_gain * (state.propensity - state.habit);
  state.habit -= params.decondition_rate * (state.habit - floor);
  state.habit = std::clamp(state.habit, floor, cap);

  const double habit_ratio =
      state.habit_ref > 0.0 ? state.habit / state.habit_ref : 1.0;
  const double cadence_today =
      state.cadence_base * (1.0 + params.cadence_coupling * (habit_ratio - 1.0));

  // Engagement decays without encouragement that lands; only well-received
  // messages (positive effect) restore it.
  state.engagement += params.engagement_gain * std::max(0.0, effect * freshness) -
                      params.engagement_decay *
                          (state.engagement - params.engagement_floor);
  state.engagement = std::clamp(state.engagement, params.engagement_floor, 1.0);

  // Adherence gate: a skipped day has zero walks; a walk day realizes the
  // full propensity, so disengagement lowers the weekly total without
  // shrinking individual walks below detectability.
  const double adherence = std::clamp(
      state.archetype.base_adherence * state.engagement, 0.05, 1.0);
  if (rng.uniform() >= adherence) return {};

  return realize_walks(state.propensity, cadence_today, next_day, params, rng);
}

std::vector<WalkSession> sense_walks(std::span<const TrueWalk> walks,
                                     double sampling_period_minutes) {
  if (!(sampling_period_minutes > 0.0))
    throw ValidationError("sense_walks: sampling period must be > 0");
  const double period_s = sampling_period_minutes * kSecondsPerMinute;

  std::vector<TrueWalk> sorted(walks.begin(), walks.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const TrueWalk& a, const TrueWalk& b) { return a.start < b.start; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const double prev_end = static_cast<double>(sorted[i - 1].start) +
                            sorted[i - 1].duration * kSecondsPerMinute;
    if (static_cast<double>(sorted[i].start) < prev_end)
      throw ValidationError("sense_walks: overlapping walks");
  }

  std::vector<WalkSession> sessions;
  for (const TrueWalk& w : sorted) {
    if (!(w.duration > 0.0))
      throw ValidationError("sense_walks: non-positive walk duration");
    const double start_s = static_cast<double>(w.start);
    const double end_s = start_s + w.duration * kSecondsPerMinute;
    // First sampling instant at or after the walk start.
    const double first_sample = std::ceil(start_s / period_s) * period_s;
    if (first_sample >= end_s) continue;  // slept through the whole walk

    const double measured_minutes =
        std::floor(w.duration / sampling_period_minutes) *
        sampling_period_minutes;
    if (measured_minutes < kMinSessionMinutes) continue;

    WalkSession s;
    s.start = w.start;
    s.duration = measured_minutes;
    s.cadence = w.cadence;
    sessions.push_back(s);
  }
  return sessions;
}

std::optional<std::vector<WalkSession>> attempt_upload(SimPatientState& state,
                                                       Timestamp slot_time,
                                                       double outage_prob,
                                                       bool forced_outage,
                                                       RngStream& rng) {
  // The outage draw is consumed every slot so that the stream stays aligned
  // regardless of outcomes.
  const double u = rng.uniform();
  if (forced_outage || u < outage_prob) return std::nullopt;

  std::vector<WalkSession> delivered;
  auto& pending = state.pending_upload;
  auto it = pending.begin();
  while (it != pending.end()) {
    if (it->first <= slot_time) {
      delivered.push_back(it->second);
      it = pending.erase(it);
    } else {
      ++it;
    }
  }
  state.last_upload = slot_time;
  return delivered;
}

void hba1c_step(SimPatientState& state, double mean_weekly_activity_fraction,
                const HbA1cParams& params, RngStream& rng) {
  if (mean_weekly_activity_fraction < 0.0)
    throw ValidationError("hba1c_step: negative activity fraction");
  const double target =
      state.profile.baseline_hba1c -
      params.k_glyc * std::min(1.0, mean_weekly_activity_fraction);
  state.hba1c += params.weekly_rate * (target - state.hba1c) +
                 rng.normal(0.0, params.noise_sd);
  state.hba1c = std::max(4.5, state.hba1c);
}

}  // namespace coachrl
