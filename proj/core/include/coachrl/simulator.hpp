#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coachrl/core.hpp"
#include "coachrl/rng.hpp"

namespace coachrl {

// Behavioral archetype. `response` holds the multiplicative effect of each
// daily message kind on next-day activity, in daily-kind order.
struct ArchetypeParams {
  std::string name;
  std::array<double, 4> response{};
  double habituation_tau = 3.0;   // days
  double base_adherence = 1.0;    // probability of any walking on a day
  double daily_noise_sd = 0.06;   // lognormal sigma on the daily propensity
  double female_prob = 0.5;       // gender mix within the archetype
};

// Qualitative pattern targets: negative responders decline under any message,
// weak responders barely move, positive responders thrive on positive social
// feedback. Magnitudes are desk-scale calibrations, all configurable.
std::map<std::string, ArchetypeParams> default_archetypes();

struct HbA1cParams {
  double k_glyc = 0.6;        // max percent-point reduction at full adherence
  double weekly_rate = 0.08;  // drift rate toward the activity target
  double noise_sd = 0.01;     // weekly process noise, percent points
  int measure_interval_weeks = 13;
};

struct DropoutParams {
  double complete_prob = 0.45;   // finishes the study
  double early_min_weeks = 4.0;  // otherwise uniform transmission length
  double early_max_weeks = 26.0;
};

struct OutageWindow {
  double start_hours = 0.0;  // simulation hours since the epoch
  double end_hours = 0.0;
  std::string patient_id;    // empty = every patient
};

inline constexpr Timestamp kDefaultEpoch = 1767225600;  // 2026-01-01T00:00:00Z

struct SimParams {
  Timestamp epoch = kDefaultEpoch;  // UTC anchor of simulation day 0
  double sampling_period_minutes = 3.5;
  double transmit_period_hours = 2.5;
  double outage_prob = 0.05;
  double decision_hour = 8.0;
  double staleness_hours = 12.0;

  // Propensity dynamics. Daily expected minutes follow the habit anchor
  // scaled by the message effect and lognormal noise; the anchor itself
  // ratchets toward realized behavior and decays toward a sedentary floor
  // when unsupported. min_activity_minutes keeps anyone who walks at all on
  // a scale the 10-minute sensing floor can see.
  double initial_propensity_fraction = 0.7;  // of weekly_goal / 7
  double habit_gain = 0.10;
  double decondition_rate = 0.008;           // per day
  double sedentary_floor_fraction = 0.25;    // of weekly_goal / 7
  double propensity_cap_fraction = 2.0;      // of weekly_goal / 7
  double min_activity_minutes = 13.0;        // absolute floor of the scale

  // Engagement: the habit of going out at all. It decays toward its floor
  // without positive stimulus and recovers with well-received messages; the
  // daily walking probability is base_adherence * engagement. Walks that do
  // happen stay full-sized, so detectability is unaffected.
  double engagement_gain = 0.15;
  double engagement_decay = 0.020;  // per day
  double engagement_floor = 0.80;

  // Walk realization and cadence.
  double walk_session_target_minutes = 20.0;
  double cadence_mean = 100.0;
  double cadence_sd = 10.0;
  double cadence_coupling = 0.3;     // cadence tracks the habit ratio
  double cadence_session_sd = 3.0;

  HbA1cParams hba1c;
  DropoutParams dropout;
  std::vector<OutageWindow> outage_windows;
  std::map<std::string, ArchetypeParams> archetypes = default_archetypes();
};

// Ground-truth walk; may be shorter than the 10-minute detection floor.
struct TrueWalk {
  Timestamp start = 0;
  double duration = 0.0;  // minutes, > 0
  double cadence = 0.0;   // steps per minute
};

struct SimPatientState {
  PatientProfile profile;
  ArchetypeParams archetype;
  double propensity = 0.0;  // expected minutes today
  double habit = 0.0;       // slow-moving anchor of the propensity
  double habit_ref = 0.0;   // initial anchor, reference for cadence coupling
  double engagement = 1.0;  // probability scale of walking at all
  double cadence_base = 100.0;
  double hba1c = 0.0;
  Timestamp last_upload = 0;
  std::optional<int> dropout_week;

  // Transmission state: detected sessions waiting for a successful slot,
  // keyed by the walk end time that makes them eligible.
  std::vector<std::pair<Timestamp, WalkSession>> pending_upload;
};

// Advances one patient by one day: applies the message effect (damped by
// habituation freshness), updates the habit anchor, and realizes the next
// day's ground-truth walks. `days_since_same_message` is infinity when the
// kind was never sent before. Suppressed days carry no effect.
std::vector<TrueWalk> step_patient(SimPatientState& state,
                                   std::optional<MessageKind> message,
                                   double days_since_same_message,
                                   int next_day, const SimParams& params,
                                   RngStream& rng);

// Habituation damping in [0, 1): repeated identical messages lose bite.
double habituation_freshness(double days_since_same_message, double tau);

// Accelerometer sensing: one sample every sampling period; a walk is seen iff
// a sampling instant lands inside it; measured duration is the true duration
// quantized down to the grid; sessions under 10 measured minutes are dropped.
std::vector<WalkSession> sense_walks(std::span<const TrueWalk> walks,
                                     double sampling_period_minutes = 3.5);

// One transmission slot: on success every pending session whose walk ended by
// the slot time is delivered and last_upload advances (a successful slot with
// nothing pending still counts as a heartbeat). On outage everything waits
// for the next slot. Returns the delivered batch, or nullopt on failure.
std::optional<std::vector<WalkSession>> attempt_upload(SimPatientState& state,
                                                       Timestamp slot_time,
                                                       double outage_prob,
                                                       bool forced_outage,
                                                       RngStream& rng);

// Weekly glycemia update: HbA1c drifts toward
// baseline - k_glyc * min(1, activity_fraction) with process noise.
void hba1c_step(SimPatientState& state, double mean_weekly_activity_fraction,
                const HbA1cParams& params, RngStream& rng);

inline Timestamp day_start(Timestamp epoch, int day) {
  return epoch + static_cast<Timestamp>(day) * kSecondsPerDay;
}

inline Timestamp decision_time(Timestamp epoch, int day, double decision_hour) {
  return day_start(epoch, day) +
         static_cast<Timestamp>(decision_hour * kSecondsPerHour);
}

}  // namespace coachrl
