#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "coachrl/error.hpp"

namespace coachrl {

// Simulation time: UTC seconds since the configured epoch anchor. Calendar
// days are plain indices from the epoch (day 0, day 1, ...).
using Timestamp = std::int64_t;
inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kSecondsPerHour = 3600;
inline constexpr std::int64_t kSecondsPerMinute = 60;

enum class Gender { Female, Male };
enum class Arm { Control, Personalized };

const char* to_string(Gender g);
const char* to_string(Arm a);

// The full message catalog: four daily actions, five weekly summary variants,
// and the control arm's fixed reminder.
enum class MessageKind {
  Negative,
  PositiveSelf,
  PositiveSocial,
  NoMessage,
  WeeklyReminder,
  MaxIncrease,
  SigIncrease,
  MaxSocial,
  SigSocial,
  ControlReminder,
};

inline constexpr std::array<MessageKind, 4> kDailyKinds = {
    MessageKind::Negative, MessageKind::PositiveSelf,
    MessageKind::PositiveSocial, MessageKind::NoMessage};

inline constexpr std::array<MessageKind, 5> kWeeklyKinds = {
    MessageKind::WeeklyReminder, MessageKind::MaxIncrease,
    MessageKind::SigIncrease, MessageKind::MaxSocial, MessageKind::SigSocial};

bool is_daily_kind(MessageKind k);
bool is_weekly_kind(MessageKind k);
int daily_index(MessageKind k);  // 0..3; throws ValidationError otherwise
const char* to_string(MessageKind k);
MessageKind message_kind_from_string(std::string_view s);

struct PatientProfile {
  std::string id;
  int age = 0;
  Gender gender = Gender::Female;
  double weekly_goal = 0.0;  // minutes of walking per week
  int sessions_per_week = 0;
  Arm arm = Arm::Control;
  double baseline_hba1c = 0.0;  // percent
  int enrolled_on = 0;          // day index; anchors the personal plan week

  void validate() const;  // throws ValidationError on broken invariants
};

// One detected contiguous walk. Walks under 10 minutes are never stored.
struct WalkSession {
  Timestamp start = 0;
  double duration = 0.0;  // minutes
  double cadence = 0.0;   // steps per minute
};

inline constexpr double kMinSessionMinutes = 10.0;

struct DailyRecord {
  std::string patient_id;
  int date = 0;          // day index
  double minutes = 0.0;  // total detected walking minutes that day
  std::optional<double> mean_cadence;       // absent when minutes == 0
  std::optional<MessageKind> message_sent;  // absent when suppressed
  bool data_fresh = true;  // last upload < 12 h old at decision time
};

// Day-over-day activity ratio, smoothed and capped so that zero-activity days
// neither blow up nor zero out the training signal.
struct Reward {
  double value = 1.0;
};

inline constexpr double kRewardSmoothingMinutes = 10.0;
inline constexpr double kRewardCap = 5.0;

// floor(100 * cum / goal); integer >= 0 and may exceed 100.
int goal_fraction_percent(double cum_minutes, double weekly_goal);

// min(cap, (next + c) / (prev + c)) with c = kRewardSmoothingMinutes.
Reward compute_reward(double minutes_t, double minutes_next);

// Exact catalog text; goal_pct fills the "N%" slot of the positive messages
// and is ignored by every other kind. NoMessage renders empty.
std::string render_message(MessageKind kind, int goal_pct = 0);

// Catalog form with the N placeholder left symbolic, for audit dumps.
std::string message_template(MessageKind kind);

// Expected fraction of the weekly activity completed by (and including) the
// given plan-week day, 1..7.
double expected_week_fraction(int day_of_week);

// Plan-week day 1..7 for a calendar day, anchored at the enrollment weekday.
int day_of_week(int day, int enrolled_on);

}  // namespace coachrl
