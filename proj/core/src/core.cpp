#include "coachrl/core.hpp"

#include <cmath>

namespace coachrl {

const char* to_string(Gender g) {
  return g == Gender::Female ? "female" : "male";
}

const char* to_string(Arm a) {
  return a == Arm::Control ? "control" : "personalized";
}

bool is_daily_kind(MessageKind k) {
  switch (k) {
    case MessageKind::Negative:
    case MessageKind::PositiveSelf:
    case MessageKind::PositiveSocial:
    case MessageKind::NoMessage:
      return true;
    default:
      return false;
  }
}

bool is_weekly_kind(MessageKind k) {
  switch (k) {
    case MessageKind::WeeklyReminder:
    case MessageKind::MaxIncrease:
    case MessageKind::SigIncrease:
    case MessageKind::MaxSocial:
    case MessageKind::SigSocial:
      return true;
    default:
      return false;
  }
}

int daily_index(MessageKind k) {
  switch (k) {
    case MessageKind::Negative:
      return 0;
    case MessageKind::PositiveSelf:
      return 1;
    case MessageKind::PositiveSocial:
      return 2;
    case MessageKind::NoMessage:
      return 3;
    default:
      throw ValidationError(std::string("not a daily message kind: ") +
                            to_string(k));
  }
}

const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::Negative:
      return "negative";
    case MessageKind::PositiveSelf:
      return "positive_self";
    case MessageKind::PositiveSocial:
      return "positive_social";
    case MessageKind::NoMessage:
      return "no_message";
    case MessageKind::WeeklyReminder:
      return "weekly_reminder";
    case MessageKind::MaxIncrease:
      return "max_increase";
    case MessageKind::SigIncrease:
      return "sig_increase";
    case MessageKind::MaxSocial:
      return "max_social";
    case MessageKind::SigSocial:
      return "sig_social";
    case MessageKind::ControlReminder:
      return "control_reminder";
  }
  return "unknown";
}

MessageKind message_kind_from_string(std::string_view s) {
  for (MessageKind k :
       {MessageKind::Negative, MessageKind::PositiveSelf,
        MessageKind::PositiveSocial, MessageKind::NoMessage,
        MessageKind::WeeklyReminder, MessageKind::MaxIncrease,
        MessageKind::SigIncrease, MessageKind::MaxSocial,
        MessageKind::SigSocial, MessageKind::ControlReminder}) {
    if (s == to_string(k)) return k;
  }
  throw ValidationError("unknown message kind: " + std::string(s));
}

void PatientProfile::validate() const {
  if (id.empty()) throw ValidationError("patient id must not be empty");
  if (!(weekly_goal > 0.0))
    throw ValidationError("patient " + id + ": weekly_goal must be > 0");
  if (sessions_per_week < 1)
    throw ValidationError("patient " + id + ": sessions_per_week must be >= 1");
  if (!(baseline_hba1c > 0.0))
    throw ValidationError("patient " + id + ": baseline_hba1c must be > 0");
  if (age <= 0) throw ValidationError("patient " + id + ": age must be > 0");
}

int goal_fraction_percent(double cum_minutes, double weekly_goal) {
  if (!(weekly_goal > 0.0))
    throw ValidationError("goal_fraction_percent: weekly_goal must be > 0");
  if (cum_minutes < 0.0)
    throw ValidationError("goal_fraction_percent: negative cumulative minutes");
  return static_cast<int>(std::floor(100.0 * cum_minutes / weekly_goal));
}

Reward compute_reward(double minutes_t, double minutes_next) {
  if (minutes_t < 0.0 || minutes_next < 0.0)
    throw ValidationError("compute_reward: negative minutes");
  const double ratio = (minutes_next + kRewardSmoothingMinutes) /
                       (minutes_t + kRewardSmoothingMinutes);
  return Reward{std::min(kRewardCap, ratio)};
}

namespace {

const char* raw_template(MessageKind kind) {
  switch (kind) {
    case MessageKind::Negative:
      return "You need to exercise to reach your activity goals. Please "
             "remember to exercise tomorrow";
    case MessageKind::PositiveSelf:
      return "You have so far achieved {N}% of your weekly activity goal. "
             "Your exercise level is in accordance with your plan. Keep up "
             "the good work";
    case MessageKind::PositiveSocial:
      return "You have so far achieved {N}% of your weekly activity goal. "
             "You are exercising more than the average person in your group. "
             " Keep up the good work";
    case MessageKind::NoMessage:
      return "";
    case MessageKind::WeeklyReminder:
      return "Please remember to exercise this week to reach your activity "
             "goals.";
    case MessageKind::MaxIncrease:
      return "Over the past week you increased your activity more than at "
             "any previous week.";
    case MessageKind::SigIncrease:
      return "Over the past week you increased your activity more than most "
             "previous weeks.";
    case MessageKind::MaxSocial:
      return "You won the first place! Last week you increased your activity "
             "more than any other participant in the experiment.";
    case MessageKind::SigSocial:
      return "Last week you increased your activity more than most "
             "participants of the experiment.";
    case MessageKind::ControlReminder:
      return "Please remember to exercise this week to reach your activity "
             "goals.";
  }
  throw ValidationError("unknown message kind");
}

std::string substitute_token(std::string text, const std::string& value) {
  const std::string token = "{N}";
  const auto pos = text.find(token);
  if (pos != std::string::npos) text.replace(pos, token.size(), value);
  return text;
}

}  // namespace

std::string render_message(MessageKind kind, int goal_pct) {
  return substitute_token(raw_template(kind), std::to_string(goal_pct));
}

std::string message_template(MessageKind kind) {
  return substitute_token(raw_template(kind), "N");
}

double expected_week_fraction(int day_of_week) {
  if (day_of_week < 1 || day_of_week > 7)
    throw ValidationError("expected_week_fraction: day_of_week must be 1..7");
  // The current day counts toward the week: the morning message targets
  // activity for the day that is just starting.
  return static_cast<double>(day_of_week) / 7.0;
}

int day_of_week(int day, int enrolled_on) {
  const int delta = day - enrolled_on;
  if (delta < 0) throw ValidationError("day_of_week: day precedes enrollment");
  return delta % 7 + 1;
}

}  // namespace coachrl
