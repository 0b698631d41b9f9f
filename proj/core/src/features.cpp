#include "coachrl/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coachrl {

std::array<double, kContextFeatures> ContextVector::values() const {
  return {last_day_minutes, week_cum_minutes,  goal_fraction,
          fraction_vs_expected, age,           gender_indicator,
          recency[0],       recency[1],        recency[2],
          recency[3]};
}

ContextVector context_from_values(
    const std::array<double, kContextFeatures>& v) {
  ContextVector c;
  c.last_day_minutes = v[0];
  c.week_cum_minutes = v[1];
  c.goal_fraction = v[2];
  c.fraction_vs_expected = v[3];
  c.age = v[4];
  c.gender_indicator = v[5];
  for (std::size_t r = 0; r < 4; ++r) c.recency[r] = v[6 + r];
  return c;
}

const std::array<std::string, kContextFeatures>& context_feature_names() {
  static const std::array<std::string, kContextFeatures> names = {
      "last_day_minutes", "week_cum_minutes",  "goal_fraction",
      "fraction_vs_expected", "age",           "gender",
      "recency_negative", "recency_positive_self",
      "recency_positive_social", "recency_no_message"};
  return names;
}

std::array<double, 4> recency_features(
    std::span<const std::pair<int, MessageKind>> message_log, int today,
    double cap) {
  std::array<double, 4> out{cap, cap, cap, cap};
  int prev_day = std::numeric_limits<int>::min();
  for (const auto& [day, kind] : message_log) {
    if (day < prev_day)
      throw ValidationError("recency_features: message log not sorted by day");
    if (day >= today)
      throw ValidationError("recency_features: log entry not before today");
    prev_day = day;
    out[static_cast<std::size_t>(daily_index(kind))] =
        std::min(cap, static_cast<double>(today - day));
  }
  return out;
}

ContextVector build_context(
    const PatientProfile& profile, std::span<const DailyRecord> records,
    std::span<const std::pair<int, MessageKind>> message_log, int today,
    double recency_cap) {
  profile.validate();
  const int dow = day_of_week(today, profile.enrolled_on);
  const int week_start = today - (dow - 1);

  ContextVector c;
  for (const DailyRecord& r : records) {
    if (r.date == today - 1) c.last_day_minutes += r.minutes;
    if (r.date >= week_start && r.date < today) c.week_cum_minutes += r.minutes;
  }
  c.goal_fraction = c.week_cum_minutes / profile.weekly_goal;
  c.fraction_vs_expected = c.goal_fraction / expected_week_fraction(dow);
  c.age = static_cast<double>(profile.age);
  c.gender_indicator = profile.gender == Gender::Female ? 1.0 : 0.0;
  c.recency = recency_features(message_log, today, recency_cap);
  return c;
}

Standardization Standardization::identity() {
  Standardization s;
  s.mean.fill(0.0);
  s.scale.fill(1.0);
  return s;
}

Standardization Standardization::fit(std::span<const ContextVector> pool) {
  if (pool.empty())
    throw ValidationError("Standardization::fit: empty training pool");
  Standardization s;
  s.mean.fill(0.0);
  for (const ContextVector& c : pool) {
    const auto v = c.values();
    for (std::size_t j = 0; j < kContextFeatures; ++j) s.mean[j] += v[j];
  }
  for (double& m : s.mean) m /= static_cast<double>(pool.size());

  std::array<double, kContextFeatures> ss{};
  for (const ContextVector& c : pool) {
    const auto v = c.values();
    for (std::size_t j = 0; j < kContextFeatures; ++j) {
      const double d = v[j] - s.mean[j];
      ss[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < kContextFeatures; ++j) {
    s.scale[j] =
        std::max(kScaleFloor, std::sqrt(ss[j] / static_cast<double>(pool.size())));
  }
  return s;
}

std::array<double, kContextFeatures> Standardization::apply(
    const ContextVector& c) const {
  const auto v = c.values();
  std::array<double, kContextFeatures> z{};
  for (std::size_t j = 0; j < kContextFeatures; ++j) {
    z[j] = (v[j] - mean[j]) / scale[j];
  }
  return z;
}

namespace {

const std::array<std::string, 4> kActionNames = {
    "action_negative", "action_positive_self", "action_positive_social",
    "action_no_message"};

std::vector<std::string> make_column_names() {
  const auto& ctx = context_feature_names();
  std::vector<std::string> names;
  names.reserve(kDesignColumns);
  names.emplace_back("intercept");
  for (const auto& n : ctx) names.push_back(n);
  for (const auto& a : kActionNames) names.push_back(a);
  for (const auto& a : kActionNames)
    for (const auto& n : ctx) names.push_back(a + "*" + n);
  for (const char* n :
       {"week_cum_minutes", "goal_fraction", "fraction_vs_expected"})
    names.push_back(std::string("last_day_minutes*") + n);
  for (std::size_t r = 0; r < 4; ++r)
    names.push_back("last_day_minutes*" + ctx[6 + r]);
  for (std::size_t r = 0; r < 4; ++r)
    names.push_back("week_cum_minutes*" + ctx[6 + r]);
  for (std::size_t r = 0; r < 4; ++r)
    names.push_back("goal_fraction*" + ctx[6 + r]);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j)
      names.push_back(ctx[6 + i] + "*" + ctx[6 + j]);
  return names;
}

}  // namespace

const std::vector<std::string>& design_column_names() {
  static const std::vector<std::string> names = make_column_names();
  return names;
}

DesignRow kesler_augment(const std::array<double, kContextFeatures>& z,
                         MessageKind action) {
  const int a = daily_index(action);  // throws on weekly kinds

  DesignRow row;
  row.action = action;
  auto& v = row.values;
  v.reserve(kDesignColumns);

  v.push_back(1.0);                                  // intercept
  for (double x : z) v.push_back(x);                 // context
  for (int i = 0; i < 4; ++i) v.push_back(i == a ? 1.0 : 0.0);
  for (int i = 0; i < 4; ++i)                        // action x context
    for (std::size_t j = 0; j < kContextFeatures; ++j)
      v.push_back(i == a ? z[j] : 0.0);
  // last_day x {week_cum, goal_fraction, fraction_vs_expected, recencies}
  v.push_back(z[0] * z[1]);
  v.push_back(z[0] * z[2]);
  v.push_back(z[0] * z[3]);
  for (int r = 0; r < 4; ++r) v.push_back(z[0] * z[6 + r]);
  for (int r = 0; r < 4; ++r) v.push_back(z[1] * z[6 + r]);
  for (int r = 0; r < 4; ++r) v.push_back(z[2] * z[6 + r]);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) v.push_back(z[6 + i] * z[6 + j]);

  return row;
}

}  // namespace coachrl
