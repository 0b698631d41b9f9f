#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coachrl/core.hpp"

namespace coachrl {

inline constexpr double kDefaultRecencyCap = 14.0;
inline constexpr std::size_t kContextFeatures = 10;
inline constexpr std::size_t kDesignColumns = 76;
inline constexpr double kScaleFloor = 1e-6;

// Per patient-day attribute vector: activity, demographics, and days since
// each daily message kind was last sent.
struct ContextVector {
  double last_day_minutes = 0.0;
  double week_cum_minutes = 0.0;
  double goal_fraction = 0.0;         // week_cum / weekly_goal
  double fraction_vs_expected = 0.0;  // goal_fraction / expected_week_fraction
  double age = 0.0;
  double gender_indicator = 0.0;  // 1 = female
  std::array<double, 4> recency{kDefaultRecencyCap, kDefaultRecencyCap,
                                kDefaultRecencyCap, kDefaultRecencyCap};

  std::array<double, kContextFeatures> values() const;
};

const std::array<std::string, kContextFeatures>& context_feature_names();

// Inverse of ContextVector::values(); used when rehydrating logged contexts.
ContextVector context_from_values(const std::array<double, kContextFeatures>& v);

// Days since each daily kind was last sent, capped; never-sent kinds sit at
// the cap. The log must be sorted by day with every entry before `today`.
std::array<double, 4> recency_features(
    std::span<const std::pair<int, MessageKind>> message_log, int today,
    double cap = kDefaultRecencyCap);

// Assembles the attribute vector from the observed daily records of the
// current plan week plus the previous day. Missing days count as zero.
ContextVector build_context(
    const PatientProfile& profile, std::span<const DailyRecord> records,
    std::span<const std::pair<int, MessageKind>> message_log, int today,
    double recency_cap = kDefaultRecencyCap);

// Frozen z-score statistics. Fitted on the training pool once per retrain and
// stored in the model, so a given model maps a given raw context to the same
// design row forever.
struct Standardization {
  std::array<double, kContextFeatures> mean{};
  std::array<double, kContextFeatures> scale{};

  static Standardization identity();
  static Standardization fit(std::span<const ContextVector> pool);
  std::array<double, kContextFeatures> apply(const ContextVector& c) const;
};

// One regression row: intercept, standardized context, action one-hot, and
// the fixed interaction scheme. Target absent at prediction time.
struct DesignRow {
  std::vector<double> values;
  MessageKind action = MessageKind::NoMessage;
  std::optional<double> target;
};

// Fixed column order, 76 names total:
//   intercept; 10 context features; 4 action indicators;
//   action x context (40); last_day x {week_cum, goal_fraction,
//   fraction_vs_expected, 4 recencies} (7); week_cum x recencies (4);
//   goal_fraction x recencies (4); recency pair products (6).
const std::vector<std::string>& design_column_names();

// Builds the row from an already-standardized context. Weekly kinds are
// rejected: only the four daily actions are model actions.
DesignRow kesler_augment(const std::array<double, kContextFeatures>& z,
                         MessageKind action);

}  // namespace coachrl
