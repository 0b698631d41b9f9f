#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "coachrl/regression.hpp"
#include "coachrl/rng.hpp"

namespace coachrl {

inline constexpr double kDefaultTemperature = 5.0;
inline constexpr double kDefaultStalenessHours = 12.0;
// 10 rows per parameter with the default 76-column manifest.
inline constexpr std::size_t kDefaultSwitchThreshold = 760;

enum class PolicyMode { Initial, Learned };
const char* to_string(PolicyMode m);
PolicyMode policy_mode_from_string(std::string_view s);

struct PolicyState {
  PolicyMode mode = PolicyMode::Initial;
  std::optional<ModelState> model;
  double temperature = kDefaultTemperature;
  std::size_t switch_threshold = kDefaultSwitchThreshold;
};

// One morning decision. A suppressed decision (stale data) carries no action
// and no probabilities. rng_draws records every uniform consumed by the
// selection, in order, so a replay can re-execute the sampling exactly.
struct Decision {
  std::string patient_id;
  int day = 0;
  PolicyMode mode = PolicyMode::Initial;
  std::optional<MessageKind> action;
  std::optional<std::array<double, 4>> probabilities;  // daily-kind order
  std::optional<std::array<double, 4>> predicted;      // learned mode only
  std::vector<double> rng_draws;
};

// Closed-form law of the initial policy for expected week fraction f, in
// daily-kind order: (0.8(1-f), 0.4f, 0.4f, 0.2).
std::array<double, 4> initial_probabilities(double expected_fraction);

// 20% no message; otherwise a uniform draw above the expected fraction sends
// the negative message, below it one of the positive pair at equal odds.
MessageKind initial_select(double expected_fraction, RngStream& rng,
                           std::vector<double>* draws = nullptr);

// Same selection driven by an explicit uniform source; replay feeds the
// logged draws back through this to re-execute the sampling exactly.
MessageKind initial_select_with(double expected_fraction,
                                const std::function<double()>& next_uniform);

// Predicted reward for each of the four daily actions from the model's
// Kesler-augmented rows. The model manifest must match the engine's layout.
std::array<double, 4> predict_changes(const ModelState& model,
                                      const ContextVector& context);

// Softmax with max-subtraction; strictly positive for every action.
std::array<double, 4> boltzmann_probabilities(
    std::span<const double, 4> predictions, double temperature);

std::pair<MessageKind, std::array<double, 4>> boltzmann_select(
    std::span<const double, 4> predictions, double temperature, RngStream& rng,
    std::vector<double>* draws = nullptr);

// Sample from explicit probabilities with one uniform; exposed for replay.
MessageKind sample_daily_kind(const std::array<double, 4>& probabilities,
                              double u);

// Messages are gated when no data arrived for staleness_hours or more.
bool is_stale(Timestamp last_upload, Timestamp decision_time,
              double staleness_hours = kDefaultStalenessHours);

Decision daily_decide(PolicyState& policy, const PatientProfile& profile,
                      const ContextVector& context, double expected_fraction,
                      bool data_fresh, int day, RngStream& rng);

struct WeeklySummaryInput {
  // Observed totals for every completed week including the current one,
  // oldest first.
  std::vector<double> weekly_totals;
  // Current-week increases of the other personalized patients.
  std::vector<double> cohort_increases;
  std::optional<int> last_achievement_week;  // completed-week index
  double weekly_goal = 0.0;
  double achievement_threshold = 1.0;  // fraction of the weekly goal
  int cooldown_weeks = 3;
};

// Achievement messages by rarity: personal max > cohort max > personal
// significant > cohort significant; the weekly reminder is the fallback.
MessageKind weekly_summary_decide(const WeeklySummaryInput& in);

// Control arm: the fixed reminder on the enrollment-anchored weekday.
std::optional<MessageKind> control_decide(const PatientProfile& profile,
                                          int day);

}  // namespace coachrl
