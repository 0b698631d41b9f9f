#include "coachrl/policy.hpp"

#include <algorithm>
#include <cmath>

namespace coachrl {

const char* to_string(PolicyMode m) {
  return m == PolicyMode::Initial ? "initial" : "learned";
}

PolicyMode policy_mode_from_string(std::string_view s) {
  if (s == "initial") return PolicyMode::Initial;
  if (s == "learned") return PolicyMode::Learned;
  throw ValidationError("unknown policy mode: " + std::string(s));
}

std::array<double, 4> initial_probabilities(double f) {
  if (!(f >= 0.0 && f <= 1.0))
    throw ValidationError("initial policy: expected fraction outside [0,1]");
  return {0.8 * (1.0 - f), 0.4 * f, 0.4 * f, 0.2};
}

MessageKind initial_select_with(double f,
                                const std::function<double()>& next_uniform) {
  if (!(f >= 0.0 && f <= 1.0))
    throw ValidationError("initial policy: expected fraction outside [0,1]");
  if (next_uniform() < 0.2) return MessageKind::NoMessage;
  if (next_uniform() > f) return MessageKind::Negative;
  return next_uniform() < 0.5 ? MessageKind::PositiveSelf
                              : MessageKind::PositiveSocial;
}

MessageKind initial_select(double f, RngStream& rng,
                           std::vector<double>* draws) {
  return initial_select_with(f, [&] {
    const double u = rng.uniform();
    if (draws) draws->push_back(u);
    return u;
  });
}

std::array<double, 4> predict_changes(const ModelState& model,
                                      const ContextVector& context) {
  if (model.manifest != design_column_names())
    throw ValidationError("predict_changes: model manifest mismatch");
  const auto z = model.standardization.apply(context);
  std::array<double, 4> out{};
  for (std::size_t a = 0; a < kDailyKinds.size(); ++a) {
    const DesignRow row = kesler_augment(z, kDailyKinds[a]);
    out[a] = predict(model, row.values);
  }
  return out;
}

std::array<double, 4> boltzmann_probabilities(
    std::span<const double, 4> predictions, double temperature) {
  if (!(temperature > 0.0))
    throw ValidationError("boltzmann: temperature must be > 0");
  double hi = predictions[0];
  for (double p : predictions) {
    if (!std::isfinite(p))
      throw ValidationError("boltzmann: non-finite prediction");
    hi = std::max(hi, p);
  }
  std::array<double, 4> out{};
  double total = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = std::exp((predictions[i] - hi) / temperature);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

MessageKind sample_daily_kind(const std::array<double, 4>& probabilities,
                              double u) {
  double cum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    cum += probabilities[i];
    if (u < cum) return kDailyKinds[i];
  }
  return kDailyKinds.back();
}

std::pair<MessageKind, std::array<double, 4>> boltzmann_select(
    std::span<const double, 4> predictions, double temperature, RngStream& rng,
    std::vector<double>* draws) {
  const auto probs = boltzmann_probabilities(predictions, temperature);
  const double u = rng.uniform();
  if (draws) draws->push_back(u);
  return {sample_daily_kind(probs, u), probs};
}

bool is_stale(Timestamp last_upload, Timestamp decision_time,
              double staleness_hours) {
  return static_cast<double>(decision_time - last_upload) >=
         staleness_hours * static_cast<double>(kSecondsPerHour);
}

Decision daily_decide(PolicyState& policy, const PatientProfile& profile,
                      const ContextVector& context, double expected_fraction,
                      bool data_fresh, int day, RngStream& rng) {
  if (profile.arm != Arm::Personalized)
    throw ValidationError("daily_decide: control arm has no daily decision");
  Decision d;
  d.patient_id = profile.id;
  d.day = day;
  d.mode = policy.mode;
  if (!data_fresh) return d;  // suppressed: no action, no probabilities

  if (policy.mode == PolicyMode::Initial) {
    d.probabilities = initial_probabilities(expected_fraction);
    d.action = initial_select(expected_fraction, rng, &d.rng_draws);
  } else {
    if (!policy.model.has_value())
      throw ValidationError("daily_decide: learned mode without a model");
    const auto preds = predict_changes(*policy.model, context);
    d.predicted = preds;
    auto [action, probs] =
        boltzmann_select(preds, policy.temperature, rng, &d.rng_draws);
    d.action = action;
    d.probabilities = probs;
  }
  return d;
}

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

MessageKind weekly_summary_decide(const WeeklySummaryInput& in) {
  if (!(in.weekly_goal > 0.0))
    throw ValidationError("weekly summary: weekly_goal must be > 0");
  const auto& totals = in.weekly_totals;
  if (totals.size() < 2) return MessageKind::WeeklyReminder;  // no baseline

  const int current_week = static_cast<int>(totals.size()) - 1;
  if (in.last_achievement_week.has_value() &&
      current_week - *in.last_achievement_week < in.cooldown_weeks)
    return MessageKind::WeeklyReminder;
  if (totals.back() < in.achievement_threshold * in.weekly_goal)
    return MessageKind::WeeklyReminder;

  const double increase = totals[totals.size() - 1] - totals[totals.size() - 2];
  std::vector<double> prior_increases;
  for (std::size_t w = 1; w + 1 < totals.size(); ++w)
    prior_increases.push_back(totals[w] - totals[w - 1]);

  if (!prior_increases.empty() &&
      increase > *std::max_element(prior_increases.begin(),
                                   prior_increases.end()))
    return MessageKind::MaxIncrease;
  if (!in.cohort_increases.empty() &&
      increase > *std::max_element(in.cohort_increases.begin(),
                                   in.cohort_increases.end()))
    return MessageKind::MaxSocial;
  if (!prior_increases.empty() && increase > median_of(prior_increases))
    return MessageKind::SigIncrease;
  if (!in.cohort_increases.empty() && increase > median_of(in.cohort_increases))
    return MessageKind::SigSocial;
  return MessageKind::WeeklyReminder;
}

std::optional<MessageKind> control_decide(const PatientProfile& profile,
                                          int day) {
  if (profile.arm != Arm::Control)
    throw ValidationError("control_decide: patient not in control arm");
  if ((day - profile.enrolled_on) % 7 == 0) return MessageKind::ControlReminder;
  return std::nullopt;
}

}  // namespace coachrl
