#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coachrl/policy.hpp"

using namespace coachrl;

namespace {

PatientProfile personalized_profile() {
  PatientProfile p;
  p.id = "p01";
  p.age = 58;
  p.weekly_goal = 139;
  p.sessions_per_week = 3;
  p.arm = Arm::Personalized;
  p.baseline_hba1c = 7.7;
  return p;
}

}  // namespace

TEST_CASE("initial policy closed-form law") {
  // Daily-kind order: negative, positive_self, positive_social, no_message.
  CHECK(initial_probabilities(0.0) ==
        std::array<double, 4>{0.8, 0.0, 0.0, 0.2});
  CHECK(initial_probabilities(1.0) ==
        std::array<double, 4>{0.0, 0.4, 0.4, 0.2});
  const auto p = initial_probabilities(0.5);
  CHECK(p[0] == doctest::Approx(0.4));
  CHECK(p[1] == doctest::Approx(0.2));
  CHECK(p[2] == doctest::Approx(0.2));
  CHECK(p[3] == doctest::Approx(0.2));
  CHECK_THROWS_AS(initial_probabilities(-0.1), ValidationError);
  CHECK_THROWS_AS(initial_probabilities(1.1), ValidationError);
}

TEST_CASE("initial_select empirical frequencies match the law") {
  for (double f : {0.0, 0.5, 1.0}) {
    RngStream rng(42, "test/initial");
    const auto expect = initial_probabilities(f);
    std::array<int, 4> counts{};
    const int n = 20000;
    for (int i = 0; i < n; ++i)
      ++counts[static_cast<std::size_t>(daily_index(initial_select(f, rng)))];
    for (int a = 0; a < 4; ++a) {
      const double sigma = std::sqrt(expect[a] * (1 - expect[a]) * n);
      CHECK(std::abs(counts[a] - expect[a] * n) <= 3.5 * sigma + 1.0);
    }
  }
}

TEST_CASE("initial_select_with follows the draw protocol exactly") {
  const auto feed = [](std::vector<double> draws) {
    std::size_t i = 0;
    return [draws, i]() mutable { return draws.at(i++); };
  };
  CHECK(initial_select_with(0.5, feed({0.1})) == MessageKind::NoMessage);
  CHECK(initial_select_with(0.5, feed({0.5, 0.9})) == MessageKind::Negative);
  CHECK(initial_select_with(0.5, feed({0.5, 0.3, 0.2})) ==
        MessageKind::PositiveSelf);
  CHECK(initial_select_with(0.5, feed({0.5, 0.3, 0.7})) ==
        MessageKind::PositiveSocial);
}

TEST_CASE("boltzmann probabilities") {
  SUBCASE("equal predictions are uniform") {
    const std::array<double, 4> preds = {1.3, 1.3, 1.3, 1.3};
    for (double p : boltzmann_probabilities(preds, 5.0))
      CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("frozen softmax of (5,0,0,0) at T = 5") {
    // exp(1) / (exp(1) + 3) and 1 / (exp(1) + 3), evaluated in long double.
    const long double e = std::exp(1.0L);
    const double p0 = static_cast<double>(e / (e + 3.0L));
    const double rest = static_cast<double>(1.0L / (e + 3.0L));
    const std::array<double, 4> preds = {5, 0, 0, 0};
    const auto probs = boltzmann_probabilities(preds, 5.0);
    CHECK(probs[0] == doctest::Approx(p0).epsilon(1e-12));
    CHECK(probs[0] == doctest::Approx(0.4754).epsilon(1e-4));
    for (int a = 1; a < 4; ++a)
      CHECK(probs[a] == doctest::Approx(rest).epsilon(1e-12));
  }
  SUBCASE("huge temperature flattens to uniform") {
    const std::array<double, 4> preds = {3, -1, 7, 0.5};
    for (double p : boltzmann_probabilities(preds, 1e9))
      CHECK(std::abs(p - 0.25) < 1e-6);
  }
  SUBCASE("strict positivity across the reachable reward range") {
    // Predicted rewards live in (0, cap]; exploration never dies there.
    const std::array<double, 4> preds = {5, 0, 0, 0};
    for (double T : {1.0, 5.0, 50.0})
      for (double p : boltzmann_probabilities(preds, T)) CHECK(p > 0.0);
  }
  SUBCASE("errors") {
    const std::array<double, 4> nan_preds = {
        std::numeric_limits<double>::quiet_NaN(), 0, 0, 0};
    CHECK_THROWS_AS(boltzmann_probabilities(nan_preds, 5.0), ValidationError);
    const std::array<double, 4> ok = {1, 2, 3, 4};
    CHECK_THROWS_AS(boltzmann_probabilities(ok, 0.0), ValidationError);
  }
}

TEST_CASE("boltzmann shift invariance") {
  RngStream rng(9, "test/shift");
  for (int trial = 0; trial < 100; ++trial) {
    std::array<double, 4> preds{};
    for (auto& v : preds) v = rng.uniform(-5, 5);
    const double shift = rng.uniform(-100, 100);
    std::array<double, 4> shifted = preds;
    for (auto& v : shifted) v += shift;
    const auto a = boltzmann_probabilities(preds, 5.0);
    const auto b = boltzmann_probabilities(shifted, 5.0);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
  }
}

TEST_CASE("sample_daily_kind partitions the unit interval") {
  const std::array<double, 4> probs = {0.1, 0.2, 0.3, 0.4};
  CHECK(sample_daily_kind(probs, 0.0) == MessageKind::Negative);
  CHECK(sample_daily_kind(probs, 0.09999) == MessageKind::Negative);
  CHECK(sample_daily_kind(probs, 0.1) == MessageKind::PositiveSelf);
  CHECK(sample_daily_kind(probs, 0.5999) == MessageKind::PositiveSocial);
  CHECK(sample_daily_kind(probs, 0.99999) == MessageKind::NoMessage);
}

TEST_CASE("predict_changes") {
  ContextVector zero_context;  // recency defaults are nonzero but standardize out
  Standardization st = Standardization::identity();
  ModelState m;
  m.manifest = design_column_names();
  m.standardization = st;
  m.coefficients.assign(kDesignColumns, 0.0);
  m.n_rows = 100;

  SUBCASE("zero coefficients give zero predictions") {
    zero_context.recency = {0, 0, 0, 0};
    const auto preds = predict_changes(m, zero_context);
    CHECK(preds == std::array<double, 4>{0, 0, 0, 0});
  }
  SUBCASE("intercept-only model is constant") {
    m.coefficients[0] = 0.7;
    zero_context.recency = {0, 0, 0, 0};
    for (double p : predict_changes(m, zero_context))
      CHECK(p == doctest::Approx(0.7));
  }
  SUBCASE("planted action coefficient separates exactly") {
    m.coefficients[0] = 1.0;
    m.coefficients[11] = 1.0;  // the negative-message indicator
    zero_context.recency = {0, 0, 0, 0};
    const auto preds = predict_changes(m, zero_context);
    CHECK(preds[0] == doctest::Approx(2.0));
    for (int a = 1; a < 4; ++a) CHECK(preds[a] == doctest::Approx(1.0));
  }
  SUBCASE("manifest mismatch is rejected") {
    m.manifest.pop_back();
    m.coefficients.pop_back();
    CHECK_THROWS_AS(predict_changes(m, zero_context), ValidationError);
  }
}

TEST_CASE("is_stale at the 12-hour boundary") {
  const Timestamp t0 = 1000000;
  CHECK(is_stale(t0, t0 + 12 * kSecondsPerHour));        // exactly 12 h
  CHECK(is_stale(t0, t0 + 15 * kSecondsPerHour));
  CHECK(!is_stale(t0, t0 + 11 * kSecondsPerHour));
  CHECK(!is_stale(t0, t0 + 12 * kSecondsPerHour - 60));  // 11 h 59 m
}

TEST_CASE("daily_decide") {
  PolicyState policy;
  policy.temperature = 5.0;
  RngStream rng(17, "test/decide");
  const auto profile = personalized_profile();
  ContextVector ctx;

  SUBCASE("stale data suppresses everything") {
    const auto d = daily_decide(policy, profile, ctx, 0.5, false, 10, rng);
    CHECK(!d.action.has_value());
    CHECK(!d.probabilities.has_value());
    CHECK(d.rng_draws.empty());
  }
  SUBCASE("initial mode with f = 1 never sends negative") {
    for (int i = 0; i < 500; ++i) {
      const auto d = daily_decide(policy, profile, ctx, 1.0, true, 10, rng);
      REQUIRE(d.action.has_value());
      CHECK(*d.action != MessageKind::Negative);
      CHECK((*d.probabilities)[0] == 0.0);
    }
  }
  SUBCASE("learned mode composes prediction and boltzmann") {
    policy.mode = PolicyMode::Learned;
    ModelState m;
    m.manifest = design_column_names();
    m.standardization = Standardization::identity();
    m.coefficients.assign(kDesignColumns, 0.0);
    m.coefficients[0] = 1.0;
    m.coefficients[13] = 0.4;  // positive_social indicator
    policy.model = m;
    const auto d = daily_decide(policy, profile, ctx, 0.5, true, 10, rng);
    REQUIRE(d.predicted.has_value());
    REQUIRE(d.probabilities.has_value());
    const auto expect =
        boltzmann_probabilities(*d.predicted, policy.temperature);
    for (int a = 0; a < 4; ++a)
      CHECK((*d.probabilities)[a] == doctest::Approx(expect[a]).epsilon(1e-15));
    CHECK(d.rng_draws.size() == 1);
  }
  SUBCASE("control arm never reaches the daily decision") {
    PatientProfile control = profile;
    control.arm = Arm::Control;
    CHECK_THROWS_AS(daily_decide(policy, control, ctx, 0.5, true, 10, rng),
                    ValidationError);
  }
}

TEST_CASE("weekly_summary_decide") {
  WeeklySummaryInput in;
  in.weekly_goal = 150.0;
  in.achievement_threshold = 1.0;
  in.cooldown_weeks = 3;

  SUBCASE("first completed week has no baseline") {
    in.weekly_totals = {170.0};
    CHECK(weekly_summary_decide(in) == MessageKind::WeeklyReminder);
  }
  SUBCASE("cooldown blocks achievements") {
    in.weekly_totals = {100, 120, 160};
    in.last_achievement_week = 0;  // two weeks before week index 2
    CHECK(weekly_summary_decide(in) == MessageKind::WeeklyReminder);
    in.last_achievement_week = -1;  // three weeks ago: allowed again
    CHECK(weekly_summary_decide(in) == MessageKind::MaxIncrease);
  }
  SUBCASE("below the significance threshold") {
    in.weekly_totals = {100, 120, 140};  // 140 < 150
    CHECK(weekly_summary_decide(in) == MessageKind::WeeklyReminder);
  }
  SUBCASE("personal max beats cohort max") {
    // Hand-evaluated predicates: totals 100,120,160 -> increases 20, 40;
    // current 40 > max prior 20 (personal max), and 40 > all cohort
    // increases (cohort max). Personal max wins the priority.
    in.weekly_totals = {100, 120, 160};
    in.cohort_increases = {10, 5};
    CHECK(weekly_summary_decide(in) == MessageKind::MaxIncrease);
  }
  SUBCASE("cohort max when not a personal record") {
    in.weekly_totals = {100, 140, 170};  // increases 40 then 30
    in.cohort_increases = {10, 5};
    CHECK(weekly_summary_decide(in) == MessageKind::MaxSocial);
  }
  SUBCASE("significant personal increase") {
    in.weekly_totals = {100, 140, 160, 200};  // increases 40, 20, 40
    in.cohort_increases = {50, 45};           // not a cohort max
    CHECK(weekly_summary_decide(in) == MessageKind::SigIncrease);
  }
  SUBCASE("significant social increase") {
    in.weekly_totals = {100, 140, 160, 185};  // increases 40, 20, 25
    in.cohort_increases = {30, 10};           // median 20 < 25
    CHECK(weekly_summary_decide(in) == MessageKind::SigSocial);
  }
  SUBCASE("nothing notable falls back to the reminder") {
    in.weekly_totals = {100, 140, 160, 165};  // increase 5
    in.cohort_increases = {30, 10};
    CHECK(weekly_summary_decide(in) == MessageKind::WeeklyReminder);
  }
}

TEST_CASE("control_decide") {
  PatientProfile p = personalized_profile();
  p.arm = Arm::Control;
  p.enrolled_on = 0;
  CHECK(control_decide(p, 0) == MessageKind::ControlReminder);
  CHECK(!control_decide(p, 3).has_value());
  int reminders = 0;
  for (int d = 0; d < 26 * 7; ++d)
    if (control_decide(p, d).has_value()) ++reminders;
  CHECK(reminders == 26);
  PatientProfile wrong = personalized_profile();
  CHECK_THROWS_AS(control_decide(wrong, 0), ValidationError);
}
