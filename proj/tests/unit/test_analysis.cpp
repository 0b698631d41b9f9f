#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "coachrl/analysis.hpp"
#include "coachrl/rng.hpp"
#include "coachrl/simulator.hpp"

using namespace coachrl;

namespace {

// Hand-built log fixture: a tiny cohort with explicit events.
class FixtureLog {
 public:
  FixtureLog() {
    manifest_.seed = 21;
    manifest_.expected_days = 28;
    manifest_.epoch = kDefaultEpoch;
  }

  void add_patient(const std::string& id, Arm arm, Gender gender, int age,
                   double goal, const std::string& archetype,
                   double baseline = 8.0) {
    RosterEntry r;
    r.profile.id = id;
    r.profile.age = age;
    r.profile.gender = gender;
    r.profile.weekly_goal = goal;
    r.profile.sessions_per_week = 3;
    r.profile.arm = arm;
    r.profile.baseline_hba1c = baseline;
    r.archetype = archetype;
    manifest_.roster.push_back(r);
  }

  void event(int day, const std::string& patient, const char* kind, Json payload) {
    Event e;
    e.seq = seq_++;
    e.day = day;
    e.ts = kDefaultEpoch + day * kSecondsPerDay;
    e.patient = patient;
    e.kind = kind;
    e.payload = std::move(payload);
    events_.push_back(std::move(e));
  }

  void reward(int day, const std::string& patient, MessageKind action,
              double value, const char* mode = "initial", double before = 20,
              double after = 25) {
    event(day, patient, event_kind::kReward,
          Json{{"action_day", day},
               {"action", to_string(action)},
               {"value", value},
               {"mode", mode},
               {"minutes_before", before},
               {"minutes_after", after}});
  }

  void message(int day, const std::string& patient, MessageKind kind) {
    event(day, patient, event_kind::kMessageSent,
          Json{{"kind", to_string(kind)}, {"goal_pct", 0}, {"text", ""}});
  }

  void walk(int day, const std::string& patient, double minutes, double cadence) {
    event(day, patient, event_kind::kWalkSession,
          Json{{"day", day},
               {"start", kDefaultEpoch + day * kSecondsPerDay + 9 * 3600},
               {"duration", minutes},
               {"cadence", cadence}});
  }

  void upload(int day, const std::string& patient) {
    event(day, patient, event_kind::kUpload,
          Json{{"slot_ts", kDefaultEpoch + (day + 1) * kSecondsPerDay},
               {"sessions", 0}});
  }

  void hba1c(int day, const std::string& patient, int week, double value) {
    event(day, patient, event_kind::kHbA1cMeasured,
          Json{{"week", week}, {"value", value}});
  }

  LogView view() {
    manifest_.event_count = events_.size();
    LogFile lf;
    lf.manifest = manifest_;
    lf.events = events_;
    return make_log_view(std::move(lf));
  }

 private:
  RunManifest manifest_;
  std::vector<Event> events_;
  std::uint64_t seq_ = 0;
};

}  // namespace

TEST_CASE("message_effect_table") {
  SUBCASE("uniform rewards give unit means and a unit weighted total") {
    FixtureLog fx;
    fx.add_patient("p01", Arm::Personalized, Gender::Female, 58, 139, "weak_responder");
    for (int d = 0; d < 8; ++d)
      fx.reward(d, "p01", kDailyKinds[d % 4], 1.0);
    const auto t = message_effect_table(fx.view(), PolicyMode::Initial);
    for (int a = 0; a < 4; ++a) CHECK(t.mean[a] == doctest::Approx(1.0));
    CHECK(t.weighted_total == doctest::Approx(1.0));
    CHECK(t.total_n == 8);
  }
  SUBCASE("hand-built six-event log") {
    // Spreadsheet oracle: negative {1.2, 0.8} -> 1.0; positive_self {1.5} ->
    // 1.5; positive_social {0.9, 1.1} -> 1.0; no_message {2.0} -> 2.0;
    // grand mean = 7.5 / 6 = 1.25.
    FixtureLog fx;
    fx.add_patient("p01", Arm::Personalized, Gender::Female, 58, 139, "weak_responder");
    fx.reward(0, "p01", MessageKind::Negative, 1.2);
    fx.reward(1, "p01", MessageKind::Negative, 0.8);
    fx.reward(2, "p01", MessageKind::PositiveSelf, 1.5);
    fx.reward(3, "p01", MessageKind::PositiveSocial, 0.9);
    fx.reward(4, "p01", MessageKind::PositiveSocial, 1.1);
    fx.reward(5, "p01", MessageKind::NoMessage, 2.0);
    const auto t = message_effect_table(fx.view(), PolicyMode::Initial);
    CHECK(t.mean[0] == doctest::Approx(1.0));
    CHECK(t.mean[1] == doctest::Approx(1.5));
    CHECK(t.mean[2] == doctest::Approx(1.0));
    CHECK(t.mean[3] == doctest::Approx(2.0));
    CHECK(t.weighted_total == doctest::Approx(1.25));
  }
  SUBCASE("weighted total equals the grand mean for random logs") {
    RngStream rng(4, "test/grand");
    FixtureLog fx;
    fx.add_patient("p01", Arm::Personalized, Gender::Female, 58, 139, "weak_responder");
    double sum = 0;
    const int n = 200;
    for (int i = 0; i < n; ++i) {
      const double y = rng.uniform(0.2, 5.0);
      sum += y;
      fx.reward(i % 28, "p01", kDailyKinds[rng.uniform_int(0, 3)], y, "learned");
    }
    const auto t = message_effect_table(fx.view(), PolicyMode::Learned);
    CHECK(t.weighted_total == doctest::Approx(sum / n).epsilon(1e-12));
  }
  SUBCASE("empty phase is an error") {
    FixtureLog fx;
    fx.add_patient("p01", Arm::Personalized, Gender::Female, 58, 139, "weak_responder");
    fx.reward(0, "p01", MessageKind::Negative, 1.0, "initial");
    CHECK_THROWS_AS(message_effect_table(fx.view(), PolicyMode::Learned),
                    ValidationError);
  }
}

TEST_CASE("pair_effect_grid") {
  SUBCASE("single consecutive pair populates one cell") {
    FixtureLog fx;
    fx.add_patient("p01", Arm::Personalized, Gender::Female, 58, 139, "weak_responder");
    fx.message(3, "p01", MessageKind::Negative);
    fx.message(4, "p01", MessageKind::PositiveSelf);
    fx.reward(4, "p01", MessageKind::PositiveSelf, 1.3);
    const auto g = pair_effect_grid(fx.view());
    int populated = 0;
    for (int p = 0; p < 4; ++p)
      for (int c = 0; c < 4; ++c)
        if (g.n[p][c] > 0) ++populated;
    CHECK(populated == 1);
    CHECK(g.n[0][1] == 1);
    CHECK(g.mean[0][1] == doctest::Approx(1.3));
  }
  SUBCASE("uniform rewards make all populated cells equal") {
    FixtureLog fx;
    fx.add_patient("p01", Arm::Personalized, Gender::Female, 58, 139, "weak_responder");
    for (int d = 0; d < 20; ++d) {
      fx.message(d, "p01", kDailyKinds[d % 4]);
      if (d > 0) fx.reward(d, "p01", kDailyKinds[d % 4], 1.1);
    }
    const auto g = pair_effect_grid(fx.view());
    for (int p = 0; p < 4; ++p)
      for (int c = 0; c < 4; ++c)
        if (g.n[p][c] > 0) CHECK(g.mean[p][c] == doctest::Approx(1.1));
  }
}

TEST_CASE("response_vectors completeness and winsorization") {
  FixtureLog fx;
  fx.add_patient("p01", Arm::Personalized, Gender::Female, 58, 139, "weak_responder");
  fx.add_patient("p02", Arm::Personalized, Gender::Male, 60, 139, "weak_responder");
  // p01 sees every kind; p02 never gets positive_social.
  for (int d = 0; d < 8; ++d) fx.reward(d, "p01", kDailyKinds[d % 4], 1.0);
  fx.reward(8, "p01", MessageKind::Negative, 5.0);  // winsorized to 2.0
  for (int d = 0; d < 6; ++d)
    fx.reward(d, "p02", kDailyKinds[d % 2], 1.0);
  const auto vectors = response_vectors(fx.view());
  REQUIRE(vectors.size() == 2);
  CHECK(vectors[0].patient_id == "p01");
  CHECK(vectors[0].complete);
  CHECK(vectors[0].mean_change[0] == doctest::Approx((1.0 + 1.0 + 2.0) / 3.0));
  CHECK(!vectors[1].complete);
}

TEST_CASE("cluster_patients recovers planted response types") {
  FixtureLog fx;
  RngStream rng(5, "test/clusters");
  // Three planted types, 6 patients each, 20 rewards per kind.
  const std::array<std::array<double, 4>, 3> type_mean = {
      std::array<double, 4>{0.85, 0.85, 0.85, 1.1},
      std::array<double, 4>{1.0, 1.02, 1.03, 1.0},
      std::array<double, 4>{0.95, 1.15, 1.2, 0.95}};
  const std::array<const char*, 3> type_name = {
      "negative_responder", "weak_responder", "positive_responder"};
  std::vector<int> truth;
  for (int i = 0; i < 18; ++i) {
    const int t = i / 6;
    const std::string id = "p" + std::to_string(10 + i);
    fx.add_patient(id, Arm::Personalized, t == 2 ? Gender::Male : Gender::Female,
                   50 + t, 139, type_name[t]);
    truth.push_back(t);
    int day = 0;
    for (int a = 0; a < 4; ++a)
      for (int k = 0; k < 20; ++k)
        fx.reward(day++ % 28, id, kDailyKinds[a],
                  type_mean[t][a] + rng.normal(0, 0.01));
  }
  const auto view = fx.view();
  const auto vectors = response_vectors(view);
  const auto result = cluster_patients(view, vectors, 3, 10, 7, 8);
  CHECK(result.patient_ids.size() == 18);
  CHECK(result.excluded.empty());
  std::vector<int> assigned = result.assignment;
  CHECK(permutation_accuracy(assigned, truth, 3) == doctest::Approx(1.0));
  // Demographics: the positive cluster is all male, age 52.
  for (const auto& c : result.clusters) {
    if (c.size == 0) continue;
    if (c.mean_response[2] > 1.1) {
      CHECK(c.percent_female == doctest::Approx(0.0));
      CHECK(c.mean_age == doctest::Approx(52.0));
    }
  }
  CHECK_THROWS_AS(
      cluster_patients(view, std::vector<ResponseVector>{}, 3, 10, 7, 1),
      ValidationError);
}

TEST_CASE("cluster_patients excludes under-observed patients") {
  FixtureLog fx;
  fx.add_patient("p01", Arm::Personalized, Gender::Female, 58, 139, "weak_responder");
  fx.add_patient("p02", Arm::Personalized, Gender::Female, 58, 139, "weak_responder");
  fx.add_patient("p03", Arm::Personalized, Gender::Female, 58, 139, "weak_responder");
  fx.add_patient("p04", Arm::Personalized, Gender::Female, 58, 139, "weak_responder");
  for (const char* id : {"p01", "p02", "p03"}) {
    int day = 0;
    for (int a = 0; a < 4; ++a)
      for (int k = 0; k < 10; ++k) fx.reward(day++ % 28, id, kDailyKinds[a], 1.0);
  }
  for (int a = 0; a < 4; ++a) fx.reward(a, "p04", kDailyKinds[a], 1.0);
  const auto view = fx.view();
  const auto result = cluster_patients(view, response_vectors(view), 3, 5, 1, 8);
  CHECK(result.patient_ids.size() == 3);
  REQUIRE(result.excluded.size() == 1);
  CHECK(result.excluded[0] == "p04");
}

TEST_CASE("permutation_accuracy") {
  const std::vector<int> assignment = {0, 0, 1, 1, 2, 2};
  const std::vector<int> truth = {2, 2, 0, 0, 1, 1};
  CHECK(permutation_accuracy(assignment, truth, 3) == doctest::Approx(1.0));
  const std::vector<int> half = {0, 1, 0, 1, 2, 2};
  CHECK(permutation_accuracy(half, truth, 3) < 1.0);
}

TEST_CASE("activity_slopes") {
  SUBCASE("exact linear fraction series") {
    FixtureLog fx;
    fx.add_patient("p01", Arm::Control, Gender::Female, 58, 140, "weak_responder");
    const double daily_target = 20.0;
    for (int d = 0; d < 60; ++d)
      fx.walk(d, "p01", (0.5 + 0.0016 * d) * daily_target, 100);
    fx.upload(60, "p01");  // coverage through day 60
    const auto slopes = activity_slopes(fx.view(), Arm::Control, SlopeWindow::Full);
    REQUIRE(slopes.size() == 1);
    CHECK(std::abs(slopes[0].slope - 0.0016) < 1e-9);
    CHECK(std::abs(slopes[0].r2 - 1.0) < 1e-9);
  }
  SUBCASE("constant series has zero slope") {
    FixtureLog fx;
    fx.add_patient("p01", Arm::Control, Gender::Female, 58, 140, "weak_responder");
    for (int d = 0; d < 30; ++d) fx.walk(d, "p01", 15.0, 100);
    fx.upload(30, "p01");
    const auto slopes = activity_slopes(fx.view(), Arm::Control, SlopeWindow::Full);
    REQUIRE(slopes.size() == 1);
    CHECK(slopes[0].slope == doctest::Approx(0.0));
  }
  SUBCASE("too few covered days excludes the patient") {
    FixtureLog fx;
    fx.add_patient("p01", Arm::Control, Gender::Female, 58, 140, "weak_responder");
    fx.walk(0, "p01", 15.0, 100);
    fx.upload(1, "p01");  // coverage ends after day 0: 2 usable days
    CHECK(activity_slopes(fx.view(), Arm::Control, SlopeWindow::Full).empty());
  }
}

TEST_CASE("fit_weighted_average") {
  const std::vector<SlopeEstimate> slopes = {{"a", 0.01, 1.0, 10},
                                             {"b", -0.01, 0.0, 10}};
  CHECK(fit_weighted_average(slopes) == doctest::Approx(0.01));
  CHECK_THROWS_AS(fit_weighted_average(std::vector<SlopeEstimate>{
                      {"a", 0.01, 0.0, 10}}),
                  ValidationError);
}

TEST_CASE("cadence_slopes") {
  SUBCASE("constant cadence") {
    FixtureLog fx;
    fx.add_patient("p01", Arm::Personalized, Gender::Female, 58, 140, "weak_responder");
    for (int w = 0; w < 8; ++w) fx.walk(7 * w + 2, "p01", 20, 100.0);
    fx.upload(60, "p01");
    const auto slopes = cadence_slopes(fx.view(), Arm::Personalized);
    REQUIRE(slopes.size() == 1);
    CHECK(slopes[0].slope == doctest::Approx(0.0));
  }
  SUBCASE("weekly trend reported per day") {
    FixtureLog fx;
    fx.add_patient("p01", Arm::Personalized, Gender::Female, 58, 140, "weak_responder");
    for (int w = 0; w < 10; ++w) fx.walk(7 * w + 2, "p01", 20, 100.0 + 0.1 * w);
    fx.upload(70, "p01");
    const auto slopes = cadence_slopes(fx.view(), Arm::Personalized);
    REQUIRE(slopes.size() == 1);
    CHECK(std::abs(slopes[0].slope - 0.1 / 7.0) < 1e-9);
  }
}

TEST_CASE("learning_curve") {
  const auto make = [](int day, double c0) {
    ModelState m;
    m.coefficients = {c0, 1.0};
    m.manifest = {"intercept", "x1"};
    m.n_rows = 100 + day;
    m.adjusted_r2 = 0.3;
    m.fitted_on = day;
    return m;
  };
  const std::vector<ModelState> snaps = {make(10, 1.0), make(11, 1.0), make(12, 1.5)};
  const auto curve = learning_curve(snaps);
  REQUIRE(curve.size() == 3);
  CHECK(!curve[0].stability.has_value());
  CHECK(*curve[1].stability == doctest::Approx(0.0));
  CHECK(*curve[2].stability == doctest::Approx(0.5));
  CHECK_THROWS_AS(learning_curve(std::vector<ModelState>{make(1, 1.0)}),
                  ValidationError);
  std::vector<ModelState> drift = {make(1, 1.0), make(2, 1.0)};
  drift[1].manifest = {"intercept", "other"};
  CHECK_THROWS_AS(learning_curve(drift), ValidationError);
}

TEST_CASE("hba1c_model recovers planted coefficients exactly") {
  // delta = 0.1 + 0.002*days + 0.05*initial - 0.001*target + 0.3*arm, no noise.
  FixtureLog fx;
  RngStream rng(6, "test/hba1c");
  std::vector<HbA1cRecord> records;
  for (int i = 0; i < 40; ++i) {
    HbA1cRecord r;
    r.patient_id = "p" + std::to_string(i);
    r.days_between = (i % 2 == 0) ? 91.0 : 182.0;
    r.initial = rng.uniform(6.5, 10.0);
    r.activity_target = rng.uniform(110, 260);
    r.personalized = i % 3 == 0 ? 1.0 : 0.0;
    r.delta = 0.1 + 0.002 * r.days_between + 0.05 * r.initial -
              0.001 * r.activity_target + 0.3 * r.personalized;
    records.push_back(r);
  }
  const auto m = hba1c_model(records);
  CHECK(m.coefficients[0] == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(m.coefficients[1] == doctest::Approx(0.002).epsilon(1e-6));
  CHECK(m.coefficients[2] == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(m.coefficients[3] == doctest::Approx(-0.001).epsilon(1e-6));
  CHECK(m.coefficients[4] == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(m.r2 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("hba1c_model arm coefficient vanishes when the arm is inert") {
  RngStream rng(7, "test/hba1c-null");
  std::vector<HbA1cRecord> records;
  for (int i = 0; i < 60; ++i) {
    HbA1cRecord r;
    r.patient_id = "p" + std::to_string(i);
    r.days_between = (i % 2 == 0) ? 91.0 : 182.0;
    r.initial = rng.uniform(6.5, 10.0);
    r.activity_target = rng.uniform(110, 260);
    r.personalized = rng.uniform() < 0.5 ? 1.0 : 0.0;
    r.delta = 0.001 * r.days_between + 0.02 * r.initial;  // arm-independent
    records.push_back(r);
  }
  const auto m = hba1c_model(records);
  CHECK(std::abs(m.coefficients[4]) < 1e-10);
  CHECK_THROWS_AS(hba1c_model(std::vector<HbA1cRecord>(records.begin(),
                                                       records.begin() + 4)),
                  ValidationError);
}

TEST_CASE("relative_reduction") {
  CHECK(relative_reduction(8.0, 7.2) == doctest::Approx(0.10).epsilon(1e-14));
  CHECK(relative_reduction(8.0, 8.0) == 0.0);
  CHECK(relative_reduction(8.7, 7.7) == doctest::Approx(1.0 / 8.7).epsilon(1e-12));
  CHECK_THROWS_AS(relative_reduction(0.0, 7.0), ValidationError);
  CHECK_THROWS_AS(relative_reduction(-1.0, 7.0), ValidationError);
  RngStream rng(8, "test/scale");
  for (int i = 0; i < 100; ++i) {
    const double h0 = rng.uniform(5, 12);
    const double ht = rng.uniform(4, 12);
    const double c = rng.uniform(0.1, 10);
    CHECK(relative_reduction(c * h0, c * ht) ==
          doctest::Approx(relative_reduction(h0, ht)).epsilon(1e-12));
  }
}

TEST_CASE("arm_trend fits the reduction line") {
  std::vector<std::pair<double, double>> pts;
  for (int d = 0; d < 10; ++d) pts.emplace_back(d * 7.0, 0.01 + 0.0005 * d * 7.0);
  const auto t = arm_trend(pts);
  CHECK(t.slope == doctest::Approx(0.0005).epsilon(1e-9));
  CHECK(t.r2 == doctest::Approx(1.0));
  CHECK_THROWS_AS(arm_trend(std::vector<std::pair<double, double>>{{1, 1}}),
                  ValidationError);
}

TEST_CASE("emitted analysis files are byte-stable") {
  FixtureLog fx;
  fx.add_patient("p01", Arm::Personalized, Gender::Female, 58, 140, "weak_responder");
  fx.add_patient("p02", Arm::Control, Gender::Male, 61, 140, "weak_responder");
  for (int d = 0; d < 20; ++d) {
    fx.message(d, "p01", kDailyKinds[d % 4]);
    fx.reward(d, "p01", kDailyKinds[d % 4], 1.0 + 0.01 * (d % 3));
    fx.walk(d, "p01", 15 + d % 5, 100 + d % 7);
    fx.walk(d, "p02", 14, 95);
  }
  fx.upload(20, "p01");
  fx.upload(20, "p02");
  fx.hba1c(13 * 7 - 1, "p01", 13, 7.5);
  fx.hba1c(13 * 7 - 1, "p02", 13, 7.9);
  const auto view = fx.view();

  const auto out1 = std::filesystem::temp_directory_path() / "coachrl_an1";
  const auto out2 = std::filesystem::temp_directory_path() / "coachrl_an2";
  std::filesystem::remove_all(out1);
  std::filesystem::remove_all(out2);
  write_analyses(view, {}, out1, {"all"});
  write_analyses(view, {}, out2, {"all"});
  int compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(out1)) {
    const auto read = [](const std::filesystem::path& p) {
      std::ifstream in(p, std::ios::binary);
      return std::string(std::istreambuf_iterator<char>(in), {});
    };
    CHECK(read(entry.path()) == read(out2 / entry.path().filename()));
    ++compared;
  }
  CHECK(compared >= 5);
  std::filesystem::remove_all(out1);
  std::filesystem::remove_all(out2);
}
