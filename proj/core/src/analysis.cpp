#include "coachrl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "coachrl/regression.hpp"

namespace coachrl {

namespace {

struct RewardObs {
  std::string patient;
  int action_day = 0;
  int action = 0;  // daily index
  double value = 0.0;
  PolicyMode mode = PolicyMode::Initial;
};

std::vector<RewardObs> collect_rewards(const LogView& view) {
  std::vector<RewardObs> out;
  for (const Event& e : view.events) {
    if (e.kind != event_kind::kReward) continue;
    RewardObs r;
    r.patient = e.patient;
    r.action_day = e.payload.at("action_day").get<int>();
    r.action = daily_index(
        message_kind_from_string(e.payload.at("action").get<std::string>()));
    r.value = e.payload.at("value").get<double>();
    r.mode = policy_mode_from_string(e.payload.at("mode").get<std::string>());
    out.push_back(std::move(r));
  }
  return out;
}

// patient -> day -> daily action index, from materialized messages.
std::map<std::string, std::map<int, int>> collect_actions(const LogView& view) {
  std::map<std::string, std::map<int, int>> out;
  for (const Event& e : view.events) {
    if (e.kind != event_kind::kMessageSent) continue;
    const MessageKind kind =
        message_kind_from_string(e.payload.at("kind").get<std::string>());
    if (!is_daily_kind(kind)) continue;
    out[e.patient][e.day] = daily_index(kind);
  }
  return out;
}

struct PatientActivity {
  std::map<int, double> minutes;                    // session day -> minutes
  std::map<int, std::pair<double, double>> cadence;  // day -> (cad*min, min)
  int covered_end = -1;  // last fully transmitted day
};

std::map<std::string, PatientActivity> collect_activity(const LogView& view) {
  std::map<std::string, PatientActivity> out;
  for (const auto& [id, entry] : view.roster) out[id] = PatientActivity{};
  for (const Event& e : view.events) {
    if (e.kind == event_kind::kUpload) {
      const Timestamp ts = e.payload.at("slot_ts").get<Timestamp>();
      const int day_after =
          static_cast<int>((ts - view.manifest.epoch) / kSecondsPerDay);
      auto& pa = out[e.patient];
      pa.covered_end = std::max(pa.covered_end,
                                std::min(day_after - 1, view.total_days - 1));
    } else if (e.kind == event_kind::kWalkSession) {
      auto& pa = out[e.patient];
      const int day = e.payload.at("day").get<int>();
      const double minutes = e.payload.at("duration").get<double>();
      const double cadence = e.payload.at("cadence").get<double>();
      pa.minutes[day] += minutes;
      auto& [wsum, wmin] = pa.cadence[day];
      wsum += cadence * minutes;
      wmin += minutes;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IntegrityError("cannot write " + path.string());
  out << text;
}

}  // namespace

LogView make_log_view(LogFile log) {
  LogView view;
  view.manifest = std::move(log.manifest);
  view.events = std::move(log.events);
  for (const RosterEntry& r : view.manifest.roster)
    view.roster[r.profile.id] = r;
  view.total_days = view.manifest.expected_days;
  for (const Event& e : view.events) {
    if (e.kind == event_kind::kModeSwitch) {
      view.switch_day = e.day;
      break;
    }
  }
  return view;
}

MessageEffectTable message_effect_table(const LogView& view, PolicyMode phase) {
  MessageEffectTable t;
  std::array<double, 4> sums{};
  double total = 0.0;
  for (const RewardObs& r : collect_rewards(view)) {
    if (r.mode != phase) continue;
    sums[r.action] += r.value;
    ++t.n[r.action];
    total += r.value;
    ++t.total_n;
  }
  if (t.total_n == 0)
    throw ValidationError(std::string("message_effect_table: no rewards in ") +
                          to_string(phase) + " phase");
  for (int a = 0; a < 4; ++a)
    t.mean[a] = t.n[a] > 0 ? sums[a] / t.n[a] : 0.0;
  // Weighting by empirical message frequency collapses to the grand mean.
  t.weighted_total = total / t.total_n;
  return t;
}

AnovaResult phase_anova(const LogView& view) {
  std::vector<double> initial, learned;
  for (const RewardObs& r : collect_rewards(view)) {
    (r.mode == PolicyMode::Initial ? initial : learned).push_back(r.value);
  }
  const std::vector<std::vector<double>> groups = {std::move(initial),
                                                   std::move(learned)};
  return one_way_anova(groups);
}

PairGrid pair_effect_grid(const LogView& view) {
  const auto actions = collect_actions(view);
  PairGrid grid;
  std::array<std::array<double, 4>, 4> sums{};
  for (const RewardObs& r : collect_rewards(view)) {
    const auto pit = actions.find(r.patient);
    if (pit == actions.end()) continue;
    const auto prev = pit->second.find(r.action_day - 1);
    if (prev == pit->second.end()) continue;  // no message the day before
    sums[prev->second][r.action] += r.value;
    ++grid.n[prev->second][r.action];
  }
  for (int p = 0; p < 4; ++p)
    for (int c = 0; c < 4; ++c)
      grid.mean[p][c] = grid.n[p][c] > 0 ? sums[p][c] / grid.n[p][c] : 0.0;
  return grid;
}

std::vector<ResponseVector> response_vectors(const LogView& view) {
  std::map<std::string, ResponseVector> acc;
  std::map<std::string, std::array<double, 4>> sums;
  for (const RewardObs& r : collect_rewards(view)) {
    auto& v = acc[r.patient];
    v.patient_id = r.patient;
    sums[r.patient][r.action] +=
        std::clamp(r.value, kResponseWinsorLo, kResponseWinsorHi);
    ++v.n[r.action];
  }
  std::vector<ResponseVector> out;
  for (auto& [id, v] : acc) {
    v.complete = true;
    for (int a = 0; a < 4; ++a) {
      if (v.n[a] > 0)
        v.mean_change[a] = sums[id][a] / v.n[a];
      else
        v.complete = false;
    }
    out.push_back(v);
  }
  return out;
}

ClusterResult cluster_patients(const LogView& view,
                               std::span<const ResponseVector> vectors,
                               int k, int restarts, std::uint64_t seed,
                               int min_observations) {
  ClusterResult result;
  std::vector<std::vector<double>> points;
  for (const ResponseVector& v : vectors) {
    const bool enough =
        v.complete && std::all_of(v.n.begin(), v.n.end(), [&](int n) {
          return n >= min_observations;
        });
    if (!enough) {
      result.excluded.push_back(v.patient_id);
      continue;
    }
    result.patient_ids.push_back(v.patient_id);
    points.emplace_back(v.mean_change.begin(), v.mean_change.end());
  }
  if (points.size() < static_cast<std::size_t>(k))
    throw ValidationError("cluster_patients: fewer complete vectors than k");

  const KMeansResult km = kmeans(points, k, restarts, seed);
  result.assignment = km.assignment;
  result.wcss = km.wcss;
  for (int c = 0; c < k; ++c) {
    ClusterSummary s;
    s.cluster = c;
    int females = 0;
    double age_sum = 0.0;
    std::array<double, 4> resp{};
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (km.assignment[i] != c) continue;
      ++s.size;
      const RosterEntry& entry = view.roster.at(result.patient_ids[i]);
      if (entry.profile.gender == Gender::Female) ++females;
      age_sum += entry.profile.age;
      for (int a = 0; a < 4; ++a) resp[a] += points[i][a];
    }
    if (s.size > 0) {
      s.percent_female = 100.0 * females / s.size;
      s.mean_age = age_sum / s.size;
      for (int a = 0; a < 4; ++a) s.mean_response[a] = resp[a] / s.size;
    }
    result.clusters.push_back(s);
  }
  return result;
}

double permutation_accuracy(std::span<const int> assignment,
                            std::span<const int> truth, int k) {
  if (assignment.size() != truth.size() || assignment.empty())
    throw ValidationError("permutation_accuracy: size mismatch");
  std::vector<int> perm(k);
  for (int i = 0; i < k; ++i) perm[i] = i;
  double best = 0.0;
  do {
    int hits = 0;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (perm[assignment[i]] == truth[i]) ++hits;
    best = std::max(best, static_cast<double>(hits) / assignment.size());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<SlopeEstimate> activity_slopes(const LogView& view, Arm arm,
                                           SlopeWindow window) {
  const auto activity = collect_activity(view);
  std::vector<SlopeEstimate> out;
  for (const auto& [id, entry] : view.roster) {
    if (entry.profile.arm != arm) continue;
    const PatientActivity& pa = activity.at(id);

    int lo = 0;
    int hi = pa.covered_end;
    if (window == SlopeWindow::InitialPhase) {
      hi = std::min(hi, view.switch_day.value_or(view.total_days) - 1);
    } else if (window == SlopeWindow::LearnedPhase) {
      if (!view.switch_day.has_value()) continue;
      lo = *view.switch_day;
    }
    std::vector<double> x, y;
    const double daily_target = entry.profile.weekly_goal / 7.0;
    for (int d = lo; d <= hi; ++d) {
      const auto it = pa.minutes.find(d);
      x.push_back(d);
      y.push_back((it == pa.minutes.end() ? 0.0 : it->second) / daily_target);
    }
    if (x.size() < 3) continue;  // too short to report
    const LineFit f = fit_line(x, y);
    out.push_back({id, f.slope, f.r2, f.n});
  }
  return out;
}

std::vector<SlopeEstimate> cadence_slopes(const LogView& view, Arm arm) {
  const auto activity = collect_activity(view);
  std::vector<SlopeEstimate> out;
  for (const auto& [id, entry] : view.roster) {
    if (entry.profile.arm != arm) continue;
    const PatientActivity& pa = activity.at(id);
    std::map<int, std::pair<double, double>> weekly;  // week -> (cad*min, min)
    for (const auto& [day, cw] : pa.cadence) {
      auto& [wsum, wmin] = weekly[day / 7];
      wsum += cw.first;
      wmin += cw.second;
    }
    std::vector<double> x, y;
    for (const auto& [week, cw] : weekly) {
      if (cw.second <= 0.0) continue;
      x.push_back(7.0 * week + 3.0);  // midweek anchor, slope stays per day
      y.push_back(cw.first / cw.second);
    }
    if (x.size() < 3) continue;
    const LineFit f = fit_line(x, y);
    out.push_back({id, f.slope, f.r2, f.n});
  }
  return out;
}

double fit_weighted_average(std::span<const SlopeEstimate> slopes) {
  double num = 0.0, den = 0.0;
  for (const SlopeEstimate& s : slopes) {
    num += s.slope * s.r2;
    den += s.r2;
  }
  if (den <= 0.0)
    throw ValidationError("fit_weighted_average: total weight is zero");
  return num / den;
}

std::vector<LearningCurvePoint> learning_curve(
    std::span<const ModelState> snapshots) {
  if (snapshots.size() < 2)
    throw ValidationError("learning_curve: need at least 2 snapshots");
  std::vector<LearningCurvePoint> out;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    LearningCurvePoint p;
    p.day = snapshots[i].fitted_on;
    p.n_rows = snapshots[i].n_rows;
    p.adjusted_r2 = snapshots[i].adjusted_r2;
    if (i > 0) p.stability = stability(snapshots[i - 1], snapshots[i]);
    out.push_back(p);
  }
  return out;
}

std::vector<HbA1cRecord> hba1c_records(const LogView& view) {
  std::map<std::string, std::pair<int, double>> latest;  // id -> (week, value)
  for (const Event& e : view.events) {
    if (e.kind != event_kind::kHbA1cMeasured) continue;
    const int week = e.payload.at("week").get<int>();
    const double value = e.payload.at("value").get<double>();
    auto& slot = latest[e.patient];
    if (week >= slot.first) slot = {week, value};
  }
  std::vector<HbA1cRecord> out;
  for (const auto& [id, entry] : view.roster) {
    const auto it = latest.find(id);
    if (it == latest.end()) continue;  // no post-baseline measurement
    HbA1cRecord r;
    r.patient_id = id;
    r.initial = entry.profile.baseline_hba1c;
    r.delta = r.initial - it->second.second;
    r.days_between = 7.0 * it->second.first;
    r.activity_target = entry.profile.weekly_goal;
    r.personalized = entry.profile.arm == Arm::Personalized ? 1.0 : 0.0;
    out.push_back(std::move(r));
  }
  return out;
}

HbA1cModelResult hba1c_model(std::span<const HbA1cRecord> records) {
  const std::vector<std::string> terms = {"intercept", "days_between",
                                          "initial_hba1c", "activity_target",
                                          "personalized_arm"};
  const std::size_t p = terms.size() - 1;
  if (records.size() < p + 2)
    throw ValidationError("hba1c_model: too few records");

  std::vector<DesignRow> rows;
  for (const HbA1cRecord& r : records) {
    DesignRow dr;
    dr.values = {1.0, r.days_between, r.initial, r.activity_target,
                 r.personalized};
    dr.target = r.delta;
    rows.push_back(std::move(dr));
  }
  const ModelState m =
      fit(rows, 0.0, terms, Standardization::identity(), 0);

  double mean = 0.0;
  for (const HbA1cRecord& r : records) mean += r.delta;
  mean /= static_cast<double>(records.size());
  double rss = 0.0, tss = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double pred = predict(m, rows[i].values);
    rss += (records[i].delta - pred) * (records[i].delta - pred);
    tss += (records[i].delta - mean) * (records[i].delta - mean);
  }

  HbA1cModelResult result;
  result.terms = terms;
  result.coefficients = m.coefficients;
  result.n = static_cast<int>(records.size());
  result.r2 = tss > 0.0 ? 1.0 - rss / tss : 0.0;
  const double df2 = static_cast<double>(records.size() - p - 1);
  if (rss > 0.0 && df2 > 0.0) {
    const double f = ((tss - rss) / p) / (rss / df2);
    result.f_pvalue = f_distribution_sf(f, static_cast<double>(p), df2);
  } else {
    result.f_pvalue = 0.0;
  }
  return result;
}

double relative_reduction(double h0, double ht) {
  if (!(h0 > 0.0))
    throw ValidationError("relative_reduction: initial HbA1c must be > 0");
  return (h0 - ht) / h0;
}

TrendResult arm_trend(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2)
    throw ValidationError("arm_trend: need at least 2 points");
  std::vector<double> x, y;
  for (const auto& [days, reduction] : points) {
    x.push_back(days);
    y.push_back(reduction);
  }
  const LineFit f = fit_line(x, y);
  return {f.slope, f.r2, f.n};
}

std::vector<HbA1cReductionPoint> hba1c_reduction_points(const LogView& view) {
  std::vector<HbA1cReductionPoint> out;
  for (const Event& e : view.events) {
    if (e.kind != event_kind::kHbA1cMeasured) continue;
    const RosterEntry& entry = view.roster.at(e.patient);
    HbA1cReductionPoint p;
    p.patient_id = e.patient;
    p.arm = entry.profile.arm;
    p.days = 7.0 * e.payload.at("week").get<int>();
    p.reduction = relative_reduction(entry.profile.baseline_hba1c,
                                     e.payload.at("value").get<double>());
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

const std::array<const char*, 4> kDailyNames = {
    "negative", "positive_self", "positive_social", "no_message"};

std::string csv_message_effects(const LogView& view) {
  std::string s = "phase,message,mean_change,n\n";
  for (PolicyMode phase : {PolicyMode::Initial, PolicyMode::Learned}) {
    MessageEffectTable t;
    try {
      t = message_effect_table(view, phase);
    } catch (const ValidationError&) {
      continue;  // phase absent from this run
    }
    for (int a = 0; a < 4; ++a) {
      s += std::string(to_string(phase)) + "," + kDailyNames[a] + "," +
           (t.n[a] > 0 ? fmt(t.mean[a]) : "") + "," + std::to_string(t.n[a]) +
           "\n";
    }
    s += std::string(to_string(phase)) + ",(weighted_total)," +
         fmt(t.weighted_total) + "," + std::to_string(t.total_n) + "\n";
  }
  return s;
}

std::string csv_pair_effects(const LogView& view) {
  const PairGrid g = pair_effect_grid(view);
  std::string s = "previous,current,mean_change,n\n";
  for (int p = 0; p < 4; ++p)
    for (int c = 0; c < 4; ++c)
      s += std::string(kDailyNames[p]) + "," + kDailyNames[c] + "," +
           (g.n[p][c] > 0 ? fmt(g.mean[p][c]) : "") + "," +
           std::to_string(g.n[p][c]) + "\n";
  return s;
}

std::string csv_cluster_assignments(const LogView& view,
                                    const std::vector<ResponseVector>& vectors,
                                    const ClusterResult& clusters) {
  std::map<std::string, int> assignment;
  for (std::size_t i = 0; i < clusters.patient_ids.size(); ++i)
    assignment[clusters.patient_ids[i]] = clusters.assignment[i];
  std::string s =
      "patient_id,cluster,mean_negative,mean_positive_self,"
      "mean_positive_social,mean_no_message\n";
  for (const ResponseVector& v : vectors) {
    const auto it = assignment.find(v.patient_id);
    s += v.patient_id + "," +
         (it != assignment.end() ? std::to_string(it->second) : "") + ",";
    for (int a = 0; a < 4; ++a)
      s += std::string(v.n[a] > 0 ? fmt(v.mean_change[a]) : "") +
           (a < 3 ? "," : "\n");
  }
  return s;
}

std::string csv_cluster_profile(const ClusterResult& clusters) {
  std::string s =
      "cluster,size,percent_female,mean_age,mean_negative,mean_positive_self,"
      "mean_positive_social,mean_no_message\n";
  for (const ClusterSummary& c : clusters.clusters) {
    s += std::to_string(c.cluster) + "," + std::to_string(c.size) + "," +
         fmt(c.percent_female) + "," + fmt(c.mean_age);
    for (int a = 0; a < 4; ++a) s += "," + fmt(c.mean_response[a]);
    s += "\n";
  }
  return s;
}

std::string csv_slopes(const LogView& view) {
  std::string s = "patient_id,arm,window,slope_per_day,r2,n_points\n";
  const auto add = [&](Arm arm, SlopeWindow w, const char* name) {
    for (const SlopeEstimate& e : activity_slopes(view, arm, w))
      s += e.patient_id + "," + to_string(arm) + "," + name + "," +
           fmt(e.slope) + "," + fmt(e.r2) + "," + std::to_string(e.n_points) +
           "\n";
  };
  add(Arm::Personalized, SlopeWindow::InitialPhase, "initial");
  add(Arm::Personalized, SlopeWindow::LearnedPhase, "learned");
  add(Arm::Control, SlopeWindow::Full, "full");
  return s;
}

std::string csv_cadence(const LogView& view) {
  std::string s = "patient_id,arm,slope_per_day,r2,n_points\n";
  for (Arm arm : {Arm::Personalized, Arm::Control})
    for (const SlopeEstimate& e : cadence_slopes(view, arm))
      s += e.patient_id + "," + to_string(arm) + "," + fmt(e.slope) + "," +
           fmt(e.r2) + "," + std::to_string(e.n_points) + "\n";
  return s;
}

std::string csv_slope_summary(const LogView& view) {
  std::string s = "group,measure,weighted_slope,patients\n";
  const auto add_activity = [&](const char* group, Arm arm, SlopeWindow w) {
    const auto slopes = activity_slopes(view, arm, w);
    if (slopes.empty()) return;
    s += std::string(group) + ",activity," +
         fmt(fit_weighted_average(slopes)) + "," +
         std::to_string(slopes.size()) + "\n";
  };
  add_activity("initial", Arm::Personalized, SlopeWindow::InitialPhase);
  add_activity("learned", Arm::Personalized, SlopeWindow::LearnedPhase);
  add_activity("control", Arm::Control, SlopeWindow::Full);
  for (Arm arm : {Arm::Personalized, Arm::Control}) {
    const auto slopes = cadence_slopes(view, arm);
    if (slopes.empty()) continue;
    s += std::string(to_string(arm)) + ",cadence," +
         fmt(fit_weighted_average(slopes)) + "," +
         std::to_string(slopes.size()) + "\n";
  }
  return s;
}

std::string csv_learning_curve(std::span<const ModelState> snapshots) {
  std::string s = "day,n_rows,stability,adjusted_r2\n";
  if (snapshots.size() < 2) return s;
  for (const LearningCurvePoint& p : learning_curve(snapshots)) {
    s += std::to_string(p.day) + "," + std::to_string(p.n_rows) + "," +
         (p.stability ? fmt(*p.stability) : "") + "," +
         (p.adjusted_r2 ? fmt(*p.adjusted_r2) : "") + "\n";
  }
  return s;
}

std::string csv_hba1c_model(const HbA1cModelResult& m) {
  std::string s = "term,coefficient\n";
  for (std::size_t i = 0; i < m.terms.size(); ++i)
    s += m.terms[i] + "," + fmt(m.coefficients[i]) + "\n";
  return s;
}

std::string csv_hba1c_reduction(const LogView& view) {
  std::string s = "patient_id,arm,days,relative_reduction\n";
  for (const HbA1cReductionPoint& p : hba1c_reduction_points(view))
    s += p.patient_id + "," + to_string(p.arm) + "," + fmt(p.days) + "," +
         fmt(p.reduction) + "\n";
  return s;
}

std::string csv_hba1c_trends(const LogView& view) {
  std::string s = "arm,slope_per_day,r2,n\n";
  const auto points = hba1c_reduction_points(view);
  for (Arm arm : {Arm::Personalized, Arm::Control}) {
    std::vector<std::pair<double, double>> pts;
    for (const HbA1cReductionPoint& p : points)
      if (p.arm == arm) pts.emplace_back(p.days, p.reduction);
    if (pts.size() < 2) continue;
    const TrendResult t = arm_trend(pts);
    s += std::string(to_string(arm)) + "," + fmt(t.slope) + "," + fmt(t.r2) +
         "," + std::to_string(t.n) + "\n";
  }
  return s;
}

}  // namespace

void write_analyses(const LogView& view, std::span<const ModelState> snapshots,
                    const std::filesystem::path& out_dir,
                    const std::set<std::string>& which) {
  std::filesystem::create_directories(out_dir);
  const auto wants = [&](const char* name) {
    return which.contains("all") || which.contains(name);
  };
  Json summary;
  summary["seed"] = view.manifest.seed;
  summary["config_hash"] = view.manifest.config_hash;
  summary["total_days"] = view.total_days;
  summary["switch_day"] =
      view.switch_day ? Json(*view.switch_day) : Json(nullptr);
  Json meta;
  meta["slope_weighting"] = "r2";  // arm averages weight each slope by its fit
  meta["response_vector_estimator"] = "winsorized_mean[0.5,2.0]";
  meta["cluster_min_observations_per_kind"] = 12;
  summary["metadata"] = meta;

  if (wants("table")) {
    write_text(out_dir / "message_effects.csv", csv_message_effects(view));
    Json tj;
    for (PolicyMode phase : {PolicyMode::Initial, PolicyMode::Learned}) {
      try {
        const MessageEffectTable t = message_effect_table(view, phase);
        Json pj;
        for (int a = 0; a < 4; ++a) {
          pj[kDailyNames[a]]["mean"] = t.n[a] > 0 ? Json(t.mean[a]) : Json(nullptr);
          pj[kDailyNames[a]]["n"] = t.n[a];
        }
        pj["weighted_total"] = t.weighted_total;
        pj["n"] = t.total_n;
        tj[to_string(phase)] = pj;
      } catch (const ValidationError&) {
      }
    }
    try {
      const AnovaResult a = phase_anova(view);
      tj["phase_anova"] = {{"f", a.f_statistic}, {"p", a.p_value}};
    } catch (const ValidationError&) {
    }
    summary["message_effects"] = tj;
  }
  if (wants("pairs")) {
    write_text(out_dir / "pair_effects.csv", csv_pair_effects(view));
    const PairGrid g = pair_effect_grid(view);
    Json gj;
    for (int p = 0; p < 4; ++p)
      for (int c = 0; c < 4; ++c) {
        Json cell;
        cell["mean"] = g.n[p][c] > 0 ? Json(g.mean[p][c]) : Json(nullptr);
        cell["n"] = g.n[p][c];
        gj[std::string(kDailyNames[p]) + "->" + kDailyNames[c]] = cell;
      }
    summary["pair_effects"] = gj;
  }
  if (wants("clusters")) {
    const auto vectors = response_vectors(view);
    try {
      const ClusterResult clusters =
          cluster_patients(view, vectors, 3, 20, view.manifest.seed);
      write_text(out_dir / "cluster_assignments.csv",
                 csv_cluster_assignments(view, vectors, clusters));
      write_text(out_dir / "cluster_profile.csv", csv_cluster_profile(clusters));
      Json cj;
      cj["wcss"] = clusters.wcss;
      cj["excluded"] = clusters.excluded;
      Json arr = Json::array();
      for (const ClusterSummary& c : clusters.clusters) {
        Json one;
        one["cluster"] = c.cluster;
        one["size"] = c.size;
        one["percent_female"] = c.percent_female;
        one["mean_age"] = c.mean_age;
        one["mean_response"] = c.mean_response;
        arr.push_back(one);
      }
      cj["clusters"] = arr;
      summary["clustering"] = cj;
    } catch (const ValidationError& ex) {
      summary["clustering"] = Json{{"error", ex.what()}};
    }
  }
  if (wants("slopes")) {
    write_text(out_dir / "activity_slopes.csv", csv_slopes(view));
    write_text(out_dir / "cadence_slopes.csv", csv_cadence(view));
    write_text(out_dir / "slope_summary.csv", csv_slope_summary(view));
    Json sj;
    const auto add = [&](const char* group, Arm arm, SlopeWindow w) {
      const auto slopes = activity_slopes(view, arm, w);
      if (slopes.empty()) return;
      sj["activity"][group] = {{"weighted_slope", fit_weighted_average(slopes)},
                               {"patients", slopes.size()}};
    };
    add("initial", Arm::Personalized, SlopeWindow::InitialPhase);
    add("learned", Arm::Personalized, SlopeWindow::LearnedPhase);
    add("control", Arm::Control, SlopeWindow::Full);
    for (Arm arm : {Arm::Personalized, Arm::Control}) {
      const auto slopes = cadence_slopes(view, arm);
      if (slopes.empty()) continue;
      sj["cadence"][to_string(arm)] = {
          {"weighted_slope", fit_weighted_average(slopes)},
          {"patients", slopes.size()}};
    }
    summary["slopes"] = sj;
  }
  if (wants("learning")) {
    write_text(out_dir / "learning_curve.csv", csv_learning_curve(snapshots));
    if (snapshots.size() >= 2) {
      const auto curve = learning_curve(snapshots);
      Json lj;
      lj["points"] = curve.size();
      lj["final_adjusted_r2"] = curve.back().adjusted_r2
                                    ? Json(*curve.back().adjusted_r2)
                                    : Json(nullptr);
      summary["learning_curve"] = lj;
    }
  }
  if (wants("hba1c")) {
    const auto records = hba1c_records(view);
    write_text(out_dir / "hba1c_reduction.csv", csv_hba1c_reduction(view));
    write_text(out_dir / "hba1c_trends.csv", csv_hba1c_trends(view));
    Json hj;
    if (records.size() >= 7) {
      try {
        const HbA1cModelResult m = hba1c_model(records);
        write_text(out_dir / "hba1c_model.csv", csv_hba1c_model(m));
        Json mj;
        for (std::size_t i = 0; i < m.terms.size(); ++i)
          mj[m.terms[i]] = m.coefficients[i];
        hj["model"] = mj;
        hj["r2"] = m.r2;
        hj["f_pvalue"] = m.f_pvalue;
        hj["n"] = m.n;
      } catch (const SingularSystemError& ex) {
        hj["model_error"] = ex.what();
      }
    }
    summary["hba1c"] = hj;
  }
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");
}

std::string render_report(const LogView& view,
                          std::span<const ModelState> snapshots) {
  std::ostringstream md;
  md << "# Run report\n\n";
  md << "- seed: " << view.manifest.seed << "\n";
  md << "- days: " << view.total_days << "\n";
  md << "- patients: " << view.roster.size() << "\n";
  if (view.switch_day)
    md << "- learned policy from day: " << *view.switch_day << "\n";
  else
    md << "- learned policy: never activated\n";
  md << "\n## Message effects (mean day-over-day activity ratio)\n\n";
  md << "| phase | negative | positive_self | positive_social | no_message | "
        "weighted total |\n";
  md << "|---|---|---|---|---|---|\n";
  for (PolicyMode phase : {PolicyMode::Initial, PolicyMode::Learned}) {
    try {
      const MessageEffectTable t = message_effect_table(view, phase);
      md << "| " << to_string(phase);
      for (int a = 0; a < 4; ++a)
        md << " | " << (t.n[a] > 0 ? fmt(t.mean[a]) : "-");
      md << " | " << fmt(t.weighted_total) << " |\n";
    } catch (const ValidationError&) {
    }
  }
  try {
    const AnovaResult a = phase_anova(view);
    md << "\nInitial vs learned rewards: F = " << fmt(a.f_statistic)
       << ", p = " << fmt(a.p_value) << "\n";
  } catch (const ValidationError&) {
  }

  md << "\n## Consecutive-message effects\n\n";
  const PairGrid g = pair_effect_grid(view);
  md << "| previous \\\\ current | negative | positive_self | positive_social "
        "| no_message |\n|---|---|---|---|---|\n";
  for (int p = 0; p < 4; ++p) {
    md << "| " << kDailyNames[p];
    for (int c = 0; c < 4; ++c)
      md << " | " << (g.n[p][c] > 0 ? fmt(g.mean[p][c]) : "-");
    md << " |\n";
  }

  md << "\n## Response clusters\n\n";
  try {
    const auto vectors = response_vectors(view);
    const ClusterResult clusters =
        cluster_patients(view, vectors, 3, 20, view.manifest.seed);
    md << "| cluster | size | % female | mean age | negative | positive_self "
          "| positive_social | no_message |\n|---|---|---|---|---|---|---|---|\n";
    for (const ClusterSummary& c : clusters.clusters) {
      md << "| " << c.cluster << " | " << c.size << " | "
         << fmt(c.percent_female) << " | " << fmt(c.mean_age);
      for (int a = 0; a < 4; ++a) md << " | " << fmt(c.mean_response[a]);
      md << " |\n";
    }
    if (!clusters.excluded.empty()) {
      md << "\nExcluded (incomplete or under-observed response vectors):";
      for (const auto& id : clusters.excluded) md << " " << id;
      md << "\n";
    }
  } catch (const ValidationError& ex) {
    md << "clustering unavailable: " << ex.what() << "\n";
  }

  md << "\n## Activity and cadence slopes (fit-weighted averages)\n\n";
  md << "| group | measure | weighted slope/day | patients |\n|---|---|---|---|\n";
  const auto add_row = [&](const char* group, Arm arm, SlopeWindow w) {
    const auto slopes = activity_slopes(view, arm, w);
    if (slopes.empty()) return;
    md << "| " << group << " | activity | " << fmt(fit_weighted_average(slopes))
       << " | " << slopes.size() << " |\n";
  };
  add_row("initial", Arm::Personalized, SlopeWindow::InitialPhase);
  add_row("learned", Arm::Personalized, SlopeWindow::LearnedPhase);
  add_row("control", Arm::Control, SlopeWindow::Full);
  for (Arm arm : {Arm::Personalized, Arm::Control}) {
    const auto slopes = cadence_slopes(view, arm);
    if (slopes.empty()) continue;
    md << "| " << to_string(arm) << " | cadence | "
       << fmt(fit_weighted_average(slopes)) << " | " << slopes.size() << " |\n";
  }

  md << "\n## Learning curve\n\n";
  if (snapshots.size() >= 2) {
    const auto curve = learning_curve(snapshots);
    md << "snapshots: " << curve.size() << "; final adjusted R2: "
       << (curve.back().adjusted_r2 ? fmt(*curve.back().adjusted_r2) : "-")
       << "; first stability: "
       << (curve[1].stability ? fmt(*curve[1].stability) : "-")
       << "; last stability: "
       << (curve.back().stability ? fmt(*curve.back().stability) : "-") << "\n";
  } else {
    md << "not enough snapshots\n";
  }

  md << "\n## Glycemia\n\n";
  const auto records = hba1c_records(view);
  if (records.size() >= 7) {
    try {
      const HbA1cModelResult m = hba1c_model(records);
      md << "| term | coefficient |\n|---|---|\n";
      for (std::size_t i = 0; i < m.terms.size(); ++i)
        md << "| " << m.terms[i] << " | " << fmt(m.coefficients[i]) << " |\n";
      md << "\nR2 = " << fmt(m.r2) << ", overall F p = " << fmt(m.f_pvalue)
         << ", n = " << m.n << "\n";
    } catch (const SingularSystemError& ex) {
      md << "model singular: " << ex.what() << "\n";
    }
  } else {
    md << "too few HbA1c records for the linear model\n";
  }
  const auto points = hba1c_reduction_points(view);
  for (Arm arm : {Arm::Personalized, Arm::Control}) {
    std::vector<std::pair<double, double>> pts;
    for (const HbA1cReductionPoint& p : points)
      if (p.arm == arm) pts.emplace_back(p.days, p.reduction);
    if (pts.size() < 2) continue;
    const TrendResult t = arm_trend(pts);
    md << "- " << to_string(arm) << " relative-reduction trend: slope/day = "
       << fmt(t.slope) << ", R2 = " << fmt(t.r2) << ", n = " << t.n << "\n";
  }
  return md.str();
}

}  // namespace coachrl
