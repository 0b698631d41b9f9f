#include "coachrl/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <map>

namespace coachrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string snapshot_filename(int day) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "model_day_%03d.json", day);
  return buf;
}

struct PendingOutcome {
  int day = 0;
  MessageKind action = MessageKind::NoMessage;
  ContextVector context;
  PolicyMode mode = PolicyMode::Initial;
};

struct PatientRuntime {
  SimPatientState sim;
  RngStream behavior;
  RngStream transmit;
  RngStream glyc;
  std::vector<std::pair<int, MessageKind>> message_log;
  std::array<std::optional<int>, 4> last_sent;
  std::map<int, double> observed_minutes;  // uploaded minutes per day
  std::vector<TrueWalk> todays_walks;
  double week_true_minutes = 0.0;
  std::optional<int> last_achievement_week;
  std::optional<MessageKind> todays_message;
  double todays_days_since = kInf;
  std::deque<PendingOutcome> pending;

  PatientRuntime(SimPatientState s, std::uint64_t seed)
      : sim(std::move(s)),
        behavior(seed, "patient/" + sim.profile.id),
        transmit(seed, "transmit/" + sim.profile.id),
        glyc(seed, "hba1c/" + sim.profile.id) {}
};

}  // namespace

std::vector<SimPatientState> make_cohort(const ExperimentConfig& config) {
  config.validate();
  const CohortConfig& cc = config.cohort;
  const SimParams& sp = config.simulator;
  RngStream rng(config.seed, "cohort");

  std::vector<std::string> archetype_names;
  for (const auto& [name, a] : sp.archetypes) archetype_names.push_back(name);

  // Fixed counts fill the personalized arm (shuffled); everyone not covered,
  // including the whole control arm, draws an archetype uniformly.
  std::vector<std::string> personalized_assign;
  for (const auto& [name, count] : cc.archetype_counts)
    for (int i = 0; i < count; ++i) personalized_assign.push_back(name);
  while (static_cast<int>(personalized_assign.size()) < cc.personalized)
    personalized_assign.push_back(
        archetype_names[rng.uniform_int(
            0, static_cast<int>(archetype_names.size()) - 1)]);
  for (int i = static_cast<int>(personalized_assign.size()) - 1; i > 0; --i)
    std::swap(personalized_assign[i], personalized_assign[rng.uniform_int(0, i)]);

  int width = 2;
  for (int v = cc.size; v >= 100 && width < 9; v /= 10) ++width;

  std::vector<SimPatientState> out;
  out.reserve(cc.size);
  for (int i = 0; i < cc.size; ++i) {
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "p%0*d", width, i + 1);

    SimPatientState s;
    s.profile.id = idbuf;
    const bool personalized = i < cc.personalized;
    s.profile.arm = personalized ? Arm::Personalized : Arm::Control;
    const std::string archetype_name =
        personalized ? personalized_assign[i]
                     : archetype_names[rng.uniform_int(
                           0, static_cast<int>(archetype_names.size()) - 1)];
    s.archetype = sp.archetypes.at(archetype_name);

    s.profile.age = std::clamp(
        static_cast<int>(std::lround(rng.normal(cc.age_mean, cc.age_sd))),
        cc.age_min, cc.age_max);
    s.profile.gender = rng.uniform() < s.archetype.female_prob
                           ? Gender::Female
                           : Gender::Male;
    s.profile.weekly_goal =
        std::max(cc.goal_min, rng.normal(cc.goal_mean, cc.goal_sd));
    s.profile.sessions_per_week =
        rng.uniform_int(cc.sessions_min, cc.sessions_max);
    s.profile.baseline_hba1c = std::max(
        cc.hba1c_min, rng.normal(personalized ? cc.hba1c_mean_personalized
                                              : cc.hba1c_mean_control,
                                 cc.hba1c_sd));
    s.profile.enrolled_on = 0;

    // Both draws are consumed unconditionally to keep the stream aligned.
    const double u_complete = rng.uniform();
    const double u_week = rng.uniform();
    if (u_complete >= sp.dropout.complete_prob) {
      const int week = std::clamp(
          static_cast<int>(std::floor(
              sp.dropout.early_min_weeks +
              u_week * (sp.dropout.early_max_weeks - sp.dropout.early_min_weeks))),
          1, config.horizon_weeks);
      if (week < config.horizon_weeks) s.dropout_week = week;
    }

    s.cadence_base = std::max(60.0, rng.normal(sp.cadence_mean, sp.cadence_sd));
    const double daily_goal = s.profile.weekly_goal / 7.0;
    s.habit = s.habit_ref = s.propensity =
        std::max(sp.initial_propensity_fraction * daily_goal,
                 sp.min_activity_minutes + 2.0);
    s.hba1c = s.profile.baseline_hba1c;
    s.last_upload = sp.epoch;
    s.profile.validate();
    out.push_back(std::move(s));
  }
  return out;
}

EngineResult run_experiment(const ExperimentConfig& config,
                            MessageTransport* transport) {
  config.validate();
  const SimParams& sp = config.simulator;
  const Timestamp epoch = sp.epoch;
  const int total_days = config.horizon_weeks * 7;
  const auto period_s =
      static_cast<Timestamp>(sp.transmit_period_hours * kSecondsPerHour);

  std::vector<PatientRuntime> patients;
  for (auto& s : make_cohort(config)) patients.emplace_back(std::move(s), config.seed);

  PolicyState policy;
  policy.temperature = config.policy.temperature;
  policy.switch_threshold = config.policy.switch_threshold;
  RngStream policy_rng(config.seed, "policy");

  std::vector<Event> events;
  std::uint64_t seq = 0;
  const auto log = [&](int day, Timestamp ts, const std::string& patient,
                       const char* kind, Json payload) {
    events.push_back(
        Event{seq++, day, ts, patient, kind, std::move(payload)});
  };

  struct TrainingRow {
    ContextVector context;
    MessageKind action;
    double y;
  };
  std::vector<TrainingRow> rows;
  std::vector<ModelState> snapshots;

  const auto schedule_sessions = [&](PatientRuntime& p,
                                     const std::vector<TrueWalk>& walks) {
    for (const WalkSession& s :
         sense_walks(walks, sp.sampling_period_minutes)) {
      const Timestamp end_ts =
          s.start + static_cast<Timestamp>(s.duration * kSecondsPerMinute);
      p.sim.pending_upload.emplace_back(end_ts, s);
    }
  };

  const auto forced_outage = [&](const PatientRuntime& p, Timestamp slot) {
    if (p.sim.dropout_week.has_value() &&
        slot >= day_start(epoch, *p.sim.dropout_week * 7))
      return true;
    for (const OutageWindow& w : sp.outage_windows) {
      if (!w.patient_id.empty() && w.patient_id != p.sim.profile.id) continue;
      const auto ws =
          epoch + static_cast<Timestamp>(w.start_hours * kSecondsPerHour);
      const auto we =
          epoch + static_cast<Timestamp>(w.end_hours * kSecondsPerHour);
      if (slot >= ws && slot < we) return true;
    }
    return false;
  };

  const auto deliver_slot = [&](PatientRuntime& p, Timestamp slot, int log_day,
                                double outage_prob) {
    const auto delivered = attempt_upload(p.sim, slot, outage_prob,
                                          forced_outage(p, slot), p.transmit);
    if (!delivered.has_value()) return;
    Json up;
    up["slot_ts"] = slot;
    up["sessions"] = delivered->size();
    log(log_day, slot, p.sim.profile.id, event_kind::kUpload, up);
    for (const WalkSession& s : *delivered) {
      const int session_day = static_cast<int>((s.start - epoch) / kSecondsPerDay);
      Json w;
      w["day"] = session_day;
      w["start"] = s.start;
      w["duration"] = s.duration;
      w["cadence"] = s.cadence;
      log(log_day, slot, p.sim.profile.id, event_kind::kWalkSession, w);
      p.observed_minutes[session_day] += s.duration;
    }
  };

  // Day-aligned transmission slots in (lower, upper], chronological, patients
  // in id order within a slot.
  const auto process_slots = [&](Timestamp lower, Timestamp upper) {
    const int first_day = std::max(
        0, static_cast<int>((lower - epoch) / kSecondsPerDay) - 1);
    const int last_day = static_cast<int>((upper - epoch) / kSecondsPerDay);
    for (int dd = first_day; dd <= last_day; ++dd) {
      for (Timestamp slot = day_start(epoch, dd);
           slot < day_start(epoch, dd + 1); slot += period_s) {
        if (slot <= lower || slot > upper) continue;
        for (auto& p : patients) deliver_slot(p, slot, dd, sp.outage_prob);
      }
    }
  };

  const auto observed_or_zero = [](const PatientRuntime& p, int day) {
    const auto it = p.observed_minutes.find(day);
    return it == p.observed_minutes.end() ? 0.0 : it->second;
  };

  const auto finalize_rewards = [&](int log_day, Timestamp ts) {
    for (auto& p : patients) {
      while (!p.pending.empty()) {
        const PendingOutcome& po = p.pending.front();
        if (p.sim.last_upload < day_start(epoch, po.day + 2)) break;
        const double before = observed_or_zero(p, po.day);
        const double after = observed_or_zero(p, po.day + 1);
        const double y = compute_reward(before, after).value;
        rows.push_back({po.context, po.action, y});
        Json r;
        r["action_day"] = po.day;
        r["action"] = to_string(po.action);
        r["value"] = y;
        r["mode"] = to_string(po.mode);
        r["minutes_before"] = before;
        r["minutes_after"] = after;
        log(log_day, ts, p.sim.profile.id, event_kind::kReward, r);
        p.pending.pop_front();
      }
    }
  };

  const auto build_patient_context = [&](const PatientRuntime& p, int day) {
    const int dow = day_of_week(day, p.sim.profile.enrolled_on);
    const int week_start = day - (dow - 1);
    std::vector<DailyRecord> records;
    for (int date = std::min(week_start, day - 1); date <= day - 1; ++date) {
      if (date < 0) continue;
      DailyRecord r;
      r.patient_id = p.sim.profile.id;
      r.date = date;
      r.minutes = observed_or_zero(p, date);
      records.push_back(std::move(r));
    }
    return build_context(p.sim.profile, records, p.message_log, day,
                         config.policy.recency_cap_days);
  };

  // Day 0 ground truth comes from the initial propensity, before any message.
  for (auto& p : patients) {
    p.todays_walks = step_patient(p.sim, std::nullopt, kInf, 0, sp, p.behavior);
    schedule_sessions(p, p.todays_walks);
  }

  Timestamp prev_cutoff = epoch - 1;
  for (int d = 0; d < total_days; ++d) {
    const Timestamp dec_ts = decision_time(epoch, d, sp.decision_hour);

    // (1) deliver transmission slots since the previous decision pass, then
    // fold matured outcomes into the training pool.
    process_slots(prev_cutoff, dec_ts);
    prev_cutoff = dec_ts;
    finalize_rewards(d, dec_ts);

    // (2) mode transition is monotone and happens before any decision.
    if (policy.mode == PolicyMode::Initial &&
        rows.size() >= policy.switch_threshold) {
      policy.mode = PolicyMode::Learned;
      Json ms;
      ms["n_rows"] = rows.size();
      ms["switch_threshold"] = policy.switch_threshold;
      log(d, dec_ts, "", event_kind::kModeSwitch, ms);
    }

    // (3) daily retrain on the full pool with freshly frozen standardization.
    if (policy.mode == PolicyMode::Learned) {
      std::vector<ContextVector> pool;
      pool.reserve(rows.size());
      for (const TrainingRow& r : rows) pool.push_back(r.context);
      const Standardization st = Standardization::fit(pool);
      std::vector<DesignRow> design;
      design.reserve(rows.size());
      for (const TrainingRow& r : rows) {
        DesignRow dr = kesler_augment(st.apply(r.context), r.action);
        dr.target = r.y;
        design.push_back(std::move(dr));
      }
      ModelState model = fit(design, config.policy.ridge_lambda,
                             design_column_names(), st, d);
      Json ref;
      ref["file"] = std::string("snapshots/") + snapshot_filename(d);
      ref["n_rows"] = model.n_rows;
      ref["adjusted_r2"] =
          model.adjusted_r2 ? Json(*model.adjusted_r2) : Json(nullptr);
      ref["stability"] = snapshots.empty()
                             ? Json(nullptr)
                             : Json(stability(snapshots.back(), model));
      log(d, dec_ts, "", event_kind::kModelSnapshotRef, ref);
      policy.model = model;
      snapshots.push_back(std::move(model));
    }

    // (4) personalized-arm decisions; stale data suppresses the message and
    // leaves no decision event.
    for (auto& p : patients) {
      p.todays_message.reset();
      p.todays_days_since = kInf;
      if (p.sim.profile.arm != Arm::Personalized) continue;
      if (is_stale(p.sim.last_upload, dec_ts, sp.staleness_hours)) continue;

      const ContextVector ctx = build_patient_context(p, d);
      const double f =
          expected_week_fraction(day_of_week(d, p.sim.profile.enrolled_on));
      Decision dec =
          daily_decide(policy, p.sim.profile, ctx, f, true, d, policy_rng);

      Json dj;
      dj["mode"] = to_string(dec.mode);
      dj["expected_fraction"] = f;
      dj["context"] = ctx.values();
      dj["probabilities"] = *dec.probabilities;
      dj["predicted"] = dec.predicted ? Json(*dec.predicted) : Json(nullptr);
      dj["action"] = to_string(*dec.action);
      dj["draws"] = dec.rng_draws;
      log(d, dec_ts, p.sim.profile.id, event_kind::kDecision, dj);

      const MessageKind kind = *dec.action;
      const int pct = goal_fraction_percent(ctx.week_cum_minutes,
                                            p.sim.profile.weekly_goal);
      Json mj;
      mj["kind"] = to_string(kind);
      mj["goal_pct"] = pct;
      mj["text"] = render_message(kind, pct);
      log(d, dec_ts, p.sim.profile.id, event_kind::kMessageSent, mj);
      if (transport != nullptr && kind != MessageKind::NoMessage)
        transport->send(p.sim.profile.id, kind, render_message(kind, pct),
                        dec_ts);

      const int k = daily_index(kind);
      p.todays_days_since =
          p.last_sent[k] ? static_cast<double>(d - *p.last_sent[k]) : kInf;
      p.todays_message = kind;
      p.last_sent[k] = d;
      p.message_log.emplace_back(d, kind);
      p.pending.push_back({d, kind, ctx, dec.mode});
    }

    // (5) control arm: the fixed weekly reminder, unconditional.
    for (auto& p : patients) {
      if (p.sim.profile.arm != Arm::Control) continue;
      const auto kind = control_decide(p.sim.profile, d);
      if (!kind.has_value()) continue;
      Json mj;
      mj["kind"] = to_string(*kind);
      mj["goal_pct"] = nullptr;
      mj["text"] = render_message(*kind);
      log(d, dec_ts, p.sim.profile.id, event_kind::kMessageSent, mj);
      if (transport != nullptr)
        transport->send(p.sim.profile.id, *kind, render_message(*kind), dec_ts);
    }

    // (6) the day's ground-truth activity accrues toward the weekly totals.
    for (auto& p : patients) {
      double total = 0.0;
      for (const TrueWalk& w : p.todays_walks) total += w.duration;
      p.week_true_minutes += total;
    }

    // (7) week close: glycemia step (quarterly measurement) and summaries.
    if ((d + 1) % 7 == 0) {
      const int completed_week = (d + 1) / 7 - 1;  // 0-based
      for (auto& p : patients) {
        const double fraction =
            p.week_true_minutes / p.sim.profile.weekly_goal;
        hba1c_step(p.sim, fraction, sp.hba1c, p.glyc);
        p.week_true_minutes = 0.0;
        // Lab follow-up lasts only while the patient is still reachable;
        // dropouts keep their physiology but stop producing measurements.
        const int measured_week = completed_week + 1;
        const bool reachable = !p.sim.dropout_week.has_value() ||
                               *p.sim.dropout_week >= measured_week;
        if (measured_week % sp.hba1c.measure_interval_weeks == 0 && reachable) {
          Json h;
          h["week"] = measured_week;
          h["value"] = p.sim.hba1c;
          log(d, day_start(epoch, d) + 20 * kSecondsPerHour, p.sim.profile.id,
              event_kind::kHbA1cMeasured, h);
        }
      }

      std::vector<std::vector<double>> totals(patients.size());
      std::vector<std::optional<double>> increases(patients.size());
      for (std::size_t i = 0; i < patients.size(); ++i) {
        if (patients[i].sim.profile.arm != Arm::Personalized) continue;
        for (int w = 0; w <= completed_week; ++w) {
          double t = 0.0;
          for (int date = 7 * w; date < 7 * (w + 1); ++date)
            t += observed_or_zero(patients[i], date);
          totals[i].push_back(t);
        }
        if (completed_week >= 1)
          increases[i] = totals[i][completed_week] - totals[i][completed_week - 1];
      }
      for (std::size_t i = 0; i < patients.size(); ++i) {
        auto& p = patients[i];
        if (p.sim.profile.arm != Arm::Personalized) continue;
        WeeklySummaryInput in;
        in.weekly_totals = totals[i];
        for (std::size_t o = 0; o < patients.size(); ++o)
          if (o != i && increases[o].has_value())
            in.cohort_increases.push_back(*increases[o]);
        in.last_achievement_week = p.last_achievement_week;
        in.weekly_goal = p.sim.profile.weekly_goal;
        in.achievement_threshold = config.policy.achievement_threshold;
        in.cooldown_weeks = config.policy.achievement_cooldown_weeks;
        const MessageKind kind = weekly_summary_decide(in);
        Json w;
        w["week"] = completed_week;
        w["kind"] = to_string(kind);
        w["text"] = render_message(kind);
        log(d, day_start(epoch, d) + 21 * kSecondsPerHour, p.sim.profile.id,
            event_kind::kWeeklySummary, w);
        if (transport != nullptr)
          transport->send(p.sim.profile.id, kind, render_message(kind),
                          day_start(epoch, d) + 21 * kSecondsPerHour);
        if (kind != MessageKind::WeeklyReminder)
          p.last_achievement_week = completed_week;
      }
    }

    // (8) patient responses materialize as tomorrow's ground-truth walks.
    for (auto& p : patients) {
      auto walks = step_patient(p.sim, p.todays_message, p.todays_days_since,
                                d + 1, sp, p.behavior);
      schedule_sessions(p, walks);
      p.todays_walks = std::move(walks);
    }
  }

  // Study close-out: drain the remaining slots of the final day, then one
  // reliable collection at the horizon boundary so the last completed day's
  // outcomes can mature.
  process_slots(prev_cutoff, day_start(epoch, total_days) - 1);
  const Timestamp close_ts = day_start(epoch, total_days);
  for (auto& p : patients) deliver_slot(p, close_ts, total_days - 1, 0.0);
  finalize_rewards(total_days - 1, close_ts);

  EngineResult result;
  result.manifest.seed = config.seed;
  result.manifest.config = config_to_json(config);
  result.manifest.config_hash = fnv1a64_hex(result.manifest.config.dump());
  std::string joined;
  for (const std::string& n : design_column_names()) {
    joined += n;
    joined += '\n';
  }
  result.manifest.column_manifest_hash = fnv1a64_hex(joined);
  result.manifest.expected_days = total_days;
  result.manifest.event_count = events.size();
  result.manifest.epoch = epoch;
  for (const auto& p : patients)
    result.manifest.roster.push_back({p.sim.profile, p.sim.archetype.name});
  result.events = std::move(events);
  result.snapshots = std::move(snapshots);
  return result;
}

std::filesystem::path write_run(const EngineResult& result,
                                const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / result.manifest.snapshots_dir);
  const auto log_path = out_dir / "events.jsonl";
  write_log(log_path, result.manifest, result.events);

  Json cm;
  Json cols;
  int idx = 0;
  for (const std::string& n : design_column_names()) cols[n] = idx++;
  cm["columns"] = cols;
  {
    std::ofstream out(out_dir / result.manifest.column_manifest_file,
                      std::ios::binary | std::ios::trunc);
    out << cm.dump(2) << '\n';
  }
  for (const ModelState& m : result.snapshots) {
    std::ofstream out(out_dir / result.manifest.snapshots_dir /
                          snapshot_filename(m.fitted_on),
                      std::ios::binary | std::ios::trunc);
    out << model_to_json(m).dump(2) << '\n';
  }
  return log_path;
}

LoadedRun load_run(const std::filesystem::path& log_path) {
  LoadedRun run;
  run.log = read_log(log_path);
  const auto dir = log_path.parent_path();
  for (const Event& e : run.log.events) {
    if (e.kind != event_kind::kModelSnapshotRef) continue;
    const auto file = dir / e.payload.at("file").get<std::string>();
    std::ifstream in(file);
    if (!in)
      throw IntegrityError("missing model snapshot: " + file.string());
    Json j;
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::exception& ex) {
      throw IntegrityError("bad model snapshot " + file.string() + ": " +
                           ex.what());
    }
    ModelState m = model_from_json(j);
    if (m.fitted_on != e.day)
      throw IntegrityError("snapshot day mismatch in " + file.string());
    run.snapshots.push_back(std::move(m));
  }
  return run;
}

ReplayReport replay(const RunManifest& manifest, std::span<const Event> events,
                    std::span<const ModelState> snapshots) {
  const double temperature =
      manifest.config.at("policy").at("temperature").get<double>();
  std::map<std::string, int> enrolled;
  for (const RosterEntry& r : manifest.roster)
    enrolled[r.profile.id] = r.profile.enrolled_on;

  if (events.size() != manifest.event_count)
    throw IntegrityError("event count does not match the manifest");
  if (!events.empty() && events.back().day != manifest.expected_days - 1)
    throw IntegrityError("log ends on day " + std::to_string(events.back().day) +
                         ", expected " + std::to_string(manifest.expected_days - 1));

  ReplayReport report;
  const ModelState* current_model = nullptr;
  std::size_t snap_idx = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.seq != i)
      throw IntegrityError("seq gap at event " + std::to_string(i));

    if (e.kind == event_kind::kModelSnapshotRef) {
      if (snap_idx >= snapshots.size())
        throw IntegrityError("log references more snapshots than provided");
      current_model = &snapshots[snap_idx++];
      if (current_model->fitted_on != e.day)
        throw IntegrityError("snapshot fitted_on does not match event day " +
                             std::to_string(e.day));
      continue;
    }
    if (e.kind != event_kind::kDecision) continue;

    const auto fail = [&](const std::string& what) {
      throw ReplayDivergenceError(
          e.seq, "replay divergence at seq " + std::to_string(e.seq) + " (day " +
                     std::to_string(e.day) + ", patient " + e.patient +
                     "): " + what);
    };

    const PolicyMode mode =
        policy_mode_from_string(e.payload.at("mode").get<std::string>());
    const auto logged_probs =
        e.payload.at("probabilities").get<std::array<double, 4>>();
    const auto draws = e.payload.at("draws").get<std::vector<double>>();
    const auto logged_action = e.payload.at("action").get<std::string>();

    std::array<double, 4> probs{};
    MessageKind action = MessageKind::NoMessage;
    if (mode == PolicyMode::Initial) {
      const double f = e.payload.at("expected_fraction").get<double>();
      const int dow = day_of_week(e.day, enrolled.at(e.patient));
      if (std::abs(f - expected_week_fraction(dow)) > 1e-12)
        fail("expected_fraction inconsistent with the calendar");
      probs = initial_probabilities(f);
      std::size_t next = 0;
      action = initial_select_with(f, [&]() {
        if (next >= draws.size()) fail("selection consumed more draws than logged");
        return draws[next++];
      });
      ++report.initial_checked;
    } else {
      if (current_model == nullptr)
        throw IntegrityError("learned decision before any model snapshot");
      const auto vals =
          e.payload.at("context").get<std::array<double, kContextFeatures>>();
      const auto preds =
          predict_changes(*current_model, context_from_values(vals));
      const auto logged_preds =
          e.payload.at("predicted").get<std::array<double, 4>>();
      for (int a = 0; a < 4; ++a)
        if (std::abs(preds[a] - logged_preds[a]) > 1e-9)
          fail("predicted reward mismatch");
      probs = boltzmann_probabilities(preds, temperature);
      if (draws.size() != 1) fail("learned decision must log exactly one draw");
      action = sample_daily_kind(probs, draws[0]);
      ++report.learned_checked;
    }
    for (int a = 0; a < 4; ++a)
      if (std::abs(probs[a] - logged_probs[a]) > 1e-9)
        fail("action probability mismatch");
    if (logged_action != to_string(action)) fail("sampled action mismatch");

    // The materialized message must follow immediately.
    if (i + 1 >= events.size() ||
        events[i + 1].kind != event_kind::kMessageSent ||
        events[i + 1].patient != e.patient || events[i + 1].day != e.day)
      throw IntegrityError("decision at seq " + std::to_string(e.seq) +
                           " not followed by its message_sent");
    if (events[i + 1].payload.at("kind").get<std::string>() != logged_action)
      fail("message_sent kind does not match the decision");
    ++report.decisions_checked;
  }
  if (snap_idx != snapshots.size())
    throw IntegrityError("more snapshots provided than referenced in the log");
  return report;
}

}  // namespace coachrl
