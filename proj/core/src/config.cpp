#include "coachrl/config.hpp"

#include <fstream>
#include <set>

#include "coachrl/event_log.hpp"

namespace coachrl {

namespace {

using nlohmann::ordered_json;

// Tracks which keys of one JSON object were consumed so leftovers can be
// reported with their full path.
class ObjectReader {
 public:
  ObjectReader(const ordered_json& j, std::string path)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object())
      throw ValidationError(path_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ValidationError(path_ + "." + key + ": wrong type");
    }
  }

  const ordered_json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key))
        throw ValidationError(path_ + "." + key + ": unknown key");
    }
  }

 private:
  const ordered_json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_archetype(const ordered_json& j, const std::string& path,
                    ArchetypeParams& a) {
  ObjectReader r(j, path);
  if (r.has("response")) {
    const auto& resp = r.raw("response");
    if (!resp.is_array() || resp.size() != 4)
      throw ValidationError(path + ".response: expected 4 values");
    for (std::size_t i = 0; i < 4; ++i) a.response[i] = resp[i].get<double>();
  }
  r.get("habituation_tau", a.habituation_tau);
  r.get("base_adherence", a.base_adherence);
  r.get("daily_noise_sd", a.daily_noise_sd);
  r.get("female_prob", a.female_prob);
  r.finish();
}

void read_cohort(const ordered_json& j, CohortConfig& c) {
  ObjectReader r(j, "cohort");
  r.get("size", c.size);
  r.get("personalized", c.personalized);
  r.get("control", c.control);
  r.get("goal_mean", c.goal_mean);
  r.get("goal_sd", c.goal_sd);
  r.get("goal_min", c.goal_min);
  r.get("age_mean", c.age_mean);
  r.get("age_sd", c.age_sd);
  r.get("age_min", c.age_min);
  r.get("age_max", c.age_max);
  r.get("sessions_min", c.sessions_min);
  r.get("sessions_max", c.sessions_max);
  r.get("hba1c_mean_personalized", c.hba1c_mean_personalized);
  r.get("hba1c_mean_control", c.hba1c_mean_control);
  r.get("hba1c_sd", c.hba1c_sd);
  r.get("hba1c_min", c.hba1c_min);
  if (r.has("archetype_counts")) {
    c.archetype_counts.clear();
    const auto& counts = r.raw("archetype_counts");
    if (!counts.is_object())
      throw ValidationError("cohort.archetype_counts: expected an object");
    for (const auto& [name, v] : counts.items())
      c.archetype_counts[name] = v.get<int>();
  }
  r.finish();
}

void read_policy(const ordered_json& j, PolicyParams& p) {
  ObjectReader r(j, "policy");
  r.get("temperature", p.temperature);
  r.get("switch_threshold", p.switch_threshold);
  r.get("achievement_cooldown_weeks", p.achievement_cooldown_weeks);
  r.get("achievement_threshold", p.achievement_threshold);
  r.get("ridge_lambda", p.ridge_lambda);
  r.get("recency_cap_days", p.recency_cap_days);
  r.finish();
}

void read_simulator(const ordered_json& j, SimParams& s) {
  ObjectReader r(j, "simulator");
  r.get("epoch", s.epoch);
  r.get("sampling_period_minutes", s.sampling_period_minutes);
  r.get("transmit_period_hours", s.transmit_period_hours);
  r.get("outage_prob", s.outage_prob);
  r.get("decision_hour", s.decision_hour);
  r.get("staleness_hours", s.staleness_hours);
  r.get("initial_propensity_fraction", s.initial_propensity_fraction);
  r.get("habit_gain", s.habit_gain);
  r.get("decondition_rate", s.decondition_rate);
  r.get("sedentary_floor_fraction", s.sedentary_floor_fraction);
  r.get("propensity_cap_fraction", s.propensity_cap_fraction);
  r.get("min_activity_minutes", s.min_activity_minutes);
  r.get("engagement_gain", s.engagement_gain);
  r.get("engagement_decay", s.engagement_decay);
  r.get("engagement_floor", s.engagement_floor);
  r.get("walk_session_target_minutes", s.walk_session_target_minutes);
  r.get("cadence_mean", s.cadence_mean);
  r.get("cadence_sd", s.cadence_sd);
  r.get("cadence_coupling", s.cadence_coupling);
  r.get("cadence_session_sd", s.cadence_session_sd);
  if (r.has("hba1c")) {
    ObjectReader h(r.raw("hba1c"), "simulator.hba1c");
    h.get("k_glyc", s.hba1c.k_glyc);
    h.get("weekly_rate", s.hba1c.weekly_rate);
    h.get("noise_sd", s.hba1c.noise_sd);
    h.get("measure_interval_weeks", s.hba1c.measure_interval_weeks);
    h.finish();
  }
  if (r.has("dropout")) {
    ObjectReader d(r.raw("dropout"), "simulator.dropout");
    d.get("complete_prob", s.dropout.complete_prob);
    d.get("early_min_weeks", s.dropout.early_min_weeks);
    d.get("early_max_weeks", s.dropout.early_max_weeks);
    d.finish();
  }
  if (r.has("outage_windows")) {
    const auto& windows = r.raw("outage_windows");
    if (!windows.is_array())
      throw ValidationError("simulator.outage_windows: expected an array");
    s.outage_windows.clear();
    std::size_t i = 0;
    for (const auto& wj : windows) {
      OutageWindow w;
      ObjectReader wr(wj, "simulator.outage_windows[" + std::to_string(i) + "]");
      wr.get("start_hours", w.start_hours);
      wr.get("end_hours", w.end_hours);
      wr.get("patient_id", w.patient_id);
      wr.finish();
      s.outage_windows.push_back(w);
      ++i;
    }
  }
  if (r.has("archetypes")) {
    const auto& archetypes = r.raw("archetypes");
    if (!archetypes.is_object())
      throw ValidationError("simulator.archetypes: expected an object");
    for (const auto& [name, aj] : archetypes.items()) {
      auto it = s.archetypes.find(name);
      if (it == s.archetypes.end()) {
        ArchetypeParams a;
        a.name = name;
        read_archetype(aj, "simulator.archetypes." + name, a);
        s.archetypes[name] = a;
      } else {
        read_archetype(aj, "simulator.archetypes." + name, it->second);
      }
    }
  }
  r.finish();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (horizon_weeks < 1)
    throw ValidationError("horizon_weeks: must be >= 1");
  if (cohort.size < 1) throw ValidationError("cohort.size: must be >= 1");
  if (cohort.personalized < 1)
    throw ValidationError("cohort.personalized: must be >= 1");
  if (cohort.control < 0)
    throw ValidationError("cohort.control: must be >= 0");
  if (cohort.personalized + cohort.control != cohort.size)
    throw ValidationError(
        "cohort: personalized + control must equal size (got " +
        std::to_string(cohort.personalized) + " + " +
        std::to_string(cohort.control) + " != " + std::to_string(cohort.size) +
        ")");
  int fixed = 0;
  for (const auto& [name, count] : cohort.archetype_counts) {
    if (count < 0)
      throw ValidationError("cohort.archetype_counts." + name +
                            ": must be >= 0");
    if (!simulator.archetypes.contains(name))
      throw ValidationError("cohort.archetype_counts." + name +
                            ": no such archetype");
    fixed += count;
  }
  if (fixed > cohort.personalized)
    throw ValidationError(
        "cohort.archetype_counts: fixed counts exceed the personalized arm");
  if (!(cohort.goal_mean > 0.0))
    throw ValidationError("cohort.goal_mean: must be > 0");
  if (!(cohort.goal_min > 0.0))
    throw ValidationError("cohort.goal_min: must be > 0");
  if (cohort.sessions_min < 1 || cohort.sessions_max < cohort.sessions_min)
    throw ValidationError("cohort.sessions_min/max: invalid range");
  if (!(policy.temperature > 0.0))
    throw ValidationError("policy.temperature: must be > 0");
  if (policy.switch_threshold < 1)
    throw ValidationError("policy.switch_threshold: must be >= 1");
  if (policy.ridge_lambda < 0.0)
    throw ValidationError("policy.ridge_lambda: must be >= 0");
  if (!(policy.recency_cap_days > 0.0))
    throw ValidationError("policy.recency_cap_days: must be > 0");
  if (policy.achievement_cooldown_weeks < 0)
    throw ValidationError("policy.achievement_cooldown_weeks: must be >= 0");
  if (!(simulator.sampling_period_minutes > 0.0))
    throw ValidationError("simulator.sampling_period_minutes: must be > 0");
  if (!(simulator.transmit_period_hours > 0.0))
    throw ValidationError("simulator.transmit_period_hours: must be > 0");
  if (simulator.outage_prob < 0.0 || simulator.outage_prob > 1.0)
    throw ValidationError("simulator.outage_prob: must be in [0,1]");
  if (simulator.decision_hour < 0.0 || simulator.decision_hour >= 24.0)
    throw ValidationError("simulator.decision_hour: must be in [0,24)");
  if (!(simulator.staleness_hours > 0.0))
    throw ValidationError("simulator.staleness_hours: must be > 0");
  if (!(simulator.initial_propensity_fraction > 0.0))
    throw ValidationError("simulator.initial_propensity_fraction: must be > 0");
  if (simulator.habit_gain < 0.0 || simulator.habit_gain > 1.0)
    throw ValidationError("simulator.habit_gain: must be in [0,1]");
  if (simulator.dropout.complete_prob < 0.0 ||
      simulator.dropout.complete_prob > 1.0)
    throw ValidationError("simulator.dropout.complete_prob: must be in [0,1]");
  for (const auto& [name, a] : simulator.archetypes) {
    const std::string p = "simulator.archetypes." + name;
    if (!(a.habituation_tau > 0.0))
      throw ValidationError(p + ".habituation_tau: must be > 0");
    if (a.base_adherence < 0.0 || a.base_adherence > 1.0)
      throw ValidationError(p + ".base_adherence: must be in [0,1]");
    if (a.daily_noise_sd < 0.0)
      throw ValidationError(p + ".daily_noise_sd: must be >= 0");
    if (a.female_prob < 0.0 || a.female_prob > 1.0)
      throw ValidationError(p + ".female_prob: must be in [0,1]");
  }
}

ExperimentConfig config_from_json(const nlohmann::ordered_json& j) {
  ExperimentConfig c;
  ObjectReader r(j, "config");
  if (!r.has("seed")) throw ValidationError("config.seed: required");
  r.get("seed", c.seed);
  r.get("horizon_weeks", c.horizon_weeks);
  if (r.has("cohort")) read_cohort(r.raw("cohort"), c.cohort);
  if (r.has("policy")) read_policy(r.raw("policy"), c.policy);
  if (r.has("simulator")) read_simulator(r.raw("simulator"), c.simulator);
  r.finish();
  for (auto& [name, a] : c.simulator.archetypes) a.name = name;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path.string());
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError("config parse error: " + std::string(ex.what()));
  }
  return config_from_json(j);
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["horizon_weeks"] = c.horizon_weeks;

  ordered_json cohort;
  cohort["size"] = c.cohort.size;
  cohort["personalized"] = c.cohort.personalized;
  cohort["control"] = c.cohort.control;
  cohort["goal_mean"] = c.cohort.goal_mean;
  cohort["goal_sd"] = c.cohort.goal_sd;
  cohort["goal_min"] = c.cohort.goal_min;
  cohort["age_mean"] = c.cohort.age_mean;
  cohort["age_sd"] = c.cohort.age_sd;
  cohort["age_min"] = c.cohort.age_min;
  cohort["age_max"] = c.cohort.age_max;
  cohort["sessions_min"] = c.cohort.sessions_min;
  cohort["sessions_max"] = c.cohort.sessions_max;
  cohort["hba1c_mean_personalized"] = c.cohort.hba1c_mean_personalized;
  cohort["hba1c_mean_control"] = c.cohort.hba1c_mean_control;
  cohort["hba1c_sd"] = c.cohort.hba1c_sd;
  cohort["hba1c_min"] = c.cohort.hba1c_min;
  ordered_json counts;
  for (const auto& [name, count] : c.cohort.archetype_counts)
    counts[name] = count;
  cohort["archetype_counts"] = counts;
  j["cohort"] = cohort;

  ordered_json policy;
  policy["temperature"] = c.policy.temperature;
  policy["switch_threshold"] = c.policy.switch_threshold;
  policy["achievement_cooldown_weeks"] = c.policy.achievement_cooldown_weeks;
  policy["achievement_threshold"] = c.policy.achievement_threshold;
  policy["ridge_lambda"] = c.policy.ridge_lambda;
  policy["recency_cap_days"] = c.policy.recency_cap_days;
  j["policy"] = policy;

  ordered_json sim;
  sim["epoch"] = c.simulator.epoch;
  sim["sampling_period_minutes"] = c.simulator.sampling_period_minutes;
  sim["transmit_period_hours"] = c.simulator.transmit_period_hours;
  sim["outage_prob"] = c.simulator.outage_prob;
  sim["decision_hour"] = c.simulator.decision_hour;
  sim["staleness_hours"] = c.simulator.staleness_hours;
  sim["initial_propensity_fraction"] = c.simulator.initial_propensity_fraction;
  sim["habit_gain"] = c.simulator.habit_gain;
  sim["decondition_rate"] = c.simulator.decondition_rate;
  sim["sedentary_floor_fraction"] = c.simulator.sedentary_floor_fraction;
  sim["propensity_cap_fraction"] = c.simulator.propensity_cap_fraction;
  sim["min_activity_minutes"] = c.simulator.min_activity_minutes;
  sim["engagement_gain"] = c.simulator.engagement_gain;
  sim["engagement_decay"] = c.simulator.engagement_decay;
  sim["engagement_floor"] = c.simulator.engagement_floor;
  sim["walk_session_target_minutes"] = c.simulator.walk_session_target_minutes;
  sim["cadence_mean"] = c.simulator.cadence_mean;
  sim["cadence_sd"] = c.simulator.cadence_sd;
  sim["cadence_coupling"] = c.simulator.cadence_coupling;
  sim["cadence_session_sd"] = c.simulator.cadence_session_sd;
  ordered_json hba1c;
  hba1c["k_glyc"] = c.simulator.hba1c.k_glyc;
  hba1c["weekly_rate"] = c.simulator.hba1c.weekly_rate;
  hba1c["noise_sd"] = c.simulator.hba1c.noise_sd;
  hba1c["measure_interval_weeks"] = c.simulator.hba1c.measure_interval_weeks;
  sim["hba1c"] = hba1c;
  ordered_json dropout;
  dropout["complete_prob"] = c.simulator.dropout.complete_prob;
  dropout["early_min_weeks"] = c.simulator.dropout.early_min_weeks;
  dropout["early_max_weeks"] = c.simulator.dropout.early_max_weeks;
  sim["dropout"] = dropout;
  ordered_json windows = ordered_json::array();
  for (const OutageWindow& w : c.simulator.outage_windows) {
    ordered_json wj;
    wj["start_hours"] = w.start_hours;
    wj["end_hours"] = w.end_hours;
    wj["patient_id"] = w.patient_id;
    windows.push_back(wj);
  }
  sim["outage_windows"] = windows;
  ordered_json archetypes;
  for (const auto& [name, a] : c.simulator.archetypes) {
    ordered_json aj;
    aj["response"] = a.response;
    aj["habituation_tau"] = a.habituation_tau;
    aj["base_adherence"] = a.base_adherence;
    aj["daily_noise_sd"] = a.daily_noise_sd;
    aj["female_prob"] = a.female_prob;
    archetypes[name] = aj;
  }
  sim["archetypes"] = archetypes;
  j["simulator"] = sim;
  return j;
}

std::string config_hash(const ExperimentConfig& c) {
  return fnv1a64_hex(config_to_json(c).dump());
}

}  // namespace coachrl
