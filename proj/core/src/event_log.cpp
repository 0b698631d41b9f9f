#include "coachrl/event_log.hpp"

#include <cstdio>
#include <fstream>

#include "coachrl/rng.hpp"

namespace coachrl {

bool is_known_event_kind(std::string_view kind) {
  for (const char* k :
       {event_kind::kWalkSession, event_kind::kUpload, event_kind::kDecision,
        event_kind::kMessageSent, event_kind::kReward,
        event_kind::kHbA1cMeasured, event_kind::kWeeklySummary,
        event_kind::kModeSwitch, event_kind::kModelSnapshotRef}) {
    if (kind == k) return true;
  }
  return false;
}

Json event_to_json(const Event& e) {
  Json j;
  j["seq"] = e.seq;
  j["day"] = e.day;
  j["ts"] = e.ts;
  j["patient"] = e.patient;
  j["kind"] = e.kind;
  j["payload"] = e.payload;
  return j;
}

Event event_from_json(const Json& j) {
  Event e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.day = j.at("day").get<int>();
  e.ts = j.at("ts").get<Timestamp>();
  e.patient = j.at("patient").get<std::string>();
  e.kind = j.at("kind").get<std::string>();
  if (!is_known_event_kind(e.kind))
    throw IntegrityError("unknown event kind: " + e.kind);
  e.payload = j.at("payload");
  return e;
}

Json roster_entry_to_json(const RosterEntry& r) {
  Json j;
  j["id"] = r.profile.id;
  j["age"] = r.profile.age;
  j["gender"] = to_string(r.profile.gender);
  j["weekly_goal"] = r.profile.weekly_goal;
  j["sessions_per_week"] = r.profile.sessions_per_week;
  j["arm"] = to_string(r.profile.arm);
  j["baseline_hba1c"] = r.profile.baseline_hba1c;
  j["enrolled_on"] = r.profile.enrolled_on;
  j["archetype"] = r.archetype;
  return j;
}

RosterEntry roster_entry_from_json(const Json& j) {
  RosterEntry r;
  r.profile.id = j.at("id").get<std::string>();
  r.profile.age = j.at("age").get<int>();
  r.profile.gender = j.at("gender").get<std::string>() == "female"
                         ? Gender::Female
                         : Gender::Male;
  r.profile.weekly_goal = j.at("weekly_goal").get<double>();
  r.profile.sessions_per_week = j.at("sessions_per_week").get<int>();
  r.profile.arm = j.at("arm").get<std::string>() == "control"
                      ? Arm::Control
                      : Arm::Personalized;
  r.profile.baseline_hba1c = j.at("baseline_hba1c").get<double>();
  r.profile.enrolled_on = j.at("enrolled_on").get<int>();
  r.archetype = j.at("archetype").get<std::string>();
  return r;
}

Json manifest_to_json(const RunManifest& m) {
  Json j;
  j["coachrl_log"] = m.format_version;
  j["engine_version"] = m.engine_version;
  j["seed"] = m.seed;
  j["config_hash"] = m.config_hash;
  j["column_manifest_hash"] = m.column_manifest_hash;
  j["expected_days"] = m.expected_days;
  j["event_count"] = m.event_count;
  j["epoch"] = m.epoch;
  j["config"] = m.config;
  Json roster = Json::array();
  for (const RosterEntry& r : m.roster) roster.push_back(roster_entry_to_json(r));
  j["roster"] = roster;
  Json files;
  files["snapshots_dir"] = m.snapshots_dir;
  files["column_manifest"] = m.column_manifest_file;
  j["files"] = files;
  return j;
}

RunManifest manifest_from_json(const Json& j) {
  if (!j.contains("coachrl_log"))
    throw IntegrityError("log manifest line missing 'coachrl_log' marker");
  RunManifest m;
  m.format_version = j.at("coachrl_log").get<int>();
  if (m.format_version != kLogFormatVersion)
    throw IntegrityError("unsupported log format version " +
                         std::to_string(m.format_version));
  m.engine_version = j.at("engine_version").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.column_manifest_hash = j.at("column_manifest_hash").get<std::string>();
  m.expected_days = j.at("expected_days").get<int>();
  m.event_count = j.at("event_count").get<std::uint64_t>();
  m.epoch = j.at("epoch").get<Timestamp>();
  m.config = j.at("config");
  for (const Json& r : j.at("roster")) m.roster.push_back(roster_entry_from_json(r));
  m.snapshots_dir = j.at("files").at("snapshots_dir").get<std::string>();
  m.column_manifest_file = j.at("files").at("column_manifest").get<std::string>();
  return m;
}

Json model_to_json(const ModelState& m) {
  Json j;
  j["coachrl_model"] = 1;
  j["fitted_on"] = m.fitted_on;
  j["n_rows"] = m.n_rows;
  j["ridge_lambda"] = m.ridge_lambda;
  if (m.adjusted_r2.has_value())
    j["adjusted_r2"] = *m.adjusted_r2;
  else
    j["adjusted_r2"] = nullptr;
  j["manifest"] = m.manifest;
  j["coefficients"] = m.coefficients;
  Json std_json;
  std_json["mean"] = m.standardization.mean;
  std_json["scale"] = m.standardization.scale;
  j["standardization"] = std_json;
  return j;
}

ModelState model_from_json(const Json& j) {
  if (!j.contains("coachrl_model"))
    throw IntegrityError("model snapshot missing 'coachrl_model' marker");
  ModelState m;
  m.fitted_on = j.at("fitted_on").get<int>();
  m.n_rows = j.at("n_rows").get<std::size_t>();
  m.ridge_lambda = j.at("ridge_lambda").get<double>();
  if (!j.at("adjusted_r2").is_null())
    m.adjusted_r2 = j.at("adjusted_r2").get<double>();
  m.manifest = j.at("manifest").get<std::vector<std::string>>();
  m.coefficients = j.at("coefficients").get<std::vector<double>>();
  const Json& s = j.at("standardization");
  const auto mean = s.at("mean").get<std::vector<double>>();
  const auto scale = s.at("scale").get<std::vector<double>>();
  if (mean.size() != kContextFeatures || scale.size() != kContextFeatures)
    throw IntegrityError("model snapshot: bad standardization size");
  for (std::size_t i = 0; i < kContextFeatures; ++i) {
    m.standardization.mean[i] = mean[i];
    m.standardization.scale[i] = scale[i];
  }
  if (m.coefficients.size() != m.manifest.size())
    throw IntegrityError("model snapshot: coefficient/manifest length mismatch");
  return m;
}

void write_log(const std::filesystem::path& path, const RunManifest& manifest,
               std::span<const Event> events) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IntegrityError("cannot open log for writing: " + path.string());
  out << manifest_to_json(manifest).dump() << '\n';
  for (const Event& e : events) out << event_to_json(e).dump() << '\n';
  out.flush();
  if (!out) throw IntegrityError("short write to log: " + path.string());
}

LogFile read_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("cannot open log: " + path.string());

  LogFile lf;
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t expected_seq = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw IntegrityError("log parse error at line " + std::to_string(line_no) +
                           ": " + ex.what());
    }
    try {
      if (line_no == 1) {
        lf.manifest = manifest_from_json(j);
        continue;
      }
      Event e = event_from_json(j);
      if (e.seq != expected_seq)
        throw IntegrityError("seq gap at line " + std::to_string(line_no) +
                             ": expected " + std::to_string(expected_seq) +
                             ", got " + std::to_string(e.seq));
      ++expected_seq;
      lf.events.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw IntegrityError("log field error at line " + std::to_string(line_no) +
                           ": " + ex.what());
    }
  }
  if (line_no == 0) throw IntegrityError("empty log file: " + path.string());
  if (lf.events.size() != lf.manifest.event_count)
    throw IntegrityError("log truncated or padded: manifest declares " +
                         std::to_string(lf.manifest.event_count) +
                         " events, found " + std::to_string(lf.events.size()));
  return lf;
}

std::string fnv1a64_hex(std::string_view data) {
  const std::uint64_t h = fnv1a64(data);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace coachrl
