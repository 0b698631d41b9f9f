#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "coachrl/core.hpp"
#include "coachrl/regression.hpp"

namespace coachrl {

using Json = nlohmann::ordered_json;

inline constexpr int kLogFormatVersion = 1;
inline constexpr const char* kEngineVersion = "0.1.0";

// One experiment event. Run-level events (mode_switch, model_snapshot_ref)
// leave the patient field empty. Payload schemas are fixed per kind; the
// writer emits keys in a fixed order so identical runs produce identical
// bytes.
struct Event {
  std::uint64_t seq = 0;
  int day = 0;
  Timestamp ts = 0;
  std::string patient;
  std::string kind;
  Json payload = Json::object();

  bool operator==(const Event&) const = default;
};

namespace event_kind {
inline constexpr const char* kWalkSession = "walk_session";
inline constexpr const char* kUpload = "upload";
inline constexpr const char* kDecision = "decision";
inline constexpr const char* kMessageSent = "message_sent";
inline constexpr const char* kReward = "reward";
inline constexpr const char* kHbA1cMeasured = "hba1c_measured";
inline constexpr const char* kWeeklySummary = "weekly_summary";
inline constexpr const char* kModeSwitch = "mode_switch";
inline constexpr const char* kModelSnapshotRef = "model_snapshot_ref";
}  // namespace event_kind

bool is_known_event_kind(std::string_view kind);

struct RosterEntry {
  PatientProfile profile;
  std::string archetype;  // simulation ground truth, kept for evaluation
};

// First line of every log file. The config echo is the fully defaulted,
// canonical form, sufficient to re-derive every decision during replay.
struct RunManifest {
  int format_version = kLogFormatVersion;
  std::string engine_version = kEngineVersion;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string column_manifest_hash;
  int expected_days = 0;
  std::uint64_t event_count = 0;  // truncation check; written at run close
  Timestamp epoch = 0;
  Json config = Json::object();
  std::vector<RosterEntry> roster;
  std::string snapshots_dir = "snapshots";
  std::string column_manifest_file = "column_manifest.json";
};

Json event_to_json(const Event& e);
Event event_from_json(const Json& j);
Json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const Json& j);

Json roster_entry_to_json(const RosterEntry& r);
RosterEntry roster_entry_from_json(const Json& j);

// Versioned model snapshot: coefficients, manifest, standardization.
Json model_to_json(const ModelState& m);
ModelState model_from_json(const Json& j);

struct LogFile {
  RunManifest manifest;
  std::vector<Event> events;
};

// JSONL: manifest first, then one event per line, UTF-8, fixed key order.
void write_log(const std::filesystem::path& path, const RunManifest& manifest,
               std::span<const Event> events);

// Throws IntegrityError on a missing/invalid manifest line or a seq gap, and
// on malformed lines (with the 1-based line number).
LogFile read_log(const std::filesystem::path& path);

std::string fnv1a64_hex(std::string_view data);

}  // namespace coachrl
