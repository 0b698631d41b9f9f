#pragma once

#include <filesystem>

#include "coachrl/config.hpp"
#include "coachrl/event_log.hpp"
#include "coachrl/policy.hpp"

namespace coachrl {

struct EngineResult {
  RunManifest manifest;
  std::vector<Event> events;
  std::vector<ModelState> snapshots;  // one per retrain day, in day order
};

// Outbound message hook. The simulation records everything in the event log
// regardless; a transport only mirrors what would leave the system. No live
// gateway exists — the collecting mock below is the only implementation.
class MessageTransport {
 public:
  virtual ~MessageTransport() = default;
  virtual void send(const std::string& patient_id, MessageKind kind,
                    const std::string& text, Timestamp at) = 0;
};

class CollectingTransport : public MessageTransport {
 public:
  struct Sent {
    std::string patient_id;
    MessageKind kind;
    std::string text;
    Timestamp at;
  };
  void send(const std::string& patient_id, MessageKind kind,
            const std::string& text, Timestamp at) override {
    sent.push_back({patient_id, kind, text, at});
  }
  std::vector<Sent> sent;
};

// Deterministic cohort generation from the config seed: arms, archetype mix,
// demographics, goals, dropout, and initial behavioral state.
std::vector<SimPatientState> make_cohort(const ExperimentConfig& config);

// The full experiment clock. Each day: deliver transmission slots, finalize
// matured rewards into training rows, switch/retrain the policy, decide and
// message, then simulate patient responses into the next day. Identical
// (config, seed) pairs produce byte-identical logs. A transport, when given,
// receives every non-empty outbound message.
EngineResult run_experiment(const ExperimentConfig& config,
                            MessageTransport* transport = nullptr);

// Writes events.jsonl, snapshots/model_day_*.json, and column_manifest.json.
std::filesystem::path write_run(const EngineResult& result,
                                const std::filesystem::path& out_dir);

struct LoadedRun {
  LogFile log;
  std::vector<ModelState> snapshots;
};

// Reads a log plus its sibling snapshot files named by the manifest.
LoadedRun load_run(const std::filesystem::path& log_path);

struct ReplayReport {
  std::size_t decisions_checked = 0;
  std::size_t initial_checked = 0;
  std::size_t learned_checked = 0;
};

// Recomputes every logged decision (probabilities to 1e-9, learned-mode
// predictions to 1e-9, and the sampled action from the logged draws) and
// throws ReplayDivergenceError naming the first divergent event. Structural
// problems (truncation, missing snapshots) raise IntegrityError instead.
ReplayReport replay(const RunManifest& manifest, std::span<const Event> events,
                    std::span<const ModelState> snapshots);

}  // namespace coachrl
