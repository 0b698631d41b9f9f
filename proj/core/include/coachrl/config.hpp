#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "coachrl/simulator.hpp"

namespace coachrl {

struct CohortConfig {
  int size = 27;
  int personalized = 20;
  int control = 7;
  double goal_mean = 139.0;  // minutes per week
  double goal_sd = 40.0;
  double goal_min = 110.0;
  double age_mean = 58.0;
  double age_sd = 9.0;
  int age_min = 35;
  int age_max = 79;
  int sessions_min = 3;
  int sessions_max = 5;
  double hba1c_mean_personalized = 7.7;
  double hba1c_mean_control = 8.7;
  double hba1c_sd = 1.0;
  double hba1c_min = 6.5;
  // Fixed archetype counts for the personalized arm; everyone not covered
  // (including the whole control arm) draws an archetype uniformly.
  std::map<std::string, int> archetype_counts = {
      {"negative_responder", 4}, {"weak_responder", 9}, {"positive_responder", 5}};
};

struct PolicyParams {
  double temperature = 5.0;
  std::size_t switch_threshold = 760;
  int achievement_cooldown_weeks = 3;
  double achievement_threshold = 1.0;  // fraction of the weekly goal
  double ridge_lambda = 1e-6;
  double recency_cap_days = 14.0;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  int horizon_weeks = 26;
  CohortConfig cohort;
  PolicyParams policy;
  SimParams simulator;

  void validate() const;  // throws ValidationError with a field path
};

// Parses, applies documented defaults, rejects unknown keys (error names the
// offending path), validates. The only required field is "seed".
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const nlohmann::ordered_json& j);

// Canonical, fully defaulted serialization; basis of the config hash.
nlohmann::ordered_json config_to_json(const ExperimentConfig& c);
std::string config_hash(const ExperimentConfig& c);

}  // namespace coachrl
