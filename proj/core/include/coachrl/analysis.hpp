#pragma once

#include <filesystem>
#include <map>
#include <set>

#include "coachrl/event_log.hpp"
#include "coachrl/kmeans.hpp"
#include "coachrl/policy.hpp"
#include "coachrl/stats.hpp"

namespace coachrl {

// Everything in this module is a pure function of the event log (plus model
// snapshots for the learning curve), so re-analysis of a replayed log
// reproduces in-run statistics byte for byte.
struct LogView {
  RunManifest manifest;
  std::vector<Event> events;
  std::map<std::string, RosterEntry> roster;
  std::optional<int> switch_day;  // first learned-mode day
  int total_days = 0;
};

LogView make_log_view(LogFile log);

struct MessageEffectTable {
  std::array<double, 4> mean{};  // daily-kind order
  std::array<int, 4> n{};
  double weighted_total = 0.0;  // frequency-weighted = grand mean
  int total_n = 0;
};

// Mean reward per daily message within one policy phase.
MessageEffectTable message_effect_table(const LogView& view, PolicyMode phase);

// Rewards of the initial phase against the learned phase.
AnovaResult phase_anova(const LogView& view);

struct PairGrid {
  std::array<std::array<double, 4>, 4> mean{};  // [previous][current]
  std::array<std::array<int, 4>, 4> n{};        // 0 marks an empty cell
};

// Mean reward following the current message given the previous day's message.
PairGrid pair_effect_grid(const LogView& view);

struct ResponseVector {
  std::string patient_id;
  std::array<double, 4> mean_change{};
  std::array<int, 4> n{};
  bool complete = false;  // at least one observation per daily kind
};

// Rewards entering the per-patient means are winsorized into this band. The
// smoothed day-over-day ratio degenerates to ~(m+c)/c around zero-activity
// days, and those detection extremes otherwise dominate the means.
inline constexpr double kResponseWinsorLo = 0.5;
inline constexpr double kResponseWinsorHi = 2.0;

std::vector<ResponseVector> response_vectors(const LogView& view);

struct ClusterSummary {
  int cluster = 0;
  int size = 0;
  double percent_female = 0.0;
  double mean_age = 0.0;
  std::array<double, 4> mean_response{};
};

struct ClusterResult {
  std::vector<std::string> patient_ids;  // clustered (complete) patients
  std::vector<int> assignment;
  std::vector<ClusterSummary> clusters;
  double wcss = 0.0;
  std::vector<std::string> excluded;  // incomplete response vectors
};

// k-means over complete response vectors. Patients with fewer than
// min_observations rewards for some message kind are excluded; their means
// are too unstable to type reliably.
ClusterResult cluster_patients(const LogView& view,
                               std::span<const ResponseVector> vectors,
                               int k = 3, int restarts = 20,
                               std::uint64_t seed = 1,
                               int min_observations = 12);

// Fraction of correctly labeled points under the best label permutation.
double permutation_accuracy(std::span<const int> assignment,
                            std::span<const int> truth, int k);

enum class SlopeWindow { Full, InitialPhase, LearnedPhase };

struct SlopeEstimate {
  std::string patient_id;
  double slope = 0.0;  // per day
  double r2 = 0.0;
  int n_points = 0;
};

// Per-patient least-squares slope of daily activity as a fraction of the
// personal target, over days with transmission coverage.
std::vector<SlopeEstimate> activity_slopes(const LogView& view, Arm arm,
                                           SlopeWindow window);

// Per-patient slope of weekly mean walking cadence, reported per day.
std::vector<SlopeEstimate> cadence_slopes(const LogView& view, Arm arm);

// Fit-weighted arm average: sum(slope * r2) / sum(r2).
double fit_weighted_average(std::span<const SlopeEstimate> slopes);

struct LearningCurvePoint {
  int day = 0;
  std::size_t n_rows = 0;
  std::optional<double> stability;  // absent for the first snapshot
  std::optional<double> adjusted_r2;
};

std::vector<LearningCurvePoint> learning_curve(
    std::span<const ModelState> snapshots);

struct HbA1cRecord {
  std::string patient_id;
  double delta = 0.0;  // initial - latest (positive = improvement)
  double days_between = 0.0;
  double initial = 0.0;
  double activity_target = 0.0;
  double personalized = 0.0;  // arm indicator
};

std::vector<HbA1cRecord> hba1c_records(const LogView& view);

struct HbA1cModelResult {
  std::vector<std::string> terms;
  std::vector<double> coefficients;
  double r2 = 0.0;
  double f_pvalue = 1.0;
  int n = 0;
};

// OLS of the HbA1c reduction on days between measurements, initial HbA1c,
// activity target, and the arm indicator.
HbA1cModelResult hba1c_model(std::span<const HbA1cRecord> records);

// (h0 - ht) / h0; requires h0 > 0.
double relative_reduction(double h0, double ht);

struct TrendResult {
  double slope = 0.0;
  double r2 = 0.0;
  int n = 0;
};

// Unweighted least-squares line over (days, relative reduction) points.
TrendResult arm_trend(std::span<const std::pair<double, double>> points);

struct HbA1cReductionPoint {
  std::string patient_id;
  Arm arm = Arm::Control;
  double days = 0.0;
  double reduction = 0.0;
};

std::vector<HbA1cReductionPoint> hba1c_reduction_points(const LogView& view);

// Emits the fixed CSV set plus summary.json. `which` filters by analysis
// name: table, pairs, clusters, slopes, learning, hba1c, all.
void write_analyses(const LogView& view, std::span<const ModelState> snapshots,
                    const std::filesystem::path& out_dir,
                    const std::set<std::string>& which);

// Markdown digest of every analysis, for the report subcommand.
std::string render_report(const LogView& view,
                          std::span<const ModelState> snapshots);

}  // namespace coachrl
