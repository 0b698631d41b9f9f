// coachrl: seeded coaching-experiment simulator, log analyses, and replay
// verification over the JSONL event log.

#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "coachrl/analysis.hpp"
#include "coachrl/engine.hpp"

namespace {

int do_simulate(const std::string& config_path, const std::string& out_dir) {
  const coachrl::ExperimentConfig config = coachrl::load_config(config_path);
  std::cerr << "simulating " << config.cohort.size << " patients for "
            << config.horizon_weeks << " weeks (seed " << config.seed
            << ")...\n";
  const coachrl::EngineResult result = coachrl::run_experiment(config);
  const auto log_path = coachrl::write_run(result, out_dir);
  std::cerr << "wrote " << result.events.size() << " events to "
            << log_path.string() << " (" << result.snapshots.size()
            << " model snapshots)\n";
  return 0;
}

int do_analyze(const std::string& log_path, const std::string& out_dir,
               const std::vector<std::string>& which) {
  const coachrl::LoadedRun run = coachrl::load_run(log_path);
  const coachrl::LogView view = coachrl::make_log_view(run.log);
  std::set<std::string> wanted(which.begin(), which.end());
  if (wanted.empty()) wanted.insert("all");
  coachrl::write_analyses(view, run.snapshots, out_dir, wanted);
  std::cerr << "analyses written to " << out_dir << "\n";
  return 0;
}

int do_replay(const std::string& log_path) {
  const coachrl::LoadedRun run = coachrl::load_run(log_path);
  const coachrl::ReplayReport report =
      coachrl::replay(run.log.manifest, run.log.events, run.snapshots);
  std::cerr << "replay ok: " << report.decisions_checked << " decisions ("
            << report.initial_checked << " initial, " << report.learned_checked
            << " learned)\n";
  return 0;
}

int do_templates() {
  using coachrl::MessageKind;
  const auto dump = [](const char* label, MessageKind k) {
    std::cout << label << ": \"" << coachrl::message_template(k) << "\"\n";
  };
  std::cout << "daily messages:\n";
  dump("  negative", MessageKind::Negative);
  dump("  positive_self", MessageKind::PositiveSelf);
  dump("  positive_social", MessageKind::PositiveSocial);
  dump("  no_message", MessageKind::NoMessage);
  std::cout << "weekly summaries:\n";
  dump("  weekly_reminder", MessageKind::WeeklyReminder);
  dump("  max_increase", MessageKind::MaxIncrease);
  dump("  sig_increase", MessageKind::SigIncrease);
  dump("  max_social", MessageKind::MaxSocial);
  dump("  sig_social", MessageKind::SigSocial);
  std::cout << "control arm:\n";
  dump("  control_reminder", MessageKind::ControlReminder);
  return 0;
}

int do_report(const std::string& log_path, const std::string& out_file) {
  const coachrl::LoadedRun run = coachrl::load_run(log_path);
  const coachrl::LogView view = coachrl::make_log_view(run.log);
  const std::string md = coachrl::render_report(view, run.snapshots);
  if (out_file.empty()) {
    std::cout << md;
  } else {
    std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
    out << md;
    std::cerr << "report written to " << out_file << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coachrl - adaptive activity-coaching experiment engine"};
  app.require_subcommand(1);

  std::string config_path, log_path, out_dir, out_file;
  std::vector<std::string> which;

  // COACHRL_OUT_DIR is the only environment input: a default for --out.
  const char* env_out = std::getenv("COACHRL_OUT_DIR");
  if (env_out != nullptr) out_dir = env_out;

  auto* simulate = app.add_subcommand(
      "simulate", "Run a seeded cohort experiment and write its event log");
  simulate->add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  auto* sim_out = simulate->add_option("--out", out_dir, "output directory");
  if (env_out == nullptr) sim_out->required();

  auto* analyze = app.add_subcommand(
      "analyze", "Recompute the evaluation suite from an event log");
  analyze->add_option("--log", log_path, "events.jsonl path")->required();
  auto* an_out = analyze->add_option("--out", out_dir, "output directory");
  if (env_out == nullptr) an_out->required();
  analyze
      ->add_option("--which", which,
                   "analyses to emit (default: all)")
      ->check(CLI::IsMember({"table", "pairs", "clusters", "slopes",
                             "learning", "hba1c", "all"}));

  auto* replay = app.add_subcommand(
      "replay", "Verify every logged decision against recomputation");
  replay->add_option("--log", log_path, "events.jsonl path")->required();

  app.add_subcommand("templates", "Dump the exact message catalog");

  auto* report = app.add_subcommand(
      "report", "Markdown summary of all analyses (stdout by default)");
  report->add_option("--log", log_path, "events.jsonl path")->required();
  report->add_option("--out", out_file, "write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (simulate->parsed()) return do_simulate(config_path, out_dir);
    if (analyze->parsed()) return do_analyze(log_path, out_dir, which);
    if (replay->parsed()) return do_replay(log_path);
    if (app.get_subcommand("templates")->parsed()) return do_templates();
    if (report->parsed()) return do_report(log_path, out_file);
  } catch (const coachrl::ReplayDivergenceError& ex) {
    std::cerr << "replay divergence: " << ex.what() << "\n";
    return 2;
  } catch (const coachrl::IntegrityError& ex) {
    std::cerr << "integrity error: " << ex.what() << "\n";
    return 2;
  } catch (const coachrl::ValidationError& ex) {
    std::cerr << "invalid input: " << ex.what() << "\n";
    return 1;
  } catch (const coachrl::Error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
