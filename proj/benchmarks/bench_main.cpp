#include <benchmark/benchmark.h>

#include "coachrl/engine.hpp"
#include "coachrl/policy.hpp"

namespace {

using namespace coachrl;

std::vector<DesignRow> make_rows(std::size_t n) {
  RngStream rng(1, "bench/rows");
  std::vector<ContextVector> pool;
  for (std::size_t i = 0; i < n; ++i) {
    ContextVector c;
    c.last_day_minutes = rng.uniform(0, 60);
    c.week_cum_minutes = rng.uniform(0, 250);
    c.goal_fraction = rng.uniform(0, 2);
    c.fraction_vs_expected = rng.uniform(0, 3);
    c.age = rng.uniform(40, 75);
    c.gender_indicator = rng.uniform() < 0.5;
    for (auto& r : c.recency) r = rng.uniform(0, 14);
    pool.push_back(c);
  }
  const auto st = Standardization::fit(pool);
  std::vector<DesignRow> rows;
  for (const auto& c : pool) {
    DesignRow r = kesler_augment(st.apply(c),
                                 kDailyKinds[rng.uniform_int(0, 3)]);
    r.target = rng.uniform(0.5, 2.0);
    rows.push_back(std::move(r));
  }
  return rows;
}

void BM_KeslerAugment(benchmark::State& state) {
  RngStream rng(2, "bench/kesler");
  std::array<double, kContextFeatures> z{};
  for (auto& v : z) v = rng.normal();
  for (auto _ : state) {
    auto row = kesler_augment(z, MessageKind::PositiveSocial);
    benchmark::DoNotOptimize(row.values.data());
  }
}
BENCHMARK(BM_KeslerAugment);

void BM_RidgeFit(benchmark::State& state) {
  const auto rows = make_rows(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const auto m = fit(rows, 1e-6, design_column_names(),
                       Standardization::identity(), 0);
    benchmark::DoNotOptimize(m.coefficients.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RidgeFit)->Arg(200)->Arg(800)->Arg(3200)->Complexity();

void BM_BoltzmannSelect(benchmark::State& state) {
  RngStream rng(3, "bench/boltzmann");
  const std::array<double, 4> preds = {1.1, 0.9, 1.3, 1.0};
  for (auto _ : state) {
    auto pick = boltzmann_select(preds, 5.0, rng);
    benchmark::DoNotOptimize(pick.second.data());
  }
}
BENCHMARK(BM_BoltzmannSelect);

void BM_SenseWalks(benchmark::State& state) {
  RngStream rng(4, "bench/sense");
  std::vector<TrueWalk> walks;
  Timestamp t = kDefaultEpoch;
  for (int i = 0; i < 3; ++i) {
    TrueWalk w{t, rng.uniform(5, 40), 100.0};
    walks.push_back(w);
    t += static_cast<Timestamp>(w.duration * 60) + 3600;
  }
  for (auto _ : state) {
    auto sessions = sense_walks(walks);
    benchmark::DoNotOptimize(sessions.data());
  }
}
BENCHMARK(BM_SenseWalks);

void BM_ExperimentWeek(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.seed = 9;
  cfg.horizon_weeks = static_cast<int>(state.range(0));
  cfg.policy.switch_threshold = 120;
  cfg.validate();
  for (auto _ : state) {
    auto result = run_experiment(cfg);
    benchmark::DoNotOptimize(result.events.data());
  }
}
BENCHMARK(BM_ExperimentWeek)->Arg(2)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
