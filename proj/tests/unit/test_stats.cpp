#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "coachrl/error.hpp"
#include "coachrl/kmeans.hpp"
#include "coachrl/rng.hpp"
#include "coachrl/stats.hpp"

using namespace coachrl;

TEST_CASE("regularized incomplete beta against closed forms") {
  // I_x(1,1) = x; I_x(2,2) = 3x^2 - 2x^3; I_x(a,1) = x^a.
  CHECK(regularized_incomplete_beta(1, 1, 0.8) == doctest::Approx(0.8).epsilon(1e-10));
  CHECK(regularized_incomplete_beta(2, 2, 0.8) ==
        doctest::Approx(0.896).epsilon(1e-10));
  CHECK(regularized_incomplete_beta(2, 2, 0.4) ==
        doctest::Approx(0.352).epsilon(1e-10));
  CHECK(regularized_incomplete_beta(3, 2, 0.8) ==
        doctest::Approx(0.8192).epsilon(1e-10));
  CHECK(regularized_incomplete_beta(2.5, 1, 0.7) ==
        doctest::Approx(std::pow(0.7, 2.5)).epsilon(1e-10));
  CHECK(regularized_incomplete_beta(2, 2, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2, 2, 1.0) == 1.0);
  CHECK_THROWS_AS(regularized_incomplete_beta(0, 1, 0.5), ValidationError);
}

TEST_CASE("incomplete beta symmetry property") {
  RngStream rng(1, "test/ibeta");
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(0.5, 20);
    const double b = rng.uniform(0.5, 20);
    const double x = rng.uniform(0.01, 0.99);
    const double lhs = regularized_incomplete_beta(a, b, x);
    const double rhs = 1.0 - regularized_incomplete_beta(b, a, 1.0 - x);
    CHECK(std::abs(lhs - rhs) < 1e-9);
    CHECK(lhs >= 0.0);
    CHECK(lhs <= 1.0);
  }
}

TEST_CASE("F distribution tail") {
  // sf(3; 2, 6) = I_{0.5}(3, 1) = 0.5^3 = 0.125 exactly.
  CHECK(f_distribution_sf(3.0, 2, 6) == doctest::Approx(0.125).epsilon(1e-10));
  CHECK(f_distribution_sf(0.0, 2, 6) == 1.0);
  CHECK(f_distribution_sf(std::numeric_limits<double>::infinity(), 2, 6) == 0.0);
  CHECK(f_distribution_sf(1e9, 3, 40) < 1e-10);
}

TEST_CASE("one-way ANOVA") {
  SUBCASE("worked example with a closed-form p value") {
    const std::vector<std::vector<double>> groups = {
        {1, 2, 3}, {2, 3, 4}, {3, 4, 5}};
    const auto r = one_way_anova(groups);
    CHECK(r.f_statistic == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(0.125).epsilon(1e-9));
    CHECK(r.df_between == 2);
    CHECK(r.df_within == 6);
  }
  SUBCASE("identical group means give F = 0, p = 1") {
    const std::vector<std::vector<double>> groups = {{1, 2, 3}, {1, 2, 3}};
    const auto r = one_way_anova(groups);
    CHECK(r.f_statistic == doctest::Approx(0.0));
    CHECK(r.p_value == doctest::Approx(1.0));
  }
  SUBCASE("separated groups are overwhelmingly significant") {
    const std::vector<std::vector<double>> groups = {{1, 2, 3},
                                                     {101, 102, 103}};
    const auto r = one_way_anova(groups);
    CHECK(r.f_statistic > 1e3);
    CHECK(r.p_value < 1e-6);
  }
  SUBCASE("degenerate inputs") {
    CHECK_THROWS_AS(one_way_anova(std::vector<std::vector<double>>{{1, 2}}),
                    ValidationError);
    const std::vector<std::vector<double>> short_group = {{1, 2}, {3}};
    CHECK_THROWS_AS(one_way_anova(short_group), ValidationError);
    const std::vector<std::vector<double>> constant = {{2, 2}, {2, 2}};
    CHECK_THROWS_AS(one_way_anova(constant), ValidationError);
  }
}

TEST_CASE("fit_line") {
  SUBCASE("exact affine series") {
    std::vector<double> x, y;
    for (int d = 0; d < 100; ++d) {
      x.push_back(d);
      y.push_back(0.5 + 0.0016 * d);
    }
    const auto f = fit_line(x, y);
    CHECK(std::abs(f.slope - 0.0016) < 1e-9);
    CHECK(std::abs(f.r2 - 1.0) < 1e-9);
    CHECK(f.intercept == doctest::Approx(0.5).epsilon(1e-9));
  }
  SUBCASE("constant series") {
    const std::vector<double> x = {0, 1, 2, 3};
    const std::vector<double> y = {2, 2, 2, 2};
    const auto f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(0.0));
    CHECK(f.r2 == 1.0);
  }
  SUBCASE("degenerate x") {
    const std::vector<double> x = {1, 1, 1};
    const std::vector<double> y = {1, 2, 3};
    CHECK_THROWS_AS(fit_line(x, y), ValidationError);
  }
}

TEST_CASE("median") {
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  CHECK_THROWS_AS(median({}), ValidationError);
}

namespace {

// Brute-force oracle: assign every point to its nearest true center and
// demand the k-means partition agrees under some label permutation.
bool matches_planted(const std::vector<int>& assignment,
                     const std::vector<int>& truth, int k) {
  std::vector<int> perm(k);
  for (int i = 0; i < k; ++i) perm[i] = i;
  do {
    bool all = true;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (perm[assignment[i]] != truth[i]) {
        all = false;
        break;
      }
    if (all) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

}  // namespace

TEST_CASE("kmeans recovers tight planted blobs") {
  RngStream rng(5, "test/blobs");
  const std::vector<std::vector<double>> centers = {
      {0, 0, 0, 0}, {10, 0, 0, 0}, {0, 10, 10, 0}};
  std::vector<std::vector<double>> points;
  std::vector<int> truth;
  for (int i = 0; i < 60; ++i) {
    const int c = i % 3;
    std::vector<double> p = centers[c];
    for (auto& v : p) v += rng.normal(0, 0.1);
    points.push_back(std::move(p));
    truth.push_back(c);
  }
  const auto result = kmeans(points, 3, 10, 99);
  CHECK(matches_planted(result.assignment, truth, 3));
  CHECK(result.wcss < 60 * 4 * 0.1 * 0.1 * 10);
}

TEST_CASE("kmeans on identical points") {
  const std::vector<std::vector<double>> points(7, {1.0, 2.0});
  const auto result = kmeans(points, 3, 5, 1);
  CHECK(result.wcss == doctest::Approx(0.0));
  // Everyone lands in one populated cluster.
  for (int a : result.assignment) CHECK(a == result.assignment[0]);
}

TEST_CASE("kmeans input validation") {
  const std::vector<std::vector<double>> two = {{0.0}, {1.0}};
  CHECK_THROWS_AS(kmeans(two, 3, 5, 1), ValidationError);
  CHECK_THROWS_AS(kmeans(two, 0, 5, 1), ValidationError);
  CHECK_THROWS_AS(kmeans(two, 2, 0, 1), ValidationError);
}

TEST_CASE("kmeans partition is stable under input permutation") {
  RngStream rng(6, "test/permstable");
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 30; ++i) {
    const int c = i % 3;
    points.push_back({c * 8.0 + rng.normal(0, 0.2), rng.normal(0, 0.2)});
  }
  const auto base = kmeans(points, 3, 10, 7);

  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size() - 1; i > 0; --i)
    std::swap(order[i], order[rng.uniform_int(0, static_cast<int>(i))]);
  std::vector<std::vector<double>> shuffled;
  for (std::size_t i : order) shuffled.push_back(points[i]);
  const auto moved = kmeans(shuffled, 3, 10, 7);

  // Same partition up to label permutation: co-membership must agree.
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const bool together_base =
          base.assignment[order[i]] == base.assignment[order[j]];
      const bool together_moved = moved.assignment[i] == moved.assignment[j];
      CHECK(together_base == together_moved);
    }
}
