#include "coachrl/kmeans.hpp"

#include <cmath>
#include <limits>

#include "coachrl/error.hpp"
#include "coachrl/rng.hpp"

namespace coachrl {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

KMeansResult run_once(std::span<const std::vector<double>> points, int k,
                      RngStream& rng) {
  const std::size_t n = points.size();
  const std::size_t dim = points.front().size();

  // k-means++ seeding.
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  centroids.push_back(points[rng.uniform_int(0, static_cast<int>(n) - 1)]);
  std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
  while (static_cast<int>(centroids.size()) < k) {
    for (std::size_t i = 0; i < n; ++i)
      min_d[i] = std::min(min_d[i], sq_dist(points[i], centroids.back()));
    double total = 0.0;
    for (double d : min_d) total += d;
    std::size_t pick;
    if (total <= 0.0) {
      // All remaining points coincide with a centroid; any choice works.
      pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(n) - 1));
    } else {
      pick = rng.categorical(min_d);
    }
    centroids.push_back(points[pick]);
  }

  std::vector<int> assignment(n, -1);
  for (int iter = 0; iter < 200; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist(points[i], centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(points[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assignment[i] != best) {
        assignment[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<int> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assignment[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[assignment[i]][d] += points[i][d];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Re-seed an emptied cluster at the point farthest from its centroid.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = sq_dist(points[i], centroids[assignment[i]]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centroids[c] = points[far];
        continue;
      }
      for (std::size_t d = 0; d < dim; ++d)
        centroids[c][d] = sums[c][d] / counts[c];
    }
  }

  KMeansResult r;
  r.assignment = std::move(assignment);
  r.centroids = std::move(centroids);
  for (std::size_t i = 0; i < n; ++i)
    r.wcss += sq_dist(points[i], r.centroids[r.assignment[i]]);
  return r;
}

}  // namespace

KMeansResult kmeans(std::span<const std::vector<double>> points, int k,
                    int restarts, std::uint64_t seed) {
  if (k < 1) throw ValidationError("kmeans: k must be >= 1");
  if (points.size() < static_cast<std::size_t>(k))
    throw ValidationError("kmeans: fewer points than clusters");
  if (restarts < 1) throw ValidationError("kmeans: restarts must be >= 1");
  const std::size_t dim = points.front().size();
  for (const auto& p : points)
    if (p.size() != dim) throw ValidationError("kmeans: ragged points");

  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    RngStream rng(seed, "kmeans/restart/" + std::to_string(r));
    KMeansResult res = run_once(points, k, rng);
    if (res.wcss < best.wcss) best = std::move(res);
  }
  return best;
}

}  // namespace coachrl
