#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace coachrl {

struct KMeansResult {
  std::vector<int> assignment;                 // point -> cluster
  std::vector<std::vector<double>> centroids;  // k centroids
  double wcss = 0.0;  // within-cluster sum of squared distances
};

// Lloyd's algorithm with k-means++ seeding; best of `restarts` seeded runs by
// within-cluster sum of squares. Deterministic for a fixed seed.
KMeansResult kmeans(std::span<const std::vector<double>> points, int k,
                    int restarts, std::uint64_t seed);

}  // namespace coachrl
