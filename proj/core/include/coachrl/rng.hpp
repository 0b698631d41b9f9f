#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace coachrl {

std::uint64_t fnv1a64(std::string_view s);
std::uint64_t splitmix64_next(std::uint64_t& x);

// Deterministic, platform-independent random stream (xoshiro256**). One root
// seed fans out into independent named streams, so adding a consumer (a new
// patient, a new subsystem) never perturbs the draws of existing ones.
//
// All floating-point derivations are done from raw 64-bit words with fixed
// arithmetic; no std::*_distribution is used anywhere, which keeps logs
// byte-identical across standard libraries.
class RngStream {
 public:
  RngStream(std::uint64_t root_seed, std::string_view stream_name);

  std::uint64_t next_u64();

  double uniform();                      // [0, 1), 53-bit
  double uniform(double lo, double hi);  // [lo, hi)
  int uniform_int(int lo, int hi);       // inclusive bounds
  double normal(double mean = 0.0, double sd = 1.0);  // Box-Muller
  double lognormal_mean_one(double sigma);            // E[X] = 1 for any sigma
  // Index drawn proportionally to nonnegative weights (need not sum to 1).
  std::size_t categorical(std::span<const double> weights);

 private:
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace coachrl
