#include "coachrl/rng.hpp"

#include <cmath>

#include "coachrl/error.hpp"

namespace coachrl {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t splitmix64_next(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace {

inline std::uint64_t rotl(std::uint64_t v, int k) {
  return (v << k) | (v >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t root_seed, std::string_view stream_name) {
  std::uint64_t mix = root_seed ^ fnv1a64(stream_name);
  for (auto& word : state_) {
    word = splitmix64_next(mix);
  }
  // xoshiro requires a nonzero state; splitmix output being all zero is
  // astronomically unlikely but cheap to rule out.
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
    state_[0] = 0x9e3779b97f4a7c15ull;
  }
}

std::uint64_t RngStream::next_u64() {
  // xoshiro256**
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

int RngStream::uniform_int(int lo, int hi) {
  if (hi < lo) throw ValidationError("uniform_int: hi < lo");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(next_u64() % span);
}

double RngStream::normal(double mean, double sd) {
  // Box-Muller; u clamped away from 0 so log() stays finite.
  double u = uniform();
  if (u < 1e-300) u = 1e-300;
  const double v = uniform();
  const double r = std::sqrt(-2.0 * std::log(u));
  return mean + sd * r * std::cos(2.0 * 3.141592653589793238462643 * v);
}

double RngStream::lognormal_mean_one(double sigma) {
  if (sigma <= 0.0) return 1.0;
  return std::exp(normal(0.0, sigma) - 0.5 * sigma * sigma);
}

std::size_t RngStream::categorical(std::span<const double> weights) {
  if (weights.empty()) throw ValidationError("categorical: no weights");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("categorical: negative weight");
    total += w;
  }
  if (total <= 0.0) throw ValidationError("categorical: zero total weight");
  const double u = uniform() * total;
  double cum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (u < cum) return i;
  }
  return weights.size() - 1;
}

}  // namespace coachrl
