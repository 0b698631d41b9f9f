#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace coachrl {

// Base for every error the engine throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad inputs: config fields, violated preconditions, manifest mismatches.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Structural log problems: parse failures, sequence gaps, missing manifest.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Replay recomputation disagrees with a logged value.
class ReplayDivergenceError : public Error {
 public:
  ReplayDivergenceError(std::uint64_t seq, const std::string& what)
      : Error(what), seq_(seq) {}
  std::uint64_t seq() const { return seq_; }

 private:
  std::uint64_t seq_;
};

// Normal-equation system is not positive definite (rank deficiency at lambda = 0).
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

}  // namespace coachrl
