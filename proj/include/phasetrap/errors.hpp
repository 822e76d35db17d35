#pragma once

#include <stdexcept>
#include <string>

namespace phasetrap {

// Validation failures (bad arguments, malformed configs) use
// std::invalid_argument directly. Numerical failures that carry diagnostic
// context (non-convergence, divergence) use numeric_error so callers can
// distinguish "you asked wrong" from "the computation failed".
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A pipeline stage referenced an artifact that does not exist or fails its
// integrity check.
class missing_artifact_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace phasetrap
