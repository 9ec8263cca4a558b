#pragma once

#include <stdexcept>
#include <string>

namespace logxlate {

// File and corpus-format problems: unreadable paths, misaligned raw/ann
// pairs, malformed checkpoints.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when training hits a non-finite loss.
class TrainingDivergence : public std::runtime_error {
 public:
  explicit TrainingDivergence(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace logxlate
