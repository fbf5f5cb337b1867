#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cbnn {

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingFailure : public std::runtime_error {
 public:
  TrainingFailure(std::uint64_t seed, double best_accuracy)
      : std::runtime_error("training failed for seed " + std::to_string(seed) +
                           " (best train accuracy " + std::to_string(best_accuracy) + ")"),
        seed_(seed),
        best_accuracy_(best_accuracy) {}
  std::uint64_t seed() const { return seed_; }
  double best_accuracy() const { return best_accuracy_; }

 private:
  std::uint64_t seed_;
  double best_accuracy_;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cbnn
