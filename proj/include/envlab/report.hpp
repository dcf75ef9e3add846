#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace envlab {

/// Outcome of one verification check.
struct VerificationReport {
  std::string check;
  std::string anchor;
  bool passed = false;
  double max_violation = 0.0;
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  nlohmann::json grid = nlohmann::json::object();
  nlohmann::json details = nlohmann::json::object();
  double wall_time_s = 0.0;

  std::string status() const { return passed ? "pass" : "fail"; }

  /// Deterministic fields only; timing is kept under a separate key.
  nlohmann::json to_json() const;
};

/// Anchor ids accepted in reports. Each names one verified statement.
const std::vector<std::string>& known_anchors();
bool is_known_anchor(const std::string& anchor);

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace envlab
