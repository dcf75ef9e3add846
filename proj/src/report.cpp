#include "envlab/report.hpp"

#include <algorithm>

namespace envlab {

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json j;
  j["check"] = check;
  j["anchor"] = anchor;
  j["status"] = status();
  j["max_violation"] = max_violation;
  j["tolerance"] = tolerance;
  j["seed"] = seed;
  j["grid"] = grid;
  j["details"] = details;
  j["timing"] = {{"wall_time_s", wall_time_s}};
  return j;
}

const std::vector<std::string>& known_anchors() {
  static const std::vector<std::string> anchors = {
      "equilibrium-envelope",     "fibered-minimal-weight", "fibered-weight-convexity",
      "minimal-singularity-gap",  "psi-monotonicity",       "psi-right-continuity",
      "psi-upper-semicontinuity", "fiber-volume",           "fiber-gamma-integral",
      "holder-fiber-chain",       "bergman-sandwich",       "coefficient-inequality",
      "regularized-max",          "gluing",                 "hirzebruch-demo",
  };
  return anchors;
}

bool is_known_anchor(const std::string& anchor) {
  const auto& a = known_anchors();
  return std::find(a.begin(), a.end(), anchor) != a.end();
}

}  // namespace envlab
