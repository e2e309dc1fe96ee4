#pragma once

#include <chrono>
#include <json.hpp>
#include <string>

namespace klpath {

// A named quantitative check. `params` holds every input needed to replay it,
// seeds included.
struct ExperimentReport {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
  nlohmann::json observed = nlohmann::json::object();
  nlohmann::json reference = nlohmann::json::object();
  std::string provenance;
  double tolerance = 0.0;
  bool pass = false;
  double seconds = 0.0;
};

void to_json(nlohmann::json& j, const ExperimentReport& r);
void from_json(const nlohmann::json& j, ExperimentReport& r);

// Wall-clock stopwatch for report timings.
class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace klpath
