#pragma once

// Verification suites shared by `klpath verify` and the acceptance binary.
// Each suite returns one or more reports whose params replay the run.

#include <cstdint>
#include <string>
#include <vector>

#include "klpath/report.hpp"

namespace klpath {

inline constexpr std::uint64_t kDefaultSeed = 20240601;

// Suite names accepted by run_suite, in execution order for "all".
const std::vector<std::string>& suite_names();

// Throws PreconditionViolated for an unknown name. "all" runs every suite.
std::vector<ExperimentReport> run_suite(const std::string& name, std::uint64_t seed = kDefaultSeed);

std::vector<ExperimentReport> verify_oracle();
std::vector<ExperimentReport> verify_moments();
std::vector<ExperimentReport> verify_ks();
std::vector<ExperimentReport> verify_completion(std::uint64_t seed);
std::vector<ExperimentReport> verify_hensel();
std::vector<ExperimentReport> verify_fourth_moment(std::uint64_t seed);
std::vector<ExperimentReport> verify_tightness(std::uint64_t seed);
std::vector<ExperimentReport> verify_distribution(std::uint64_t seed);
std::vector<ExperimentReport> verify_series(std::uint64_t seed);
std::vector<ExperimentReport> verify_performance();

bool all_pass(const std::vector<ExperimentReport>& reports);

}  // namespace klpath
