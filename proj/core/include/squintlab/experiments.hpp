#pragma once

#include <functional>
#include <string>
#include <vector>

#include "squintlab/scenario.hpp"

namespace squintlab {

/// Static-chunk-free parallel loop: workers pull indices from a shared
/// counter; callers must write results into index-keyed slots so the output
/// does not depend on scheduling. threads <= 1 runs inline.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

/// Experiment runners. Each writes its CSV outputs plus the resolved-config
/// sidecar into `out_dir` and returns the paths written. CSV column layouts
/// are part of the interface (see README).
std::vector<std::string> run_convergence(const ScenarioConfig& config, const std::string& out_dir);
std::vector<std::string> run_gain_vs_frequency(const ScenarioConfig& config,
                                               const std::string& out_dir);
std::vector<std::string> run_rate_vs_snr(const ScenarioConfig& config, const std::string& out_dir);
std::vector<std::string> run_rate_vs_bandwidth(const ScenarioConfig& config,
                                               const std::string& out_dir);
std::vector<std::string> run_optimize_layout(const ScenarioConfig& config,
                                             const std::string& out_dir);

/// Users and path gains of one seeded trial (substream `trial` of the base
/// seed); identical no matter which thread runs the trial.
LinkScenario make_trial(const ScenarioConfig& config, int trial);

/// Lossless, locale-independent formatting used for all CSV numbers.
std::string format_csv_double(double value);

}  // namespace squintlab
