#pragma once

#include <cstdint>
#include <string>

#include "dcp/controller.hpp"
#include "dcp/harness/scenario.hpp"

namespace dcp {

/// One experiment: scenario reference, controller and learner parameters,
/// seed, output location. All randomness flows from the seed.
struct ExperimentConfig {
  std::string scenario = "parallel"; // builtin name or scenario file path
  std::string tntp_path;             // for the sioux scenario
  std::string calibration_path;      // for the sioux scenario
  ControlConfig control;
  DdpgConfig ddpg;
  Method method = Method::dp_ddpg;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
};

ExperimentConfig load_config(const std::string& path);
void save_config(const std::string& path, const ExperimentConfig& cfg);

Method method_from_name(const std::string& name);

/// Resolve the configured scenario reference to a Network. Builtin names:
/// "parallel", "single", "sioux" (the latter needs tntp/calibration paths).
Network resolve_scenario(const ExperimentConfig& cfg);

/// Output root override: when the environment variable DCP_OUT_ROOT is
/// set, relative output directories are placed under it.
std::string resolve_out_dir(const std::string& out_dir);

} // namespace dcp
