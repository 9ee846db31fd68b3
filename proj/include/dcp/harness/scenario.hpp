#pragma once

#include <string>
#include <vector>

#include "dcp/harness/tntp.hpp"
#include "dcp/net_model.hpp"

namespace dcp {

/// Load/save a scenario document (JSON: behavior, bottlenecks, routes,
/// OD pairs). load_scenario validates and throws on hard violations.
Network load_scenario(const std::string& path);
void save_scenario(const std::string& path, const Network& net);

/// The three-route parallel bottleneck scenario: one OD pair, one tolled
/// bottleneck per route. Capacities and demand are calibrated so the
/// zero-toll converged state congests all three bottlenecks.
Network build_scenario_parallel();

/// Single-route, single tolled bottleneck scenario used for desk-scale
/// control experiments.
Network build_scenario_single();

/// Calibration inputs the dataset does not carry: OD pairs with demands,
/// per-link capacity overrides, behavioral parameters, route enumeration
/// depth, and the congested-link target list.
struct SiouxCalibration {
  BehaviorParams behavior;
  double default_mu = 1e6; // vehicles per slot for uncapacitated links
  std::vector<std::pair<int, double>> mu_overrides; // (1-based link id, mu)
  std::vector<int> tolled_links;                    // 1-based link ids
  std::vector<int> target_congested_links;          // expected nonzero waits
  struct Od {
    int origin = 0;
    int destination = 0;
    double demand = 0.0;
  };
  std::vector<Od> od_pairs;
  int k_routes = 3; // k-shortest routes per OD by free-flow time
};

SiouxCalibration load_sioux_calibration(const std::string& path);

/// Build the bottleneck-network scenario from a TNTP link table plus the
/// calibration. Free-flow times are quantized to slots by rounding the
/// TNTP time column to the nearest nonnegative integer. Bottleneck ids are
/// 1-based TNTP link positions.
Network build_scenario_sioux(const TntpNetwork& tntp,
                             const SiouxCalibration& calib);

/// Zero-toll convergence check of the congested-link target. Returns
/// warnings (empty when the congested set matches exactly).
std::vector<std::string> check_congestion_target(
    const Network& net, const std::vector<int>& target_links, double conv_eps,
    int conv_max_days);

/// Loopless k-shortest node paths by summed link free-flow time.
std::vector<std::vector<int>> k_shortest_paths(const TntpNetwork& tntp,
                                               int origin, int destination,
                                               int k);

} // namespace dcp
