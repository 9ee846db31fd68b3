#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "dcp/types.hpp"

namespace dcp {

/// A point-queue bottleneck with fixed service capacity per time slot.
struct Bottleneck {
  int id = 0;
  double capacity_mu = 1.0; // vehicles per slot
  bool tolled = false;
};

/// A route is an ordered bottleneck sequence plus free-flow segment times.
/// Segment k runs from the previous bottleneck exit (or the origin) to the
/// entry of bottleneck k; the final segment reaches the destination, so
/// segment_free_times has one more entry than bottlenecks.
struct Route {
  int id = 0;
  int od_pair = 0;
  std::vector<int> bottlenecks;        // bottleneck ids, traversal order
  std::vector<int> segment_free_times; // slots, size = bottlenecks.size() + 1
};

struct ODPair {
  int id = 0;
  double demand = 0.0; // vehicles per day
  std::vector<int> routes;
};

/// Traveler behavior parameters shared by the whole scenario.
struct BehaviorParams {
  double alpha = 1.0;      // value of time per slot
  double beta = 0.45;      // early arrival penalty per slot
  double gamma = 1.2;      // late arrival penalty per slot
  double theta = 0.05;     // logit scale
  double lambda_mem = 0.0; // memory weight, 0 <= lambda < 1
  int t_mem = 1;           // memory horizon in days
  double delta_br = 0.5;   // bounded-rationality threshold
  int t_star = 30;         // desired arrival slot, 1-based
  int horizon = 80;        // slots per day
};

/// Immutable scenario description. Safe to share read-only across threads.
struct Network {
  std::string name;
  std::vector<Bottleneck> bottlenecks;
  std::vector<Route> routes;
  std::vector<ODPair> od_pairs;
  BehaviorParams behavior;

  /// Index of a bottleneck id in the bottlenecks vector, or -1.
  int bottleneck_index(int id) const;
  /// Index of a route id in the routes vector, or -1.
  int route_index(int id) const;
  /// Indices (not ids) of tolled bottlenecks, in storage order.
  std::vector<int> tolled_indices() const;
  double total_demand() const;
};

/// Hard invariant violations; empty iff the network is well formed.
std::vector<std::string> validate_network(const Network& net);

/// Soft diagnostics (e.g. beta >= alpha), never fatal.
std::vector<std::string> network_warnings(const Network& net);

} // namespace dcp
