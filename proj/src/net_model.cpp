#include "dcp/net_model.hpp"

#include <set>
#include <sstream>

namespace dcp {

int Network::bottleneck_index(int id) const {
  for (std::size_t i = 0; i < bottlenecks.size(); ++i)
    if (bottlenecks[i].id == id) return static_cast<int>(i);
  return -1;
}

int Network::route_index(int id) const {
  for (std::size_t i = 0; i < routes.size(); ++i)
    if (routes[i].id == id) return static_cast<int>(i);
  return -1;
}

std::vector<int> Network::tolled_indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < bottlenecks.size(); ++i)
    if (bottlenecks[i].tolled) out.push_back(static_cast<int>(i));
  return out;
}

double Network::total_demand() const {
  double m = 0.0;
  for (const auto& od : od_pairs) m += od.demand;
  return m;
}

std::vector<std::string> validate_network(const Network& net) {
  std::vector<std::string> v;
  auto fail = [&v](const std::string& msg) { v.push_back(msg); };

  std::set<int> bn_ids, route_ids, od_ids;
  for (const auto& b : net.bottlenecks) {
    if (!bn_ids.insert(b.id).second)
      fail("duplicate bottleneck id " + std::to_string(b.id));
    if (!(b.capacity_mu > 0.0))
      fail("bottleneck " + std::to_string(b.id) + ": capacity_mu must be > 0");
  }
  for (const auto& r : net.routes) {
    if (!route_ids.insert(r.id).second)
      fail("duplicate route id " + std::to_string(r.id));
    if (r.segment_free_times.size() != r.bottlenecks.size() + 1)
      fail("route " + std::to_string(r.id) +
           ": segment_free_times length must be bottlenecks length + 1");
    for (int ft : r.segment_free_times)
      if (ft < 0)
        fail("route " + std::to_string(r.id) + ": negative free-flow time");
    for (int bid : r.bottlenecks)
      if (net.bottleneck_index(bid) < 0)
        fail("route " + std::to_string(r.id) + ": unknown bottleneck id " +
             std::to_string(bid));
  }
  for (const auto& od : net.od_pairs) {
    if (!od_ids.insert(od.id).second)
      fail("duplicate OD pair id " + std::to_string(od.id));
    if (od.demand < 0.0)
      fail("OD pair " + std::to_string(od.id) + ": negative demand");
    if (od.routes.empty())
      fail("OD pair " + std::to_string(od.id) + ": no routes");
    for (int rid : od.routes) {
      int ri = net.route_index(rid);
      if (ri < 0)
        fail("OD pair " + std::to_string(od.id) + ": unknown route id " +
             std::to_string(rid));
      else if (net.routes[ri].od_pair != od.id)
        fail("route " + std::to_string(rid) + " does not belong to OD pair " +
             std::to_string(od.id));
    }
  }

  const auto& p = net.behavior;
  if (!(p.alpha > 0.0)) fail("behavior: alpha must be > 0");
  if (p.beta < 0.0) fail("behavior: beta must be >= 0");
  if (!(p.gamma > 0.0)) fail("behavior: gamma must be > 0");
  if (!(p.theta > 0.0)) fail("behavior: theta must be > 0");
  if (p.lambda_mem < 0.0 || p.lambda_mem >= 1.0)
    fail("behavior: lambda_mem must be in [0, 1)");
  if (p.t_mem < 1) fail("behavior: t_mem must be >= 1");
  if (p.delta_br < 0.0) fail("behavior: delta_br must be >= 0");
  if (p.horizon < 1) fail("behavior: horizon must be >= 1");
  if (p.t_star < 1 || p.t_star > p.horizon)
    fail("behavior: t_star must be in [1, horizon]");
  return v;
}

std::vector<std::string> network_warnings(const Network& net) {
  std::vector<std::string> w;
  const auto& p = net.behavior;
  if (p.beta >= p.alpha)
    w.push_back("behavior: beta >= alpha violates the usual bottleneck-model "
                "stability condition");
  return w;
}

} // namespace dcp
