#include "dcp/harness/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "dcp/day_to_day.hpp"

namespace dcp {

using nlohmann::json;

namespace {

json behavior_to_json(const BehaviorParams& p) {
  return json{{"alpha", p.alpha},           {"beta", p.beta},
              {"gamma", p.gamma},           {"theta", p.theta},
              {"lambda_mem", p.lambda_mem}, {"t_mem", p.t_mem},
              {"delta_br", p.delta_br},     {"t_star", p.t_star},
              {"horizon", p.horizon}};
}

BehaviorParams behavior_from_json(const json& j) {
  BehaviorParams p;
  p.alpha = j.at("alpha").get<double>();
  p.beta = j.at("beta").get<double>();
  p.gamma = j.at("gamma").get<double>();
  p.theta = j.at("theta").get<double>();
  p.lambda_mem = j.value("lambda_mem", 0.0);
  p.t_mem = j.value("t_mem", 1);
  p.delta_br = j.at("delta_br").get<double>();
  p.t_star = j.at("t_star").get<int>();
  p.horizon = j.at("horizon").get<int>();
  return p;
}

} // namespace

Network load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_scenario: cannot open " + path);
  json j = json::parse(is);
  Network net;
  net.name = j.value("name", path);
  net.behavior = behavior_from_json(j.at("behavior"));
  for (const auto& b : j.at("bottlenecks")) {
    Bottleneck bn;
    bn.id = b.at("id").get<int>();
    bn.capacity_mu = b.at("capacity_mu").get<double>();
    bn.tolled = b.value("tolled", false);
    net.bottlenecks.push_back(bn);
  }
  for (const auto& r : j.at("routes")) {
    Route rt;
    rt.id = r.at("id").get<int>();
    rt.od_pair = r.at("od_pair").get<int>();
    rt.bottlenecks = r.at("bottlenecks").get<std::vector<int>>();
    rt.segment_free_times = r.at("segment_free_times").get<std::vector<int>>();
    net.routes.push_back(std::move(rt));
  }
  for (const auto& o : j.at("od_pairs")) {
    ODPair od;
    od.id = o.at("id").get<int>();
    od.demand = o.at("demand").get<double>();
    od.routes = o.at("routes").get<std::vector<int>>();
    net.od_pairs.push_back(std::move(od));
  }
  auto violations = validate_network(net);
  if (!violations.empty()) {
    std::string msg = "load_scenario: invalid scenario " + path;
    for (const auto& v : violations) msg += "\n  " + v;
    throw std::runtime_error(msg);
  }
  return net;
}

void save_scenario(const std::string& path, const Network& net) {
  json j;
  j["name"] = net.name;
  j["behavior"] = behavior_to_json(net.behavior);
  j["bottlenecks"] = json::array();
  for (const auto& b : net.bottlenecks)
    j["bottlenecks"].push_back(
        {{"id", b.id}, {"capacity_mu", b.capacity_mu}, {"tolled", b.tolled}});
  j["routes"] = json::array();
  for (const auto& r : net.routes)
    j["routes"].push_back({{"id", r.id},
                           {"od_pair", r.od_pair},
                           {"bottlenecks", r.bottlenecks},
                           {"segment_free_times", r.segment_free_times}});
  j["od_pairs"] = json::array();
  for (const auto& o : net.od_pairs)
    j["od_pairs"].push_back(
        {{"id", o.id}, {"demand", o.demand}, {"routes", o.routes}});
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_scenario: cannot open " + path);
  os << j.dump(2) << "\n";
}

Network build_scenario_parallel() {
  Network net;
  net.name = "parallel";
  net.behavior.alpha = 1.0;
  net.behavior.beta = 0.45;
  net.behavior.gamma = 1.2;
  net.behavior.theta = 0.05;
  net.behavior.lambda_mem = 0.0;
  net.behavior.t_mem = 1;
  // delta and demand picked so the zero-toll day-to-day map reaches an
  // exact fixed point with positive waits at all three bottlenecks
  net.behavior.delta_br = 5.0;
  net.behavior.horizon = 80;
  net.behavior.t_star = 30;

  const double mu[3] = {5.0, 4.0, 3.0};
  const int free_time[3] = {5, 6, 7};
  ODPair od;
  od.id = 0;
  od.demand = 240.0;
  for (int k = 0; k < 3; ++k) {
    net.bottlenecks.push_back({k, mu[k], true});
    Route r;
    r.id = k;
    r.od_pair = 0;
    r.bottlenecks = {k};
    r.segment_free_times = {free_time[k], 0};
    net.routes.push_back(std::move(r));
    od.routes.push_back(k);
  }
  net.od_pairs.push_back(std::move(od));
  return net;
}

Network build_scenario_single() {
  Network net;
  net.name = "single";
  net.behavior.alpha = 1.0;
  net.behavior.beta = 0.45;
  net.behavior.gamma = 1.2;
  net.behavior.theta = 0.05;
  net.behavior.lambda_mem = 0.0;
  net.behavior.t_mem = 1;
  // delta and demand picked for an exact congested zero-toll fixed point
  net.behavior.delta_br = 3.0;
  net.behavior.horizon = 48;
  net.behavior.t_star = 24;

  net.bottlenecks.push_back({0, 4.0, true});
  Route r;
  r.id = 0;
  r.od_pair = 0;
  r.bottlenecks = {0};
  r.segment_free_times = {3, 0};
  net.routes.push_back(std::move(r));
  net.od_pairs.push_back({0, 80.0, {0}});
  return net;
}

SiouxCalibration load_sioux_calibration(const std::string& path) {
  std::ifstream is(path);
  if (!is)
    throw std::runtime_error("load_sioux_calibration: cannot open " + path);
  json j = json::parse(is);
  SiouxCalibration c;
  c.behavior = behavior_from_json(j.at("behavior"));
  c.default_mu = j.value("default_mu", 1e6);
  if (j.contains("mu_overrides"))
    for (const auto& [key, value] : j.at("mu_overrides").items())
      c.mu_overrides.emplace_back(std::stoi(key), value.get<double>());
  c.tolled_links = j.at("tolled_links").get<std::vector<int>>();
  c.target_congested_links =
      j.value("target_congested_links", std::vector<int>{});
  for (const auto& o : j.at("od_pairs"))
    c.od_pairs.push_back({o.at("origin").get<int>(),
                          o.at("destination").get<int>(),
                          o.at("demand").get<double>()});
  c.k_routes = j.value("k_routes", 3);
  return c;
}

namespace {

struct Graph {
  // adjacency: node -> (neighbor, link index, weight)
  std::vector<std::vector<std::tuple<int, int, double>>> adj;
};

Graph make_graph(const TntpNetwork& tntp) {
  Graph g;
  g.adj.resize(static_cast<std::size_t>(tntp.n_nodes) + 1);
  for (std::size_t l = 0; l < tntp.links.size(); ++l) {
    const auto& lk = tntp.links[l];
    g.adj[static_cast<std::size_t>(lk.init_node)].emplace_back(
        lk.term_node, static_cast<int>(l), lk.free_flow_time);
  }
  return g;
}

// Dijkstra over a node subset mask; returns the node path (empty if none).
std::vector<int> shortest_path(const Graph& g, int origin, int destination,
                               const std::vector<bool>& node_banned,
                               const std::set<std::pair<int, int>>& edge_banned) {
  const std::size_t n = g.adj.size();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> prev(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[static_cast<std::size_t>(origin)] = 0.0;
  pq.emplace(0.0, origin);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    if (u == destination) break;
    for (const auto& [v, link, w] : g.adj[static_cast<std::size_t>(u)]) {
      if (node_banned[static_cast<std::size_t>(v)]) continue;
      if (edge_banned.count({u, v})) continue;
      double nd = d + w;
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        prev[static_cast<std::size_t>(v)] = u;
        pq.emplace(nd, v);
      }
    }
  }
  if (!std::isfinite(dist[static_cast<std::size_t>(destination)])) return {};
  std::vector<int> path;
  for (int v = destination; v != -1; v = prev[static_cast<std::size_t>(v)])
    path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

double path_cost(const TntpNetwork& tntp, const Graph& g,
                 const std::vector<int>& path) {
  double c = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    for (const auto& [v, link, w] : g.adj[static_cast<std::size_t>(path[i])])
      if (v == path[i + 1]) {
        c += w;
        break;
      }
  }
  (void)tntp;
  return c;
}

} // namespace

std::vector<std::vector<int>> k_shortest_paths(const TntpNetwork& tntp,
                                               int origin, int destination,
                                               int k) {
  Graph g = make_graph(tntp);
  std::vector<bool> no_ban(g.adj.size(), false);
  std::vector<std::vector<int>> result;
  std::vector<int> first = shortest_path(g, origin, destination, no_ban, {});
  if (first.empty()) return result;
  result.push_back(first);

  // Yen's algorithm
  std::vector<std::pair<double, std::vector<int>>> candidates;
  while (static_cast<int>(result.size()) < k) {
    const auto& last = result.back();
    for (std::size_t spur = 0; spur + 1 < last.size(); ++spur) {
      std::vector<int> root(last.begin(),
                            last.begin() + static_cast<long>(spur) + 1);
      std::set<std::pair<int, int>> edge_banned;
      for (const auto& p : result)
        if (p.size() > spur &&
            std::equal(root.begin(), root.end(), p.begin()))
          edge_banned.insert({p[spur], p[spur + 1]});
      std::vector<bool> node_banned(g.adj.size(), false);
      for (std::size_t i = 0; i < spur; ++i)
        node_banned[static_cast<std::size_t>(root[i])] = true;
      std::vector<int> tail = shortest_path(g, last[spur], destination,
                                            node_banned, edge_banned);
      if (tail.empty()) continue;
      std::vector<int> full = root;
      full.insert(full.end(), tail.begin() + 1, tail.end());
      if (std::find_if(result.begin(), result.end(), [&](const auto& p) {
            return p == full;
          }) != result.end())
        continue;
      double c = path_cost(tntp, g, full);
      if (std::find_if(candidates.begin(), candidates.end(), [&](const auto& q) {
            return q.second == full;
          }) == candidates.end())
        candidates.emplace_back(c, full);
    }
    if (candidates.empty()) break;
    auto best = std::min_element(candidates.begin(), candidates.end());
    result.push_back(best->second);
    candidates.erase(best);
  }
  return result;
}

Network build_scenario_sioux(const TntpNetwork& tntp,
                             const SiouxCalibration& calib) {
  Network net;
  net.name = "sioux-falls";
  net.behavior = calib.behavior;

  Graph g = make_graph(tntp);
  std::set<int> used_links(calib.tolled_links.begin(),
                           calib.tolled_links.end());
  std::set<int> tolled(calib.tolled_links.begin(), calib.tolled_links.end());

  int route_id = 0;
  for (std::size_t o = 0; o < calib.od_pairs.size(); ++o) {
    const auto& od_spec = calib.od_pairs[o];
    auto paths =
        k_shortest_paths(tntp, od_spec.origin, od_spec.destination,
                         calib.k_routes);
    if (paths.empty())
      throw std::runtime_error("build_scenario_sioux: no path between nodes " +
                               std::to_string(od_spec.origin) + " and " +
                               std::to_string(od_spec.destination));
    ODPair od;
    od.id = static_cast<int>(o);
    od.demand = od_spec.demand;
    for (const auto& path : paths) {
      Route r;
      r.id = route_id++;
      r.od_pair = od.id;
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        int link = -1;
        double fft = 0.0;
        for (const auto& [v, li, w] : g.adj[static_cast<std::size_t>(path[i])])
          if (v == path[i + 1]) {
            link = li + 1; // 1-based link id
            fft = w;
            break;
          }
        r.bottlenecks.push_back(link);
        used_links.insert(link);
        r.segment_free_times.push_back(
            std::max(0, static_cast<int>(std::lround(fft))));
      }
      r.segment_free_times.push_back(0);
      od.routes.push_back(r.id);
      net.routes.push_back(std::move(r));
    }
    net.od_pairs.push_back(std::move(od));
  }

  for (int link : used_links) {
    Bottleneck bn;
    bn.id = link;
    bn.capacity_mu = calib.default_mu;
    for (const auto& [lid, mu] : calib.mu_overrides)
      if (lid == link) bn.capacity_mu = mu;
    bn.tolled = tolled.count(link) > 0;
    net.bottlenecks.push_back(bn);
  }
  std::sort(net.bottlenecks.begin(), net.bottlenecks.end(),
            [](const Bottleneck& a, const Bottleneck& b) { return a.id < b.id; });

  auto violations = validate_network(net);
  if (!violations.empty()) {
    std::string msg = "build_scenario_sioux: invalid scenario";
    for (const auto& v : violations) msg += "\n  " + v;
    throw std::runtime_error(msg);
  }
  return net;
}

std::vector<std::string> check_congestion_target(
    const Network& net, const std::vector<int>& target_links, double conv_eps,
    int conv_max_days) {
  std::vector<std::string> warnings;
  DayToDayState st = initial_state(net);
  Matrix zero = Matrix::Zero(static_cast<Index>(net.bottlenecks.size()),
                             net.behavior.horizon);
  auto conv = run_to_convergence(st, net, zero, conv_eps, conv_max_days);
  if (!conv.converged)
    warnings.push_back("zero-toll dynamics did not converge within " +
                       std::to_string(conv_max_days) + " days");
  BaselineStats bs = compute_baseline(net, st.last_record);
  std::set<int> congested;
  for (std::size_t i = 0; i < net.bottlenecks.size(); ++i)
    if (bs.nz_count(static_cast<Index>(i)) > 0)
      congested.insert(net.bottlenecks[i].id);
  if (congested.empty())
    warnings.push_back("no congested links at the zero-toll converged state");
  std::set<int> target(target_links.begin(), target_links.end());
  for (int id : target)
    if (!congested.count(id))
      warnings.push_back("target link " + std::to_string(id) +
                         " shows no congestion");
  for (int id : congested)
    if (!target.count(id))
      warnings.push_back("link " + std::to_string(id) +
                         " is congested but not in the target set");
  return warnings;
}

} // namespace dcp
