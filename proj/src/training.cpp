#include <filesystem>
#include <fstream>

#include "dcp/baselines.hpp"
#include "dcp/controller.hpp"

namespace dcp {

namespace {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 over (base, stream), so sets get uncorrelated generators
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

} // namespace

TrainResult run_training(const Network& net, const ControlConfig& cfg,
                         const DdpgConfig& dcfg_in, Method method,
                         std::uint64_t seed, const std::string& out_dir) {
  namespace fs = std::filesystem;
  TrainResult res;

  // Zero-toll converged state: baseline statistics and the cycle reset point.
  DayToDayState state = initial_state(net);
  const int T = net.behavior.horizon;
  Matrix zero_tolls =
      Matrix::Zero(static_cast<Index>(net.bottlenecks.size()), T);
  ConvergenceResult conv =
      run_to_convergence(state, net, zero_tolls, cfg.conv_eps, cfg.conv_max_days);
  res.baseline_converged = conv.converged;
  res.baseline = compute_baseline(net, state.last_record);
  res.baseline_day_wait = state.last_record.total_wait();
  res.baseline_day_travel_time = state.last_record.total_travel_time();
  res.snapshot = state;

  for (int i : net.tolled_indices())
    if (!res.baseline.usable[static_cast<std::size_t>(i)])
      throw std::runtime_error(
          "run_training: tolled bottleneck " +
          std::to_string(net.bottlenecks[static_cast<std::size_t>(i)].id) +
          " has no baseline congestion; scenario configuration is unusable");

  ControlConfig ccfg = cfg;
  if (method != Method::dp_ddpg) ccfg.switching_enabled = false;
  RewardMode mode = method == Method::fully_distributed ? RewardMode::local
                                                        : RewardMode::shared;
  CentralizedLayout layout;
  DdpgConfig dcfg = dcfg_in;
  dcfg.action_bound = cfg.action_bound;
  if (method == Method::centralized) {
    layout = make_centralized_layout(net, state.last_record, 8);
    dcfg.state_dim = layout.state_dim();
    dcfg.action_dim = layout.action_dim();
  } else {
    dcfg.state_dim = 3;
    dcfg.action_dim = 1;
  }

  const auto tolled = net.tolled_indices();
  const std::size_t n_pairs = tolled.size() * static_cast<std::size_t>(T);

  std::ofstream metrics, tolls_csv, eval_csv;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    metrics.open(fs::path(out_dir) / "metrics.csv");
    tolls_csv.open(fs::path(out_dir) / "tolls.csv");
    eval_csv.open(fs::path(out_dir) / "eval_metrics.csv");
  }
  const std::string name = method_name(method);
  bool metrics_header = true, tolls_header = true, eval_header = true;

  for (int set = 0; set < cfg.sets; ++set) {
    std::uint64_t set_seed = derive_seed(seed, static_cast<std::uint64_t>(set));
    std::vector<DdpgLearner> learners;
    std::vector<ReplayBuffer> replays;
    if (method != Method::centralized && ccfg.per_pair_learners) {
      for (std::size_t p = 0; p < n_pairs; ++p) {
        learners.emplace_back(dcfg, derive_seed(set_seed, p));
        replays.emplace_back(dcfg.capacity);
      }
    } else {
      learners.emplace_back(dcfg, set_seed);
      replays.emplace_back(dcfg.capacity);
    }

    std::vector<CycleLog> cycles;
    for (int cycle = 1; cycle <= cfg.cycles_per_set; ++cycle) {
      DayToDayState cycle_state = res.snapshot; // reset to the converged state
      CycleLog log =
          method == Method::centralized
              ? run_cycle_centralized(cycle_state, net, res.baseline,
                                      learners[0], replays[0], ccfg, layout,
                                      true)
              : run_cycle(cycle_state, net, res.baseline, learners, replays,
                          ccfg, mode, true);
      if (metrics.is_open()) {
        write_metrics_csv(metrics, net, name, set, cycle, log, metrics_header);
        write_tolls_csv(tolls_csv, net, name, set, cycle, log, tolls_header);
        metrics_header = tolls_header = false;
        if (learners.size() == 1) {
          fs::path ckpt = fs::path(out_dir) /
                          (name + "_set" + std::to_string(set) + "_cycle" +
                           std::to_string(cycle) + ".ddpg");
          learners[0].save(ckpt.string());
        }
      }
      cycles.push_back(std::move(log));
    }
    res.sets.push_back(std::move(cycles));

    // Frozen-policy evaluation cycle for this set.
    DayToDayState eval_state = res.snapshot;
    CycleLog eval_log =
        method == Method::centralized
            ? run_cycle_centralized(eval_state, net, res.baseline, learners[0],
                                    replays[0], ccfg, layout, false)
            : run_cycle(eval_state, net, res.baseline, learners, replays, ccfg,
                        mode, false);
    if (eval_csv.is_open()) {
      write_metrics_csv(eval_csv, net, name, set, cfg.cycles_per_set + 1,
                        eval_log, eval_header);
      eval_header = false;
    }
    res.eval.push_back(std::move(eval_log));
  }
  return res;
}

} // namespace dcp
