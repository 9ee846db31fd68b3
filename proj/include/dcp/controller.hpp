#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dcp/day_to_day.hpp"
#include "dcp/ddpg.hpp"
#include "dcp/net_model.hpp"

namespace dcp {

/// Knobs of the distributed pricing controller and its training protocol.
struct ControlConfig {
  double action_bound = 1.5; // G, currency units
  int n_window = 1;          // switching half-window
  double dw = 0.05;          // switching threshold, waiting-time units
  int cycle_days = 40;
  int cycles_per_set = 15;
  int sets = 10;
  double toll_floor = 0.0;
  bool switching_enabled = true;
  bool per_pair_learners = false; // ablation: one learner per (i, t) pair
  int updates_per_day = -1;       // -1: one per transition stored that day
  double conv_eps = 1e-3;         // zero-toll convergence criterion
  int conv_max_days = 2000;
};

/// Per-(bottleneck, slot) 3-component state vectors for the tolled set.
/// states[k] is (3 x T) for the k-th tolled bottleneck: normalized excess
/// inflow, normalized wait, and mean-centered normalized toll.
std::vector<Matrix> build_states(const DayRecord& day,
                                 const BaselineStats& baseline,
                                 const Matrix& tolls, const Network& net);

/// Toll update: active pairs get toll += action (then floored); inactive
/// pairs are untouched. actions and active are (#tolled x T). Throws if
/// any |action| exceeds the bound.
void apply_actions(Matrix& tolls, const Matrix& actions,
                   const BoolMatrix& active, double floor, double bound,
                   const std::vector<int>& tolled, const Network& net);

/// Spatially shared reward, (#tolled x T), always <= 0.
Matrix shared_reward(const DayRecord& day, const BaselineStats& baseline,
                     const Network& net);

/// Temporally switching mask from the previous day's waits: a pair is
/// inactive when its moving-average wait falls below dw. Out-of-range
/// slots contribute zero wait to the average.
BoolMatrix switching_mask(const Matrix& prev_wait, const ControlConfig& cfg,
                          const std::vector<int>& tolled);

enum class RewardMode { shared, local };

struct DayLog {
  int day = 0;
  double total_travel_time = 0.0;
  double total_wait = 0.0;
  Vector bottleneck_wait_sums;
  int active_pairs = 0;
};

struct CycleLog {
  std::vector<DayLog> days;
  Matrix final_tolls; // (#bottlenecks x T)
};

/// Run one cycle starting from the state the caller restored. learners and
/// replays hold either one shared element or one per (tolled, slot) pair.
/// With learn = false the policy is frozen: no exploration, no replay
/// writes, no updates.
CycleLog run_cycle(DayToDayState& state, const Network& net,
                   const BaselineStats& baseline,
                   std::vector<DdpgLearner>& learners,
                   std::vector<ReplayBuffer>& replays,
                   const ControlConfig& cfg, RewardMode mode, bool learn);

enum class Method { dp_ddpg, fully_distributed, centralized };

std::string method_name(Method m);

struct TrainResult {
  BaselineStats baseline;
  double baseline_day_wait = 0.0;        // converged zero-toll daily wait
  double baseline_day_travel_time = 0.0;
  bool baseline_converged = false;
  std::vector<std::vector<CycleLog>> sets; // [set][cycle]
  std::vector<CycleLog> eval; // frozen-policy cycle per set
  DayToDayState snapshot;     // the zero-toll converged reset state
};

/// Full training protocol: converge the zero-toll state, then run
/// sets x cycles with the learner carried across cycles within a set and a
/// fresh learner per set. Each cycle starts from the converged snapshot.
/// After each set the frozen policy is evaluated for one cycle. When
/// out_dir is non-empty, metric/toll CSVs and learner checkpoints are
/// written there.
TrainResult run_training(const Network& net, const ControlConfig& cfg,
                         const DdpgConfig& dcfg, Method method,
                         std::uint64_t seed, const std::string& out_dir);

/// Metrics CSV: method,set,cycle,day,total_travel_time,total_wait,then one
/// wait-sum column per bottleneck.
void write_metrics_csv(std::ostream& os, const Network& net,
                       const std::string& method, int set, int cycle,
                       const CycleLog& log, bool header);

/// Toll schedule CSV: method,set,cycle,day,bottleneck,slot,toll (final day
/// of the cycle).
void write_tolls_csv(std::ostream& os, const Network& net,
                     const std::string& method, int set, int cycle,
                     const CycleLog& log, bool header);

} // namespace dcp
