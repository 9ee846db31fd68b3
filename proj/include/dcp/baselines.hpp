#pragma once

#include "dcp/controller.hpp"

namespace dcp {

/// Toll schedule represented by K breakpoints with linear interpolation
/// between them and constant extrapolation outside.
struct PiecewiseToll {
  std::vector<int> breakpoints; // 1-based slots, strictly increasing
  Vector values;

  double evaluate(double slot) const;
};

std::vector<std::string> validate_piecewise(const PiecewiseToll& pw, int horizon,
                                            double toll_floor);

/// Local-only reward: the per-pair term of the shared reward, without the
/// network-wide average.
Matrix fully_distributed_reward(const DayRecord& day,
                                const BaselineStats& baseline,
                                const Network& net);

/// Fixed state/action layout of the centralized comparison method. The
/// global state covers the Eq-style per-pair vectors only at slots that
/// were congested in the zero-toll baseline, keeping the dimension bounded.
struct CentralizedLayout {
  std::vector<int> tolled;             // bottleneck indices
  std::vector<std::vector<int>> slots; // per tolled bottleneck, 0-based
  int breakpoints = 8;                 // K per bottleneck

  int state_dim() const;
  int action_dim() const;
};

CentralizedLayout make_centralized_layout(const Network& net,
                                          const DayRecord& converged, int k);

Vector build_centralized_state(const DayRecord& day,
                               const BaselineStats& baseline,
                               const Matrix& tolls, const Network& net,
                               const CentralizedLayout& layout);

/// Scalar centralized reward: negated normalized mean wait summed over the
/// tolled set.
double centralized_reward(const DayRecord& day, const BaselineStats& baseline,
                          const Network& net);

/// K evenly spaced breakpoints over [1, horizon], all values at the floor.
std::vector<PiecewiseToll> initial_piecewise(const CentralizedLayout& layout,
                                             int horizon, double toll_floor);

/// Rebuild the (#bottlenecks x T) toll matrix from the piecewise schedules.
Matrix tolls_from_piecewise(const std::vector<PiecewiseToll>& schedules,
                            const CentralizedLayout& layout,
                            Index n_bottlenecks, int horizon,
                            double toll_floor);

/// One centralized control step: act on the global state, shift every
/// breakpoint value by the bounded action (floored), return the rebuilt
/// toll matrix. The action taken is written to action_out.
Matrix centralized_step(DdpgLearner& learner, const Vector& global_state,
                        std::vector<PiecewiseToll>& schedules,
                        const CentralizedLayout& layout,
                        const ControlConfig& cfg, const Network& net,
                        bool explore, Vector& action_out);

CycleLog run_cycle_centralized(DayToDayState& state, const Network& net,
                               const BaselineStats& baseline,
                               DdpgLearner& learner, ReplayBuffer& replay,
                               const ControlConfig& cfg,
                               const CentralizedLayout& layout, bool learn);

} // namespace dcp
