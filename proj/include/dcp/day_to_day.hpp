#pragma once

#include <deque>
#include <functional>
#include <string>

#include "dcp/net_model.hpp"
#include "dcp/within_day.hpp"

namespace dcp {

/// Ring of the last t_mem days of (route x slot) cost arrays, newest last.
struct CostMemory {
  int t_mem = 1;
  std::deque<Matrix> history;

  void push(const Matrix& cost) {
    history.push_back(cost);
    while (static_cast<int>(history.size()) > t_mem) history.pop_front();
  }
};

/// Exponentially weighted perceived cost over the stored history. Before
/// the memory is full the sum runs over available days only, with the
/// normalizer recomputed over that count. Throws std::runtime_error on an
/// empty history. For lambda = 0 the result is the previous day's costs,
/// bit for bit.
Matrix perceived_costs(const CostMemory& memory, const BehaviorParams& params);

/// Multinomial logit shares over the joint (route, departure slot)
/// alternatives of each OD pair; rows sum to 1 per OD pair. Computed with
/// max-subtraction. Throws std::runtime_error if every alternative of some
/// OD pair has non-finite cost.
Matrix logit_shares(const Matrix& perceived, double theta, const Network& net);

/// Bounded-rationality day-to-day step: cohorts within delta_br of the
/// best alternative of their OD pair stay put; all other mass is pooled
/// and redistributed over the OD pair's alternatives by the logit shares.
Matrix apply_bounded_rationality(const Matrix& prev_departures,
                                 const Matrix& perceived, const Matrix& shares,
                                 double delta_br, const Network& net);

/// Mutable day-to-day evolution state for one scenario instance.
struct DayToDayState {
  Matrix departures; // (#routes x T)
  CostMemory memory;
  int day = 0;
  DayRecord last_record;
  bool has_record = false;
};

/// Uniform spread of each OD pair's demand over its (route, slot) grid.
DayToDayState initial_state(const Network& net);

/// Simulate the current day, update cost memory and choices, advance the
/// state by one day. Returns the simulated record (also kept in the state).
DayRecord evolve_one_day(DayToDayState& state, const Network& net,
                         const Matrix& tolls);

struct ConvergenceResult {
  bool converged = false;
  int days_used = 0;
};

/// Iterate evolve_one_day until the relative day-over-day change of total
/// system waiting time stays below eps for 5 consecutive days, or max_days
/// is hit. Throws std::invalid_argument for eps <= 0. The observer, when
/// given, sees every simulated day.
using DayObserver = std::function<void(int day, const DayRecord&)>;
ConvergenceResult run_to_convergence(DayToDayState& state, const Network& net,
                                     const Matrix& tolls, double eps,
                                     int max_days,
                                     const DayObserver& observer = {});

/// Zero-toll converged-state normalizers for states and rewards.
struct BaselineStats {
  Vector w0_sum;       // per bottleneck, sum of wait over slots
  IntVector nz_count;  // slots with wait > 0 (1e-9 tolerance)
  Vector norm;         // w0_sum / nz_count where usable, else 0
  std::vector<bool> usable;
};

BaselineStats compute_baseline(const Network& net, const DayRecord& converged);

/// Versioned binary state checkpoint; load restores bit-exactly.
void save_state(const std::string& path, const DayToDayState& state);
DayToDayState load_state(const std::string& path);

} // namespace dcp
