#pragma once

#include <iosfwd>
#include <vector>

#include "dcp/net_model.hpp"
#include "dcp/types.hpp"

namespace dcp {

/// Per-cohort traversal trace: queue entry and exit times (real-valued,
/// slot units) at each bottleneck along the route, in traversal order.
struct CohortTrace {
  std::vector<double> entry;
  std::vector<double> exit;
};

/// Everything observed during one simulated day.
///
/// Bottleneck arrays are (#bottlenecks x T); route arrays are (#routes x T).
/// Column t-1 holds slot t (slots are 1-based in the model). `cost` and
/// `arrival` are keyed by DEPARTURE slot and are filled for every
/// (route, slot) pair, including zero-mass cohorts, so the choice model
/// always has a cost for each alternative.
struct DayRecord {
  Matrix inflow;     // a_i(t), vehicles entering the queue during slot t
  Matrix queue_len;  // N_i(t) at the start of slot t
  Matrix wait;       // w_i(t) = N_i(t) / mu_i
  Matrix toll;       // toll charged to vehicles leaving i at slot t
  Matrix departures; // f_z(t)
  Matrix cost;       // generalized cost by (route, departure slot)
  Matrix arrival;    // destination arrival time (real) by (route, dep slot)
  std::vector<std::vector<CohortTrace>> trace; // [route][dep slot - 1]
  bool overflow = false; // some positive-mass cohort was clamped at slot T

  /// Sum over cohorts of mass * (arrival - departure time).
  double total_travel_time() const;
  /// Experienced queueing delay: mass-weighted (exit - entry) summed over
  /// every queue traversal (person-slots).
  double total_wait() const;
  /// Per-bottleneck sum of wait over slots.
  Vector wait_sums() const;
};

/// Discrete point-queue update: next queue length after one slot.
double step_queue(double n_now, double inflow, double mu);

/// Point-queue waiting time. Throws std::invalid_argument for mu <= 0.
double waiting_time(double n, double mu);

/// Propagate one day of departures through the network.
///
/// departures is (#routes x T), tolls is (#bottlenecks x T); both rows in
/// network storage order. Pure function of its inputs.
///
/// A cohort entering a queue during slot t is delayed by the fluid FIFO
/// backlog: the queue at the start of t, plus same-slot mass ahead of it,
/// plus half its own mass (the cohort-mean position), all served at rate
/// mu. The stored per-slot arrays keep the one-step queue recursion.
DayRecord simulate_day(const Network& net, const Matrix& departures,
                       const Matrix& tolls);

/// Columnar CSV: day,bottleneck,slot,inflow,queue,wait,toll.
void write_day_csv(std::ostream& os, const Network& net, const DayRecord& rec,
                   int day, bool header);

} // namespace dcp
