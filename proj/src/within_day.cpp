#include "dcp/within_day.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>
#include <stdexcept>

namespace dcp {

double step_queue(double n_now, double inflow, double mu) {
  return std::max(0.0, n_now + inflow - mu);
}

double waiting_time(double n, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("waiting_time: capacity must be > 0");
  return n / mu;
}

double DayRecord::total_travel_time() const {
  double tt = 0.0;
  for (Index z = 0; z < departures.rows(); ++z)
    for (Index t = 0; t < departures.cols(); ++t)
      tt += departures(z, t) * (arrival(z, t) - static_cast<double>(t + 1));
  return tt;
}

double DayRecord::total_wait() const {
  // experienced queueing delay: mass-weighted sum of (exit - entry) over
  // every queue traversal
  double tw = 0.0;
  for (std::size_t z = 0; z < trace.size(); ++z)
    for (std::size_t t = 0; t < trace[z].size(); ++t) {
      const CohortTrace& tr = trace[z][t];
      double mass = departures(static_cast<Index>(z), static_cast<Index>(t));
      if (mass <= 0.0) continue;
      for (std::size_t l = 0; l < tr.exit.size(); ++l)
        tw += mass * (tr.exit[l] - tr.entry[l]);
    }
  return tw;
}

Vector DayRecord::wait_sums() const { return wait.rowwise().sum(); }

namespace {

// One cohort (or zero-mass probe) waiting to enter a bottleneck queue.
struct PendingArrival {
  int route;
  int dep_slot; // 1-based
  int leg;      // index into route.bottlenecks
  double time;  // real-valued arrival time at the queue tail
  double mass;
  double toll_acc;
};

} // namespace

DayRecord simulate_day(const Network& net, const Matrix& departures,
                       const Matrix& tolls) {
  const int T = net.behavior.horizon;
  const Index nb = static_cast<Index>(net.bottlenecks.size());
  const Index nr = static_cast<Index>(net.routes.size());
  if (departures.rows() != nr || departures.cols() != T)
    throw std::invalid_argument("simulate_day: departures shape mismatch");
  if (tolls.rows() != nb || tolls.cols() != T)
    throw std::invalid_argument("simulate_day: tolls shape mismatch");
  if ((departures.array() < 0.0).any())
    throw std::invalid_argument("simulate_day: negative departures");
  if ((tolls.array() < 0.0).any())
    throw std::invalid_argument("simulate_day: negative tolls");

  DayRecord rec;
  rec.inflow = Matrix::Zero(nb, T);
  rec.queue_len = Matrix::Zero(nb, T);
  rec.wait = Matrix::Zero(nb, T);
  rec.toll = tolls;
  rec.departures = departures;
  rec.cost = Matrix::Zero(nr, T);
  rec.arrival = Matrix::Zero(nr, T);
  rec.trace.assign(static_cast<std::size_t>(nr),
                   std::vector<CohortTrace>(static_cast<std::size_t>(T)));

  // Pre-resolve bottleneck ids to indices per route.
  std::vector<std::vector<int>> route_bn(static_cast<std::size_t>(nr));
  for (Index z = 0; z < nr; ++z)
    for (int bid : net.routes[static_cast<std::size_t>(z)].bottlenecks)
      route_bn[static_cast<std::size_t>(z)].push_back(net.bottleneck_index(bid));

  const auto& bp = net.behavior;
  auto finish = [&](int z, int dep_slot, double mass, double toll_acc,
                    double arrival_time) {
    if (arrival_time > static_cast<double>(T)) {
      arrival_time = static_cast<double>(T);
      if (mass > 1e-12) rec.overflow = true;
    }
    rec.arrival(z, dep_slot - 1) = arrival_time;
    double sched = arrival_time < bp.t_star
                       ? bp.beta * (bp.t_star - arrival_time)
                       : bp.gamma * (arrival_time - bp.t_star);
    rec.cost(z, dep_slot - 1) =
        toll_acc + bp.alpha * (arrival_time - dep_slot) + sched;
  };

  std::vector<std::deque<PendingArrival>> pending(static_cast<std::size_t>(T) + 1);

  // Launch every (route, departure slot) cohort, zero-mass ones included.
  for (Index z = 0; z < nr; ++z) {
    const auto& route = net.routes[static_cast<std::size_t>(z)];
    for (int s = 1; s <= T; ++s) {
      double mass = departures(z, s - 1);
      double t0 = s + route.segment_free_times[0];
      if (route.bottlenecks.empty()) {
        finish(static_cast<int>(z), s, mass, 0.0, t0);
      } else if (t0 > static_cast<double>(T)) {
        finish(static_cast<int>(z), s, mass, 0.0, t0);
      } else {
        pending[static_cast<std::size_t>(t0)].push_back(
            {static_cast<int>(z), s, 0, t0, mass, 0.0});
      }
    }
  }

  for (int t = 1; t <= T; ++t) {
    if (t > 1)
      for (Index i = 0; i < nb; ++i)
        rec.queue_len(i, t - 1) =
            step_queue(rec.queue_len(i, t - 2), rec.inflow(i, t - 2),
                       net.bottlenecks[static_cast<std::size_t>(i)].capacity_mu);
    for (Index i = 0; i < nb; ++i)
      rec.wait(i, t - 1) =
          rec.queue_len(i, t - 1) /
          net.bottlenecks[static_cast<std::size_t>(i)].capacity_mu;

    auto& q = pending[static_cast<std::size_t>(t)];
    while (!q.empty()) {
      PendingArrival ev = q.front();
      q.pop_front();
      const auto& route = net.routes[static_cast<std::size_t>(ev.route)];
      int bn = route_bn[static_cast<std::size_t>(ev.route)]
                       [static_cast<std::size_t>(ev.leg)];
      // fluid FIFO delay: backlog at slot start, plus same-slot mass that
      // entered ahead, plus half the cohort's own mass (its mean position)
      double mu = net.bottlenecks[static_cast<std::size_t>(bn)].capacity_mu;
      double ahead = rec.inflow(bn, t - 1);
      rec.inflow(bn, t - 1) += ev.mass;
      double exit_time =
          std::max(ev.time, t + (rec.queue_len(bn, t - 1) + ahead +
                                 0.5 * ev.mass) /
                                    mu);
      int toll_slot =
          std::clamp(static_cast<int>(std::floor(exit_time)), 1, T);
      ev.toll_acc += tolls(bn, toll_slot - 1);
      auto& tr = rec.trace[static_cast<std::size_t>(ev.route)]
                          [static_cast<std::size_t>(ev.dep_slot - 1)];
      tr.entry.push_back(ev.time);
      tr.exit.push_back(exit_time);

      double next_time =
          exit_time + route.segment_free_times[static_cast<std::size_t>(ev.leg) + 1];
      if (static_cast<std::size_t>(ev.leg) + 1 <
          route.bottlenecks.size()) {
        int ns = static_cast<int>(std::floor(next_time));
        if (ns > T) {
          finish(ev.route, ev.dep_slot, ev.mass, ev.toll_acc, next_time);
        } else {
          pending[static_cast<std::size_t>(ns)].push_back(
              {ev.route, ev.dep_slot, ev.leg + 1, next_time, ev.mass,
               ev.toll_acc});
        }
      } else {
        finish(ev.route, ev.dep_slot, ev.mass, ev.toll_acc, next_time);
      }
    }
  }

  return rec;
}

void write_day_csv(std::ostream& os, const Network& net, const DayRecord& rec,
                   int day, bool header) {
  if (header) os << "day,bottleneck,slot,inflow,queue,wait,toll\n";
  char buf[160];
  for (Index i = 0; i < rec.inflow.rows(); ++i) {
    int bid = net.bottlenecks[static_cast<std::size_t>(i)].id;
    for (Index t = 0; t < rec.inflow.cols(); ++t) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.10g,%.10g,%.10g,%.10g\n",
                    day, bid, static_cast<int>(t + 1), rec.inflow(i, t),
                    rec.queue_len(i, t), rec.wait(i, t), rec.toll(i, t));
      os << buf;
    }
  }
}

} // namespace dcp
