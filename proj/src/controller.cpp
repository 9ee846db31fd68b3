#include "dcp/controller.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace dcp {

std::vector<Matrix> build_states(const DayRecord& day,
                                 const BaselineStats& baseline,
                                 const Matrix& tolls, const Network& net) {
  const auto tolled = net.tolled_indices();
  const Index T = day.wait.cols();
  std::vector<Matrix> states;
  states.reserve(tolled.size());
  for (int i : tolled) {
    if (!baseline.usable[static_cast<std::size_t>(i)])
      throw std::logic_error(
          "build_states: bottleneck " +
          std::to_string(net.bottlenecks[static_cast<std::size_t>(i)].id) +
          " has no baseline congestion; unusable as a normalizer");
    double mu = net.bottlenecks[static_cast<std::size_t>(i)].capacity_mu;
    double norm = baseline.norm(i);
    double tau_bar = tolls.row(i).mean();
    Matrix s(3, T);
    s.row(0) = (day.inflow.row(i).array() - mu) / mu;
    s.row(1) = day.wait.row(i).array() / norm;
    s.row(2) = (tolls.row(i).array() - tau_bar) / norm;
    states.push_back(std::move(s));
  }
  return states;
}

void apply_actions(Matrix& tolls, const Matrix& actions,
                   const BoolMatrix& active, double floor, double bound,
                   const std::vector<int>& tolled, const Network& net) {
  (void)net;
  if (actions.cwiseAbs().maxCoeff() > bound * (1.0 + 1e-12))
    throw std::invalid_argument("apply_actions: action exceeds bound");
  for (Index k = 0; k < actions.rows(); ++k) {
    int i = tolled[static_cast<std::size_t>(k)];
    for (Index t = 0; t < actions.cols(); ++t)
      if (active(k, t))
        tolls(i, t) = std::max(floor, tolls(i, t) + actions(k, t));
  }
}

Matrix shared_reward(const DayRecord& day, const BaselineStats& baseline,
                     const Network& net) {
  const auto tolled = net.tolled_indices();
  const Index T = day.wait.cols();
  double shared = 0.0;
  for (int i : tolled) shared += day.wait.row(i).mean() / baseline.norm(i);
  shared /= static_cast<double>(tolled.size());
  // structured as local term minus one per-day scalar, so the difference
  // to the local-only reward is exactly slot-constant
  Matrix r(static_cast<Index>(tolled.size()), T);
  for (Index k = 0; k < r.rows(); ++k) {
    int i = tolled[static_cast<std::size_t>(k)];
    r.row(k) = -(day.wait.row(i).array() / baseline.norm(i));
  }
  r.array() -= shared;
  return r;
}

BoolMatrix switching_mask(const Matrix& prev_wait, const ControlConfig& cfg,
                          const std::vector<int>& tolled) {
  const Index T = prev_wait.cols();
  const int n = cfg.n_window;
  BoolMatrix active(static_cast<Index>(tolled.size()), T);
  for (Index k = 0; k < active.rows(); ++k) {
    int i = tolled[static_cast<std::size_t>(k)];
    for (Index t = 0; t < T; ++t) {
      double sum = 0.0;
      for (Index u = t - n; u <= t + n; ++u)
        if (u >= 0 && u < T) sum += prev_wait(i, u);
      double avg = sum / static_cast<double>(2 * n + 1);
      active(k, t) = !(avg < cfg.dw);
    }
  }
  return active;
}

CycleLog run_cycle(DayToDayState& state, const Network& net,
                   const BaselineStats& baseline,
                   std::vector<DdpgLearner>& learners,
                   std::vector<ReplayBuffer>& replays,
                   const ControlConfig& cfg, RewardMode mode, bool learn) {
  if (!state.has_record)
    throw std::runtime_error("run_cycle: state carries no previous day record");
  const auto tolled = net.tolled_indices();
  const Index nI = static_cast<Index>(tolled.size());
  const Index T = net.behavior.horizon;
  const bool per_pair = learners.size() > 1;
  if (per_pair && learners.size() != static_cast<std::size_t>(nI * T))
    throw std::invalid_argument("run_cycle: learner pool size mismatch");
  auto pair_learner = [&](Index k, Index t) -> DdpgLearner& {
    return per_pair ? learners[static_cast<std::size_t>(k * T + t)] : learners[0];
  };
  auto pair_replay = [&](Index k, Index t) -> ReplayBuffer& {
    return per_pair ? replays[static_cast<std::size_t>(k * T + t)] : replays[0];
  };

  CycleLog log;
  Matrix tolls = Matrix::Zero(static_cast<Index>(net.bottlenecks.size()), T);
  DayRecord prev = state.last_record;

  for (int day = 1; day <= cfg.cycle_days; ++day) {
    BoolMatrix active = cfg.switching_enabled
                            ? switching_mask(prev.wait, cfg, tolled)
                            : BoolMatrix::Constant(nI, T, true);
    std::vector<Matrix> states = build_states(prev, baseline, tolls, net);

    Matrix actions = Matrix::Zero(nI, T);
    for (Index k = 0; k < nI; ++k)
      for (Index t = 0; t < T; ++t)
        if (active(k, t))
          actions(k, t) =
              pair_learner(k, t).act(states[static_cast<std::size_t>(k)].col(t),
                                     learn)(0);
    apply_actions(tolls, actions, active, cfg.toll_floor, cfg.action_bound,
                  tolled, net);

    DayRecord rec = evolve_one_day(state, net, tolls);
    Matrix reward = mode == RewardMode::shared
                        ? shared_reward(rec, baseline, net)
                        : [&] {
                            Matrix r(nI, T);
                            for (Index k = 0; k < nI; ++k) {
                              int i = tolled[static_cast<std::size_t>(k)];
                              r.row(k) = -(rec.wait.row(i).array() /
                                           baseline.norm(i));
                            }
                            return r;
                          }();
    std::vector<Matrix> next_states = build_states(rec, baseline, tolls, net);

    int stored = 0;
    if (learn) {
      bool done = day == cfg.cycle_days;
      for (Index k = 0; k < nI; ++k)
        for (Index t = 0; t < T; ++t)
          if (active(k, t)) {
            Transition tr;
            tr.bottleneck =
                net.bottlenecks[static_cast<std::size_t>(
                                    tolled[static_cast<std::size_t>(k)])]
                    .id;
            tr.slot = static_cast<int>(t + 1);
            tr.s = states[static_cast<std::size_t>(k)].col(t);
            tr.a = Vector::Constant(1, actions(k, t));
            tr.r = reward(k, t);
            tr.s_next = next_states[static_cast<std::size_t>(k)].col(t);
            tr.done = done;
            pair_replay(k, t).push(std::move(tr));
            ++stored;
          }
      if (per_pair) {
        for (Index k = 0; k < nI; ++k)
          for (Index t = 0; t < T; ++t)
            if (active(k, t) && pair_replay(k, t).size() > 0) {
              auto& lrn = pair_learner(k, t);
              lrn.update(pair_replay(k, t).sample(lrn.config().batch, lrn.rng()));
              lrn.soft_update();
            }
      } else if (replays[0].size() > 0) {
        int k_updates = cfg.updates_per_day >= 0 ? cfg.updates_per_day : stored;
        for (int u = 0; u < k_updates; ++u) {
          learners[0].update(
              replays[0].sample(learners[0].config().batch, learners[0].rng()));
          learners[0].soft_update();
        }
      }
    }

    DayLog dl;
    dl.day = day;
    dl.total_travel_time = rec.total_travel_time();
    dl.total_wait = rec.total_wait();
    dl.bottleneck_wait_sums = rec.wait_sums();
    dl.active_pairs = static_cast<int>(active.cast<int>().sum());
    log.days.push_back(std::move(dl));
    prev = rec;
  }
  log.final_tolls = tolls;
  return log;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::dp_ddpg: return "dp_ddpg";
    case Method::fully_distributed: return "fully_distributed";
    case Method::centralized: return "centralized";
  }
  return "unknown";
}

void write_metrics_csv(std::ostream& os, const Network& net,
                       const std::string& method, int set, int cycle,
                       const CycleLog& log, bool header) {
  if (header) {
    os << "method,set,cycle,day,total_travel_time,total_wait";
    for (const auto& b : net.bottlenecks) os << ",wait_sum_" << b.id;
    os << "\n";
  }
  char buf[96];
  for (const auto& d : log.days) {
    os << method << ',' << set << ',' << cycle << ',' << d.day;
    std::snprintf(buf, sizeof(buf), ",%.10g,%.10g", d.total_travel_time,
                  d.total_wait);
    os << buf;
    for (Index i = 0; i < d.bottleneck_wait_sums.size(); ++i) {
      std::snprintf(buf, sizeof(buf), ",%.10g", d.bottleneck_wait_sums(i));
      os << buf;
    }
    os << "\n";
  }
}

void write_tolls_csv(std::ostream& os, const Network& net,
                     const std::string& method, int set, int cycle,
                     const CycleLog& log, bool header) {
  if (header) os << "method,set,cycle,day,bottleneck,slot,toll\n";
  char buf[64];
  int final_day = static_cast<int>(log.days.size());
  for (Index i = 0; i < log.final_tolls.rows(); ++i) {
    if (!net.bottlenecks[static_cast<std::size_t>(i)].tolled) continue;
    for (Index t = 0; t < log.final_tolls.cols(); ++t) {
      os << method << ',' << set << ',' << cycle << ',' << final_day << ','
         << net.bottlenecks[static_cast<std::size_t>(i)].id << ','
         << static_cast<int>(t + 1);
      std::snprintf(buf, sizeof(buf), ",%.10g\n", log.final_tolls(i, t));
      os << buf;
    }
  }
}

} // namespace dcp
