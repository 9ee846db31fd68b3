#include "dcp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcp {

double PiecewiseToll::evaluate(double slot) const {
  if (breakpoints.empty()) return 0.0;
  if (slot <= breakpoints.front()) return values(0);
  if (slot >= breakpoints.back()) return values(values.size() - 1);
  for (std::size_t k = 1; k < breakpoints.size(); ++k) {
    if (slot <= breakpoints[k]) {
      double x0 = breakpoints[k - 1], x1 = breakpoints[k];
      double frac = (slot - x0) / (x1 - x0);
      return values(static_cast<Index>(k - 1)) * (1.0 - frac) +
             values(static_cast<Index>(k)) * frac;
    }
  }
  return values(values.size() - 1);
}

std::vector<std::string> validate_piecewise(const PiecewiseToll& pw, int horizon,
                                            double toll_floor) {
  std::vector<std::string> v;
  if (pw.breakpoints.size() != static_cast<std::size_t>(pw.values.size()))
    v.push_back("piecewise toll: breakpoints/values length mismatch");
  for (std::size_t k = 0; k < pw.breakpoints.size(); ++k) {
    if (pw.breakpoints[k] < 1 || pw.breakpoints[k] > horizon)
      v.push_back("piecewise toll: breakpoint outside [1, horizon]");
    if (k > 0 && pw.breakpoints[k] <= pw.breakpoints[k - 1])
      v.push_back("piecewise toll: breakpoints not strictly increasing");
  }
  for (Index k = 0; k < pw.values.size(); ++k)
    if (pw.values(k) < toll_floor)
      v.push_back("piecewise toll: value below toll floor");
  return v;
}

Matrix fully_distributed_reward(const DayRecord& day,
                                const BaselineStats& baseline,
                                const Network& net) {
  const auto tolled = net.tolled_indices();
  Matrix r(static_cast<Index>(tolled.size()), day.wait.cols());
  for (Index k = 0; k < r.rows(); ++k) {
    int i = tolled[static_cast<std::size_t>(k)];
    r.row(k) = -(day.wait.row(i).array() / baseline.norm(i));
  }
  return r;
}

int CentralizedLayout::state_dim() const {
  int n = 0;
  for (const auto& s : slots) n += 3 * static_cast<int>(s.size());
  return n;
}

int CentralizedLayout::action_dim() const {
  return breakpoints * static_cast<int>(tolled.size());
}

CentralizedLayout make_centralized_layout(const Network& net,
                                          const DayRecord& converged, int k) {
  CentralizedLayout layout;
  layout.tolled = net.tolled_indices();
  layout.breakpoints = k;
  for (int i : layout.tolled) {
    std::vector<int> congested;
    for (Index t = 0; t < converged.wait.cols(); ++t)
      if (converged.wait(i, t) > 1e-9) congested.push_back(static_cast<int>(t));
    layout.slots.push_back(std::move(congested));
  }
  return layout;
}

Vector build_centralized_state(const DayRecord& day,
                               const BaselineStats& baseline,
                               const Matrix& tolls, const Network& net,
                               const CentralizedLayout& layout) {
  Vector s(layout.state_dim());
  Index pos = 0;
  for (std::size_t k = 0; k < layout.tolled.size(); ++k) {
    int i = layout.tolled[k];
    double mu = net.bottlenecks[static_cast<std::size_t>(i)].capacity_mu;
    double norm = baseline.norm(i);
    double tau_bar = tolls.row(i).mean();
    for (int t : layout.slots[k]) {
      s(pos++) = (day.inflow(i, t) - mu) / mu;
      s(pos++) = day.wait(i, t) / norm;
      s(pos++) = (tolls(i, t) - tau_bar) / norm;
    }
  }
  return s;
}

double centralized_reward(const DayRecord& day, const BaselineStats& baseline,
                          const Network& net) {
  double r = 0.0;
  for (int i : net.tolled_indices())
    r -= day.wait.row(i).mean() / baseline.norm(i);
  return r;
}

std::vector<PiecewiseToll> initial_piecewise(const CentralizedLayout& layout,
                                             int horizon, double toll_floor) {
  std::vector<PiecewiseToll> schedules;
  const int k = layout.breakpoints;
  for (std::size_t b = 0; b < layout.tolled.size(); ++b) {
    PiecewiseToll pw;
    for (int j = 0; j < k; ++j) {
      double pos = k > 1 ? 1.0 + static_cast<double>(j) * (horizon - 1) /
                                     static_cast<double>(k - 1)
                         : 1.0;
      int bp = static_cast<int>(std::lround(pos));
      if (!pw.breakpoints.empty() && bp <= pw.breakpoints.back())
        bp = pw.breakpoints.back() + 1;
      pw.breakpoints.push_back(std::min(bp, horizon));
    }
    pw.values = Vector::Constant(k, toll_floor);
    schedules.push_back(std::move(pw));
  }
  return schedules;
}

Matrix tolls_from_piecewise(const std::vector<PiecewiseToll>& schedules,
                            const CentralizedLayout& layout,
                            Index n_bottlenecks, int horizon,
                            double toll_floor) {
  Matrix tolls = Matrix::Zero(n_bottlenecks, horizon);
  for (std::size_t k = 0; k < layout.tolled.size(); ++k)
    for (int t = 1; t <= horizon; ++t)
      tolls(layout.tolled[k], t - 1) =
          std::max(toll_floor, schedules[k].evaluate(t));
  return tolls;
}

Matrix centralized_step(DdpgLearner& learner, const Vector& global_state,
                        std::vector<PiecewiseToll>& schedules,
                        const CentralizedLayout& layout,
                        const ControlConfig& cfg, const Network& net,
                        bool explore, Vector& action_out) {
  action_out = learner.act(global_state, explore);
  if (action_out.size() != layout.action_dim())
    throw std::invalid_argument("centralized_step: action dimension mismatch");
  Index pos = 0;
  for (auto& pw : schedules)
    for (Index j = 0; j < pw.values.size(); ++j)
      pw.values(j) = std::max(cfg.toll_floor, pw.values(j) + action_out(pos++));
  return tolls_from_piecewise(schedules, layout,
                              static_cast<Index>(net.bottlenecks.size()),
                              net.behavior.horizon, cfg.toll_floor);
}

CycleLog run_cycle_centralized(DayToDayState& state, const Network& net,
                               const BaselineStats& baseline,
                               DdpgLearner& learner, ReplayBuffer& replay,
                               const ControlConfig& cfg,
                               const CentralizedLayout& layout, bool learn) {
  if (!state.has_record)
    throw std::runtime_error(
        "run_cycle_centralized: state carries no previous day record");
  const int T = net.behavior.horizon;
  CycleLog log;
  std::vector<PiecewiseToll> schedules =
      initial_piecewise(layout, T, cfg.toll_floor);
  Matrix tolls = tolls_from_piecewise(
      schedules, layout, static_cast<Index>(net.bottlenecks.size()), T,
      cfg.toll_floor);
  DayRecord prev = state.last_record;

  for (int day = 1; day <= cfg.cycle_days; ++day) {
    Vector s = build_centralized_state(prev, baseline, tolls, net, layout);
    Vector action;
    tolls = centralized_step(learner, s, schedules, layout, cfg, net, learn,
                             action);
    DayRecord rec = evolve_one_day(state, net, tolls);
    double r = centralized_reward(rec, baseline, net);
    Vector s_next = build_centralized_state(rec, baseline, tolls, net, layout);
    if (learn) {
      Transition tr;
      tr.bottleneck = -1;
      tr.slot = -1;
      tr.s = s;
      tr.a = action;
      tr.r = r;
      tr.s_next = s_next;
      tr.done = day == cfg.cycle_days;
      replay.push(std::move(tr));
      if (replay.size() > 0) {
        int k_updates = cfg.updates_per_day >= 0 ? cfg.updates_per_day : 1;
        for (int u = 0; u < k_updates; ++u) {
          learner.update(replay.sample(learner.config().batch, learner.rng()));
          learner.soft_update();
        }
      }
    }
    DayLog dl;
    dl.day = day;
    dl.total_travel_time = rec.total_travel_time();
    dl.total_wait = rec.total_wait();
    dl.bottleneck_wait_sums = rec.wait_sums();
    dl.active_pairs = layout.action_dim();
    log.days.push_back(std::move(dl));
    prev = rec;
  }
  log.final_tolls = tolls;
  return log;
}

} // namespace dcp
