#include "dcp/day_to_day.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace dcp {

Matrix perceived_costs(const CostMemory& memory, const BehaviorParams& params) {
  if (memory.history.empty())
    throw std::runtime_error("perceived_costs: cost memory not initialized");
  if (params.lambda_mem == 0.0) return memory.history.back();

  const int avail = static_cast<int>(memory.history.size());
  Matrix acc = Matrix::Zero(memory.history.back().rows(),
                            memory.history.back().cols());
  double sigma = 0.0;
  double weight = 1.0;
  for (int k = 0; k < avail; ++k) {
    // history is newest-last; k days back from the most recent
    acc += weight * memory.history[static_cast<std::size_t>(avail - 1 - k)];
    sigma += weight;
    weight *= params.lambda_mem;
  }
  return acc / sigma;
}

namespace {

std::vector<std::vector<int>> od_route_indices(const Network& net) {
  std::vector<std::vector<int>> out;
  out.reserve(net.od_pairs.size());
  for (const auto& od : net.od_pairs) {
    std::vector<int> idx;
    for (int rid : od.routes) idx.push_back(net.route_index(rid));
    out.push_back(std::move(idx));
  }
  return out;
}

} // namespace

Matrix logit_shares(const Matrix& perceived, double theta, const Network& net) {
  const Index T = perceived.cols();
  Matrix shares = Matrix::Zero(perceived.rows(), T);
  for (const auto& routes : od_route_indices(net)) {
    double best = std::numeric_limits<double>::infinity();
    for (int z : routes)
      for (Index t = 0; t < T; ++t)
        if (std::isfinite(perceived(z, t)))
          best = std::min(best, perceived(z, t));
    if (!std::isfinite(best))
      throw std::runtime_error(
          "logit_shares: all alternatives of an OD pair have non-finite cost");
    // max of -theta*c is at the minimum cost; subtract it before exp
    double denom = 0.0;
    for (int z : routes)
      for (Index t = 0; t < T; ++t) {
        double e = std::isfinite(perceived(z, t))
                       ? std::exp(-theta * (perceived(z, t) - best))
                       : 0.0;
        shares(z, t) = e;
        denom += e;
      }
    for (int z : routes) shares.row(z) /= denom;
  }
  return shares;
}

Matrix apply_bounded_rationality(const Matrix& prev_departures,
                                 const Matrix& perceived, const Matrix& shares,
                                 double delta_br, const Network& net) {
  const Index T = prev_departures.cols();
  Matrix next = prev_departures;
  for (const auto& routes : od_route_indices(net)) {
    double best = std::numeric_limits<double>::infinity();
    for (int z : routes)
      for (Index t = 0; t < T; ++t) best = std::min(best, perceived(z, t));
    double moved = 0.0;
    for (int z : routes)
      for (Index t = 0; t < T; ++t)
        if (perceived(z, t) - best > delta_br) {
          moved += next(z, t);
          next(z, t) = 0.0;
        }
    if (moved > 0.0)
      for (int z : routes)
        for (Index t = 0; t < T; ++t) next(z, t) += moved * shares(z, t);
  }
  return next;
}

DayToDayState initial_state(const Network& net) {
  const int T = net.behavior.horizon;
  DayToDayState st;
  st.departures = Matrix::Zero(static_cast<Index>(net.routes.size()), T);
  for (const auto& od : net.od_pairs) {
    double per = od.demand / (static_cast<double>(od.routes.size()) * T);
    for (int rid : od.routes)
      st.departures.row(net.route_index(rid)).setConstant(per);
  }
  st.memory.t_mem = net.behavior.t_mem;
  return st;
}

DayRecord evolve_one_day(DayToDayState& state, const Network& net,
                         const Matrix& tolls) {
  DayRecord rec = simulate_day(net, state.departures, tolls);
  state.memory.push(rec.cost);
  Matrix perceived = perceived_costs(state.memory, net.behavior);
  Matrix shares = logit_shares(perceived, net.behavior.theta, net);
  state.departures = apply_bounded_rationality(
      state.departures, perceived, shares, net.behavior.delta_br, net);
  state.day += 1;
  state.last_record = rec;
  state.has_record = true;
  return rec;
}

ConvergenceResult run_to_convergence(DayToDayState& state, const Network& net,
                                     const Matrix& tolls, double eps,
                                     int max_days, const DayObserver& observer) {
  if (!(eps > 0.0))
    throw std::invalid_argument("run_to_convergence: eps must be > 0");
  constexpr int kStableDays = 5;
  double prev_wait = 0.0;
  bool have_prev = false;
  int streak = 0;
  for (int d = 1; d <= max_days; ++d) {
    DayRecord rec = evolve_one_day(state, net, tolls);
    if (observer) observer(d, rec);
    double w = rec.total_wait();
    if (d == 1 && net.total_demand() == 0.0) return {true, 1};
    if (have_prev) {
      double rel;
      if (prev_wait > 0.0)
        rel = std::abs(w - prev_wait) / prev_wait;
      else
        rel = w > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
      streak = rel < eps ? streak + 1 : 0;
      if (streak >= kStableDays) return {true, d};
    }
    prev_wait = w;
    have_prev = true;
  }
  return {false, max_days};
}

BaselineStats compute_baseline(const Network& net, const DayRecord& converged) {
  const Index nb = static_cast<Index>(net.bottlenecks.size());
  BaselineStats bs;
  bs.w0_sum = Vector::Zero(nb);
  bs.nz_count = IntVector::Zero(nb);
  bs.norm = Vector::Zero(nb);
  bs.usable.assign(static_cast<std::size_t>(nb), false);
  for (Index i = 0; i < nb; ++i) {
    for (Index t = 0; t < converged.wait.cols(); ++t) {
      bs.w0_sum(i) += converged.wait(i, t);
      if (converged.wait(i, t) > 1e-9) bs.nz_count(i) += 1;
    }
    if (bs.nz_count(i) > 0) {
      bs.norm(i) = bs.w0_sum(i) / bs.nz_count(i);
      bs.usable[static_cast<std::size_t>(i)] = true;
    }
  }
  return bs;
}

namespace {

constexpr char kStateMagic[9] = "DCPSTATE";
constexpr std::uint32_t kStateVersion = 1;

void write_matrix(std::ostream& os, const Matrix& m) {
  std::int64_t r = m.rows(), c = m.cols();
  os.write(reinterpret_cast<const char*>(&r), sizeof(r));
  os.write(reinterpret_cast<const char*>(&c), sizeof(c));
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Matrix read_matrix(std::istream& is) {
  std::int64_t r = 0, c = 0;
  is.read(reinterpret_cast<char*>(&r), sizeof(r));
  is.read(reinterpret_cast<char*>(&c), sizeof(c));
  if (!is || r < 0 || c < 0)
    throw std::runtime_error("state checkpoint: corrupt matrix header");
  Matrix m(r, c);
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!is) throw std::runtime_error("state checkpoint: truncated matrix data");
  return m;
}

} // namespace

void save_state(const std::string& path, const DayToDayState& state) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_state: cannot open " + path);
  os.write(kStateMagic, 8);
  os.write(reinterpret_cast<const char*>(&kStateVersion), sizeof(kStateVersion));
  std::int64_t day = state.day;
  os.write(reinterpret_cast<const char*>(&day), sizeof(day));
  write_matrix(os, state.departures);
  std::int64_t t_mem = state.memory.t_mem;
  std::int64_t hist = static_cast<std::int64_t>(state.memory.history.size());
  os.write(reinterpret_cast<const char*>(&t_mem), sizeof(t_mem));
  os.write(reinterpret_cast<const char*>(&hist), sizeof(hist));
  for (const auto& m : state.memory.history) write_matrix(os, m);
  std::uint8_t has = state.has_record ? 1 : 0;
  os.write(reinterpret_cast<const char*>(&has), sizeof(has));
  if (state.has_record) {
    const auto& r = state.last_record;
    write_matrix(os, r.inflow);
    write_matrix(os, r.queue_len);
    write_matrix(os, r.wait);
    write_matrix(os, r.toll);
    write_matrix(os, r.departures);
    write_matrix(os, r.cost);
    write_matrix(os, r.arrival);
    std::uint8_t ov = r.overflow ? 1 : 0;
    os.write(reinterpret_cast<const char*>(&ov), sizeof(ov));
  }
  if (!os) throw std::runtime_error("save_state: write failed for " + path);
}

DayToDayState load_state(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_state: cannot open " + path);
  char magic[8];
  std::uint32_t version = 0;
  is.read(magic, 8);
  is.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!is || std::string(magic, 8) != kStateMagic || version != kStateVersion)
    throw std::runtime_error("load_state: bad magic or version in " + path);
  DayToDayState st;
  std::int64_t day = 0;
  is.read(reinterpret_cast<char*>(&day), sizeof(day));
  st.day = static_cast<int>(day);
  st.departures = read_matrix(is);
  std::int64_t t_mem = 0, hist = 0;
  is.read(reinterpret_cast<char*>(&t_mem), sizeof(t_mem));
  is.read(reinterpret_cast<char*>(&hist), sizeof(hist));
  st.memory.t_mem = static_cast<int>(t_mem);
  for (std::int64_t k = 0; k < hist; ++k)
    st.memory.history.push_back(read_matrix(is));
  std::uint8_t has = 0;
  is.read(reinterpret_cast<char*>(&has), sizeof(has));
  st.has_record = has != 0;
  if (st.has_record) {
    auto& r = st.last_record;
    r.inflow = read_matrix(is);
    r.queue_len = read_matrix(is);
    r.wait = read_matrix(is);
    r.toll = read_matrix(is);
    r.departures = read_matrix(is);
    r.cost = read_matrix(is);
    r.arrival = read_matrix(is);
    std::uint8_t ov = 0;
    is.read(reinterpret_cast<char*>(&ov), sizeof(ov));
    r.overflow = ov != 0;
  }
  if (!is) throw std::runtime_error("load_state: truncated file " + path);
  return st;
}

} // namespace dcp
