#include <doctest.h>

#include <random>

#include "dcp/baselines.hpp"
#include "dcp/harness/scenario.hpp"
#include "test_util.hpp"

using namespace dcp;

namespace {

void zero_net(AgentNet& net) {
  for (auto& w : net.weights) w.setZero();
  for (auto& b : net.biases) b.setZero();
}

} // namespace

TEST_CASE("piecewise toll evaluation") {
  PiecewiseToll pw;
  pw.breakpoints = {1, 5, 9};
  pw.values = Vector(3);
  pw.values << 0.0, 2.0, 1.0;
  CHECK(pw.evaluate(1) == doctest::Approx(0.0));
  CHECK(pw.evaluate(5) == doctest::Approx(2.0));
  CHECK(pw.evaluate(9) == doctest::Approx(1.0));
  CHECK(pw.evaluate(3) == doctest::Approx(1.0));  // midpoint
  CHECK(pw.evaluate(7) == doctest::Approx(1.5));  // midpoint
  CHECK(pw.evaluate(0.5) == doctest::Approx(0.0)); // constant outside
  CHECK(pw.evaluate(12) == doctest::Approx(1.0));
  CHECK(validate_piecewise(pw, 10, 0.0).empty());

  PiecewiseToll bad = pw;
  bad.breakpoints = {5, 5, 9};
  CHECK(!validate_piecewise(bad, 10, 0.0).empty());
}

TEST_CASE("flat schedule shifted by one is flat at one") {
  PiecewiseToll pw;
  pw.breakpoints = {1, 20};
  pw.values = Vector::Zero(2);
  pw.values.array() += 1.0;
  for (int t = 1; t <= 20; ++t) CHECK(pw.evaluate(t) == doctest::Approx(1.0));
}

TEST_CASE("local reward equals shared reward plus the network term") {
  Network net = testutil::single_bottleneck_net(4, 2, 2.0, 0, 0, 1.0);
  net.bottlenecks.push_back({2, 1.0, true});
  BaselineStats bs;
  bs.w0_sum = Vector(2);
  bs.w0_sum << 6.0, 8.0;
  bs.nz_count = IntVector(2);
  bs.nz_count << 3, 2;
  bs.norm = Vector(2);
  bs.norm << 2.0, 4.0;
  bs.usable = {true, true};

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int k = 0; k < 20; ++k) {
    DayRecord day;
    day.wait.resize(2, 4);
    for (Index i = 0; i < 2; ++i)
      for (Index t = 0; t < 4; ++t) day.wait(i, t) = u(rng);
    Matrix local = fully_distributed_reward(day, bs, net);
    Matrix shared = shared_reward(day, bs, net);
    // the difference is one slot-independent per-day scalar: shared must
    // equal local minus that scalar, bit for bit
    double term = 0.0;
    for (int i : net.tolled_indices())
      term += day.wait.row(i).mean() / bs.norm(i);
    term /= static_cast<double>(net.tolled_indices().size());
    Matrix expect = local;
    expect.array() -= term;
    for (Index i = 0; i < shared.rows(); ++i)
      for (Index t = 0; t < shared.cols(); ++t)
        CHECK(shared(i, t) == expect(i, t));
    CHECK(term == doctest::Approx(0.5 * (day.wait.row(0).mean() / 2.0 +
                                         day.wait.row(1).mean() / 4.0)));
  }
}

TEST_CASE("local reward hand oracle") {
  Network net = testutil::single_bottleneck_net(4, 2, 2.0, 0, 0, 1.0);
  net.bottlenecks.push_back({2, 1.0, true});
  BaselineStats bs;
  bs.w0_sum = Vector(2);
  bs.w0_sum << 4.0, 8.0;
  bs.nz_count = IntVector(2);
  bs.nz_count << 2, 2;
  bs.norm = Vector(2);
  bs.norm << 2.0, 4.0;
  bs.usable = {true, true};
  DayRecord day;
  day.wait.resize(2, 4);
  day.wait.row(0) << 1.0, 2.0, 0.0, 1.0;
  day.wait.row(1) << 0.0, 4.0, 4.0, 0.0;
  Matrix r = fully_distributed_reward(day, bs, net);
  CHECK(r(0, 1) == doctest::Approx(-1.0));
  CHECK(r(1, 2) == doctest::Approx(-1.0));
  CHECK(r(0, 2) == doctest::Approx(0.0));
  CHECK(r.maxCoeff() <= 0.0);
}

TEST_CASE("centralized layout, state, and toll rebuild") {
  Network net = build_scenario_parallel();
  DayToDayState st = initial_state(net);
  Matrix zero_tolls = Matrix::Zero(static_cast<Index>(net.bottlenecks.size()),
                                   net.behavior.horizon);
  ConvergenceResult cr = run_to_convergence(st, net, zero_tolls, 1e-3, 2000);
  REQUIRE(cr.converged);
  BaselineStats bs = compute_baseline(net, st.last_record);

  CentralizedLayout layout = make_centralized_layout(net, st.last_record, 8);
  CHECK(layout.tolled.size() == 3);
  int total_slots = 0;
  for (const auto& s : layout.slots) {
    CHECK(!s.empty());
    total_slots += static_cast<int>(s.size());
  }
  CHECK(layout.state_dim() == 3 * total_slots);
  CHECK(layout.action_dim() == 8 * 3);

  Vector gs = build_centralized_state(st.last_record, bs, zero_tolls, net,
                                      layout);
  CHECK(gs.size() == layout.state_dim());
  CHECK(gs.allFinite());

  auto schedules = initial_piecewise(layout, net.behavior.horizon, 0.0);
  REQUIRE(schedules.size() == 3);
  for (const auto& pw : schedules) {
    CHECK(pw.breakpoints.size() == 8);
    CHECK(pw.values.cwiseAbs().maxCoeff() == 0.0);
  }
  Matrix tolls = tolls_from_piecewise(schedules,
                                      layout,
                                      static_cast<Index>(net.bottlenecks.size()),
                                      net.behavior.horizon, 0.0);
  CHECK(tolls.cwiseAbs().maxCoeff() == 0.0);

  // zero action leaves schedules unchanged
  DdpgConfig dcfg;
  dcfg.state_dim = layout.state_dim();
  dcfg.action_dim = layout.action_dim();
  dcfg.hidden = {8, 8};
  DdpgLearner learner(dcfg, 2);
  zero_net(learner.actor_mut());
  ControlConfig cfg;
  Vector action_out;
  Matrix tolls2 = centralized_step(learner, gs, schedules, layout, cfg, net,
                                   false, action_out);
  CHECK(action_out.cwiseAbs().maxCoeff() == 0.0);
  CHECK(tolls2.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& pw : schedules)
    CHECK(pw.values.cwiseAbs().maxCoeff() == 0.0);

  // manual uniform shift by +1 produces a flat unit toll at tolled rows
  for (auto& pw : schedules) pw.values.array() += 1.0;
  Matrix tolls3 = tolls_from_piecewise(schedules,
                                       layout,
                                       static_cast<Index>(net.bottlenecks.size()),
                                       net.behavior.horizon, 0.0);
  for (std::size_t k = 0; k < layout.tolled.size(); ++k)
    for (int t = 0; t < net.behavior.horizon; ++t)
      CHECK(tolls3(layout.tolled[k], t) == doctest::Approx(1.0));

  // reward: negated normalized mean-wait sum over the tolled set
  double expect = 0.0;
  for (std::size_t k = 0; k < layout.tolled.size(); ++k) {
    int i = layout.tolled[k];
    expect -= st.last_record.wait.row(i).mean() / bs.norm(i);
  }
  CHECK(centralized_reward(st.last_record, bs, net) ==
        doctest::Approx(expect));
}
