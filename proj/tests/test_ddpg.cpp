#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "dcp/ddpg.hpp"

using namespace dcp;

namespace {

void zero_net(AgentNet& net) {
  for (auto& w : net.weights) w.setZero();
  for (auto& b : net.biases) b.setZero();
}

bool nets_equal(const AgentNet& a, const AgentNet& b) {
  if (a.weights.size() != b.weights.size()) return false;
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    if ((a.weights[l] - b.weights[l]).cwiseAbs().maxCoeff() != 0.0)
      return false;
    if ((a.biases[l] - b.biases[l]).cwiseAbs().maxCoeff() != 0.0) return false;
  }
  return true;
}

DdpgConfig small_cfg() {
  DdpgConfig cfg;
  cfg.state_dim = 3;
  cfg.action_dim = 1;
  cfg.action_bound = 1.5;
  cfg.hidden = {8, 8};
  return cfg;
}

Transition make_transition(std::mt19937_64& rng, int sdim, int adim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Transition t;
  t.bottleneck = 0;
  t.slot = 1;
  t.s = Vector(sdim);
  t.s_next = Vector(sdim);
  t.a = Vector(adim);
  for (int i = 0; i < sdim; ++i) {
    t.s(i) = u(rng);
    t.s_next(i) = u(rng);
  }
  for (int i = 0; i < adim; ++i) t.a(i) = u(rng);
  t.r = u(rng);
  t.done = std::bernoulli_distribution(0.2)(rng);
  return t;
}

} // namespace

TEST_CASE("replay buffer ring semantics and seeded sampling") {
  ReplayBuffer buf(3);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 5; ++k) {
    Transition t = make_transition(rng, 2, 1);
    t.r = k; // tag
    buf.push(t);
  }
  CHECK(buf.size() == 3);
  // items 0 and 1 evicted
  for (std::size_t i = 0; i < buf.size(); ++i) CHECK(buf[i].r >= 2.0);

  std::mt19937_64 s1(7), s2(7);
  auto a = buf.sample(10, s1);
  auto b = buf.sample(10, s2);
  REQUIRE(a.size() == 10);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

  ReplayBuffer empty(3);
  CHECK_THROWS(empty.sample(1, s1));
}

TEST_CASE("zeroed actor acts at zero without exploration") {
  DdpgLearner learner(small_cfg(), 42);
  zero_net(learner.actor_mut());
  Vector s = Vector::Zero(3);
  CHECK(learner.act(s, false).cwiseAbs().maxCoeff() == 0.0);

  // default initialization also starts near zero
  DdpgLearner fresh(small_cfg(), 43);
  Vector s2(3);
  s2 << 0.5, -0.2, 1.0;
  CHECK(fresh.act(s2, false).cwiseAbs().maxCoeff() < 1e-2 * 1.5);
}

TEST_CASE("exploration noise has the configured scale") {
  DdpgConfig cfg = small_cfg();
  cfg.noise_std_frac = 0.1;
  DdpgLearner learner(cfg, 42);
  zero_net(learner.actor_mut());
  Vector s = Vector::Zero(3);
  const int n = 10000;
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < n; ++k) {
    double a = learner.act(s, true)(0);
    CHECK(std::abs(a) <= 1.5);
    sum += a;
    sq += a * a;
  }
  double mean = sum / n;
  double std = std::sqrt(sq / n - mean * mean);
  CHECK(std == doctest::Approx(0.15).epsilon(0.2));
}

TEST_CASE("actions are always clamped to the bound") {
  DdpgConfig cfg = small_cfg();
  cfg.noise_std_frac = 3.0; // wild noise to force the clamp
  DdpgLearner learner(cfg, 1);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 200; ++k) {
    Vector s(3);
    for (int i = 0; i < 3; ++i) s(i) = u(rng);
    CHECK(learner.act(s, true).cwiseAbs().maxCoeff() <= 1.5);
  }
  Vector bad(3);
  bad << 1.0, std::nan(""), 0.0;
  CHECK_THROWS(learner.act(bad, false));
}

TEST_CASE("zero reward and zero critic is a fixed point") {
  DdpgLearner learner(small_cfg(), 3);
  zero_net(learner.critic_mut());
  // targets must agree with the zeroed online critic for a true fixed point
  DdpgConfig cfg = small_cfg();
  cfg.tau_soft = 1.0;
  DdpgLearner fixed(cfg, 3);
  zero_net(fixed.critic_mut());
  fixed.soft_update();

  std::mt19937_64 rng(4);
  std::vector<Transition> storage;
  std::vector<const Transition*> batch;
  for (int k = 0; k < 16; ++k) {
    Transition t = make_transition(rng, 3, 1);
    t.r = 0.0;
    t.done = true;
    storage.push_back(t);
  }
  for (const auto& t : storage) batch.push_back(&t);

  AgentNet critic_before = fixed.critic();
  auto diag = fixed.update(batch);
  CHECK(!diag.rejected);
  CHECK(std::abs(diag.critic_loss) < 1e-12);
  for (std::size_t l = 0; l < critic_before.weights.size(); ++l)
    CHECK((fixed.critic().weights[l] - critic_before.weights[l])
              .cwiseAbs()
              .maxCoeff() < 1e-6);
}

TEST_CASE("critic loss decreases on a frozen batch distribution") {
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    DdpgConfig cfg = small_cfg();
    cfg.gamma_rl = 0.0;
    cfg.lr_critic = 1e-2;
    DdpgLearner learner(cfg, seed);
    std::mt19937_64 rng(seed + 100);
    std::vector<Transition> storage;
    for (int k = 0; k < 64; ++k) {
      Transition t = make_transition(rng, 3, 1);
      t.done = true;
      t.r = t.s(0) + 0.5 * t.a(0); // learnable target
      storage.push_back(t);
    }
    std::vector<const Transition*> batch;
    for (const auto& t : storage) batch.push_back(&t);
    double first = learner.update(batch).critic_loss;
    double last = first;
    for (int k = 0; k < 100; ++k) last = learner.update(batch).critic_loss;
    if (last < first) ++improved;
  }
  CHECK(improved >= 6); // median seed improves
}

TEST_CASE("soft update blends online into target") {
  DdpgConfig cfg = small_cfg();
  cfg.tau_soft = 1.0;
  DdpgLearner learner(cfg, 9);
  // perturb online nets so targets differ
  learner.actor_mut().weights[0].array() += 0.5;
  learner.critic_mut().weights[0].array() += 0.25;
  learner.soft_update();
  CHECK(nets_equal(learner.actor(), learner.actor_target()));
  CHECK(nets_equal(learner.critic(), learner.critic_target()));
}

TEST_CASE("soft update formula and geometric convergence") {
  DdpgConfig cfg = small_cfg();
  cfg.tau_soft = 0.01;
  DdpgLearner learner(cfg, 10);
  learner.actor_mut().weights[0].array() += 1.0;
  AgentNet online = learner.actor();
  AgentNet target0 = learner.actor_target();
  learner.soft_update();
  Matrix expect =
      0.01 * online.weights[0] + 0.99 * target0.weights[0];
  CHECK((learner.actor_target().weights[0] - expect).cwiseAbs().maxCoeff() <
        1e-15);

  double gap0 =
      (learner.actor_target().weights[0] - online.weights[0]).norm();
  for (int k = 0; k < 200; ++k) learner.soft_update();
  double gap1 =
      (learner.actor_target().weights[0] - online.weights[0]).norm();
  CHECK(gap1 < gap0 * std::pow(0.99, 199) * 1.01);
}

TEST_CASE("identically seeded learners stay bit-identical through updates") {
  DdpgConfig cfg = small_cfg();
  cfg.tau_soft = 1.0;
  DdpgLearner a(cfg, 21), b(cfg, 21);
  std::mt19937_64 rng(6);
  std::vector<Transition> storage;
  for (int k = 0; k < 64; ++k) storage.push_back(make_transition(rng, 3, 1));
  std::vector<const Transition*> batch;
  for (const auto& t : storage) batch.push_back(&t);
  for (int k = 0; k < 20; ++k) {
    a.update(batch);
    b.update(batch);
    a.soft_update();
    b.soft_update();
  }
  CHECK(nets_equal(a.actor(), b.actor()));
  CHECK(nets_equal(a.critic(), b.critic()));
  CHECK(nets_equal(a.actor_target(), b.actor_target()));
  CHECK(a.finite());
}

TEST_CASE("learner checkpoint resumes bit-exactly") {
  DdpgLearner a(small_cfg(), 33);
  std::mt19937_64 rng(7);
  std::vector<Transition> storage;
  for (int k = 0; k < 32; ++k) storage.push_back(make_transition(rng, 3, 1));
  std::vector<const Transition*> batch;
  for (const auto& t : storage) batch.push_back(&t);
  for (int k = 0; k < 5; ++k) {
    a.update(batch);
    a.soft_update();
  }
  const std::string path = "ddpg_roundtrip.bin";
  a.save(path);
  DdpgLearner b = DdpgLearner::load(path);
  std::remove(path.c_str());
  CHECK(nets_equal(a.actor(), b.actor()));
  CHECK(nets_equal(a.critic(), b.critic()));
  CHECK(nets_equal(a.actor_target(), b.actor_target()));
  CHECK(nets_equal(a.critic_target(), b.critic_target()));
  // identical continuation, including exploration randomness
  Vector s = Vector::Zero(3);
  for (int k = 0; k < 10; ++k)
    CHECK(a.act(s, true)(0) == b.act(s, true)(0));
  for (int k = 0; k < 5; ++k) {
    a.update(batch);
    b.update(batch);
  }
  CHECK(nets_equal(a.critic(), b.critic()));
}
