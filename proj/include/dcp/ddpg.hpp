#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dcp/neural.hpp"
#include "dcp/types.hpp"

namespace dcp {

/// One replay item, keyed by its (bottleneck, slot) pair of origin.
struct Transition {
  int bottleneck = -1;
  int slot = -1;
  Vector s;
  Vector a;
  double r = 0.0;
  Vector s_next;
  bool done = false;
};

/// Fixed-capacity ring with seeded uniform sampling (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return items_[i]; }

  std::vector<const Transition*> sample(std::size_t batch,
                                        std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

enum class Optimizer { sgd, adam };

struct DdpgConfig {
  int state_dim = 3;
  int action_dim = 1;
  double action_bound = 1.5; // G
  std::vector<int> hidden = {64, 64};
  Activation activation = Activation::relu;
  double lr_actor = 1e-3;
  double lr_critic = 1e-2;
  double gamma_rl = 0.99;
  double tau_soft = 0.01;
  std::size_t batch = 64;
  std::size_t capacity = 100000;
  double noise_std_frac = 0.1; // exploration std as a fraction of G
  Optimizer optimizer = Optimizer::adam;
};

/// Deterministic-policy actor-critic learner with target networks.
class DdpgLearner {
 public:
  DdpgLearner(const DdpgConfig& cfg, std::uint64_t seed);

  /// Actor output; with explore, Gaussian noise is added to the pre-clamp
  /// output and the result is clamped to [-G, G].
  Vector act(const Vector& s, bool explore);

  struct UpdateDiag {
    double critic_loss = 0.0;
    double actor_objective = 0.0; // mean Q(s, mu(s)) over the batch
    bool rejected = false;
  };

  /// One critic regression + one actor ascent step on the batch,
  /// per the standard target-network bootstrap.
  UpdateDiag update(const std::vector<const Transition*>& batch);

  /// target <- tau * online + (1 - tau) * target, per parameter.
  void soft_update();

  const DdpgConfig& config() const { return cfg_; }
  const AgentNet& actor() const { return actor_; }
  const AgentNet& critic() const { return critic_; }
  AgentNet& actor_mut() { return actor_; }
  AgentNet& critic_mut() { return critic_; }
  const AgentNet& actor_target() const { return actor_target_; }
  const AgentNet& critic_target() const { return critic_target_; }
  std::mt19937_64& rng() { return rng_; }
  bool finite() const;

  /// Full checkpoint: four nets, optimizer state, RNG state.
  void save(const std::string& path) const;
  static DdpgLearner load(const std::string& path);

 private:
  DdpgLearner() = default;
  bool optimizer_step(AgentNet& net, AdamState& adam, const GradBuffer& g,
                      double lr);

  DdpgConfig cfg_;
  AgentNet actor_, critic_, actor_target_, critic_target_;
  AdamState actor_adam_, critic_adam_;
  std::mt19937_64 rng_;
};

} // namespace dcp
