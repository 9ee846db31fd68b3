#include "dcp/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dcp {

void ReplayBuffer::push(Transition t) {
  if (capacity_ == 0) return;
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch,
                                                    std::mt19937_64& rng) const {
  if (items_.empty())
    throw std::runtime_error("ReplayBuffer::sample: buffer is empty");
  std::uniform_int_distribution<std::size_t> dist(0, items_.size() - 1);
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (std::size_t k = 0; k < batch; ++k) out.push_back(&items_[dist(rng)]);
  return out;
}

namespace {

std::vector<int> layer_stack(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

} // namespace

DdpgLearner::DdpgLearner(const DdpgConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(seed) {
  actor_ = make_net(layer_stack(cfg.state_dim, cfg.hidden, cfg.action_dim),
                    cfg.activation, OutputHead::bounded, cfg.action_bound,
                    rng_, 1e-3);
  critic_ = make_net(layer_stack(cfg.state_dim + cfg.action_dim, cfg.hidden, 1),
                     cfg.activation, OutputHead::linear, 1.0, rng_);
  actor_target_ = actor_;
  critic_target_ = critic_;
  actor_adam_ = AdamState::zeros_like(actor_);
  critic_adam_ = AdamState::zeros_like(critic_);
}

Vector DdpgLearner::act(const Vector& s, bool explore) {
  if (!s.allFinite())
    throw std::invalid_argument("DdpgLearner::act: non-finite state");
  if (s.size() != cfg_.state_dim)
    throw std::invalid_argument("DdpgLearner::act: state dimension mismatch");
  Vector a = forward(actor_, s);
  if (explore) {
    std::normal_distribution<double> noise(0.0,
                                           cfg_.noise_std_frac * cfg_.action_bound);
    for (Index i = 0; i < a.size(); ++i) a(i) += noise(rng_);
  }
  return a.cwiseMax(-cfg_.action_bound).cwiseMin(cfg_.action_bound);
}

bool DdpgLearner::optimizer_step(AgentNet& net, AdamState& adam,
                                 const GradBuffer& g, double lr) {
  return cfg_.optimizer == Optimizer::adam ? adam_step(net, adam, g, lr)
                                           : sgd_step(net, g, lr);
}

DdpgLearner::UpdateDiag DdpgLearner::update(
    const std::vector<const Transition*>& batch) {
  if (batch.empty())
    throw std::invalid_argument("DdpgLearner::update: empty batch");
  const Index B = static_cast<Index>(batch.size());
  const Index sd = cfg_.state_dim, ad = cfg_.action_dim;
  Matrix S(sd, B), A(ad, B), S2(sd, B);
  Eigen::RowVectorXd R(B), not_done(B);
  for (Index k = 0; k < B; ++k) {
    const Transition& t = *batch[static_cast<std::size_t>(k)];
    S.col(k) = t.s;
    A.col(k) = t.a;
    S2.col(k) = t.s_next;
    R(k) = t.r;
    not_done(k) = t.done ? 0.0 : 1.0;
  }

  UpdateDiag diag;

  // Critic regression toward the target-network bootstrap.
  Matrix A2 = forward(actor_target_, S2);
  Matrix X2(sd + ad, B);
  X2.topRows(sd) = S2;
  X2.bottomRows(ad) = A2;
  Eigen::RowVectorXd q_target = forward(critic_target_, X2).row(0);
  Eigen::RowVectorXd y =
      R + cfg_.gamma_rl * (not_done.array() * q_target.array()).matrix();

  Matrix X(sd + ad, B);
  X.topRows(sd) = S;
  X.bottomRows(ad) = A;
  ForwardTrace critic_trace;
  Eigen::RowVectorXd q = forward(critic_, X, critic_trace).row(0);
  Eigen::RowVectorXd err = q - y;
  diag.critic_loss = err.array().square().mean();
  if (!std::isfinite(diag.critic_loss)) {
    diag.rejected = true;
    return diag;
  }
  Matrix upstream = (2.0 / static_cast<double>(B)) * Matrix(err);
  Matrix unused;
  GradBuffer critic_grads = backward(critic_, critic_trace, upstream, unused);
  if (!optimizer_step(critic_, critic_adam_, critic_grads, cfg_.lr_critic)) {
    diag.rejected = true;
    return diag;
  }

  // Actor ascent on Q(s, mu(s)) through the critic's input gradient.
  ForwardTrace actor_trace;
  Matrix A_mu = forward(actor_, S, actor_trace);
  Matrix Xa(sd + ad, B);
  Xa.topRows(sd) = S;
  Xa.bottomRows(ad) = A_mu;
  ForwardTrace critic_trace2;
  Eigen::RowVectorXd q_mu = forward(critic_, Xa, critic_trace2).row(0);
  diag.actor_objective = q_mu.mean();
  Matrix ones = Matrix::Constant(1, B, 1.0 / static_cast<double>(B));
  Matrix dq_dx;
  backward(critic_, critic_trace2, ones, dq_dx);
  Matrix dq_da = dq_dx.bottomRows(ad);
  Matrix actor_input_grad;
  GradBuffer actor_grads =
      backward(actor_, actor_trace, Matrix(-dq_da), actor_input_grad);
  if (!optimizer_step(actor_, actor_adam_, actor_grads, cfg_.lr_actor))
    diag.rejected = true;
  return diag;
}

void DdpgLearner::soft_update() {
  auto blend = [this](const AgentNet& online, AgentNet& target) {
    for (std::size_t l = 0; l < online.weights.size(); ++l) {
      target.weights[l] =
          cfg_.tau_soft * online.weights[l] + (1.0 - cfg_.tau_soft) * target.weights[l];
      target.biases[l] =
          cfg_.tau_soft * online.biases[l] + (1.0 - cfg_.tau_soft) * target.biases[l];
    }
  };
  blend(actor_, actor_target_);
  blend(critic_, critic_target_);
}

bool DdpgLearner::finite() const {
  return actor_.finite() && critic_.finite() && actor_target_.finite() &&
         critic_target_.finite();
}

namespace {

constexpr char kLearnerMagic[9] = "DCPDDPG1";

void write_adam(std::ostream& os, const AdamState& s) {
  std::int64_t steps = s.step_count;
  os.write(reinterpret_cast<const char*>(&steps), sizeof(steps));
  auto dump = [&os](const auto& seq) {
    for (const auto& m : seq)
      os.write(reinterpret_cast<const char*>(m.data()),
               static_cast<std::streamsize>(sizeof(double) * m.size()));
  };
  dump(s.mw);
  dump(s.vw);
  dump(s.mb);
  dump(s.vb);
}

void read_adam(std::istream& is, AdamState& s) {
  std::int64_t steps = 0;
  is.read(reinterpret_cast<char*>(&steps), sizeof(steps));
  s.step_count = steps;
  auto slurp = [&is](auto& seq) {
    for (auto& m : seq)
      is.read(reinterpret_cast<char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * m.size()));
  };
  slurp(s.mw);
  slurp(s.vw);
  slurp(s.mb);
  slurp(s.vb);
}

} // namespace

void DdpgLearner::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("DdpgLearner::save: cannot open " + path);
  os.write(kLearnerMagic, 8);
  os.write(reinterpret_cast<const char*>(&cfg_.state_dim), sizeof(int));
  os.write(reinterpret_cast<const char*>(&cfg_.action_dim), sizeof(int));
  os.write(reinterpret_cast<const char*>(&cfg_.action_bound), sizeof(double));
  std::int32_t nh = static_cast<std::int32_t>(cfg_.hidden.size());
  os.write(reinterpret_cast<const char*>(&nh), sizeof(nh));
  for (int h : cfg_.hidden) {
    std::int32_t v = h;
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  std::uint8_t act = static_cast<std::uint8_t>(cfg_.activation);
  std::uint8_t opt = static_cast<std::uint8_t>(cfg_.optimizer);
  os.write(reinterpret_cast<const char*>(&act), sizeof(act));
  os.write(reinterpret_cast<const char*>(&opt), sizeof(opt));
  os.write(reinterpret_cast<const char*>(&cfg_.lr_actor), sizeof(double));
  os.write(reinterpret_cast<const char*>(&cfg_.lr_critic), sizeof(double));
  os.write(reinterpret_cast<const char*>(&cfg_.gamma_rl), sizeof(double));
  os.write(reinterpret_cast<const char*>(&cfg_.tau_soft), sizeof(double));
  std::uint64_t batch = cfg_.batch, cap = cfg_.capacity;
  os.write(reinterpret_cast<const char*>(&batch), sizeof(batch));
  os.write(reinterpret_cast<const char*>(&cap), sizeof(cap));
  os.write(reinterpret_cast<const char*>(&cfg_.noise_std_frac), sizeof(double));
  save_net(os, actor_);
  save_net(os, critic_);
  save_net(os, actor_target_);
  save_net(os, critic_target_);
  write_adam(os, actor_adam_);
  write_adam(os, critic_adam_);
  std::ostringstream rng_text;
  rng_text << rng_;
  std::string rs = rng_text.str();
  std::uint64_t len = rs.size();
  os.write(reinterpret_cast<const char*>(&len), sizeof(len));
  os.write(rs.data(), static_cast<std::streamsize>(rs.size()));
  if (!os) throw std::runtime_error("DdpgLearner::save: write failed");
}

DdpgLearner DdpgLearner::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("DdpgLearner::load: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::string(magic, 8) != kLearnerMagic)
    throw std::runtime_error("DdpgLearner::load: bad checkpoint magic");
  DdpgLearner lrn;
  DdpgConfig& c = lrn.cfg_;
  is.read(reinterpret_cast<char*>(&c.state_dim), sizeof(int));
  is.read(reinterpret_cast<char*>(&c.action_dim), sizeof(int));
  is.read(reinterpret_cast<char*>(&c.action_bound), sizeof(double));
  std::int32_t nh = 0;
  is.read(reinterpret_cast<char*>(&nh), sizeof(nh));
  c.hidden.clear();
  for (std::int32_t i = 0; i < nh; ++i) {
    std::int32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    c.hidden.push_back(v);
  }
  std::uint8_t act = 0, opt = 0;
  is.read(reinterpret_cast<char*>(&act), sizeof(act));
  is.read(reinterpret_cast<char*>(&opt), sizeof(opt));
  c.activation = static_cast<Activation>(act);
  c.optimizer = static_cast<Optimizer>(opt);
  is.read(reinterpret_cast<char*>(&c.lr_actor), sizeof(double));
  is.read(reinterpret_cast<char*>(&c.lr_critic), sizeof(double));
  is.read(reinterpret_cast<char*>(&c.gamma_rl), sizeof(double));
  is.read(reinterpret_cast<char*>(&c.tau_soft), sizeof(double));
  std::uint64_t batch = 0, cap = 0;
  is.read(reinterpret_cast<char*>(&batch), sizeof(batch));
  is.read(reinterpret_cast<char*>(&cap), sizeof(cap));
  c.batch = batch;
  c.capacity = cap;
  is.read(reinterpret_cast<char*>(&c.noise_std_frac), sizeof(double));
  lrn.actor_ = load_net(is);
  lrn.critic_ = load_net(is);
  lrn.actor_target_ = load_net(is);
  lrn.critic_target_ = load_net(is);
  lrn.actor_adam_ = AdamState::zeros_like(lrn.actor_);
  lrn.critic_adam_ = AdamState::zeros_like(lrn.critic_);
  read_adam(is, lrn.actor_adam_);
  read_adam(is, lrn.critic_adam_);
  std::uint64_t len = 0;
  is.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string rs(len, '\0');
  is.read(rs.data(), static_cast<std::streamsize>(len));
  if (!is) throw std::runtime_error("DdpgLearner::load: truncated checkpoint");
  std::istringstream rng_text(rs);
  rng_text >> lrn.rng_;
  return lrn;
}

} // namespace dcp
