#include "dcp/neural.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace dcp {

bool AgentNet::finite() const {
  for (const auto& w : weights)
    if (!w.allFinite()) return false;
  for (const auto& b : biases)
    if (!b.allFinite()) return false;
  return true;
}

GradBuffer GradBuffer::zeros_like(const AgentNet& net) {
  GradBuffer g;
  for (const auto& w : net.weights) g.dweights.push_back(Matrix::Zero(w.rows(), w.cols()));
  for (const auto& b : net.biases) g.dbiases.push_back(Vector::Zero(b.size()));
  return g;
}

void GradBuffer::scale(double s) {
  for (auto& w : dweights) w *= s;
  for (auto& b : dbiases) b *= s;
}

void GradBuffer::add(const GradBuffer& other, double s) {
  for (std::size_t l = 0; l < dweights.size(); ++l) {
    dweights[l] += s * other.dweights[l];
    dbiases[l] += s * other.dbiases[l];
  }
}

bool GradBuffer::finite() const {
  for (const auto& w : dweights)
    if (!w.allFinite()) return false;
  for (const auto& b : dbiases)
    if (!b.allFinite()) return false;
  return true;
}

AgentNet make_net(const std::vector<int>& layer_sizes, Activation act,
                  OutputHead head, double head_gain, std::mt19937_64& rng,
                  double final_layer_scale) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("make_net: need at least input and output layer");
  AgentNet net;
  net.layer_sizes = layer_sizes;
  net.activation = act;
  net.head = head;
  net.head_gain = head_gain;
  const std::size_t nl = layer_sizes.size() - 1;
  for (std::size_t l = 0; l < nl; ++l) {
    int fan_in = layer_sizes[l];
    int fan_out = layer_sizes[l + 1];
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    if (l == nl - 1) bound *= final_layer_scale;
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix w(fan_out, fan_in);
    for (Index r = 0; r < w.rows(); ++r)
      for (Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Vector::Zero(fan_out));
  }
  return net;
}

namespace {

Matrix hidden_forward(Activation act, const Matrix& pre) {
  switch (act) {
    case Activation::relu: return pre.cwiseMax(0.0);
    case Activation::tanh_act: return pre.array().tanh().matrix();
  }
  throw std::logic_error("unknown activation");
}

Matrix hidden_derivative(Activation act, const Matrix& pre) {
  switch (act) {
    case Activation::relu:
      return (pre.array() > 0.0).cast<double>().matrix();
    case Activation::tanh_act: {
      Matrix t = pre.array().tanh().matrix();
      return (1.0 - t.array().square()).matrix();
    }
  }
  throw std::logic_error("unknown activation");
}

} // namespace

Matrix forward(const AgentNet& net, const Matrix& input, ForwardTrace& trace) {
  if (input.rows() != net.input_dim())
    throw std::invalid_argument("forward: input dimension mismatch");
  trace.acts.clear();
  trace.pres.clear();
  trace.acts.push_back(input);
  const std::size_t nl = net.weights.size();
  Matrix a = input;
  for (std::size_t l = 0; l < nl; ++l) {
    Matrix pre = (net.weights[l] * a).colwise() + net.biases[l];
    trace.pres.push_back(pre);
    if (l + 1 < nl)
      a = hidden_forward(net.activation, pre);
    else if (net.head == OutputHead::bounded)
      a = net.head_gain * pre.array().tanh().matrix();
    else
      a = pre;
    trace.acts.push_back(a);
  }
  return a;
}

Matrix forward(const AgentNet& net, const Matrix& input) {
  ForwardTrace trace;
  return forward(net, input, trace);
}

Vector forward(const AgentNet& net, const Vector& input) {
  return forward(net, Matrix(input)).col(0);
}

GradBuffer backward(const AgentNet& net, const ForwardTrace& trace,
                    const Matrix& upstream, Matrix& input_grad) {
  const std::size_t nl = net.weights.size();
  if (upstream.rows() != net.output_dim() ||
      upstream.cols() != trace.acts[0].cols())
    throw std::invalid_argument("backward: upstream shape mismatch");
  GradBuffer g;
  g.dweights.resize(nl);
  g.dbiases.resize(nl);

  Matrix delta = upstream;
  if (net.head == OutputHead::bounded) {
    // d/dy G*tanh(y) = G*(1 - tanh^2 y)
    Matrix t = trace.pres.back().array().tanh().matrix();
    delta = (upstream.array() * (net.head_gain * (1.0 - t.array().square())))
                .matrix();
  }
  for (std::size_t l = nl; l-- > 0;) {
    g.dweights[l] = delta * trace.acts[l].transpose();
    g.dbiases[l] = delta.rowwise().sum();
    Matrix back = net.weights[l].transpose() * delta;
    if (l > 0)
      delta = (back.array() *
               hidden_derivative(net.activation, trace.pres[l - 1]).array())
                  .matrix();
    else
      input_grad = back;
  }
  return g;
}

GradBuffer backward(const AgentNet& net, const Matrix& input,
                    const Matrix& upstream, Matrix& input_grad) {
  ForwardTrace trace;
  forward(net, input, trace);
  return backward(net, trace, upstream, input_grad);
}

bool sgd_step(AgentNet& net, const GradBuffer& grads, double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("sgd_step: lr must be > 0");
  if (!grads.finite()) return false;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    net.weights[l] -= lr * grads.dweights[l];
    net.biases[l] -= lr * grads.dbiases[l];
  }
  return true;
}

AdamState AdamState::zeros_like(const AgentNet& net) {
  AdamState s;
  for (const auto& w : net.weights) {
    s.mw.push_back(Matrix::Zero(w.rows(), w.cols()));
    s.vw.push_back(Matrix::Zero(w.rows(), w.cols()));
  }
  for (const auto& b : net.biases) {
    s.mb.push_back(Vector::Zero(b.size()));
    s.vb.push_back(Vector::Zero(b.size()));
  }
  return s;
}

bool adam_step(AgentNet& net, AdamState& state, const GradBuffer& grads,
               double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("adam_step: lr must be > 0");
  if (!grads.finite()) return false;
  state.step_count += 1;
  double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    state.mw[l] = state.beta1 * state.mw[l] + (1.0 - state.beta1) * grads.dweights[l];
    state.vw[l] = state.beta2 * state.vw[l] +
                  (1.0 - state.beta2) * grads.dweights[l].array().square().matrix();
    net.weights[l].array() -= lr * (state.mw[l].array() / c1) /
                              ((state.vw[l].array() / c2).sqrt() + state.eps);
    state.mb[l] = state.beta1 * state.mb[l] + (1.0 - state.beta1) * grads.dbiases[l];
    state.vb[l] = state.beta2 * state.vb[l] +
                  (1.0 - state.beta2) * grads.dbiases[l].array().square().matrix();
    net.biases[l].array() -= lr * (state.mb[l].array() / c1) /
                             ((state.vb[l].array() / c2).sqrt() + state.eps);
  }
  return true;
}

namespace {
constexpr char kNetMagic[9] = "DCPNNET1";
}

void save_net(std::ostream& os, const AgentNet& net) {
  os.write(kNetMagic, 8);
  std::int32_t n = static_cast<std::int32_t>(net.layer_sizes.size());
  os.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (int s : net.layer_sizes) {
    std::int32_t v = s;
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  std::uint8_t act = static_cast<std::uint8_t>(net.activation);
  std::uint8_t head = static_cast<std::uint8_t>(net.head);
  os.write(reinterpret_cast<const char*>(&act), sizeof(act));
  os.write(reinterpret_cast<const char*>(&head), sizeof(head));
  os.write(reinterpret_cast<const char*>(&net.head_gain), sizeof(double));
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    os.write(reinterpret_cast<const char*>(net.weights[l].data()),
             static_cast<std::streamsize>(sizeof(double) * net.weights[l].size()));
    os.write(reinterpret_cast<const char*>(net.biases[l].data()),
             static_cast<std::streamsize>(sizeof(double) * net.biases[l].size()));
  }
}

AgentNet load_net(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::string(magic, 8) != kNetMagic)
    throw std::runtime_error("load_net: bad checkpoint magic");
  std::int32_t n = 0;
  is.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!is || n < 2) throw std::runtime_error("load_net: bad layer count");
  AgentNet net;
  for (std::int32_t i = 0; i < n; ++i) {
    std::int32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    net.layer_sizes.push_back(v);
  }
  std::uint8_t act = 0, head = 0;
  is.read(reinterpret_cast<char*>(&act), sizeof(act));
  is.read(reinterpret_cast<char*>(&head), sizeof(head));
  is.read(reinterpret_cast<char*>(&net.head_gain), sizeof(double));
  net.activation = static_cast<Activation>(act);
  net.head = static_cast<OutputHead>(head);
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    Matrix w(net.layer_sizes[l + 1], net.layer_sizes[l]);
    Vector b(net.layer_sizes[l + 1]);
    is.read(reinterpret_cast<char*>(w.data()),
            static_cast<std::streamsize>(sizeof(double) * w.size()));
    is.read(reinterpret_cast<char*>(b.data()),
            static_cast<std::streamsize>(sizeof(double) * b.size()));
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  if (!is) throw std::runtime_error("load_net: truncated checkpoint");
  return net;
}

void save_net(const std::string& path, const AgentNet& net) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_net: cannot open " + path);
  save_net(os, net);
}

AgentNet load_net(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_net: cannot open " + path);
  return load_net(is);
}

} // namespace dcp
