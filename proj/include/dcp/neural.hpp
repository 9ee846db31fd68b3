#pragma once

#include <random>
#include <string>
#include <vector>

#include "dcp/types.hpp"

namespace dcp {

enum class Activation { relu, tanh_act };
enum class OutputHead { linear, bounded }; // bounded: gain * tanh(y)

/// Parameter container for one feed-forward network (actor or critic).
/// weights[l] is (layer_sizes[l+1] x layer_sizes[l]).
struct AgentNet {
  std::vector<int> layer_sizes;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Activation activation = Activation::relu;
  OutputHead head = OutputHead::linear;
  double head_gain = 1.0; // G for the bounded head

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  bool finite() const;
};

/// Gradient accumulators, shape-congruent with an AgentNet.
struct GradBuffer {
  std::vector<Matrix> dweights;
  std::vector<Vector> dbiases;

  static GradBuffer zeros_like(const AgentNet& net);
  void scale(double s);
  void add(const GradBuffer& other, double s = 1.0);
  bool finite() const;
};

/// Uniform +-1/sqrt(fan_in) init; the final layer is additionally scaled by
/// final_layer_scale (near-zero initial actor output is standard practice).
AgentNet make_net(const std::vector<int>& layer_sizes, Activation act,
                  OutputHead head, double head_gain, std::mt19937_64& rng,
                  double final_layer_scale = 1.0);

/// Cached activations from a forward pass, needed by backward.
struct ForwardTrace {
  std::vector<Matrix> acts; // acts[0] = input, post-activation per layer
  std::vector<Matrix> pres; // pre-activations per layer
};

/// Batched forward pass; columns of input are samples.
Matrix forward(const AgentNet& net, const Matrix& input);
Matrix forward(const AgentNet& net, const Matrix& input, ForwardTrace& trace);
Vector forward(const AgentNet& net, const Vector& input);

/// Exact reverse-mode gradients. upstream is d(objective)/d(output), one
/// column per sample; input_grad (same shape as input) is also produced.
GradBuffer backward(const AgentNet& net, const ForwardTrace& trace,
                    const Matrix& upstream, Matrix& input_grad);
GradBuffer backward(const AgentNet& net, const Matrix& input,
                    const Matrix& upstream, Matrix& input_grad);

/// Plain step: params -= lr * grad. Returns false (and leaves the net
/// untouched) when the gradients are not finite.
bool sgd_step(AgentNet& net, const GradBuffer& grads, double lr);

/// Adaptive-moment optimizer state for one AgentNet.
struct AdamState {
  std::vector<Matrix> mw, vw;
  std::vector<Vector> mb, vb;
  long step_count = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  static AdamState zeros_like(const AgentNet& net);
};

bool adam_step(AgentNet& net, AdamState& state, const GradBuffer& grads,
               double lr);

/// Versioned flat binary checkpoint; round-trips bit-exactly.
void save_net(std::ostream& os, const AgentNet& net);
AgentNet load_net(std::istream& is);
void save_net(const std::string& path, const AgentNet& net);
AgentNet load_net(const std::string& path);

} // namespace dcp
