#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace uavnoma::nn {

/// Row-major dense matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

enum class Head { Dueling, Vanilla };

/// Weights are stored in x out, row-major.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  bool operator==(const DenseLayer&) const = default;
};

/// Two ReLU hidden layers followed by either a value head and an advantage
/// head (Dueling) or a single Q head (Vanilla).
///
/// layers[0], layers[1]: hidden; Dueling: layers[2] value (-> 1),
/// layers[3] advantage (-> n_actions); Vanilla: layers[2] Q (-> n_actions).
/// Gradients and Adam moments reuse this type.
struct NetworkParams {
  Head head = Head::Dueling;
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.front().in; }
  std::size_t hidden_width() const { return layers.front().out; }
  std::size_t n_actions() const { return layers.back().out; }
  std::size_t parameter_count() const;

  bool operator==(const NetworkParams&) const = default;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights drawn layer by layer in
/// storage order from Rng(seed); zero biases.
NetworkParams init_network(std::size_t input_dim, std::size_t n_actions, Head head, std::uint64_t seed,
                           std::size_t hidden = 128);

/// Same shapes, all zeros.
NetworkParams zeros_like(const NetworkParams& params);

NetworkParams clone_params(const NetworkParams& params);

/// Activations of one forward pass; kept whole because backprop needs them.
struct ForwardPass {
  Matrix hidden1;
  Matrix hidden2;
  Matrix value;  // batch x 1, empty for Vanilla
  Matrix heads;  // advantage (Dueling) or Q (Vanilla), batch x n_actions
};

ForwardPass forward(const NetworkParams& params, const Matrix& states);

/// Q = V + A - mean_a(A), row by row.
Matrix aggregate_q(const Matrix& value, const Matrix& advantage);

/// Q for either head type.
Matrix q_values(const NetworkParams& params, const Matrix& states);
Matrix q_values(const ForwardPass& pass, Head head);

struct LossAndGradients {
  double loss = 0.0;
  NetworkParams gradients;
};

/// Mean over the batch of (target - Q(s, a_taken))^2 and its exact gradient.
LossAndGradients td_loss_and_gradients(const NetworkParams& params, const Matrix& states,
                                       std::span<const std::size_t> actions, std::span<const double> targets);

struct AdamState {
  NetworkParams first_moment;
  NetworkParams second_moment;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_params(const NetworkParams& params);
};

/// One bias-corrected Adam update. Throws on non-finite gradients.
void adam_step(NetworkParams& params, AdamState& state, const NetworkParams& gradients, double lr);

/// FNV-1a over the checkpoint encoding.
std::uint64_t checksum(const NetworkParams& params);

// Checkpoint: "UAVNOMAQ", u32 version, u32 head, u32 layer count, then per
// layer u64 in, u64 out, in*out weights and out biases as little-endian
// IEEE-754 doubles.
void write_checkpoint(std::ostream& out, const NetworkParams& params);
NetworkParams read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const NetworkParams& params);
NetworkParams load_checkpoint(const std::filesystem::path& path);

}  // namespace uavnoma::nn
