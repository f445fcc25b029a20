#include "uavnoma/network.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "uavnoma/kernels.hpp"
#include "uavnoma/rng.hpp"

namespace uavnoma::nn {

namespace {

constexpr char kMagic[8] = {'U', 'A', 'V', 'N', 'O', 'M', 'A', 'Q'};
constexpr std::uint32_t kVersion = 1;

DenseLayer make_layer(std::size_t in, std::size_t out) {
  DenseLayer l;
  l.in = in;
  l.out = out;
  l.weights.assign(in * out, 0.0);
  l.bias.assign(out, 0.0);
  return l;
}

kernels::Shape shape_of(const DenseLayer& l, std::size_t batch) { return {batch, l.in, l.out}; }

Matrix dense(const DenseLayer& l, const Matrix& x, bool relu) {
  Matrix y(x.rows, l.out);
  kernels::omp::dense_forward(x.data, l.weights, l.bias, y.data, shape_of(l, x.rows), relu);
  return y;
}

void backprop_layer(const DenseLayer& l, const Matrix& x, const Matrix& dy, DenseLayer& grad) {
  kernels::omp::dense_grad_params(x.data, dy.data, grad.weights, grad.bias, shape_of(l, x.rows));
}

Matrix input_grad(const DenseLayer& l, const Matrix& dy) {
  Matrix dx(dy.rows, l.in);
  kernels::omp::dense_grad_input(dy.data, l.weights, dx.data, shape_of(l, dy.rows));
  return dx;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_bytes(std::istream& in, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw std::runtime_error("checkpoint: truncated file");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

}  // namespace

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

NetworkParams init_network(std::size_t input_dim, std::size_t n_actions, Head head, std::uint64_t seed,
                           std::size_t hidden) {
  if (input_dim == 0 || n_actions == 0 || hidden == 0) {
    throw std::invalid_argument("init_network: dimensions must be >= 1");
  }
  NetworkParams p;
  p.head = head;
  p.layers.push_back(make_layer(input_dim, hidden));
  p.layers.push_back(make_layer(hidden, hidden));
  if (head == Head::Dueling) p.layers.push_back(make_layer(hidden, 1));
  p.layers.push_back(make_layer(hidden, n_actions));

  Rng rng(seed);
  for (auto& l : p.layers) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(l.in));
    for (double& w : l.weights) w = (2.0 * rng.uniform() - 1.0) * scale;
  }
  return p;
}

NetworkParams zeros_like(const NetworkParams& params) {
  NetworkParams z;
  z.head = params.head;
  for (const auto& l : params.layers) z.layers.push_back(make_layer(l.in, l.out));
  return z;
}

NetworkParams clone_params(const NetworkParams& params) { return params; }

ForwardPass forward(const NetworkParams& params, const Matrix& states) {
  if (states.cols != params.input_dim()) {
    throw std::invalid_argument("forward: state width " + std::to_string(states.cols) +
                                " does not match network input dim " + std::to_string(params.input_dim()));
  }
  ForwardPass pass;
  pass.hidden1 = dense(params.layers[0], states, true);
  pass.hidden2 = dense(params.layers[1], pass.hidden1, true);
  if (params.head == Head::Dueling) {
    pass.value = dense(params.layers[2], pass.hidden2, false);
    pass.heads = dense(params.layers[3], pass.hidden2, false);
  } else {
    pass.heads = dense(params.layers[2], pass.hidden2, false);
  }
  return pass;
}

Matrix aggregate_q(const Matrix& value, const Matrix& advantage) {
  if (value.rows != advantage.rows || value.cols != 1) {
    throw std::invalid_argument("aggregate_q: value must be batch x 1 matching the advantage batch");
  }
  Matrix q(advantage.rows, advantage.cols);
  for (std::size_t r = 0; r < advantage.rows; ++r) {
    double mean = 0.0;
    for (double a : advantage.row(r)) mean += a;
    mean /= static_cast<double>(advantage.cols);
    for (std::size_t j = 0; j < advantage.cols; ++j) q(r, j) = value(r, 0) + advantage(r, j) - mean;
  }
  return q;
}

Matrix q_values(const ForwardPass& pass, Head head) {
  return head == Head::Dueling ? aggregate_q(pass.value, pass.heads) : pass.heads;
}

Matrix q_values(const NetworkParams& params, const Matrix& states) {
  return q_values(forward(params, states), params.head);
}

LossAndGradients td_loss_and_gradients(const NetworkParams& params, const Matrix& states,
                                       std::span<const std::size_t> actions, std::span<const double> targets) {
  const std::size_t batch = states.rows;
  if (actions.size() != batch || targets.size() != batch) {
    throw std::invalid_argument("td_loss_and_gradients: batch sizes disagree");
  }
  const std::size_t n = params.n_actions();
  for (std::size_t a : actions) {
    if (a >= n) throw std::out_of_range("td_loss_and_gradients: action index out of range");
  }
  const ForwardPass pass = forward(params, states);
  const Matrix q = q_values(pass, params.head);

  LossAndGradients out;
  out.gradients = zeros_like(params);
  Matrix d_heads(batch, n);
  Matrix d_value(batch, params.head == Head::Dueling ? 1 : 0);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t b = 0; b < batch; ++b) {
    if (!std::isfinite(targets[b])) throw std::domain_error("td_loss_and_gradients: non-finite target");
    const double err = q(b, actions[b]) - targets[b];
    out.loss += err * err;
    const double g = 2.0 * err / static_cast<double>(batch);
    if (params.head == Head::Dueling) {
      d_value(b, 0) = g;
      for (std::size_t j = 0; j < n; ++j) d_heads(b, j) = -g * inv_n;
      d_heads(b, actions[b]) += g;
    } else {
      d_heads(b, actions[b]) = g;
    }
  }
  out.loss /= static_cast<double>(batch);

  auto& grads = out.gradients.layers;
  Matrix d_hidden2;
  if (params.head == Head::Dueling) {
    backprop_layer(params.layers[2], pass.hidden2, d_value, grads[2]);
    backprop_layer(params.layers[3], pass.hidden2, d_heads, grads[3]);
    d_hidden2 = input_grad(params.layers[3], d_heads);
    const Matrix from_value = input_grad(params.layers[2], d_value);
    for (std::size_t i = 0; i < d_hidden2.data.size(); ++i) d_hidden2.data[i] += from_value.data[i];
  } else {
    backprop_layer(params.layers[2], pass.hidden2, d_heads, grads[2]);
    d_hidden2 = input_grad(params.layers[2], d_heads);
  }
  kernels::relu_mask(pass.hidden2.data, d_hidden2.data);
  backprop_layer(params.layers[1], pass.hidden1, d_hidden2, grads[1]);
  Matrix d_hidden1 = input_grad(params.layers[1], d_hidden2);
  kernels::relu_mask(pass.hidden1.data, d_hidden1.data);
  backprop_layer(params.layers[0], states, d_hidden1, grads[0]);
  return out;
}

AdamState AdamState::for_params(const NetworkParams& params) {
  AdamState s;
  s.first_moment = zeros_like(params);
  s.second_moment = zeros_like(params);
  return s;
}

void adam_step(NetworkParams& params, AdamState& state, const NetworkParams& gradients, double lr) {
  if (gradients.layers.size() != params.layers.size() || state.first_moment.layers.size() != params.layers.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  for (const auto& l : gradients.layers) {
    for (double g : l.weights) {
      if (!std::isfinite(g)) throw std::domain_error("adam_step: non-finite gradient");
    }
    for (double g : l.bias) {
      if (!std::isfinite(g)) throw std::domain_error("adam_step: non-finite gradient");
    }
  }
  ++state.step;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    if (p.size() != g.size() || p.size() != m.size()) throw std::invalid_argument("adam_step: shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  };
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    auto& l = params.layers[k];
    update(l.weights, gradients.layers[k].weights, state.first_moment.layers[k].weights,
           state.second_moment.layers[k].weights);
    update(l.bias, gradients.layers[k].bias, state.first_moment.layers[k].bias, state.second_moment.layers[k].bias);
  }
}

void write_checkpoint(std::ostream& out, const NetworkParams& params) {
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kVersion);
  put_u32(out, params.head == Head::Dueling ? 0 : 1);
  put_u32(out, static_cast<std::uint32_t>(params.layers.size()));
  for (const auto& l : params.layers) {
    put_u64(out, l.in);
    put_u64(out, l.out);
    for (double w : l.weights) put_u64(out, std::bit_cast<std::uint64_t>(w));
    for (double b : l.bias) put_u64(out, std::bit_cast<std::uint64_t>(b));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

NetworkParams read_checkpoint(std::istream& in) {
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::string(magic, sizeof magic) != std::string(kMagic, sizeof kMagic)) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  const auto version = static_cast<std::uint32_t>(get_bytes(in, 4));
  if (version != kVersion) throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  const auto head = static_cast<std::uint32_t>(get_bytes(in, 4));
  if (head > 1) throw std::runtime_error("checkpoint: unknown head type");
  const auto count = static_cast<std::uint32_t>(get_bytes(in, 4));
  NetworkParams p;
  p.head = head == 0 ? Head::Dueling : Head::Vanilla;
  if (count != (p.head == Head::Dueling ? 4U : 3U)) throw std::runtime_error("checkpoint: wrong layer count");
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto in_dim = get_bytes(in, 8);
    const auto out_dim = get_bytes(in, 8);
    if (in_dim == 0 || out_dim == 0 || in_dim > (1U << 20) || out_dim > (1U << 20)) {
      throw std::runtime_error("checkpoint: implausible layer shape");
    }
    DenseLayer l = make_layer(in_dim, out_dim);
    for (double& w : l.weights) w = std::bit_cast<double>(get_bytes(in, 8));
    for (double& b : l.bias) b = std::bit_cast<double>(get_bytes(in, 8));
    if (k > 0 && p.layers.size() >= 2 && l.in != p.layers[1].out) {
      throw std::runtime_error("checkpoint: layer shapes do not chain");
    }
    if (k == 1 && l.in != p.layers[0].out) throw std::runtime_error("checkpoint: layer shapes do not chain");
    p.layers.push_back(std::move(l));
  }
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const NetworkParams& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
  write_checkpoint(out, params);
}

NetworkParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  return read_checkpoint(in);
}

std::uint64_t checksum(const NetworkParams& params) {
  std::ostringstream buf(std::ios::binary);
  write_checkpoint(buf, params);
  return fnv1a64(buf.str());
}

}  // namespace uavnoma::nn
