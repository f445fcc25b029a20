#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "uavnoma/environment.hpp"
#include "uavnoma/network.hpp"
#include "uavnoma/rng.hpp"

namespace uavnoma::rl {

struct Transition {
  env::StateVector state;
  std::size_t action = 0;
  double reward = 0.0;
  env::StateVector next_state;
};

/// Bounded FIFO of transitions; once full, each push evicts the oldest.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  /// i-th oldest stored transition.
  const Transition& at(std::size_t i) const;

  /// `count` distinct logical indices, uniform without replacement (Floyd's
  /// algorithm). Requires count <= size().
  std::vector<std::size_t> sample_indices(std::size_t count, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest element once full
  std::size_t size_ = 0;
  std::vector<Transition> slots_;
};

struct ExplorationSchedule {
  double start = 0.9;
  double end = 0.1;
  double decay = 200.0;  // chi, in steps

  /// end + (start - end) exp(-global_step / decay).
  double epsilon(std::int64_t global_step) const;
  void validate() const;
};

/// Greedy index over Q, lowest index on ties.
std::size_t greedy_action(const nn::NetworkParams& params, std::span<const double> state);

/// With probability eps a uniform action, otherwise the greedy one. Draws one
/// uniform for the coin and, when exploring, one integer.
std::size_t select_action(const nn::NetworkParams& params, std::span<const double> state, double eps, Rng& rng);

/// r + gamma max_a Q'(s', a) per transition, Q' from the target network.
std::vector<double> td_targets(std::span<const Transition* const> batch, const nn::NetworkParams& target,
                               double gamma);

struct TrainStepResult {
  bool trained = false;  // false: fewer than batch_size transitions stored
  double loss = 0.0;
};

/// Samples a mini-batch, regresses Q(s, a) onto the TD targets with one Adam
/// step. The target network is read only.
TrainStepResult train_step(nn::NetworkParams& policy, const nn::NetworkParams& target, nn::AdamState& adam,
                           const ReplayBuffer& buffer, std::size_t batch_size, double gamma, double lr, Rng& rng);

/// Copies policy into target when global_step is a multiple of delta_sync
/// (including 0). Returns whether it synced.
bool maybe_sync_target(const nn::NetworkParams& policy, nn::NetworkParams& target, std::int64_t global_step,
                       std::int64_t delta_sync);

/// Stacks state vectors into a batch matrix.
nn::Matrix stack_states(std::span<const env::StateVector* const> states);

}  // namespace uavnoma::rl
