#include "uavnoma/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace uavnoma::rl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  slots_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (size_ < capacity_) {
    slots_.push_back(std::move(t));
    ++size_;
    return;
  }
  slots_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("ReplayBuffer::at: index out of range");
  return slots_[(head_ + i) % capacity_];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t count, Rng& rng) const {
  if (count > size_) throw std::invalid_argument("ReplayBuffer: sample larger than contents");
  std::vector<std::size_t> picked;
  picked.reserve(count);
  std::unordered_set<std::size_t> seen;
  for (std::size_t j = size_ - count; j < size_; ++j) {
    const auto t = static_cast<std::size_t>(rng.below(j + 1));
    const std::size_t choice = seen.contains(t) ? j : t;
    seen.insert(choice);
    picked.push_back(choice);
  }
  return picked;
}

double ExplorationSchedule::epsilon(std::int64_t global_step) const {
  if (global_step < 0) throw std::invalid_argument("epsilon: negative step");
  return end + (start - end) * std::exp(-static_cast<double>(global_step) / decay);
}

void ExplorationSchedule::validate() const {
  if (!(start <= 1.0 && start >= end && end >= 0.0) || !(decay > 0.0)) {
    throw std::invalid_argument("exploration: need 1 >= eps_start >= eps_end >= 0 and chi > 0");
  }
}

nn::Matrix stack_states(std::span<const env::StateVector* const> states) {
  if (states.empty()) return {};
  const std::size_t width = states.front()->size();
  nn::Matrix m(states.size(), width);
  for (std::size_t r = 0; r < states.size(); ++r) {
    if (states[r]->size() != width) throw std::invalid_argument("stack_states: ragged states");
    std::copy(states[r]->begin(), states[r]->end(), m.row(r).begin());
  }
  return m;
}

std::size_t greedy_action(const nn::NetworkParams& params, std::span<const double> state) {
  nn::Matrix s(1, state.size());
  std::copy(state.begin(), state.end(), s.data.begin());
  const nn::Matrix q = nn::q_values(params, s);
  std::size_t best = 0;
  for (std::size_t j = 1; j < q.cols; ++j) {
    if (q(0, j) > q(0, best)) best = j;
  }
  return best;
}

std::size_t select_action(const nn::NetworkParams& params, std::span<const double> state, double eps, Rng& rng) {
  if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("select_action: eps outside [0, 1]");
  if (rng.uniform() < eps) return static_cast<std::size_t>(rng.below(params.n_actions()));
  return greedy_action(params, state);
}

std::vector<double> td_targets(std::span<const Transition* const> batch, const nn::NetworkParams& target,
                               double gamma) {
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("td_targets: gamma outside [0, 1]");
  std::vector<const env::StateVector*> next;
  next.reserve(batch.size());
  for (const auto* t : batch) next.push_back(&t->next_state);
  const nn::Matrix q = nn::q_values(target, stack_states(next));
  std::vector<double> y(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto row = q.row(b);
    y[b] = batch[b]->reward + gamma * *std::max_element(row.begin(), row.end());
  }
  return y;
}

TrainStepResult train_step(nn::NetworkParams& policy, const nn::NetworkParams& target, nn::AdamState& adam,
                           const ReplayBuffer& buffer, std::size_t batch_size, double gamma, double lr, Rng& rng) {
  if (batch_size == 0 || buffer.size() < batch_size) return {};
  const auto idx = buffer.sample_indices(batch_size, rng);
  std::vector<const Transition*> batch;
  std::vector<const env::StateVector*> states;
  std::vector<std::size_t> actions;
  batch.reserve(batch_size);
  for (std::size_t i : idx) {
    const Transition& t = buffer.at(i);
    batch.push_back(&t);
    states.push_back(&t.state);
    actions.push_back(t.action);
  }
  const auto targets = td_targets(batch, target, gamma);
  auto [loss, grads] = nn::td_loss_and_gradients(policy, stack_states(states), actions, targets);
  nn::adam_step(policy, adam, grads, lr);
  return {true, loss};
}

bool maybe_sync_target(const nn::NetworkParams& policy, nn::NetworkParams& target, std::int64_t global_step,
                       std::int64_t delta_sync) {
  if (delta_sync < 1) throw std::invalid_argument("maybe_sync_target: delta must be >= 1");
  if (global_step % delta_sync != 0) return false;
  target = nn::clone_params(policy);
  return true;
}

}  // namespace uavnoma::rl
