#include "absa/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace absa {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (params.size() != grads.size())
    throw std::invalid_argument("adam_step: parameter/gradient size mismatch (" + std::to_string(params.size()) +
                                " vs " + std::to_string(grads.size()) + ")");
  if (state.first_moment.empty()) {
    state.first_moment.assign(params.size(), 0.0);
    state.second_moment.assign(params.size(), 0.0);
  }
  if (state.first_moment.size() != params.size())
    throw std::invalid_argument("adam_step: state sized for " + std::to_string(state.first_moment.size()) +
                                " parameters, got " + std::to_string(params.size()));

  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    params[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
  }
}

Adam::Adam(std::vector<Tensor> params, double learning_rate) : params_(std::move(params)) {
  states_.resize(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].defined() || !params_[i].requires_grad())
      throw std::invalid_argument("Adam: all registered tensors must require grad");
    states_[i].learning_rate = learning_rate;
    index_[params_[i].node().get()] = i;
  }
}

void Adam::step() { step(params_); }

void Adam::step(const std::vector<Tensor>& subset) {
  for (const auto& p : subset) {
    auto it = index_.find(p.node().get());
    if (it == index_.end()) throw std::invalid_argument("Adam::step: tensor was not registered");
    Tensor t = params_[it->second];
    adam_step(t.data(), t.grad(), states_[it->second]);
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

const AdamState& Adam::state_for(const Tensor& param) const {
  auto it = index_.find(param.node().get());
  if (it == index_.end()) throw std::invalid_argument("Adam::state_for: tensor was not registered");
  return states_[it->second];
}

}  // namespace absa
