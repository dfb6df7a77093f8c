#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "absa/tensor.hpp"

namespace absa {

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  long step_count = 0;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected Adam update in place. Moment buffers are sized on the
// first call; a later length mismatch is rejected.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

// Tracks one AdamState per registered parameter tensor. A step over a subset
// advances only that subset's step counts; untouched parameters keep their
// values and moments bitwise intact.
class Adam {
 public:
  Adam(std::vector<Tensor> params, double learning_rate);

  void step();                                   // update every registered parameter
  void step(const std::vector<Tensor>& subset);  // update only these (must be registered)
  void zero_grad();                              // clear grads of every registered parameter

  const AdamState& state_for(const Tensor& param) const;

 private:
  std::vector<Tensor> params_;
  std::vector<AdamState> states_;
  std::unordered_map<const TensorNode*, std::size_t> index_;
};

}  // namespace absa
