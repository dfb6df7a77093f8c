#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "absa/rng.hpp"

namespace absa {

// Row-major dense shapes of rank 1 or 2. Scalars use shape {1}.
using Shape = std::vector<int>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

struct TensorNode {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated on demand, same extent as value
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  // Accumulates this node's grad into the parents' grads. Captures raw
  // parent pointers; the parents vector above keeps them alive.
  std::function<void()> backprop;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

// Value-semantic handle to a node of the computation graph. Copies alias the
// same storage. Graphs are built eagerly by the free-function ops below and
// freed when the last handle to a node goes away; leaf parameters outlive
// the per-step graphs that reference them.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double v, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor uniform(Shape shape, double lo, double hi, Rng& rng, bool requires_grad = false);
  // Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
  static Tensor glorot(Shape shape, int fan_in, int fan_out, Rng& rng);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t size() const { return node_->value.size(); }
  int rows() const;
  int cols() const;

  std::span<double> data() { return node_->value; }
  std::span<const double> data() const { return node_->value; }
  bool has_grad() const { return node_ && !node_->grad.empty(); }
  std::span<double> grad();
  std::span<const double> grad() const;

  double item() const;
  double at(int i) const;
  double at(int i, int j) const;

  bool requires_grad() const { return node_ && node_->requires_grad; }
  void zero_grad();

  // Reverse-mode sweep from a scalar. Gradients accumulate into the .grad of
  // every requires_grad ancestor. One sweep per graph: rebuild the graph for
  // another pass, and clear leaf grads between steps via zero_grad().
  void backward();

  const std::shared_ptr<TensorNode>& node() const { return node_; }

 private:
  std::shared_ptr<TensorNode> node_;
};

// ---- primitive ops (all differentiable unless noted) ----

// Same-shape elementwise sum, or bias broadcast: [n,m] + [m].
Tensor add(const Tensor& a, const Tensor& b);
Tensor add_n(const std::vector<Tensor>& ts);
// Same-shape elementwise product.
Tensor mul(const Tensor& a, const Tensor& b);
// Scales column j of x [n,m] by v[j].
Tensor mul_rowvec(const Tensor& x, const Tensor& v);
Tensor scale(const Tensor& a, double c);
Tensor matmul(const Tensor& a, const Tensor& b);  // [n,k] x [k,m]
Tensor transpose(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);
Tensor concat_cols(const std::vector<Tensor>& xs);  // common row count
Tensor slice_cols(const Tensor& a, int c0, int c1);
Tensor broadcast_rows(const Tensor& v, int n);  // [m] -> [n,m]
Tensor sum_all(const Tensor& a);                // -> {1}
// Mean over rows i with mask[i] != 0; x is [n,m] -> [m]. No selected row -> error.
Tensor masked_mean_rows(const Tensor& x, const std::vector<std::uint8_t>& mask);

// Same-length 1D convolution over a sequence x [n,d]. weight is [k*d, f]
// laid out offset-major (row o*d+c = input channel c at kernel offset o),
// bias is [f], k odd. Positions outside the sequence read as zero.
Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, int kernel);

// Softmax over a rank-1 tensor; entries listed in `exclude` are forced to
// exactly 0 and left out of the normalization. All excluded -> error.
Tensor softmax(const Tensor& logits, const std::vector<int>& exclude = {});
// Independent softmax per row of [n,C].
Tensor row_softmax(const Tensor& x);
// Row softmax of a square matrix with the diagonal excluded (zero). n >= 2.
Tensor offdiag_row_softmax(const Tensor& x);

// -log(max(pred[gold], 1e-12)) for a rank-1 probability vector.
Tensor cross_entropy(const Tensor& pred, int gold);
Tensor cross_entropy(const Tensor& pred, const Tensor& gold_onehot);
// Sum of per-row cross-entropy over rows with include[i] != 0; probs [n,C].
Tensor nll_rows(const Tensor& probs, const std::vector<int>& gold,
                const std::vector<std::uint8_t>& include);

// Train mode: Bernoulli keep-mask with probability 1-p, kept values scaled
// by 1/(1-p); a fresh mask per call. Eval mode: identity (same handle).
Tensor dropout(const Tensor& x, double p, bool train, Rng& rng);

// Gathers rows of table [V,d] -> [n,d]. Gradients flow into the gathered
// rows only.
Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids);

// Floor used by cross_entropy before taking the log.
inline constexpr double kLogFloor = 1e-12;

}  // namespace absa
