#include "absa/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace absa {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("negative dimension in shape " + shape_str(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << "]";
  return os.str();
}

namespace {

std::shared_ptr<TensorNode> new_node(Shape shape, std::vector<double> value,
                                     std::vector<std::shared_ptr<TensorNode>> parents,
                                     bool requires_grad) {
  auto n = std::make_shared<TensorNode>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->parents = std::move(parents);
  n->requires_grad = requires_grad;
  return n;
}

bool any_grad(const std::vector<Tensor>& ts) {
  for (const auto& t : ts)
    if (t.requires_grad()) return true;
  return false;
}

void check_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw std::invalid_argument(std::string(op) + ": undefined tensor");
}

void check_rank2(const Tensor& t, const char* op) {
  if (t.shape().size() != 2)
    throw std::invalid_argument(std::string(op) + ": expected rank-2 tensor, got " + shape_str(t.shape()));
}

}  // namespace

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const std::size_t n = shape_size(shape);
  return Tensor(new_node(std::move(shape), std::vector<double>(n, 0.0), {}, requires_grad));
}

Tensor Tensor::full(Shape shape, double v, bool requires_grad) {
  const std::size_t n = shape_size(shape);
  return Tensor(new_node(std::move(shape), std::vector<double>(n, v), {}, requires_grad));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape_size(shape) != data.size())
    throw std::invalid_argument("from_data: shape " + shape_str(shape) + " does not match data length " +
                                std::to_string(data.size()));
  return Tensor(new_node(std::move(shape), std::move(data), {}, requires_grad));
}

Tensor Tensor::uniform(Shape shape, double lo, double hi, Rng& rng, bool requires_grad) {
  const std::size_t n = shape_size(shape);
  std::vector<double> data(n);
  for (auto& v : data) v = rng.uniform(lo, hi);
  return Tensor(new_node(std::move(shape), std::move(data), {}, requires_grad));
}

Tensor Tensor::glorot(Shape shape, int fan_in, int fan_out, Rng& rng) {
  if (fan_in <= 0 || fan_out <= 0) throw std::invalid_argument("glorot: fans must be positive");
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  return uniform(std::move(shape), -a, a, rng, true);
}

int Tensor::rows() const {
  check_rank2(*this, "rows");
  return node_->shape[0];
}

int Tensor::cols() const {
  check_rank2(*this, "cols");
  return node_->shape[1];
}

std::span<double> Tensor::grad() {
  node_->ensure_grad();
  return node_->grad;
}

std::span<const double> Tensor::grad() const {
  if (node_->grad.empty()) throw std::logic_error("grad(): no gradient populated");
  return node_->grad;
}

double Tensor::item() const {
  if (!node_ || node_->value.size() != 1)
    throw std::invalid_argument("item(): tensor is not a scalar");
  return node_->value[0];
}

double Tensor::at(int i) const {
  if (node_->shape.size() != 1) throw std::invalid_argument("at(i): tensor is not rank-1");
  return node_->value.at(static_cast<std::size_t>(i));
}

double Tensor::at(int i, int j) const {
  check_rank2(*this, "at");
  const int m = node_->shape[1];
  return node_->value.at(static_cast<std::size_t>(i) * m + j);
}

void Tensor::zero_grad() {
  if (node_) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::backward() {
  if (!node_ || node_->value.size() != 1)
    throw std::invalid_argument("backward(): loss must be a scalar tensor");
  if (!node_->requires_grad)
    throw std::invalid_argument("backward(): loss does not depend on any tracked tensor");

  // Iterative post-order over the requires_grad subgraph.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> visited;
  std::vector<std::pair<TensorNode*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    bool descended = false;
    while (next < node->parents.size()) {
      TensorNode* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) {
        stack.emplace_back(p, 0);
        descended = true;
        break;
      }
    }
    if (!descended && next >= node->parents.size()) {
      order.push_back(node);
      stack.pop_back();
    }
  }

  node_->ensure_grad();
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backprop) (*it)->backprop();
  }
}

// ---------------------------------------------------------------------------
// ops
// ---------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  check_defined(a, "add");
  check_defined(b, "add");
  const bool bias_bcast = a.shape().size() == 2 && b.shape().size() == 1 && a.cols() == b.shape()[0];
  if (!bias_bcast && a.shape() != b.shape())
    throw std::invalid_argument("add: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));

  std::vector<double> out(a.size());
  const auto av = a.data();
  const auto bv = b.data();
  if (bias_bcast) {
    const int n = a.rows(), m = a.cols();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) out[static_cast<std::size_t>(i) * m + j] = av[static_cast<std::size_t>(i) * m + j] + bv[j];
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  }

  const bool rg = a.requires_grad() || b.requires_grad();
  auto node = new_node(a.shape(), std::move(out), {a.node(), b.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* an = a.node().get();
    TensorNode* bn = b.node().get();
    node->backprop = [o, an, bn, bias_bcast]() {
      if (an->requires_grad) {
        an->ensure_grad();
        for (std::size_t i = 0; i < o->grad.size(); ++i) an->grad[i] += o->grad[i];
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        if (bias_bcast) {
          const std::size_t m = bn->value.size();
          for (std::size_t i = 0; i < o->grad.size(); ++i) bn->grad[i % m] += o->grad[i];
        } else {
          for (std::size_t i = 0; i < o->grad.size(); ++i) bn->grad[i] += o->grad[i];
        }
      }
    };
  }
  return Tensor(node);
}

Tensor add_n(const std::vector<Tensor>& ts) {
  if (ts.empty()) throw std::invalid_argument("add_n: empty input");
  for (const auto& t : ts) {
    check_defined(t, "add_n");
    if (t.shape() != ts[0].shape())
      throw std::invalid_argument("add_n: shape mismatch " + shape_str(t.shape()) + " vs " + shape_str(ts[0].shape()));
  }
  std::vector<double> out(ts[0].size(), 0.0);
  std::vector<std::shared_ptr<TensorNode>> parents;
  parents.reserve(ts.size());
  for (const auto& t : ts) {
    const auto v = t.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
    parents.push_back(t.node());
  }
  const bool rg = any_grad(ts);
  auto node = new_node(ts[0].shape(), std::move(out), std::move(parents), rg);
  if (rg) {
    TensorNode* o = node.get();
    node->backprop = [o]() {
      for (auto& p : o->parents) {
        if (!p->requires_grad) continue;
        p->ensure_grad();
        for (std::size_t i = 0; i < o->grad.size(); ++i) p->grad[i] += o->grad[i];
      }
    };
  }
  return Tensor(node);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_defined(a, "mul");
  check_defined(b, "mul");
  if (a.shape() != b.shape())
    throw std::invalid_argument("mul: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<double> out(a.size());
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  const bool rg = a.requires_grad() || b.requires_grad();
  auto node = new_node(a.shape(), std::move(out), {a.node(), b.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* an = a.node().get();
    TensorNode* bn = b.node().get();
    node->backprop = [o, an, bn]() {
      if (an->requires_grad) {
        an->ensure_grad();
        for (std::size_t i = 0; i < o->grad.size(); ++i) an->grad[i] += o->grad[i] * bn->value[i];
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (std::size_t i = 0; i < o->grad.size(); ++i) bn->grad[i] += o->grad[i] * an->value[i];
      }
    };
  }
  return Tensor(node);
}

Tensor mul_rowvec(const Tensor& x, const Tensor& v) {
  check_defined(x, "mul_rowvec");
  check_defined(v, "mul_rowvec");
  check_rank2(x, "mul_rowvec");
  if (v.shape().size() != 1 || v.shape()[0] != x.cols())
    throw std::invalid_argument("mul_rowvec: vector shape " + shape_str(v.shape()) + " does not match columns of " +
                                shape_str(x.shape()));
  const int n = x.rows(), m = x.cols();
  std::vector<double> out(x.size());
  const auto xv = x.data();
  const auto vv = v.data();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out[static_cast<std::size_t>(i) * m + j] = xv[static_cast<std::size_t>(i) * m + j] * vv[j];
  const bool rg = x.requires_grad() || v.requires_grad();
  auto node = new_node(x.shape(), std::move(out), {x.node(), v.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* xn = x.node().get();
    TensorNode* vn = v.node().get();
    node->backprop = [o, xn, vn, n, m]() {
      if (xn->requires_grad) {
        xn->ensure_grad();
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < m; ++j) {
            const std::size_t k = static_cast<std::size_t>(i) * m + j;
            xn->grad[k] += o->grad[k] * vn->value[j];
          }
      }
      if (vn->requires_grad) {
        vn->ensure_grad();
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < m; ++j) {
            const std::size_t k = static_cast<std::size_t>(i) * m + j;
            vn->grad[j] += o->grad[k] * xn->value[k];
          }
      }
    };
  }
  return Tensor(node);
}

Tensor scale(const Tensor& a, double c) {
  check_defined(a, "scale");
  std::vector<double> out(a.size());
  const auto av = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * c;
  const bool rg = a.requires_grad();
  auto node = new_node(a.shape(), std::move(out), {a.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* an = a.node().get();
    node->backprop = [o, an, c]() {
      an->ensure_grad();
      for (std::size_t i = 0; i < o->grad.size(); ++i) an->grad[i] += o->grad[i] * c;
    };
  }
  return Tensor(node);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_defined(a, "matmul");
  check_defined(b, "matmul");
  check_rank2(a, "matmul");
  check_rank2(b, "matmul");
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dimensions disagree " + shape_str(a.shape()) + " x " +
                                shape_str(b.shape()));
  const int n = a.rows(), k = a.cols(), m = b.cols();
  std::vector<double> out(static_cast<std::size_t>(n) * m, 0.0);
  const double* av = a.data().data();
  const double* bv = b.data().data();
  for (int i = 0; i < n; ++i) {
    double* orow = out.data() + static_cast<std::size_t>(i) * m;
    const double* arow = av + static_cast<std::size_t>(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const double aik = arow[kk];
      if (aik == 0.0) continue;
      const double* brow = bv + static_cast<std::size_t>(kk) * m;
      for (int j = 0; j < m; ++j) orow[j] += aik * brow[j];
    }
  }
  const bool rg = a.requires_grad() || b.requires_grad();
  auto node = new_node({n, m}, std::move(out), {a.node(), b.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* an = a.node().get();
    TensorNode* bn = b.node().get();
    node->backprop = [o, an, bn, n, k, m]() {
      if (an->requires_grad) {
        an->ensure_grad();
        // dA = dOut * B^T
        for (int i = 0; i < n; ++i) {
          const double* grow = o->grad.data() + static_cast<std::size_t>(i) * m;
          double* arow = an->grad.data() + static_cast<std::size_t>(i) * k;
          for (int kk = 0; kk < k; ++kk) {
            const double* brow = bn->value.data() + static_cast<std::size_t>(kk) * m;
            double acc = 0.0;
            for (int j = 0; j < m; ++j) acc += grow[j] * brow[j];
            arow[kk] += acc;
          }
        }
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        // dB = A^T * dOut
        for (int i = 0; i < n; ++i) {
          const double* grow = o->grad.data() + static_cast<std::size_t>(i) * m;
          const double* arow = an->value.data() + static_cast<std::size_t>(i) * k;
          for (int kk = 0; kk < k; ++kk) {
            const double aik = arow[kk];
            if (aik == 0.0) continue;
            double* brow = bn->grad.data() + static_cast<std::size_t>(kk) * m;
            for (int j = 0; j < m; ++j) brow[j] += aik * grow[j];
          }
        }
      }
    };
  }
  return Tensor(node);
}

Tensor transpose(const Tensor& a) {
  check_defined(a, "transpose");
  check_rank2(a, "transpose");
  const int n = a.rows(), m = a.cols();
  std::vector<double> out(a.size());
  const auto av = a.data();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out[static_cast<std::size_t>(j) * n + i] = av[static_cast<std::size_t>(i) * m + j];
  const bool rg = a.requires_grad();
  auto node = new_node({m, n}, std::move(out), {a.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* an = a.node().get();
    node->backprop = [o, an, n, m]() {
      an->ensure_grad();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
          an->grad[static_cast<std::size_t>(i) * m + j] += o->grad[static_cast<std::size_t>(j) * n + i];
    };
  }
  return Tensor(node);
}

Tensor relu(const Tensor& a) {
  check_defined(a, "relu");
  std::vector<double> out(a.size());
  const auto av = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] > 0.0 ? av[i] : 0.0;
  const bool rg = a.requires_grad();
  auto node = new_node(a.shape(), std::move(out), {a.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* an = a.node().get();
    node->backprop = [o, an]() {
      an->ensure_grad();
      for (std::size_t i = 0; i < o->grad.size(); ++i)
        if (an->value[i] > 0.0) an->grad[i] += o->grad[i];
    };
  }
  return Tensor(node);
}

Tensor reshape(const Tensor& a, Shape shape) {
  check_defined(a, "reshape");
  if (shape_size(shape) != a.size())
    throw std::invalid_argument("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
  std::vector<double> out(a.data().begin(), a.data().end());
  const bool rg = a.requires_grad();
  auto node = new_node(std::move(shape), std::move(out), {a.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* an = a.node().get();
    node->backprop = [o, an]() {
      an->ensure_grad();
      for (std::size_t i = 0; i < o->grad.size(); ++i) an->grad[i] += o->grad[i];
    };
  }
  return Tensor(node);
}

Tensor concat_cols(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat_cols: empty input");
  int n = -1, total = 0;
  for (const auto& x : xs) {
    check_defined(x, "concat_cols");
    check_rank2(x, "concat_cols");
    if (n < 0) n = x.rows();
    if (x.rows() != n)
      throw std::invalid_argument("concat_cols: row counts disagree (" + std::to_string(n) + " vs " +
                                  std::to_string(x.rows()) + ")");
    total += x.cols();
  }
  std::vector<double> out(static_cast<std::size_t>(n) * total);
  std::vector<std::shared_ptr<TensorNode>> parents;
  int off = 0;
  for (const auto& x : xs) {
    const int m = x.cols();
    const auto xv = x.data();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        out[static_cast<std::size_t>(i) * total + off + j] = xv[static_cast<std::size_t>(i) * m + j];
    off += m;
    parents.push_back(x.node());
  }
  const bool rg = any_grad(xs);
  auto node = new_node({n, total}, std::move(out), std::move(parents), rg);
  if (rg) {
    TensorNode* o = node.get();
    node->backprop = [o, n, total]() {
      int off = 0;
      for (auto& p : o->parents) {
        const int m = p->shape[1];
        if (p->requires_grad) {
          p->ensure_grad();
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
              p->grad[static_cast<std::size_t>(i) * m + j] += o->grad[static_cast<std::size_t>(i) * total + off + j];
        }
        off += m;
      }
    };
  }
  return Tensor(node);
}

Tensor slice_cols(const Tensor& a, int c0, int c1) {
  check_defined(a, "slice_cols");
  check_rank2(a, "slice_cols");
  const int n = a.rows(), m = a.cols();
  if (c0 < 0 || c1 > m || c0 >= c1)
    throw std::invalid_argument("slice_cols: bad range [" + std::to_string(c0) + "," + std::to_string(c1) +
                                ") for " + shape_str(a.shape()));
  const int w = c1 - c0;
  std::vector<double> out(static_cast<std::size_t>(n) * w);
  const auto av = a.data();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < w; ++j) out[static_cast<std::size_t>(i) * w + j] = av[static_cast<std::size_t>(i) * m + c0 + j];
  const bool rg = a.requires_grad();
  auto node = new_node({n, w}, std::move(out), {a.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* an = a.node().get();
    node->backprop = [o, an, n, m, w, c0]() {
      an->ensure_grad();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < w; ++j)
          an->grad[static_cast<std::size_t>(i) * m + c0 + j] += o->grad[static_cast<std::size_t>(i) * w + j];
    };
  }
  return Tensor(node);
}

Tensor broadcast_rows(const Tensor& v, int n) {
  check_defined(v, "broadcast_rows");
  if (v.shape().size() != 1) throw std::invalid_argument("broadcast_rows: expected rank-1, got " + shape_str(v.shape()));
  if (n < 1) throw std::invalid_argument("broadcast_rows: row count must be >= 1");
  const int m = v.shape()[0];
  std::vector<double> out(static_cast<std::size_t>(n) * m);
  const auto vv = v.data();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out[static_cast<std::size_t>(i) * m + j] = vv[j];
  const bool rg = v.requires_grad();
  auto node = new_node({n, m}, std::move(out), {v.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* vn = v.node().get();
    node->backprop = [o, vn, n, m]() {
      vn->ensure_grad();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) vn->grad[j] += o->grad[static_cast<std::size_t>(i) * m + j];
    };
  }
  return Tensor(node);
}

Tensor sum_all(const Tensor& a) {
  check_defined(a, "sum_all");
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  const bool rg = a.requires_grad();
  auto node = new_node({1}, {acc}, {a.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* an = a.node().get();
    node->backprop = [o, an]() {
      an->ensure_grad();
      for (std::size_t i = 0; i < an->grad.size(); ++i) an->grad[i] += o->grad[0];
    };
  }
  return Tensor(node);
}

Tensor masked_mean_rows(const Tensor& x, const std::vector<std::uint8_t>& mask) {
  check_defined(x, "masked_mean_rows");
  check_rank2(x, "masked_mean_rows");
  const int n = x.rows(), m = x.cols();
  if (static_cast<int>(mask.size()) != n)
    throw std::invalid_argument("masked_mean_rows: mask length " + std::to_string(mask.size()) +
                                " does not match rows " + std::to_string(n));
  int count = 0;
  for (auto f : mask) count += f ? 1 : 0;
  if (count == 0) throw std::invalid_argument("masked_mean_rows: no selected rows");
  std::vector<double> out(m, 0.0);
  const auto xv = x.data();
  for (int i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    for (int j = 0; j < m; ++j) out[j] += xv[static_cast<std::size_t>(i) * m + j];
  }
  for (int j = 0; j < m; ++j) out[j] /= count;
  const bool rg = x.requires_grad();
  auto node = new_node({m}, std::move(out), {x.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* xn = x.node().get();
    auto mk = mask;
    node->backprop = [o, xn, mk, n, m, count]() {
      xn->ensure_grad();
      for (int i = 0; i < n; ++i) {
        if (!mk[i]) continue;
        for (int j = 0; j < m; ++j) xn->grad[static_cast<std::size_t>(i) * m + j] += o->grad[j] / count;
      }
    };
  }
  return Tensor(node);
}

Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, int kernel) {
  check_defined(x, "conv1d");
  check_defined(weight, "conv1d");
  check_defined(bias, "conv1d");
  check_rank2(x, "conv1d");
  check_rank2(weight, "conv1d");
  if (kernel < 1 || kernel % 2 == 0)
    throw std::invalid_argument("conv1d: kernel size must be odd and positive, got " + std::to_string(kernel));
  const int n = x.rows(), d = x.cols();
  if (n == 0) throw std::invalid_argument("conv1d: empty input sequence");
  if (weight.rows() != kernel * d)
    throw std::invalid_argument("conv1d: weight shape " + shape_str(weight.shape()) + " does not match kernel " +
                                std::to_string(kernel) + " x input dim " + std::to_string(d));
  const int f = weight.cols();
  if (bias.shape().size() != 1 || bias.shape()[0] != f)
    throw std::invalid_argument("conv1d: bias shape " + shape_str(bias.shape()) + " does not match " +
                                std::to_string(f) + " filters");
  const int half = kernel / 2;

  std::vector<double> out(static_cast<std::size_t>(n) * f);
  const double* xv = x.data().data();
  const double* wv = weight.data().data();
  const double* bv = bias.data().data();
  for (int i = 0; i < n; ++i) {
    double* orow = out.data() + static_cast<std::size_t>(i) * f;
    for (int j = 0; j < f; ++j) orow[j] = bv[j];
    for (int o = 0; o < kernel; ++o) {
      const int src = i + o - half;
      if (src < 0 || src >= n) continue;  // zero padding
      const double* xrow = xv + static_cast<std::size_t>(src) * d;
      const double* wbase = wv + static_cast<std::size_t>(o) * d * f;
      for (int c = 0; c < d; ++c) {
        const double xc = xrow[c];
        if (xc == 0.0) continue;
        const double* wrow = wbase + static_cast<std::size_t>(c) * f;
        for (int j = 0; j < f; ++j) orow[j] += xc * wrow[j];
      }
    }
  }

  const bool rg = x.requires_grad() || weight.requires_grad() || bias.requires_grad();
  auto node = new_node({n, f}, std::move(out), {x.node(), weight.node(), bias.node()}, rg);
  if (rg) {
    TensorNode* on = node.get();
    TensorNode* xn = x.node().get();
    TensorNode* wn = weight.node().get();
    TensorNode* bn = bias.node().get();
    node->backprop = [on, xn, wn, bn, n, d, f, kernel, half]() {
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (int i = 0; i < n; ++i) {
          const double* grow = on->grad.data() + static_cast<std::size_t>(i) * f;
          for (int j = 0; j < f; ++j) bn->grad[j] += grow[j];
        }
      }
      const bool need_x = xn->requires_grad;
      const bool need_w = wn->requires_grad;
      if (need_x) xn->ensure_grad();
      if (need_w) wn->ensure_grad();
      if (!need_x && !need_w) return;
      for (int i = 0; i < n; ++i) {
        const double* grow = on->grad.data() + static_cast<std::size_t>(i) * f;
        for (int o = 0; o < kernel; ++o) {
          const int src = i + o - half;
          if (src < 0 || src >= n) continue;
          const double* xrow = xn->value.data() + static_cast<std::size_t>(src) * d;
          const std::size_t wbase = static_cast<std::size_t>(o) * d * f;
          for (int c = 0; c < d; ++c) {
            const std::size_t wroff = wbase + static_cast<std::size_t>(c) * f;
            if (need_w) {
              const double xc = xrow[c];
              if (xc != 0.0) {
                double* wgrow = wn->grad.data() + wroff;
                for (int j = 0; j < f; ++j) wgrow[j] += xc * grow[j];
              }
            }
            if (need_x) {
              const double* wrow = wn->value.data() + wroff;
              double acc = 0.0;
              for (int j = 0; j < f; ++j) acc += wrow[j] * grow[j];
              xn->grad[static_cast<std::size_t>(src) * d + c] += acc;
            }
          }
        }
      }
    };
  }
  return Tensor(node);
}

namespace {

// Shared softmax core over a strided view with an exclusion mask.
// Writes probabilities (0 at excluded slots) and registers nothing; callers
// wire the backward pass.
void softmax_fill(const double* in, double* out, int n, const std::vector<std::uint8_t>& excluded) {
  double mx = 0.0;
  bool seen = false;
  for (int i = 0; i < n; ++i) {
    if (excluded[i]) continue;
    if (!seen || in[i] > mx) mx = in[i];
    seen = true;
  }
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    if (excluded[i]) {
      out[i] = 0.0;
    } else {
      out[i] = std::exp(in[i] - mx);
      z += out[i];
    }
  }
  for (int i = 0; i < n; ++i)
    if (!excluded[i]) out[i] /= z;
}

// d/dx of softmax given upstream dY: dX_i = y_i * (dY_i - sum_j dY_j y_j).
void softmax_backward(const double* y, const double* dy, double* dx, int n,
                      const std::vector<std::uint8_t>& excluded) {
  double dot = 0.0;
  for (int i = 0; i < n; ++i)
    if (!excluded[i]) dot += dy[i] * y[i];
  for (int i = 0; i < n; ++i)
    if (!excluded[i]) dx[i] += y[i] * (dy[i] - dot);
}

}  // namespace

Tensor softmax(const Tensor& logits, const std::vector<int>& exclude) {
  check_defined(logits, "softmax");
  if (logits.shape().size() != 1)
    throw std::invalid_argument("softmax: expected rank-1 logits, got " + shape_str(logits.shape()));
  const int n = logits.shape()[0];
  std::vector<std::uint8_t> excluded(n, 0);
  for (int e : exclude) {
    if (e < 0 || e >= n) throw std::invalid_argument("softmax: excluded index " + std::to_string(e) + " out of range");
    excluded[e] = 1;
  }
  int alive = 0;
  for (auto f : excluded) alive += f ? 0 : 1;
  if (alive == 0) throw std::invalid_argument("softmax: all entries excluded");

  std::vector<double> out(n);
  softmax_fill(logits.data().data(), out.data(), n, excluded);
  const bool rg = logits.requires_grad();
  auto node = new_node({n}, std::move(out), {logits.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* ln = logits.node().get();
    node->backprop = [o, ln, excluded, n]() {
      ln->ensure_grad();
      softmax_backward(o->value.data(), o->grad.data(), ln->grad.data(), n, excluded);
    };
  }
  return Tensor(node);
}

Tensor row_softmax(const Tensor& x) {
  check_defined(x, "row_softmax");
  check_rank2(x, "row_softmax");
  const int n = x.rows(), m = x.cols();
  std::vector<double> out(x.size());
  const std::vector<std::uint8_t> none(m, 0);
  for (int i = 0; i < n; ++i)
    softmax_fill(x.data().data() + static_cast<std::size_t>(i) * m, out.data() + static_cast<std::size_t>(i) * m, m,
                 none);
  const bool rg = x.requires_grad();
  auto node = new_node(x.shape(), std::move(out), {x.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* xn = x.node().get();
    node->backprop = [o, xn, n, m]() {
      xn->ensure_grad();
      const std::vector<std::uint8_t> none(m, 0);
      for (int i = 0; i < n; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * m;
        softmax_backward(o->value.data() + off, o->grad.data() + off, xn->grad.data() + off, m, none);
      }
    };
  }
  return Tensor(node);
}

Tensor offdiag_row_softmax(const Tensor& x) {
  check_defined(x, "offdiag_row_softmax");
  check_rank2(x, "offdiag_row_softmax");
  const int n = x.rows();
  if (x.cols() != n) throw std::invalid_argument("offdiag_row_softmax: matrix must be square, got " + shape_str(x.shape()));
  if (n < 2) throw std::invalid_argument("offdiag_row_softmax: need at least 2 positions");
  std::vector<double> out(x.size());
  for (int i = 0; i < n; ++i) {
    std::vector<std::uint8_t> excluded(n, 0);
    excluded[i] = 1;
    softmax_fill(x.data().data() + static_cast<std::size_t>(i) * n, out.data() + static_cast<std::size_t>(i) * n, n,
                 excluded);
  }
  const bool rg = x.requires_grad();
  auto node = new_node(x.shape(), std::move(out), {x.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* xn = x.node().get();
    node->backprop = [o, xn, n]() {
      xn->ensure_grad();
      for (int i = 0; i < n; ++i) {
        std::vector<std::uint8_t> excluded(n, 0);
        excluded[i] = 1;
        const std::size_t off = static_cast<std::size_t>(i) * n;
        softmax_backward(o->value.data() + off, o->grad.data() + off, xn->grad.data() + off, n, excluded);
      }
    };
  }
  return Tensor(node);
}

namespace {

void check_distribution(const Tensor& pred, const char* op) {
  double s = 0.0;
  for (double v : pred.data()) {
    if (v < -1e-9) throw std::invalid_argument(std::string(op) + ": negative probability");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-6)
    throw std::invalid_argument(std::string(op) + ": probabilities sum to " + std::to_string(s) + ", not 1");
}

}  // namespace

Tensor cross_entropy(const Tensor& pred, int gold) {
  check_defined(pred, "cross_entropy");
  if (pred.shape().size() != 1)
    throw std::invalid_argument("cross_entropy: expected rank-1 distribution, got " + shape_str(pred.shape()));
  const int n = pred.shape()[0];
  if (gold < 0 || gold >= n) throw std::invalid_argument("cross_entropy: gold index out of range");
  check_distribution(pred, "cross_entropy");
  const double p = std::max(pred.data()[gold], kLogFloor);
  const bool rg = pred.requires_grad();
  auto node = new_node({1}, {-std::log(p)}, {pred.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* pn = pred.node().get();
    node->backprop = [o, pn, gold]() {
      pn->ensure_grad();
      const double p = std::max(pn->value[gold], kLogFloor);
      if (pn->value[gold] > kLogFloor) pn->grad[gold] += -o->grad[0] / p;
      // below the floor the loss is constant, so the gradient is zero
    };
  }
  return Tensor(node);
}

Tensor cross_entropy(const Tensor& pred, const Tensor& gold_onehot) {
  check_defined(gold_onehot, "cross_entropy");
  if (gold_onehot.shape() != pred.shape())
    throw std::invalid_argument("cross_entropy: gold shape " + shape_str(gold_onehot.shape()) +
                                " does not match prediction " + shape_str(pred.shape()));
  int gold = -1;
  const auto gv = gold_onehot.data();
  for (std::size_t i = 0; i < gv.size(); ++i) {
    if (gv[i] == 1.0) {
      if (gold >= 0) throw std::invalid_argument("cross_entropy: gold vector has more than one 1");
      gold = static_cast<int>(i);
    } else if (gv[i] != 0.0) {
      throw std::invalid_argument("cross_entropy: gold vector is not one-hot");
    }
  }
  if (gold < 0) throw std::invalid_argument("cross_entropy: gold vector has no 1");
  return cross_entropy(pred, gold);
}

Tensor nll_rows(const Tensor& probs, const std::vector<int>& gold, const std::vector<std::uint8_t>& include) {
  check_defined(probs, "nll_rows");
  check_rank2(probs, "nll_rows");
  const int n = probs.rows(), c = probs.cols();
  if (static_cast<int>(gold.size()) != n || static_cast<int>(include.size()) != n)
    throw std::invalid_argument("nll_rows: gold/include length does not match " + std::to_string(n) + " rows");
  double acc = 0.0;
  const auto pv = probs.data();
  for (int i = 0; i < n; ++i) {
    if (!include[i]) continue;
    if (gold[i] < 0 || gold[i] >= c) throw std::invalid_argument("nll_rows: gold index out of range at row " + std::to_string(i));
    acc += -std::log(std::max(pv[static_cast<std::size_t>(i) * c + gold[i]], kLogFloor));
  }
  const bool rg = probs.requires_grad();
  auto node = new_node({1}, {acc}, {probs.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* pn = probs.node().get();
    auto g = gold;
    auto inc = include;
    node->backprop = [o, pn, g, inc, n, c]() {
      pn->ensure_grad();
      for (int i = 0; i < n; ++i) {
        if (!inc[i]) continue;
        const std::size_t k = static_cast<std::size_t>(i) * c + g[i];
        if (pn->value[k] > kLogFloor) pn->grad[k] += -o->grad[0] / pn->value[k];
      }
    };
  }
  return Tensor(node);
}

Tensor dropout(const Tensor& x, double p, bool train, Rng& rng) {
  check_defined(x, "dropout");
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must be in [0,1), got " + std::to_string(p));
  if (!train || p == 0.0) return x;
  const double keep = 1.0 - p;
  std::vector<double> mask(x.size());
  for (auto& m : mask) m = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
  std::vector<double> out(x.size());
  const auto xv = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * mask[i];
  const bool rg = x.requires_grad();
  auto node = new_node(x.shape(), std::move(out), {x.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* xn = x.node().get();
    auto mk = std::move(mask);
    node->backprop = [o, xn, mk]() {
      xn->ensure_grad();
      for (std::size_t i = 0; i < o->grad.size(); ++i) xn->grad[i] += o->grad[i] * mk[i];
    };
  }
  return Tensor(node);
}

Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids) {
  check_defined(table, "embedding_rows");
  check_rank2(table, "embedding_rows");
  const int v = table.rows(), d = table.cols();
  const int n = static_cast<int>(ids.size());
  if (n == 0) throw std::invalid_argument("embedding_rows: empty id sequence");
  for (int id : ids)
    if (id < 0 || id >= v)
      throw std::invalid_argument("embedding_rows: id " + std::to_string(id) + " out of range for " +
                                  std::to_string(v) + " rows");
  std::vector<double> out(static_cast<std::size_t>(n) * d);
  const auto tv = table.data();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      out[static_cast<std::size_t>(i) * d + j] = tv[static_cast<std::size_t>(ids[i]) * d + j];
  const bool rg = table.requires_grad();
  auto node = new_node({n, d}, std::move(out), {table.node()}, rg);
  if (rg) {
    TensorNode* o = node.get();
    TensorNode* tn = table.node().get();
    auto idcopy = ids;
    node->backprop = [o, tn, idcopy, n, d]() {
      tn->ensure_grad();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
          tn->grad[static_cast<std::size_t>(idcopy[i]) * d + j] += o->grad[static_cast<std::size_t>(i) * d + j];
    };
  }
  return Tensor(node);
}

}  // namespace absa
