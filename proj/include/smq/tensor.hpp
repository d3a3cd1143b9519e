#pragma once

// Dense row-major tensors with reverse-mode gradient recording.
//
// A Tensor is a cheap handle onto a shared Node. Every differentiable op
// creates a new Node that remembers its inputs and a closure that pushes the
// node's gradient back into them. Nodes receive a global, monotonically
// increasing sequence number at creation, so sorting the nodes reachable from
// a loss by descending sequence number yields a valid reverse topological
// order. That ordered record is the Tape.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "smq/error.hpp"

namespace smq {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

/// Row-major strides for `shape`.
inline std::vector<std::size_t> strides_of(const Shape& shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
  return strides;
}

namespace detail {
inline std::atomic<std::uint64_t> next_sequence{1};
}  // namespace detail

template <typename T>
struct Node {
  using BackwardFn = std::function<void(const Node&)>;

  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until a gradient reaches this node
  bool requires_grad = false;
  std::uint64_t sequence = detail::next_sequence.fetch_add(1, std::memory_order_relaxed);
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn backward;  // reads `grad`, accumulates into parents

  std::vector<T>& ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), T(0));
    return grad;
  }
  bool is_leaf() const { return !backward; }
};

template <typename T>
class Tensor {
 public:
  using value_type = T;
  using NodePtr = std::shared_ptr<Node<T>>;

  Tensor() = default;

  Tensor(Shape shape, std::vector<T> data, bool requires_grad = false)
      : node_(std::make_shared<Node<T>>()) {
    if (smq::numel(shape) != data.size()) {
      throw ShapeError("tensor data length " + std::to_string(data.size()) +
                       " does not match shape " + to_string(shape));
    }
    node_->shape = std::move(shape);
    node_->data = std::move(data);
    node_->requires_grad = requires_grad;
  }

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    const std::size_t n = smq::numel(shape);
    return Tensor(std::move(shape), std::vector<T>(n, T(0)), requires_grad);
  }
  static Tensor full(Shape shape, T value) {
    const std::size_t n = smq::numel(shape);
    return Tensor(std::move(shape), std::vector<T>(n, value));
  }
  static Tensor scalar(T value, bool requires_grad = false) {
    return Tensor(Shape{}, std::vector<T>{value}, requires_grad);
  }
  static Tensor from_node(NodePtr node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
  }

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t numel() const { return node_->data.size(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<const T> data() const { return node_->data; }
  std::span<const T> grad() const { return node_->grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  T at(std::size_t i) const { return node_->data.at(i); }

  T item() const {
    if (numel() != 1) throw ShapeError("item() on tensor of shape " + to_string(shape()));
    return node_->data[0];
  }

  /// In-place access for optimizers and codebook updates. Only meaningful on
  /// leaf tensors; ops never mutate their inputs.
  std::span<T> mutable_data() { return node_->data; }
  void zero_grad() { node_->grad.clear(); }

  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

/// Reverse-topological record of the nodes a loss depends on.
template <typename T>
class Tape {
 public:
  static Tape record(const Tensor<T>& root) {
    Tape tape;
    std::unordered_set<const Node<T>*> seen;
    std::vector<Node<T>*> stack{root.node().get()};
    while (!stack.empty()) {
      Node<T>* node = stack.back();
      stack.pop_back();
      if (!node->requires_grad || !seen.insert(node).second) continue;
      tape.nodes_.push_back(node);
      for (const auto& parent : node->parents) stack.push_back(parent.get());
    }
    std::sort(tape.nodes_.begin(), tape.nodes_.end(),
              [](const Node<T>* a, const Node<T>* b) { return a->sequence > b->sequence; });
    return tape;
  }

  std::span<Node<T>* const> nodes() const { return nodes_; }

  /// Seeds the first (root) node with `seed` and propagates.
  void run(T seed = T(1)) const {
    if (nodes_.empty()) return;
    auto& root_grad = nodes_.front()->ensure_grad();
    for (auto& g : root_grad) g += seed;
    for (Node<T>* node : nodes_) {
      if (node->backward && !node->grad.empty()) node->backward(*node);
    }
  }

 private:
  std::vector<Node<T>*> nodes_;
};

template <typename T>
void backward(const Tensor<T>& loss) {
  if (loss.numel() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " + to_string(loss.shape()));
  }
  if (!loss.requires_grad()) {
    throw InvalidArgument("backward() on a loss that does not depend on any parameter");
  }
  Tape<T>::record(loss).run();
}

namespace detail {

/// Builds an op result. When no input requires a gradient the result is a
/// plain constant and nothing is recorded.
template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> data, std::vector<Tensor<T>> inputs,
                      typename Node<T>::BackwardFn backward) {
  Tensor<T> out(std::move(shape), std::move(data));
  const bool any = std::any_of(inputs.begin(), inputs.end(),
                               [](const Tensor<T>& t) { return t.requires_grad(); });
  if (any) {
    auto& node = *out.node();
    node.requires_grad = true;
    node.parents.reserve(inputs.size());
    for (auto& in : inputs) node.parents.push_back(in.node());
    node.backward = std::move(backward);
  }
  return out;
}

/// Accumulate `values` into parent `i` of `node` when it tracks gradients.
template <typename T>
std::vector<T>* parent_grad(const Node<T>& node, std::size_t i) {
  Node<T>& parent = *node.parents[i];
  if (!parent.requires_grad) return nullptr;
  return &parent.ensure_grad();
}

}  // namespace detail

using Tensorf = Tensor<float>;
using Tensord = Tensor<double>;

}  // namespace smq
