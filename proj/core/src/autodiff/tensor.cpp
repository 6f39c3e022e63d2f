#include "gpr/autodiff/tensor.hpp"

#include <unordered_map>
#include <utility>

#include "gpr/common/error.hpp"

namespace gpr::ad {

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {

std::shared_ptr<detail::Node> new_leaf(Shape shape, std::vector<double> data, bool requires_grad) {
  for (auto d : shape) {
    if (d == 0) throw InvalidArgument("tensor dims must be positive, got " + shape_string(shape));
  }
  if (element_count(shape) != data.size()) {
    throw InvalidArgument("tensor data length " + std::to_string(data.size()) +
                          " does not match shape " + shape_string(shape));
  }
  auto node = std::make_shared<detail::Node>();
  node->op = "leaf";
  node->shape = std::move(shape);
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  return node;
}

void require_defined(const std::shared_ptr<detail::Node>& node) {
  if (!node) throw InvalidArgument("use of an undefined tensor");
}

}  // namespace

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const auto n = element_count(shape);
  return Tensor(new_leaf(std::move(shape), std::vector<double>(n, 0.0), requires_grad));
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = element_count(shape);
  return Tensor(new_leaf(std::move(shape), std::vector<double>(n, value), requires_grad));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
  return Tensor(new_leaf(std::move(shape), std::move(data), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(new_leaf({1}, {value}, requires_grad));
}

const Shape& Tensor::shape() const {
  require_defined(node_);
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) {
    throw InvalidArgument("axis " + std::to_string(axis) + " out of range for " + shape_string(s));
  }
  return s[axis];
}

std::size_t Tensor::numel() const { return element_count(shape()); }

const std::string& Tensor::op() const {
  require_defined(node_);
  return node_->op;
}

std::span<const double> Tensor::data() const {
  require_defined(node_);
  return node_->value;
}

std::span<double> Tensor::mutable_data() {
  require_defined(node_);
  return node_->value;
}

double Tensor::item() const {
  if (numel() != 1) throw InvalidArgument("item() on non-scalar tensor " + shape_string(shape()));
  return node_->value[0];
}

bool Tensor::requires_grad() const {
  require_defined(node_);
  return node_->requires_grad;
}

void Tensor::set_requires_grad(bool on) {
  require_defined(node_);
  node_->requires_grad = on;
}

bool Tensor::has_grad() const {
  require_defined(node_);
  return !node_->grad.empty();
}

std::span<const double> Tensor::grad() const {
  require_defined(node_);
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  require_defined(node_);
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::zero_grad() {
  require_defined(node_);
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::backward() const {
  require_defined(node_);
  if (numel() != 1) {
    throw InvalidArgument("backward() needs a scalar root, got " + shape_string(shape()));
  }
  if (!node_->requires_grad) throw InvalidArgument("backward() on a tensor that tracks no gradient");
  Tape::record(*this).run_backward();
}

Tensor Tensor::detach() const {
  require_defined(node_);
  return Tensor(new_leaf(node_->shape, node_->value, false));
}

Tensor Tensor::clone() const {
  require_defined(node_);
  return Tensor(new_leaf(node_->shape, node_->value, node_->requires_grad));
}

Tensor make_result(std::string_view op, Shape shape, std::vector<double> value,
                   std::vector<Tensor> inputs, BackwardFn backward) {
  auto node = new_leaf(std::move(shape), std::move(value), false);
  node->op = std::string(op);
  bool tracked = false;
  for (const auto& in : inputs) {
    require_defined(in.node_);
    tracked = tracked || in.node_->requires_grad;
  }
  if (tracked) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (auto& in : inputs) node->inputs.push_back(std::move(in.node_));
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

Tape Tape::record(const Tensor& root) {
  require_defined(root.node_);
  Tape tape;
  std::unordered_map<const detail::Node*, std::size_t> index;
  // Iterative post-order DFS; an entry is emitted only after all its inputs.
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  std::unordered_map<const detail::Node*, bool> seen;
  stack.emplace_back(root.node_.get(), 0);
  seen[root.node_.get()] = true;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      detail::Node* child = node->inputs[next++].get();
      if (!seen[child]) {
        seen[child] = true;
        stack.emplace_back(child, 0);
      }
      continue;
    }
    Entry entry{node->op, {}};
    for (const auto& in : node->inputs) entry.inputs.push_back(index.at(in.get()));
    index[node] = tape.nodes_.size();
    tape.nodes_.push_back(node);
    tape.entries_.push_back(std::move(entry));
    stack.pop_back();
  }
  return tape;
}

bool Tape::is_topological() const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    for (auto j : entries_[i].inputs) {
      if (j >= i) return false;
    }
  }
  return true;
}

void Tape::run_backward() const {
  if (nodes_.empty()) return;
  // Interior gradients are per-sweep; only leaves accumulate across sweeps.
  for (auto* node : nodes_) {
    if (node->backward) node->grad.assign(node->value.size(), 0.0);
  }
  detail::Node* root = nodes_.back();
  root->ensure_grad();
  root->grad[0] += 1.0;
  std::vector<std::span<double>> sinks;
  for (std::size_t k = nodes_.size(); k-- > 0;) {
    detail::Node* node = nodes_[k];
    if (!node->backward || node->grad.empty()) continue;
    sinks.clear();
    for (const auto& in : node->inputs) {
      if (in->requires_grad) {
        in->ensure_grad();
        sinks.emplace_back(in->grad);
      } else {
        sinks.emplace_back();
      }
    }
    node->backward(node->grad, sinks);
  }
}

}  // namespace gpr::ad
