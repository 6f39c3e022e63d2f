#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gpr::ad {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

class Tensor;
class Tape;

/// Called during the reverse sweep. `grad_out` is the gradient of the
/// result; `grad_in[i]` is the accumulation buffer of input i, or an empty
/// span when that input does not track gradients.
using BackwardFn =
    std::function<void(std::span<const double> grad_out, std::span<const std::span<double>> grad_in)>;

namespace detail {

struct Node {
  std::string op;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  BackwardFn backward;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

}  // namespace detail

/// N-dimensional row-major f64 array with optional gradient tracking.
///
/// Tensor is a shared handle: copies alias the same storage. Results of
/// differentiable operations keep their inputs alive until the result is
/// released, so the recorded graph lives exactly as long as the loss.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;
  const std::string& op() const;

  std::span<const double> data() const;
  /// Direct write access, meant for parameters and optimizers only.
  std::span<double> mutable_data();
  double item() const;

  bool requires_grad() const;
  void set_requires_grad(bool on);
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Reverse sweep from this scalar. Gradients accumulate into every
  /// tracked tensor on the recorded path.
  void backward() const;

  /// Value copy cut off from the graph.
  Tensor detach() const;
  Tensor clone() const;

  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  std::shared_ptr<detail::Node> node_;

  friend class Tape;
  friend Tensor make_result(std::string_view, Shape, std::vector<double>, std::vector<Tensor>,
                            BackwardFn);
};

/// Builds the result of a differentiable operation. If no input tracks
/// gradients the result is a plain constant and `backward` is dropped.
Tensor make_result(std::string_view op, Shape shape, std::vector<double> value,
                   std::vector<Tensor> inputs, BackwardFn backward);

/// Ordered record of the operations reachable from a root; every entry
/// appears after all of its inputs.
class Tape {
 public:
  struct Entry {
    std::string op;
    std::vector<std::size_t> inputs;  // indices into the tape
  };

  static Tape record(const Tensor& root);

  std::size_t size() const { return nodes_.size(); }
  const Entry& entry(std::size_t i) const { return entries_[i]; }
  bool is_topological() const;

  void run_backward() const;

 private:
  std::vector<detail::Node*> nodes_;
  std::vector<Entry> entries_;
};

}  // namespace gpr::ad
