#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "uncseg/errors.hpp"

namespace uncseg {

using Shape = std::vector<int>;

int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct TensorNode {
  Shape shape;
  std::vector<float> value;
  std::vector<float> grad;  // allocated lazily, same length as value
  bool requires_grad = false;
  bool is_leaf = true;
  bool consumed = false;  // set once backward has released this node's tape
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.f);
  }
};

// Value-semantics handle to a node of the autodiff tape. Copies share the
// underlying buffer.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, float value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<float> data,
                          bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int dim(int i) const { return node_->shape[size_t(i)]; }
  int ndim() const { return int(node_->shape.size()); }
  int64_t size() const { return int64_t(node_->value.size()); }

  std::vector<float>& data() { return node_->value; }
  const std::vector<float>& data() const { return node_->value; }
  std::vector<float>& grad();
  const std::vector<float>& grad() const;
  bool has_grad() const { return !node_->grad.empty(); }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool rg);
  void zero_grad();

  // Scalar value; throws DimensionError unless size() == 1.
  float item() const;

  // Reverse pass from this scalar node. Single use: the tape is released
  // afterwards and a second call raises GraphError.
  void backward() const;

  std::shared_ptr<TensorNode>& node() { return node_; }
  const std::shared_ptr<TensorNode>& node() const { return node_; }

  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<TensorNode> node_;
};

// Helper used by every operator: makes the result node and wires parents
// only when grad recording is active.
Tensor make_result(Shape shape, std::vector<float> value,
                   std::vector<std::shared_ptr<TensorNode>> parents,
                   std::function<void(TensorNode&)> backward_fn);

// Disables tape recording in the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

  static bool recording();

 private:
  bool prev_;
};

}  // namespace uncseg
