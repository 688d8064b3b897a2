#include "uncseg/tensor.hpp"

#include <algorithm>
#include <unordered_set>

namespace uncseg {

int64_t shape_numel(const Shape& shape) {
  int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.f, requires_grad);
}

Tensor Tensor::full(Shape shape, float value, bool requires_grad) {
  auto node = std::make_shared<TensorNode>();
  node->value.assign(size_t(shape_numel(shape)), value);
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::from_data(Shape shape, std::vector<float> data,
                         bool requires_grad) {
  if (shape_numel(shape) != int64_t(data.size()))
    throw DimensionError("from_data: shape " + shape_str(shape) +
                         " does not match buffer length " +
                         std::to_string(data.size()));
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

std::vector<float>& Tensor::grad() {
  node_->ensure_grad();
  return node_->grad;
}

const std::vector<float>& Tensor::grad() const {
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::set_requires_grad(bool rg) {
  if (!node_->is_leaf)
    throw GraphError("requires_grad can only be toggled on leaf tensors");
  node_->requires_grad = rg;
}

void Tensor::zero_grad() {
  if (!node_->grad.empty())
    std::fill(node_->grad.begin(), node_->grad.end(), 0.f);
}

float Tensor::item() const {
  if (size() != 1)
    throw DimensionError("item() on tensor of shape " + shape_str(shape()));
  return node_->value[0];
}

void Tensor::backward() const {
  if (size() != 1)
    throw DimensionError("backward() requires a scalar loss, got shape " +
                         shape_str(shape()));
  if (node_->consumed)
    throw GraphError("backward() on a stale graph: tape already released");

  // Topological order over the tape, leaves last. keepalive pins every node
  // so releasing parent links below cannot free nodes topo still points at.
  std::vector<TensorNode*> topo;
  std::vector<std::shared_ptr<TensorNode>> keepalive;
  std::unordered_set<TensorNode*> seen;
  std::vector<std::pair<TensorNode*, size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  keepalive.push_back(node_);
  while (!stack.empty()) {
    auto [cur, idx] = stack.back();
    if (idx < cur->parents.size()) {
      ++stack.back().second;
      const std::shared_ptr<TensorNode>& p = cur->parents[idx];
      if (seen.insert(p.get()).second) {
        keepalive.push_back(p);
        stack.emplace_back(p.get(), 0);
      }
    } else {
      topo.push_back(cur);
      stack.pop_back();
    }
  }
  // topo is child-after-parents from the DFS post-order; reverse for the
  // sweep so each node's grad is complete before it propagates.
  std::reverse(topo.begin(), topo.end());

  node_->ensure_grad();
  node_->grad[0] = 1.f;
  for (TensorNode* n : topo) {
    if (n->backward_fn) {
      n->ensure_grad();
      for (auto& p : n->parents) p->ensure_grad();
      n->backward_fn(*n);
    }
  }
  // Release the tape; graphs are single-use.
  for (TensorNode* n : topo) {
    if (!n->is_leaf) {
      n->consumed = true;
      n->backward_fn = nullptr;
      n->parents.clear();
    }
  }
}

namespace {
thread_local bool g_recording = true;
}

NoGradGuard::NoGradGuard() : prev_(g_recording) { g_recording = false; }
NoGradGuard::~NoGradGuard() { g_recording = prev_; }
bool NoGradGuard::recording() { return g_recording; }

Tensor make_result(Shape shape, std::vector<float> value,
                   std::vector<std::shared_ptr<TensorNode>> parents,
                   std::function<void(TensorNode&)> backward_fn) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->is_leaf = false;
  bool track = false;
  if (NoGradGuard::recording()) {
    for (const auto& p : parents)
      if (p->requires_grad) track = true;
  }
  if (track) {
    for (const auto& p : parents)
      if (p->consumed)
        throw GraphError("operator input comes from an already released tape");
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(node));
}

}  // namespace uncseg
