#pragma once

#include <array>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "xalma/tensor.hpp"

namespace xalma {

class Graph;

// Handle to one node of a Graph. Cheap to copy; valid as long as the graph
// lives. The wrapped tensor holds the forward value.
struct Value {
  Graph* graph = nullptr;
  int id = -1;

  const Tensor& tensor() const;
  double scalar() const;  // value of a rank-0 tensor
  const std::vector<int>& shape() const { return tensor().shape; }
};

enum class Op {
  leaf,
  add,
  sub,
  mul,          // elementwise
  scale,        // multiply by a compile-time scalar attribute
  matmul,       // [m,k] x [k,n] -> [m,n]
  linear,       // x:[m,k], w:[n,k] -> x . w^T : [m,n]
  exp,
  log,
  sigmoid,
  log_sigmoid,
  abs,
  clamp_max,    // min(x, c); subgradient 0 on the clamped branch
  mean,         // reduce-all to scalar
  sum,          // reduce-all to scalar
  gather,       // row gather along axis 0 by an index list
  pick,         // a:[m,n], idx:[m] -> out[i] = a[i, idx[i]]
  log_softmax,  // along the last axis of a 1-D or 2-D tensor
};

const char* op_name(Op op);

// Define-by-run reverse-mode tape. Nodes are appended in construction order,
// which is already a topological order, so backward is a single reverse scan
// and bit-deterministic. One graph is single-threaded; independent graphs are
// fully isolated.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Leaf sharing external storage (a model parameter). Gradients accumulate
  // into the tensor's own grad buffer when it has requires_grad set. The
  // tensor must outlive the graph. Repeated calls with the same tensor
  // return the same node.
  Value leaf(Tensor& external);

  // Read-only leaf: shares storage but never receives gradients, so a const
  // (e.g. frozen, concurrently shared) tensor is safe to score through.
  Value frozen_leaf(const Tensor& external);

  // Leaf owned by the graph; never receives gradients.
  Value constant(Tensor t);
  Value constant(double v);

  // Core op application, named per kind below. All ops validate shapes and
  // throw ShapeError/DomainError with the op name and shapes on violation.
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value mul(Value a, Value b);
  Value scale(Value a, double c);
  Value neg(Value a) { return scale(a, -1.0); }
  Value matmul(Value a, Value b);
  Value linear(Value x, Value w);
  Value exp(Value a);
  Value log(Value a);
  Value sigmoid(Value a);
  Value log_sigmoid(Value a);
  Value abs(Value a);
  Value clamp_max(Value a, double cap);
  Value mean(Value a);
  Value sum(Value a);
  Value gather(Value a, std::vector<int> indices);
  Value pick(Value a, std::vector<int> indices);
  Value log_softmax(Value a);

  // Populates grads of every requires_grad leaf reachable from root with
  // d(root)/d(leaf). root must be a scalar. Leaf grads accumulate across
  // calls; interior buffers are reset internally each call.
  void backward(Value root);

  const Tensor& tensor_of(int id) const { return *nodes_[id].out; }
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Op op = Op::leaf;
    std::array<int, 2> in{-1, -1};
    std::shared_ptr<Tensor> out;
    bool allow_grad = true;  // false for frozen_leaf nodes
    double c = 0.0;          // scale factor / clamp cap
    std::vector<int> idx;    // gather / pick indices
  };

  Value push(Node n);
  Tensor& out_of(int id) { return *nodes_[id].out; }

  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, int> leaf_cache_;
  std::unordered_map<const Tensor*, int> frozen_leaf_cache_;
};

}  // namespace xalma
