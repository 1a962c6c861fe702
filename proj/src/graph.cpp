#include "xalma/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace xalma {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_log_sigmoid(double x) {
  // log sigma(x) = -log(1 + e^{-x}); rewrite for x < 0 to avoid overflow.
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::leaf: return "leaf";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::scale: return "scale";
    case Op::matmul: return "matmul";
    case Op::linear: return "linear";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::sigmoid: return "sigmoid";
    case Op::log_sigmoid: return "log_sigmoid";
    case Op::abs: return "abs";
    case Op::clamp_max: return "clamp_max";
    case Op::mean: return "mean";
    case Op::sum: return "sum";
    case Op::gather: return "gather";
    case Op::pick: return "pick";
    case Op::log_softmax: return "log_softmax";
  }
  return "?";
}

const Tensor& Value::tensor() const { return graph->tensor_of(id); }

double Value::scalar() const {
  const Tensor& t = tensor();
  if (t.rank() != 0) {
    throw ContractError(std::string("scalar() on tensor of shape ") +
                        shape_str(t.shape));
  }
  return t.data[0];
}

Value Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return Value{this, static_cast<int>(nodes_.size()) - 1};
}

Value Graph::leaf(Tensor& external) {
  auto it = leaf_cache_.find(&external);
  if (it != leaf_cache_.end()) return Value{this, it->second};
  Node n;
  n.op = Op::leaf;
  n.out = std::shared_ptr<Tensor>(&external, [](Tensor*) {});
  Value v = push(std::move(n));
  leaf_cache_.emplace(&external, v.id);
  return v;
}

Value Graph::frozen_leaf(const Tensor& external) {
  auto it = frozen_leaf_cache_.find(&external);
  if (it != frozen_leaf_cache_.end()) return Value{this, it->second};
  Node n;
  n.op = Op::leaf;
  n.allow_grad = false;
  // Shared read-only: backward never touches a node with allow_grad unset.
  n.out = std::shared_ptr<Tensor>(const_cast<Tensor*>(&external),
                                  [](Tensor*) {});
  Value v = push(std::move(n));
  frozen_leaf_cache_.emplace(&external, v.id);
  return v;
}

Value Graph::constant(Tensor t) {
  t.requires_grad = false;
  Node n;
  n.op = Op::leaf;
  n.out = std::make_shared<Tensor>(std::move(t));
  return push(std::move(n));
}

Value Graph::constant(double v) { return constant(Tensor::scalar(v)); }

namespace {
void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape) {
    throw ShapeError(std::string(op) + ": " + shape_str(a.shape) + " vs " +
                     shape_str(b.shape));
  }
}
}  // namespace

Value Graph::add(Value a, Value b) {
  const Tensor &ta = out_of(a.id), &tb = out_of(b.id);
  require_same_shape("add", ta, tb);
  Node n;
  n.op = Op::add;
  n.in = {a.id, b.id};
  n.out = std::make_shared<Tensor>(Tensor::zeros(ta.shape));
  for (size_t i = 0; i < ta.data.size(); ++i)
    n.out->data[i] = ta.data[i] + tb.data[i];
  return push(std::move(n));
}

Value Graph::sub(Value a, Value b) {
  const Tensor &ta = out_of(a.id), &tb = out_of(b.id);
  require_same_shape("sub", ta, tb);
  Node n;
  n.op = Op::sub;
  n.in = {a.id, b.id};
  n.out = std::make_shared<Tensor>(Tensor::zeros(ta.shape));
  for (size_t i = 0; i < ta.data.size(); ++i)
    n.out->data[i] = ta.data[i] - tb.data[i];
  return push(std::move(n));
}

Value Graph::mul(Value a, Value b) {
  const Tensor &ta = out_of(a.id), &tb = out_of(b.id);
  require_same_shape("mul", ta, tb);
  Node n;
  n.op = Op::mul;
  n.in = {a.id, b.id};
  n.out = std::make_shared<Tensor>(Tensor::zeros(ta.shape));
  for (size_t i = 0; i < ta.data.size(); ++i)
    n.out->data[i] = ta.data[i] * tb.data[i];
  return push(std::move(n));
}

Value Graph::scale(Value a, double c) {
  const Tensor& ta = out_of(a.id);
  Node n;
  n.op = Op::scale;
  n.in = {a.id, -1};
  n.c = c;
  n.out = std::make_shared<Tensor>(Tensor::zeros(ta.shape));
  for (size_t i = 0; i < ta.data.size(); ++i) n.out->data[i] = c * ta.data[i];
  return push(std::move(n));
}

Value Graph::matmul(Value a, Value b) {
  const Tensor &ta = out_of(a.id), &tb = out_of(b.id);
  if (ta.rank() != 2 || tb.rank() != 2 || ta.shape[1] != tb.shape[0]) {
    throw ShapeError("matmul: " + shape_str(ta.shape) + " x " +
                     shape_str(tb.shape));
  }
  int m = ta.shape[0], k = ta.shape[1], nn = tb.shape[1];
  Node n;
  n.op = Op::matmul;
  n.in = {a.id, b.id};
  n.out = std::make_shared<Tensor>(Tensor::zeros({m, nn}));
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      double av = ta.data[static_cast<size_t>(i) * k + p];
      if (av == 0.0) continue;
      const double* brow = &tb.data[static_cast<size_t>(p) * nn];
      double* orow = &n.out->data[static_cast<size_t>(i) * nn];
      for (int j = 0; j < nn; ++j) orow[j] += av * brow[j];
    }
  }
  return push(std::move(n));
}

Value Graph::linear(Value x, Value w) {
  const Tensor &tx = out_of(x.id), &tw = out_of(w.id);
  if (tx.rank() != 2 || tw.rank() != 2 || tx.shape[1] != tw.shape[1]) {
    throw ShapeError("linear: " + shape_str(tx.shape) + " x " +
                     shape_str(tw.shape) + "^T");
  }
  int m = tx.shape[0], k = tx.shape[1], nn = tw.shape[0];
  Node n;
  n.op = Op::linear;
  n.in = {x.id, w.id};
  n.out = std::make_shared<Tensor>(Tensor::zeros({m, nn}));
  for (int i = 0; i < m; ++i) {
    const double* xrow = &tx.data[static_cast<size_t>(i) * k];
    double* orow = &n.out->data[static_cast<size_t>(i) * nn];
    for (int j = 0; j < nn; ++j) {
      const double* wrow = &tw.data[static_cast<size_t>(j) * k];
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += xrow[p] * wrow[p];
      orow[j] = acc;
    }
  }
  return push(std::move(n));
}

Value Graph::exp(Value a) {
  const Tensor& ta = out_of(a.id);
  Node n;
  n.op = Op::exp;
  n.in = {a.id, -1};
  n.out = std::make_shared<Tensor>(Tensor::zeros(ta.shape));
  for (size_t i = 0; i < ta.data.size(); ++i)
    n.out->data[i] = std::exp(ta.data[i]);
  return push(std::move(n));
}

Value Graph::log(Value a) {
  const Tensor& ta = out_of(a.id);
  for (double v : ta.data) {
    if (!(v > 0.0)) {
      throw DomainError("log: input " + std::to_string(v) +
                        " is not strictly positive");
    }
  }
  Node n;
  n.op = Op::log;
  n.in = {a.id, -1};
  n.out = std::make_shared<Tensor>(Tensor::zeros(ta.shape));
  for (size_t i = 0; i < ta.data.size(); ++i)
    n.out->data[i] = std::log(ta.data[i]);
  return push(std::move(n));
}

Value Graph::sigmoid(Value a) {
  const Tensor& ta = out_of(a.id);
  Node n;
  n.op = Op::sigmoid;
  n.in = {a.id, -1};
  n.out = std::make_shared<Tensor>(Tensor::zeros(ta.shape));
  for (size_t i = 0; i < ta.data.size(); ++i)
    n.out->data[i] = stable_sigmoid(ta.data[i]);
  return push(std::move(n));
}

Value Graph::log_sigmoid(Value a) {
  const Tensor& ta = out_of(a.id);
  Node n;
  n.op = Op::log_sigmoid;
  n.in = {a.id, -1};
  n.out = std::make_shared<Tensor>(Tensor::zeros(ta.shape));
  for (size_t i = 0; i < ta.data.size(); ++i)
    n.out->data[i] = stable_log_sigmoid(ta.data[i]);
  return push(std::move(n));
}

Value Graph::abs(Value a) {
  const Tensor& ta = out_of(a.id);
  Node n;
  n.op = Op::abs;
  n.in = {a.id, -1};
  n.out = std::make_shared<Tensor>(Tensor::zeros(ta.shape));
  for (size_t i = 0; i < ta.data.size(); ++i)
    n.out->data[i] = std::fabs(ta.data[i]);
  return push(std::move(n));
}

Value Graph::clamp_max(Value a, double cap) {
  const Tensor& ta = out_of(a.id);
  Node n;
  n.op = Op::clamp_max;
  n.in = {a.id, -1};
  n.c = cap;
  n.out = std::make_shared<Tensor>(Tensor::zeros(ta.shape));
  for (size_t i = 0; i < ta.data.size(); ++i)
    n.out->data[i] = std::min(ta.data[i], cap);
  return push(std::move(n));
}

Value Graph::mean(Value a) {
  const Tensor& ta = out_of(a.id);
  if (ta.data.empty()) throw ContractError("mean of empty tensor");
  Node n;
  n.op = Op::mean;
  n.in = {a.id, -1};
  double acc = 0.0;
  for (double v : ta.data) acc += v;
  n.out = std::make_shared<Tensor>(
      Tensor::scalar(acc / static_cast<double>(ta.data.size())));
  return push(std::move(n));
}

Value Graph::sum(Value a) {
  const Tensor& ta = out_of(a.id);
  Node n;
  n.op = Op::sum;
  n.in = {a.id, -1};
  double acc = 0.0;
  for (double v : ta.data) acc += v;
  n.out = std::make_shared<Tensor>(Tensor::scalar(acc));
  return push(std::move(n));
}

Value Graph::gather(Value a, std::vector<int> indices) {
  const Tensor& ta = out_of(a.id);
  if (ta.rank() < 1) throw ShapeError("gather: scalar input");
  int rows = ta.shape[0];
  int64_t rowlen = 1;
  for (size_t i = 1; i < ta.shape.size(); ++i) rowlen *= ta.shape[i];
  for (int ix : indices) {
    if (ix < 0 || ix >= rows) {
      throw ContractError("gather: index " + std::to_string(ix) +
                          " out of range for " + shape_str(ta.shape));
    }
  }
  std::vector<int> oshape = ta.shape;
  oshape[0] = static_cast<int>(indices.size());
  Node n;
  n.op = Op::gather;
  n.in = {a.id, -1};
  n.idx = std::move(indices);
  n.out = std::make_shared<Tensor>(Tensor::zeros(oshape));
  for (size_t i = 0; i < n.idx.size(); ++i) {
    std::copy_n(&ta.data[static_cast<size_t>(n.idx[i]) * rowlen], rowlen,
                &n.out->data[i * rowlen]);
  }
  return push(std::move(n));
}

Value Graph::pick(Value a, std::vector<int> indices) {
  const Tensor& ta = out_of(a.id);
  if (ta.rank() != 2 || static_cast<int>(indices.size()) != ta.shape[0]) {
    throw ShapeError("pick: tensor " + shape_str(ta.shape) + " with " +
                     std::to_string(indices.size()) + " indices");
  }
  int cols = ta.shape[1];
  for (int ix : indices) {
    if (ix < 0 || ix >= cols) {
      throw ContractError("pick: index " + std::to_string(ix) +
                          " out of range for " + shape_str(ta.shape));
    }
  }
  Node n;
  n.op = Op::pick;
  n.in = {a.id, -1};
  n.idx = std::move(indices);
  n.out = std::make_shared<Tensor>(
      Tensor::zeros({static_cast<int>(n.idx.size())}));
  for (size_t i = 0; i < n.idx.size(); ++i)
    n.out->data[i] = ta.at(static_cast<int>(i), n.idx[i]);
  return push(std::move(n));
}

Value Graph::log_softmax(Value a) {
  const Tensor& ta = out_of(a.id);
  if (ta.rank() != 1 && ta.rank() != 2) {
    throw ShapeError(std::string("log_softmax: rank must be 1 or 2, got ") +
                     shape_str(ta.shape));
  }
  int cols = ta.shape.back();
  int rows = static_cast<int>(ta.data.size()) / cols;
  if (cols == 0) throw ShapeError("log_softmax: empty axis");
  Node n;
  n.op = Op::log_softmax;
  n.in = {a.id, -1};
  n.out = std::make_shared<Tensor>(Tensor::zeros(ta.shape));
  for (int r = 0; r < rows; ++r) {
    const double* in = &ta.data[static_cast<size_t>(r) * cols];
    double* out = &n.out->data[static_cast<size_t>(r) * cols];
    double mx = in[0];
    for (int j = 1; j < cols; ++j) mx = std::max(mx, in[j]);
    double lse = 0.0;
    for (int j = 0; j < cols; ++j) lse += std::exp(in[j] - mx);
    lse = mx + std::log(lse);
    for (int j = 0; j < cols; ++j) out[j] = in[j] - lse;
  }
  return push(std::move(n));
}

void Graph::backward(Value root) {
  if (root.graph != this) throw ContractError("backward: foreign root");
  const Tensor& rt = out_of(root.id);
  if (rt.rank() != 0) {
    throw ContractError("backward: root has shape " + shape_str(rt.shape) +
                        ", expected scalar");
  }
  // Interior grads live in per-node buffers reset each call; leaf tensors
  // with requires_grad accumulate across calls.
  std::vector<std::vector<double>> gbuf(nodes_.size());
  auto gref = [&](int id) -> std::vector<double>& {
    if (gbuf[id].empty()) gbuf[id].assign(nodes_[id].out->data.size(), 0.0);
    return gbuf[id];
  };
  gref(root.id)[0] = 1.0;

  for (int k = root.id; k >= 0; --k) {
    Node& nd = nodes_[k];
    if (gbuf[k].empty()) continue;  // not reachable from root
    const std::vector<double>& g = gbuf[k];
    const Tensor& out = *nd.out;
    switch (nd.op) {
      case Op::leaf: {
        if (nd.allow_grad && nd.out->requires_grad) {
          nd.out->ensure_grad();
          for (size_t i = 0; i < g.size(); ++i) nd.out->grad[i] += g[i];
        }
        break;
      }
      case Op::add: {
        auto &ga = gref(nd.in[0]), &gb = gref(nd.in[1]);
        for (size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i];
          gb[i] += g[i];
        }
        break;
      }
      case Op::sub: {
        auto &ga = gref(nd.in[0]), &gb = gref(nd.in[1]);
        for (size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i];
          gb[i] -= g[i];
        }
        break;
      }
      case Op::mul: {
        const Tensor &a = out_of(nd.in[0]), &b = out_of(nd.in[1]);
        auto &ga = gref(nd.in[0]), &gb = gref(nd.in[1]);
        for (size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i] * b.data[i];
          gb[i] += g[i] * a.data[i];
        }
        break;
      }
      case Op::scale: {
        auto& ga = gref(nd.in[0]);
        for (size_t i = 0; i < g.size(); ++i) ga[i] += nd.c * g[i];
        break;
      }
      case Op::matmul: {
        const Tensor &a = out_of(nd.in[0]), &b = out_of(nd.in[1]);
        auto &ga = gref(nd.in[0]), &gb = gref(nd.in[1]);
        int m = a.shape[0], kk = a.shape[1], nn = b.shape[1];
        // dA = g . B^T ; dB = A^T . g
        for (int i = 0; i < m; ++i) {
          for (int p = 0; p < kk; ++p) {
            double acc = 0.0;
            const double* grow = &g[static_cast<size_t>(i) * nn];
            const double* brow = &b.data[static_cast<size_t>(p) * nn];
            for (int j = 0; j < nn; ++j) acc += grow[j] * brow[j];
            ga[static_cast<size_t>(i) * kk + p] += acc;
          }
        }
        for (int p = 0; p < kk; ++p) {
          for (int j = 0; j < nn; ++j) {
            double acc = 0.0;
            for (int i = 0; i < m; ++i) {
              acc += a.data[static_cast<size_t>(i) * kk + p] *
                     g[static_cast<size_t>(i) * nn + j];
            }
            gb[static_cast<size_t>(p) * nn + j] += acc;
          }
        }
        break;
      }
      case Op::linear: {
        const Tensor &x = out_of(nd.in[0]), &w = out_of(nd.in[1]);
        auto &gx = gref(nd.in[0]), &gw = gref(nd.in[1]);
        int m = x.shape[0], kk = x.shape[1], nn = w.shape[0];
        // y = x . w^T ; dx = g . w ; dw = g^T . x
        for (int i = 0; i < m; ++i) {
          const double* grow = &g[static_cast<size_t>(i) * nn];
          double* gxrow = &gx[static_cast<size_t>(i) * kk];
          for (int j = 0; j < nn; ++j) {
            double gv = grow[j];
            if (gv == 0.0) continue;
            const double* wrow = &w.data[static_cast<size_t>(j) * kk];
            for (int p = 0; p < kk; ++p) gxrow[p] += gv * wrow[p];
          }
        }
        for (int j = 0; j < nn; ++j) {
          double* gwrow = &gw[static_cast<size_t>(j) * kk];
          for (int i = 0; i < m; ++i) {
            double gv = g[static_cast<size_t>(i) * nn + j];
            if (gv == 0.0) continue;
            const double* xrow = &x.data[static_cast<size_t>(i) * kk];
            for (int p = 0; p < kk; ++p) gwrow[p] += gv * xrow[p];
          }
        }
        break;
      }
      case Op::exp: {
        auto& ga = gref(nd.in[0]);
        for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * out.data[i];
        break;
      }
      case Op::log: {
        const Tensor& a = out_of(nd.in[0]);
        auto& ga = gref(nd.in[0]);
        for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / a.data[i];
        break;
      }
      case Op::sigmoid: {
        auto& ga = gref(nd.in[0]);
        for (size_t i = 0; i < g.size(); ++i)
          ga[i] += g[i] * out.data[i] * (1.0 - out.data[i]);
        break;
      }
      case Op::log_sigmoid: {
        const Tensor& a = out_of(nd.in[0]);
        auto& ga = gref(nd.in[0]);
        for (size_t i = 0; i < g.size(); ++i)
          ga[i] += g[i] * stable_sigmoid(-a.data[i]);
        break;
      }
      case Op::abs: {
        const Tensor& a = out_of(nd.in[0]);
        auto& ga = gref(nd.in[0]);
        for (size_t i = 0; i < g.size(); ++i) {
          double s = a.data[i] > 0.0 ? 1.0 : (a.data[i] < 0.0 ? -1.0 : 0.0);
          ga[i] += g[i] * s;
        }
        break;
      }
      case Op::clamp_max: {
        const Tensor& a = out_of(nd.in[0]);
        auto& ga = gref(nd.in[0]);
        for (size_t i = 0; i < g.size(); ++i) {
          if (a.data[i] < nd.c) ga[i] += g[i];
        }
        break;
      }
      case Op::mean: {
        const Tensor& a = out_of(nd.in[0]);
        auto& ga = gref(nd.in[0]);
        double gv = g[0] / static_cast<double>(a.data.size());
        for (size_t i = 0; i < ga.size(); ++i) ga[i] += gv;
        break;
      }
      case Op::sum: {
        auto& ga = gref(nd.in[0]);
        for (size_t i = 0; i < ga.size(); ++i) ga[i] += g[0];
        break;
      }
      case Op::gather: {
        const Tensor& a = out_of(nd.in[0]);
        auto& ga = gref(nd.in[0]);
        int64_t rowlen = 1;
        for (size_t i = 1; i < a.shape.size(); ++i) rowlen *= a.shape[i];
        for (size_t i = 0; i < nd.idx.size(); ++i) {
          const double* grow = &g[i * rowlen];
          double* garow = &ga[static_cast<size_t>(nd.idx[i]) * rowlen];
          for (int64_t j = 0; j < rowlen; ++j) garow[j] += grow[j];
        }
        break;
      }
      case Op::pick: {
        const Tensor& a = out_of(nd.in[0]);
        auto& ga = gref(nd.in[0]);
        int cols = a.shape[1];
        for (size_t i = 0; i < nd.idx.size(); ++i)
          ga[i * cols + nd.idx[i]] += g[i];
        break;
      }
      case Op::log_softmax: {
        auto& ga = gref(nd.in[0]);
        int cols = out.shape.back();
        int rows = static_cast<int>(out.data.size()) / cols;
        for (int r = 0; r < rows; ++r) {
          const double* grow = &g[static_cast<size_t>(r) * cols];
          const double* orow = &out.data[static_cast<size_t>(r) * cols];
          double* garow = &ga[static_cast<size_t>(r) * cols];
          double gsum = 0.0;
          for (int j = 0; j < cols; ++j) gsum += grow[j];
          for (int j = 0; j < cols; ++j)
            garow[j] += grow[j] - std::exp(orow[j]) * gsum;
        }
        break;
      }
    }
  }
}

}  // namespace xalma
