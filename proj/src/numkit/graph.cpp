// Copyright 2026 The hprior Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "numkit/graph.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace hprior::numkit {

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Input: return "input";
    case OpKind::Param: return "param";
    case OpKind::Const: return "const";
    case OpKind::MatMul: return "matmul";
    case OpKind::AddBias: return "add_bias";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Scale: return "scale";
    case OpKind::AddScalar: return "add_scalar";
    case OpKind::Tanh: return "tanh";
    case OpKind::Exp: return "exp";
    case OpKind::Log: return "log";
    case OpKind::Sqrt: return "sqrt";
    case OpKind::Clamp: return "clamp";
    case OpKind::LogSoftmax: return "log_softmax";
    case OpKind::RowSum: return "row_sum";
    case OpKind::ReduceSum: return "reduce_sum";
  }
  return "?";
}

namespace {

bool is_matrix(const Shape& s) { return s.size() == 2; }

}  // namespace

const ComputeGraph::Node& ComputeGraph::node(NodeId id) const {
  require(id.valid() && id.index < nodes_.size(), ErrorKind::Usage,
          "node id ", id.index, " does not belong to this graph");
  return nodes_[id.index];
}

std::string ComputeGraph::label(std::size_t i) const {
  const Node& n = nodes_[i];
  std::string s = std::string(op_name(n.kind)) + "#" + std::to_string(i);
  if (!n.name.empty()) s += " '" + n.name + "'";
  return s;
}

NodeId ComputeGraph::push(Node n) {
  forwarded_ = false;
  nodes_.push_back(std::move(n));
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeId ComputeGraph::input(const std::string& name, Shape shape) {
  Node n{OpKind::Input, {}, {}, std::move(shape)};
  n.name = name;
  return push(std::move(n));
}

NodeId ComputeGraph::param(const std::string& name, Shape shape) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == OpKind::Param && nodes_[i].name == name) {
      require(nodes_[i].shape == shape, ErrorKind::Shape, "param '", name,
              "' redeclared with shape ", shape_str(shape), ", expected ",
              shape_str(nodes_[i].shape));
      return NodeId{static_cast<std::uint32_t>(i)};
    }
  }
  Node n{OpKind::Param, {}, {}, std::move(shape)};
  n.name = name;
  n.needs_grad = true;
  return push(std::move(n));
}

NodeId ComputeGraph::constant(Tensor value) {
  Node n{OpKind::Const, {}, {}, value.shape()};
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId ComputeGraph::unary(OpKind kind, NodeId a, double p0, double p1) {
  const Node& in = node(a);
  Shape out = in.shape;
  if (kind == OpKind::LogSoftmax || kind == OpKind::RowSum) {
    require(is_matrix(in.shape), ErrorKind::Shape, op_name(kind),
            " expects a rank-2 operand, got ", shape_str(in.shape));
    if (kind == OpKind::RowSum) out = {in.shape[0], 1};
  } else if (kind == OpKind::ReduceSum) {
    out = {};
  }
  Node n{kind, a, {}, std::move(out), p0, p1};
  n.needs_grad = in.needs_grad;
  return push(std::move(n));
}

NodeId ComputeGraph::binary_same(OpKind kind, NodeId a, NodeId b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require(na.shape == nb.shape, ErrorKind::Shape, op_name(kind),
          ": operand shapes differ, expected ", shape_str(na.shape), " got ",
          shape_str(nb.shape));
  Node n{kind, a, b, na.shape};
  n.needs_grad = na.needs_grad || nb.needs_grad;
  return push(std::move(n));
}

NodeId ComputeGraph::matmul(NodeId a, NodeId b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require(is_matrix(na.shape) && is_matrix(nb.shape) &&
              na.shape[1] == nb.shape[0],
          ErrorKind::Shape, "matmul: cannot multiply ", shape_str(na.shape),
          " by ", shape_str(nb.shape));
  Node n{OpKind::MatMul, a, b, {na.shape[0], nb.shape[1]}};
  n.needs_grad = na.needs_grad || nb.needs_grad;
  return push(std::move(n));
}

NodeId ComputeGraph::add_bias(NodeId a, NodeId bias) {
  const Node& na = node(a);
  const Node& nb = node(bias);
  require(is_matrix(na.shape) && nb.shape == Shape{1, na.shape[1]},
          ErrorKind::Shape, "add_bias: expected bias ",
          shape_str({1, is_matrix(na.shape) ? na.shape[1] : 0}), " for ",
          shape_str(na.shape), ", got ", shape_str(nb.shape));
  Node n{OpKind::AddBias, a, bias, na.shape};
  n.needs_grad = na.needs_grad || nb.needs_grad;
  return push(std::move(n));
}

NodeId ComputeGraph::add(NodeId a, NodeId b) { return binary_same(OpKind::Add, a, b); }
NodeId ComputeGraph::sub(NodeId a, NodeId b) { return binary_same(OpKind::Sub, a, b); }
NodeId ComputeGraph::mul(NodeId a, NodeId b) { return binary_same(OpKind::Mul, a, b); }
NodeId ComputeGraph::scale(NodeId a, double c) { return unary(OpKind::Scale, a, c); }
NodeId ComputeGraph::add_scalar(NodeId a, double c) { return unary(OpKind::AddScalar, a, c); }
NodeId ComputeGraph::tanh(NodeId a) { return unary(OpKind::Tanh, a); }
NodeId ComputeGraph::exp(NodeId a) { return unary(OpKind::Exp, a); }
NodeId ComputeGraph::log(NodeId a) { return unary(OpKind::Log, a); }
NodeId ComputeGraph::sqrt(NodeId a) { return unary(OpKind::Sqrt, a); }
NodeId ComputeGraph::log_softmax(NodeId a) { return unary(OpKind::LogSoftmax, a); }
NodeId ComputeGraph::row_sum(NodeId a) { return unary(OpKind::RowSum, a); }
NodeId ComputeGraph::reduce_sum(NodeId a) { return unary(OpKind::ReduceSum, a); }

NodeId ComputeGraph::clamp(NodeId a, double lo, double hi) {
  require(lo <= hi, ErrorKind::Argument, "clamp: lo > hi");
  return unary(OpKind::Clamp, a, lo, hi);
}

void ComputeGraph::mark_output(const std::string& name, NodeId id) {
  node(id);
  outputs_.emplace_back(name, id);
}

const Tensor& ComputeGraph::value(NodeId id) const {
  const Node& n = node(id);
  require(forwarded_ || n.kind == OpKind::Const, ErrorKind::Usage,
          "value requested before forward()");
  return n.value;
}

const Shape& ComputeGraph::shape(NodeId id) const { return node(id).shape; }

void ComputeGraph::eval(std::size_t i) {
  Node& n = nodes_[i];
  const Tensor* a = n.a.valid() ? &nodes_[n.a.index].value : nullptr;
  const Tensor* b = n.b.valid() ? &nodes_[n.b.index].value : nullptr;
  Tensor out(n.shape);
  auto map1 = [&](auto f) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = f((*a)[k]);
  };
  auto map2 = [&](auto f) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = f((*a)[k], (*b)[k]);
  };
  switch (n.kind) {
    case OpKind::Input:
    case OpKind::Param:
    case OpKind::Const:
      return;
    case OpKind::MatMul: {
      const std::size_t m = a->rows(), kk = a->cols(), cols = b->cols();
      for (std::size_t r = 0; r < m; ++r) {
        double* orow = &out[r * cols];
        for (std::size_t p = 0; p < kk; ++p) {
          const double av = (*a)[r * kk + p];
          if (av == 0.0) continue;
          const double* brow = &(*b)[p * cols];
          for (std::size_t c = 0; c < cols; ++c) orow[c] += av * brow[c];
        }
      }
      break;
    }
    case OpKind::AddBias: {
      const std::size_t cols = out.cols();
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = (*a)[k] + (*b)[k % cols];
      break;
    }
    case OpKind::Add: map2([](double x, double y) { return x + y; }); break;
    case OpKind::Sub: map2([](double x, double y) { return x - y; }); break;
    case OpKind::Mul: map2([](double x, double y) { return x * y; }); break;
    case OpKind::Scale: map1([c = n.p0](double x) { return c * x; }); break;
    case OpKind::AddScalar: map1([c = n.p0](double x) { return x + c; }); break;
    case OpKind::Tanh: map1([](double x) { return std::tanh(x); }); break;
    case OpKind::Exp: map1([](double x) { return std::exp(x); }); break;
    case OpKind::Log: map1([](double x) { return std::log(x); }); break;
    case OpKind::Sqrt: map1([](double x) { return std::sqrt(x); }); break;
    case OpKind::Clamp:
      map1([lo = n.p0, hi = n.p1](double x) { return std::clamp(x, lo, hi); });
      break;
    case OpKind::LogSoftmax: {
      const std::size_t m = out.rows(), cols = out.cols();
      for (std::size_t r = 0; r < m; ++r) {
        const double* in = &(*a)[r * cols];
        double mx = in[0];
        for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, in[c]);
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) s += std::exp(in[c] - mx);
        const double lse = mx + std::log(s);
        for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = in[c] - lse;
      }
      break;
    }
    case OpKind::RowSum: {
      const std::size_t m = a->rows(), cols = a->cols();
      for (std::size_t r = 0; r < m; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) s += (*a)[r * cols + c];
        out[r] = s;
      }
      break;
    }
    case OpKind::ReduceSum: {
      double s = 0.0;
      for (double v : a->values()) s += v;
      out[0] = s;
      break;
    }
  }
  n.value = std::move(out);
}

TensorMap ComputeGraph::forward(const TensorMap& inputs, const TensorMap& params) {
  forwarded_ = false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    if (n.kind == OpKind::Input || n.kind == OpKind::Param) {
      const TensorMap& src = n.kind == OpKind::Input ? inputs : params;
      auto it = src.find(n.name);
      require(it != src.end(), ErrorKind::Shape, label(i), ": no value supplied");
      require(it->second.shape() == n.shape, ErrorKind::Shape, label(i),
              ": expected shape ", shape_str(n.shape), ", got ",
              shape_str(it->second.shape()));
      n.value = it->second;
    } else {
      eval(i);
    }
    require(n.value.all_finite(), ErrorKind::Numeric, "non-finite value produced by ",
            label(i));
  }
  forwarded_ = true;
  TensorMap out;
  for (const auto& [name, id] : outputs_) out[name] = nodes_[id.index].value;
  return out;
}

void ComputeGraph::propagate(std::size_t i) {
  Node& n = nodes_[i];
  const Tensor& g = n.grad;
  Node* na = n.a.valid() ? &nodes_[n.a.index] : nullptr;
  Node* nb = n.b.valid() ? &nodes_[n.b.index] : nullptr;
  auto want = [](Node* x) {
    if (!x || !x->needs_grad) return false;
    if (x->grad.size() != x->value.size()) x->grad = Tensor(x->shape);
    return true;
  };
  const bool ga = want(na);
  const bool gb = want(nb);
  if (!ga && !gb) return;
  const Tensor& av = na ? na->value : g;
  const Tensor& y = n.value;

  auto each_a = [&](auto f) {
    for (std::size_t k = 0; k < g.size(); ++k) na->grad[k] += f(k);
  };

  switch (n.kind) {
    case OpKind::Input:
    case OpKind::Param:
    case OpKind::Const:
      return;
    case OpKind::MatMul: {
      const Tensor& bv = nb->value;
      const std::size_t m = av.rows(), kk = av.cols(), cols = bv.cols();
      if (ga) {
        for (std::size_t r = 0; r < m; ++r) {
          const double* grow = &g[r * cols];
          for (std::size_t p = 0; p < kk; ++p) {
            const double* brow = &bv[p * cols];
            double s = 0.0;
            for (std::size_t c = 0; c < cols; ++c) s += grow[c] * brow[c];
            na->grad[r * kk + p] += s;
          }
        }
      }
      if (gb) {
        for (std::size_t r = 0; r < m; ++r) {
          const double* grow = &g[r * cols];
          for (std::size_t p = 0; p < kk; ++p) {
            const double a_rp = av[r * kk + p];
            if (a_rp == 0.0) continue;
            double* dst = &nb->grad[p * cols];
            for (std::size_t c = 0; c < cols; ++c) dst[c] += a_rp * grow[c];
          }
        }
      }
      return;
    }
    case OpKind::AddBias: {
      if (ga) each_a([&](std::size_t k) { return g[k]; });
      if (gb) {
        const std::size_t cols = g.cols(), m = g.rows();
        for (std::size_t r = 0; r < m; ++r)
          for (std::size_t c = 0; c < cols; ++c) nb->grad[c] += g[r * cols + c];
      }
      return;
    }
    case OpKind::Add:
      if (ga) each_a([&](std::size_t k) { return g[k]; });
      if (gb) for (std::size_t k = 0; k < g.size(); ++k) nb->grad[k] += g[k];
      return;
    case OpKind::Sub:
      if (ga) each_a([&](std::size_t k) { return g[k]; });
      if (gb) for (std::size_t k = 0; k < g.size(); ++k) nb->grad[k] -= g[k];
      return;
    case OpKind::Mul: {
      const Tensor& bv = nb->value;
      if (ga) each_a([&](std::size_t k) { return g[k] * bv[k]; });
      if (gb) for (std::size_t k = 0; k < g.size(); ++k) nb->grad[k] += g[k] * av[k];
      return;
    }
    case OpKind::Scale:
      each_a([&](std::size_t k) { return n.p0 * g[k]; });
      return;
    case OpKind::AddScalar:
      each_a([&](std::size_t k) { return g[k]; });
      return;
    case OpKind::Tanh:
      each_a([&](std::size_t k) { return g[k] * (1.0 - y[k] * y[k]); });
      return;
    case OpKind::Exp:
      each_a([&](std::size_t k) { return g[k] * y[k]; });
      return;
    case OpKind::Log:
      each_a([&](std::size_t k) { return g[k] / av[k]; });
      return;
    case OpKind::Sqrt:
      // d/dx sqrt(x) is unbounded at 0; the subgradient 0 is used there.
      each_a([&](std::size_t k) { return y[k] > 0.0 ? g[k] * 0.5 / y[k] : 0.0; });
      return;
    case OpKind::Clamp:
      each_a([&](std::size_t k) {
        return (av[k] >= n.p0 && av[k] <= n.p1) ? g[k] : 0.0;
      });
      return;
    case OpKind::LogSoftmax: {
      const std::size_t m = g.rows(), cols = g.cols();
      for (std::size_t r = 0; r < m; ++r) {
        double gs = 0.0;
        for (std::size_t c = 0; c < cols; ++c) gs += g[r * cols + c];
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t k = r * cols + c;
          na->grad[k] += g[k] - std::exp(y[k]) * gs;
        }
      }
      return;
    }
    case OpKind::RowSum: {
      const std::size_t m = av.rows(), cols = av.cols();
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < cols; ++c) na->grad[r * cols + c] += g[r];
      return;
    }
    case OpKind::ReduceSum: {
      const double g0 = g[0];
      for (std::size_t k = 0; k < na->grad.size(); ++k) na->grad[k] += g0;
      return;
    }
  }
}

GradientMap ComputeGraph::backward(NodeId loss) {
  require(forwarded_, ErrorKind::Usage, "backward() called before forward()");
  const Node& ln = node(loss);
  require(ln.value.size() == 1, ErrorKind::Shape, "backward: loss ",
          label(loss.index), " is not a scalar (shape ", shape_str(ln.shape), ")");
  for (auto& n : nodes_) n.grad = Tensor();
  Node& root = nodes_[loss.index];
  root.grad = Tensor(root.shape, 1.0);
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    propagate(i);
  }
  GradientMap grads;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    if (n.kind != OpKind::Param) continue;
    Tensor g = n.grad.size() ? std::move(n.grad) : Tensor(n.shape);
    require(g.all_finite(), ErrorKind::Numeric, "non-finite gradient for ", label(i));
    grads.emplace(n.name, std::move(g));
  }
  return grads;
}

}  // namespace hprior::numkit
