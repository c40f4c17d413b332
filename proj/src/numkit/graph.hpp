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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "numkit/tensor.hpp"

namespace hprior::numkit {

enum class OpKind : std::uint8_t {
  Input,
  Param,
  Const,
  MatMul,
  AddBias,
  Add,
  Sub,
  Mul,
  Scale,
  AddScalar,
  Tanh,
  Exp,
  Log,
  Sqrt,
  Clamp,
  LogSoftmax,
  RowSum,
  ReduceSum,
};

const char* op_name(OpKind kind);

struct NodeId {
  std::uint32_t index = UINT32_MAX;
  bool valid() const { return index != UINT32_MAX; }
};

using GradientMap = TensorMap;

/// Reverse-mode differentiable computation over a fixed primitive set.
///
/// The graph is defined first (shapes are inferred and checked while
/// building), then evaluated with forward() against named inputs and a
/// parameter set, and finally differentiated with backward(). Nodes are
/// stored in definition order, which is a topological order.
class ComputeGraph {
 public:
  NodeId input(const std::string& name, Shape shape);
  NodeId param(const std::string& name, Shape shape);
  NodeId constant(Tensor value);

  NodeId matmul(NodeId a, NodeId b);
  /// a[m x n] + bias[1 x n] broadcast over rows.
  NodeId add_bias(NodeId a, NodeId bias);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double c);
  NodeId add_scalar(NodeId a, double c);
  NodeId tanh(NodeId a);
  NodeId exp(NodeId a);
  NodeId log(NodeId a);
  NodeId sqrt(NodeId a);
  /// Gradient is passed through inside [lo, hi] and zero outside.
  NodeId clamp(NodeId a, double lo, double hi);
  /// Row-wise log-softmax of a rank-2 tensor.
  NodeId log_softmax(NodeId a);
  /// [m x n] -> [m x 1]
  NodeId row_sum(NodeId a);
  /// Sum of all entries -> scalar.
  NodeId reduce_sum(NodeId a);

  void mark_output(const std::string& name, NodeId id);

  /// Evaluates every node. Throws Shape errors for mismatched feeds and
  /// Numeric errors for non-finite values.
  TensorMap forward(const TensorMap& inputs, const TensorMap& params);

  /// Gradient of a scalar node with respect to every parameter leaf.
  GradientMap backward(NodeId loss);

  const Tensor& value(NodeId id) const;
  const Shape& shape(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }
  bool forwarded() const { return forwarded_; }

 private:
  struct Node {
    Node(OpKind k, NodeId x, NodeId y, Shape s, double q0 = 0.0, double q1 = 0.0)
        : kind(k), a(x), b(y), shape(std::move(s)), p0(q0), p1(q1) {}
    OpKind kind;
    NodeId a, b;
    Shape shape;
    double p0 = 0.0, p1 = 0.0;
    std::string name;
    bool needs_grad = false;
    Tensor value;
    Tensor grad;
  };

  NodeId push(Node node);
  NodeId unary(OpKind kind, NodeId a, double p0 = 0.0, double p1 = 0.0);
  NodeId binary_same(OpKind kind, NodeId a, NodeId b);
  const Node& node(NodeId id) const;
  std::string label(std::size_t i) const;
  void eval(std::size_t i);
  void propagate(std::size_t i);

  std::vector<Node> nodes_;
  std::vector<std::pair<std::string, NodeId>> outputs_;
  bool forwarded_ = false;
};

}  // namespace hprior::numkit
