#pragma once

#include "cib/error.hpp"
#include "cib/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cib::diff {

enum class Op : std::uint8_t {
  leaf,
  matmul,
  transpose,
  add,
  sub,
  mul,
  div,
  scale,
  add_scalar,
  exp,
  log,
  square,
  sqrt,
  softplus,
  sigmoid,
  elu,
  elu_prime,
  relu,
  clamp,
  sum_all,
  reduce_to,
  broadcast_to,
  concat_cols,
  slice_cols,
  embed_cols,
  stop_gradient,
};

std::string_view op_name(Op op);

using NodeId = std::size_t;
class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  Shape shape() const;
  /// Value of a 1x1 node.
  double item() const;
  bool requires_grad() const;

  Graph& graph() const { return *graph_; }
  NodeId id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* graph, NodeId id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  NodeId id_ = 0;
};

/// Tape of eagerly evaluated operations. Every op appends one node whose
/// inputs are earlier nodes, so insertion order is a topological order.
///
/// Backward rules are themselves expressed as graph ops. `grad` keeps the
/// nodes it creates, which makes the returned gradients differentiable
/// (used for the critic's input-gradient penalty). `gradient` and `backward`
/// discard them and return plain values.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Leaf that never receives gradients.
  Var constant(Tensor value, std::string name = {});
  /// Leaf that receives gradients but is not a trainable parameter.
  Var variable(Tensor value, std::string name = {});
  /// Trainable leaf; `backward` reports its gradient under `name`.
  Var parameter(std::string name, Tensor value);

  /// Differentiable gradients of scalar `output` w.r.t. `wrt`. Inputs that
  /// `output` does not depend on get a zero constant.
  std::vector<Var> grad(Var output, std::span<const Var> wrt);
  /// Gradient values of scalar `output` w.r.t. `wrt`, scaled by `seed`.
  std::vector<Tensor> gradient(Var output, std::span<const Var> wrt, double seed = 1.0);
  /// d(output)/d(p) for every parameter node created before `output`.
  std::map<std::string, Tensor> backward(Var output, double seed = 1.0);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<NodeId>& parameter_nodes() const { return parameters_; }
  std::string_view name(NodeId id) const { return nodes_.at(id).name; }

  // Op construction used by the free functions below.
  Var apply(Op op, Var a, Var b = {}, double s0 = 0.0, double s1 = 0.0, Shape dims = {0, 0});

 private:
  struct Node {
    Op op = Op::leaf;
    NodeId a = 0;
    NodeId b = 0;
    int arity = 0;
    double s0 = 0.0;
    double s1 = 0.0;
    Shape dims{0, 0};
    Tensor value;
    bool requires_grad = false;
    bool is_parameter = false;
    std::string name;
  };

  friend class Var;

  Var push(Node node);
  Tensor evaluate(const Node& node) const;
  // Reverse sweep from `output`; returns per-node gradient node ids
  // (npos where no gradient flows).
  std::vector<NodeId> sweep(Var output, Var seed);
  void vjp(NodeId id, NodeId upstream, std::vector<NodeId>& grads);
  void accumulate(std::vector<NodeId>& grads, NodeId target, Var contribution);
  [[noreturn]] void fail(Op op, const std::string& detail) const;

  std::deque<Node> nodes_;
  std::vector<NodeId> parameters_;
};

// Linear algebra and elementwise arithmetic. Binary elementwise ops
// broadcast extents equal to 1 (e.g. [n,m] + [1,m]).
Var matmul(Var a, Var b);
Var transpose(Var a);
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator*(Var a, double c);
Var operator*(double c, Var a);
Var operator/(Var a, double c);
Var operator+(Var a, double c);
Var operator+(double c, Var a);
Var operator-(Var a, double c);
Var operator-(double c, Var a);

Var exp(Var a);
Var log(Var a);
Var square(Var a);
Var sqrt(Var a);
Var softplus(Var a);
Var sigmoid(Var a);
Var elu(Var a);
/// Derivative of elu, itself differentiable.
Var elu_prime(Var a);
Var relu(Var a);
Var clamp(Var a, double lo, double hi);

/// Sum of all entries as a 1x1 node.
Var sum(Var a);
Var mean(Var a);
/// Column sums, [n,m] -> [1,m].
Var sum_rows(Var a);
/// Row sums, [n,m] -> [n,1].
Var sum_cols(Var a);
Var broadcast_to(Var a, Shape shape);
Var reduce_to(Var a, Shape shape);
Var concat_cols(Var a, Var b);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
/// Identity forward, zero backward.
Var stop_gradient(Var a);
/// log(mean(exp(a))) over all entries, shifted by the max for stability.
Var log_mean_exp(Var a);

/// Named-input entry point: binds every entry of `inputs` as a constant
/// leaf and runs `program` over the bound nodes.
using Program = std::function<Var(Graph&, const std::map<std::string, Var>&)>;
Var forward(Graph& graph, const Program& program, const std::map<std::string, Tensor>& inputs);

/// Lookup helper for programs; throws when `name` is not bound.
Var input(const std::map<std::string, Var>& bound, const std::string& name);

/// Central differences (f(p + h e_i) - f(p - h e_i)) / 2h per coordinate.
Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f, const Tensor& p,
                                  double h);

}  // namespace cib::diff
