#include "cib/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cib::diff {
namespace {

constexpr NodeId kNone = std::numeric_limits<NodeId>::max();

bool broadcastable(Eigen::Index from, Eigen::Index to) { return from == to || from == 1; }

Tensor expand(const Tensor& t, const Shape& s) {
  if (t.rows() == s[0] && t.cols() == s[1]) return t;
  return t.replicate(t.rows() == s[0] ? 1 : s[0], t.cols() == s[1] ? 1 : s[1]);
}

Tensor reduce(const Tensor& t, const Shape& s) {
  if (t.rows() == s[0] && t.cols() == s[1]) return t;
  Tensor out = t;
  if (s[0] == 1 && t.rows() != 1) out = Tensor(out.colwise().sum());
  if (s[1] == 1 && t.cols() != 1) out = Tensor(out.rowwise().sum());
  return out;
}

double softplus_value(double x) {
  // log(1 + e^x) without overflow
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid_value(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string_view op_name(Op op) {
  switch (op) {
    case Op::leaf: return "leaf";
    case Op::matmul: return "matmul";
    case Op::transpose: return "transpose";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::scale: return "scale";
    case Op::add_scalar: return "add_scalar";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::square: return "square";
    case Op::sqrt: return "sqrt";
    case Op::softplus: return "softplus";
    case Op::sigmoid: return "sigmoid";
    case Op::elu: return "elu";
    case Op::elu_prime: return "elu_prime";
    case Op::relu: return "relu";
    case Op::clamp: return "clamp";
    case Op::sum_all: return "sum_all";
    case Op::reduce_to: return "reduce_to";
    case Op::broadcast_to: return "broadcast_to";
    case Op::concat_cols: return "concat_cols";
    case Op::slice_cols: return "slice_cols";
    case Op::embed_cols: return "embed_cols";
    case Op::stop_gradient: return "stop_gradient";
  }
  return "unknown";
}

const Tensor& Var::value() const { return graph_->nodes_.at(id_).value; }

Shape Var::shape() const { return shape_of(value()); }

double Var::item() const {
  const Tensor& v = value();
  if (v.size() != 1) throw ShapeError("item() on non-scalar node " + std::to_string(id_) + " " + shape_string(shape()));
  return v(0, 0);
}

bool Var::requires_grad() const { return graph_->nodes_.at(id_).requires_grad; }

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::constant(Tensor value, std::string name) {
  Node n;
  n.value = std::move(value);
  n.name = std::move(name);
  return push(std::move(n));
}

Var Graph::variable(Tensor value, std::string name) {
  Node n;
  n.value = std::move(value);
  n.name = std::move(name);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Graph::parameter(std::string name, Tensor value) {
  Node n;
  n.value = std::move(value);
  n.name = std::move(name);
  n.requires_grad = true;
  n.is_parameter = true;
  Var v = push(std::move(n));
  parameters_.push_back(v.id());
  return v;
}

void Graph::fail(Op op, const std::string& detail) const {
  throw ShapeError("node " + std::to_string(nodes_.size()) + " (" + std::string(op_name(op)) + "): " + detail);
}

Var Graph::apply(Op op, Var a, Var b, double s0, double s1, Shape dims) {
  if (!a.valid() || a.graph_ != this) fail(op, "operand belongs to another graph");
  Node n;
  n.op = op;
  n.a = a.id();
  n.arity = 1;
  n.s0 = s0;
  n.s1 = s1;
  n.dims = dims;
  n.requires_grad = nodes_[n.a].requires_grad;
  if (b.valid()) {
    if (b.graph_ != this) fail(op, "operand belongs to another graph");
    n.b = b.id();
    n.arity = 2;
    n.requires_grad = n.requires_grad || nodes_[n.b].requires_grad;
  }
  if (op == Op::stop_gradient) n.requires_grad = false;
  n.value = evaluate(n);
  return push(std::move(n));
}

Tensor Graph::evaluate(const Node& n) const {
  const Tensor& a = nodes_[n.a].value;
  const Shape sa = shape_of(a);
  switch (n.op) {
    case Op::leaf:
      return a;
    case Op::matmul: {
      const Tensor& b = nodes_[n.b].value;
      if (a.cols() != b.rows())
        fail(n.op, "inner extents differ: " + shape_string(sa) + " x " + shape_string(shape_of(b)));
      return a * b;
    }
    case Op::transpose:
      return a.transpose();
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div: {
      const Tensor& b = nodes_[n.b].value;
      const Shape out{std::max(a.rows(), b.rows()), std::max(a.cols(), b.cols())};
      if (!broadcastable(a.rows(), out[0]) || !broadcastable(a.cols(), out[1]) ||
          !broadcastable(b.rows(), out[0]) || !broadcastable(b.cols(), out[1]))
        fail(n.op, "cannot broadcast " + shape_string(sa) + " with " + shape_string(shape_of(b)));
      const Tensor ea = expand(a, out);
      const Tensor eb = expand(b, out);
      if (n.op == Op::add) return ea + eb;
      if (n.op == Op::sub) return ea - eb;
      if (n.op == Op::mul) return ea.cwiseProduct(eb);
      return ea.cwiseQuotient(eb);
    }
    case Op::scale:
      return a * n.s0;
    case Op::add_scalar:
      return (a.array() + n.s0).matrix();
    case Op::exp:
      return a.array().exp().matrix();
    case Op::log:
      return a.array().log().matrix();
    case Op::square:
      return a.array().square().matrix();
    case Op::sqrt:
      return a.array().sqrt().matrix();
    case Op::softplus:
      return a.unaryExpr(&softplus_value);
    case Op::sigmoid:
      return a.unaryExpr(&sigmoid_value);
    case Op::elu:
      return a.unaryExpr([](double x) { return x > 0.0 ? x : std::expm1(x); });
    case Op::elu_prime:
      return a.unaryExpr([](double x) { return x > 0.0 ? 1.0 : std::exp(x); });
    case Op::relu:
      return a.cwiseMax(0.0);
    case Op::clamp:
      return a.cwiseMax(n.s0).cwiseMin(n.s1);
    case Op::sum_all:
      return scalar_tensor(a.sum());
    case Op::reduce_to:
      if (!broadcastable(n.dims[0], a.rows()) || !broadcastable(n.dims[1], a.cols()))
        fail(n.op, "cannot reduce " + shape_string(sa) + " to " + shape_string(n.dims));
      return reduce(a, n.dims);
    case Op::broadcast_to:
      if (!broadcastable(a.rows(), n.dims[0]) || !broadcastable(a.cols(), n.dims[1]))
        fail(n.op, "cannot broadcast " + shape_string(sa) + " to " + shape_string(n.dims));
      return expand(a, n.dims);
    case Op::concat_cols: {
      const Tensor& b = nodes_[n.b].value;
      if (a.rows() != b.rows())
        fail(n.op, "row counts differ: " + shape_string(sa) + " | " + shape_string(shape_of(b)));
      Tensor out(a.rows(), a.cols() + b.cols());
      out << a, b;
      return out;
    }
    case Op::slice_cols: {
      const auto start = n.dims[0];
      const auto count = n.dims[1];
      if (start < 0 || count < 0 || start + count > a.cols())
        fail(n.op, "columns [" + std::to_string(start) + ", " + std::to_string(start + count) +
                       ") out of range for " + shape_string(sa));
      return a.middleCols(start, count);
    }
    case Op::embed_cols: {
      const auto start = n.dims[0];
      const auto total = n.dims[1];
      if (start < 0 || start + a.cols() > total)
        fail(n.op, "cannot embed " + shape_string(sa) + " at column " + std::to_string(start));
      Tensor out = Tensor::Zero(a.rows(), total);
      out.middleCols(start, a.cols()) = a;
      return out;
    }
    case Op::stop_gradient:
      return a;
  }
  fail(n.op, "unhandled op");
}

void Graph::accumulate(std::vector<NodeId>& grads, NodeId target, Var contribution) {
  if (grads[target] == kNone) {
    grads[target] = contribution.id();
  } else {
    grads[target] = (Var(this, grads[target]) + contribution).id();
  }
}

void Graph::vjp(NodeId id, NodeId upstream, std::vector<NodeId>& grads) {
  // Copy what is needed: pushing nodes never invalidates deque references,
  // but keeping the rule self-contained reads better.
  const Op op = nodes_[id].op;
  const NodeId ia = nodes_[id].a;
  const NodeId ib = nodes_[id].b;
  const double s0 = nodes_[id].s0;
  const double s1 = nodes_[id].s1;
  const Shape dims = nodes_[id].dims;
  const bool need_a = nodes_[ia].requires_grad;
  const bool need_b = nodes_[id].arity == 2 && nodes_[ib].requires_grad;

  const Var g(this, upstream);
  const Var out(this, id);
  const Var a(this, ia);
  const Var b = nodes_[id].arity == 2 ? Var(this, ib) : Var();
  const Shape sa = a.shape();

  auto mask = [&](auto pred) {
    const Tensor& av = nodes_[ia].value;
    Tensor m(av.rows(), av.cols());
    for (Eigen::Index i = 0; i < av.size(); ++i) m.data()[i] = pred(av.data()[i]) ? 1.0 : 0.0;
    return constant(std::move(m));
  };

  switch (op) {
    case Op::leaf:
    case Op::stop_gradient:
      return;
    case Op::matmul:
      if (need_a) accumulate(grads, ia, matmul(g, transpose(b)));
      if (need_b) accumulate(grads, ib, matmul(transpose(a), g));
      return;
    case Op::transpose:
      accumulate(grads, ia, transpose(g));
      return;
    case Op::add:
      if (need_a) accumulate(grads, ia, reduce_to(g, sa));
      if (need_b) accumulate(grads, ib, reduce_to(g, b.shape()));
      return;
    case Op::sub:
      if (need_a) accumulate(grads, ia, reduce_to(g, sa));
      if (need_b) accumulate(grads, ib, reduce_to(-g, b.shape()));
      return;
    case Op::mul:
      if (need_a) accumulate(grads, ia, reduce_to(g * b, sa));
      if (need_b) accumulate(grads, ib, reduce_to(g * a, b.shape()));
      return;
    case Op::div:
      if (need_a) accumulate(grads, ia, reduce_to(g / b, sa));
      if (need_b) accumulate(grads, ib, reduce_to(-(g * out / b), b.shape()));
      return;
    case Op::scale:
      accumulate(grads, ia, g * s0);
      return;
    case Op::add_scalar:
      accumulate(grads, ia, g);
      return;
    case Op::exp:
      accumulate(grads, ia, g * out);
      return;
    case Op::log:
      accumulate(grads, ia, g / a);
      return;
    case Op::square:
      accumulate(grads, ia, (g * a) * 2.0);
      return;
    case Op::sqrt:
      accumulate(grads, ia, (g / out) * 0.5);
      return;
    case Op::softplus:
      accumulate(grads, ia, g * sigmoid(a));
      return;
    case Op::sigmoid:
      accumulate(grads, ia, g * (out - square(out)));
      return;
    case Op::elu:
      accumulate(grads, ia, g * elu_prime(a));
      return;
    case Op::elu_prime:
      accumulate(grads, ia, g * (mask([](double x) { return x <= 0.0; }) * out));
      return;
    case Op::relu:
      accumulate(grads, ia, g * mask([](double x) { return x > 0.0; }));
      return;
    case Op::clamp:
      accumulate(grads, ia, g * mask([s0, s1](double x) { return x > s0 && x < s1; }));
      return;
    case Op::sum_all:
    case Op::reduce_to:
      accumulate(grads, ia, broadcast_to(g, sa));
      return;
    case Op::broadcast_to:
      accumulate(grads, ia, reduce_to(g, sa));
      return;
    case Op::concat_cols:
      if (need_a) accumulate(grads, ia, slice_cols(g, 0, sa[1]));
      if (need_b) accumulate(grads, ib, slice_cols(g, sa[1], b.shape()[1]));
      return;
    case Op::slice_cols:
      accumulate(grads, ia, apply(Op::embed_cols, g, {}, 0.0, 0.0, {dims[0], sa[1]}));
      return;
    case Op::embed_cols:
      accumulate(grads, ia, slice_cols(g, dims[0], sa[1]));
      return;
  }
}

std::vector<NodeId> Graph::sweep(Var output, Var seed) {
  if (output.value().size() != 1)
    throw Error("backward requires a scalar output, node " + std::to_string(output.id()) + " is " +
                shape_string(output.shape()));
  const NodeId last = output.id();
  std::vector<NodeId> grads(last + 1, kNone);
  grads[last] = seed.id();
  for (NodeId i = last + 1; i-- > 0;) {
    if (grads[i] == kNone) continue;
    if (!nodes_[i].requires_grad || nodes_[i].op == Op::leaf) continue;
    vjp(i, grads[i], grads);
  }
  return grads;
}

std::vector<Var> Graph::grad(Var output, std::span<const Var> wrt) {
  const auto grads = sweep(output, constant(scalar_tensor(1.0)));
  std::vector<Var> out;
  out.reserve(wrt.size());
  for (const Var& w : wrt) {
    if (w.id() < grads.size() && grads[w.id()] != kNone) {
      out.push_back(Var(this, grads[w.id()]));
    } else {
      out.push_back(constant(Tensor::Zero(w.shape()[0], w.shape()[1])));
    }
  }
  return out;
}

std::vector<Tensor> Graph::gradient(Var output, std::span<const Var> wrt, double seed) {
  const std::size_t mark = nodes_.size();
  const auto grads = sweep(output, constant(scalar_tensor(seed)));
  std::vector<Tensor> out;
  out.reserve(wrt.size());
  for (const Var& w : wrt) {
    if (w.id() < grads.size() && grads[w.id()] != kNone) {
      out.push_back(nodes_[grads[w.id()]].value);
    } else {
      out.push_back(Tensor::Zero(w.shape()[0], w.shape()[1]));
    }
  }
  nodes_.resize(mark);
  return out;
}

std::map<std::string, Tensor> Graph::backward(Var output, double seed) {
  std::vector<Var> params;
  for (NodeId id : parameters_)
    if (id <= output.id()) params.push_back(Var(this, id));
  auto values = gradient(output, params, seed);
  std::map<std::string, Tensor> out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto [it, inserted] = out.emplace(nodes_[params[i].id()].name, std::move(values[i]));
    if (!inserted) it->second += values[i];
  }
  return out;
}

Var matmul(Var a, Var b) { return a.graph().apply(Op::matmul, a, b); }
Var transpose(Var a) { return a.graph().apply(Op::transpose, a); }
Var operator+(Var a, Var b) { return a.graph().apply(Op::add, a, b); }
Var operator-(Var a, Var b) { return a.graph().apply(Op::sub, a, b); }
Var operator*(Var a, Var b) { return a.graph().apply(Op::mul, a, b); }
Var operator/(Var a, Var b) { return a.graph().apply(Op::div, a, b); }
Var operator-(Var a) { return a.graph().apply(Op::scale, a, {}, -1.0); }
Var operator*(Var a, double c) { return a.graph().apply(Op::scale, a, {}, c); }
Var operator*(double c, Var a) { return a * c; }
Var operator/(Var a, double c) { return a.graph().apply(Op::scale, a, {}, 1.0 / c); }
Var operator+(Var a, double c) { return a.graph().apply(Op::add_scalar, a, {}, c); }
Var operator+(double c, Var a) { return a + c; }
Var operator-(Var a, double c) { return a + (-c); }
Var operator-(double c, Var a) { return (-a) + c; }

Var exp(Var a) { return a.graph().apply(Op::exp, a); }
Var log(Var a) { return a.graph().apply(Op::log, a); }
Var square(Var a) { return a.graph().apply(Op::square, a); }
Var sqrt(Var a) { return a.graph().apply(Op::sqrt, a); }
Var softplus(Var a) { return a.graph().apply(Op::softplus, a); }
Var sigmoid(Var a) { return a.graph().apply(Op::sigmoid, a); }
Var elu(Var a) { return a.graph().apply(Op::elu, a); }
Var elu_prime(Var a) { return a.graph().apply(Op::elu_prime, a); }
Var relu(Var a) { return a.graph().apply(Op::relu, a); }
Var clamp(Var a, double lo, double hi) { return a.graph().apply(Op::clamp, a, {}, lo, hi); }

Var sum(Var a) { return a.graph().apply(Op::sum_all, a); }
Var mean(Var a) { return sum(a) * (1.0 / static_cast<double>(a.value().size())); }
Var sum_rows(Var a) { return reduce_to(a, {1, a.shape()[1]}); }
Var sum_cols(Var a) { return reduce_to(a, {a.shape()[0], 1}); }
Var broadcast_to(Var a, Shape shape) { return a.graph().apply(Op::broadcast_to, a, {}, 0.0, 0.0, shape); }
Var reduce_to(Var a, Shape shape) {
  if (a.shape() == shape) return a;
  return a.graph().apply(Op::reduce_to, a, {}, 0.0, 0.0, shape);
}
Var concat_cols(Var a, Var b) { return a.graph().apply(Op::concat_cols, a, b); }
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  return a.graph().apply(Op::slice_cols, a, {}, 0.0, 0.0, {start, count});
}
Var stop_gradient(Var a) { return a.graph().apply(Op::stop_gradient, a); }

Var log_mean_exp(Var a) {
  const double shift = a.value().maxCoeff();
  return log(mean(exp(a - shift))) + shift;
}

Var forward(Graph& graph, const Program& program, const std::map<std::string, Tensor>& inputs) {
  std::map<std::string, Var> bound;
  for (const auto& [name, value] : inputs) bound.emplace(name, graph.constant(value, name));
  return program(graph, bound);
}

Var input(const std::map<std::string, Var>& bound, const std::string& name) {
  auto it = bound.find(name);
  if (it == bound.end()) throw Error("graph input '" + name + "' is not bound");
  return it->second;
}

Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f, const Tensor& p,
                                  double h) {
  if (!(h > 0.0)) throw Error("finite difference step must be positive");
  Tensor g(p.rows(), p.cols());
  Tensor probe = p;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + h;
    const double up = f(probe);
    probe.data()[i] = orig - h;
    const double down = f(probe);
    probe.data()[i] = orig;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace cib::diff
