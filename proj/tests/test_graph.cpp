#include "cib/graph.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <map>
#include <string>

namespace {

using namespace cib;
using cib::testing::rel_err;
using cib::testing::uniform;
using diff::Graph;
using diff::Var;

Tensor t11(double v) { return scalar_tensor(v); }

TEST(Forward, IdentityProgram) {
  Graph g;
  Tensor x(1, 3);
  x << 1, 2, 3;
  Var out = diff::forward(g, [](Graph&, const auto& in) { return diff::input(in, "x"); }, {{"x", x}});
  EXPECT_EQ(out.value(), x);
}

TEST(Forward, SumOfSquares) {
  Graph g;
  Var out = diff::forward(
      g, [](Graph&, const auto& in) { return diff::sum(diff::input(in, "x") * diff::input(in, "x")); },
      {{"x", t11(3.0)}});
  EXPECT_EQ(out.item(), 9.0);
}

TEST(Forward, SoftplusAtZero) {
  Graph g;
  Var out = diff::softplus(g.constant(t11(0.0)));
  EXPECT_NEAR(out.item(), std::log(2.0), 1e-15);
}

TEST(Forward, UnboundInputThrows) {
  Graph g;
  EXPECT_THROW(diff::forward(g, [](Graph&, const auto& in) { return diff::input(in, "y"); }, {{"x", t11(1)}}),
               Error);
}

TEST(Forward, ShapeMismatchNamesNode) {
  Graph g;
  Var a = g.constant(Tensor::Ones(2, 3));
  Var b = g.constant(Tensor::Ones(4, 5));
  try {
    diff::matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& ex) {
    const std::string msg = ex.what();
    EXPECT_NE(msg.find("node 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("matmul"), std::string::npos) << msg;
  }
  EXPECT_THROW(a + b, ShapeError);
  EXPECT_THROW(diff::slice_cols(a, 2, 2), ShapeError);
}

TEST(Forward, Deterministic) {
  Rng rng(1);
  const Tensor x = uniform(5, 4, rng);
  const Tensor w = uniform(4, 3, rng);
  auto run = [&] {
    Graph g;
    return diff::log_mean_exp(diff::elu(diff::matmul(g.constant(x), g.constant(w)))).value();
  };
  const Tensor a = run();
  const Tensor b = run();
  EXPECT_EQ(0, std::memcmp(a.data(), b.data(), sizeof(double) * a.size()));
}

TEST(Backward, Square) {
  Graph g;
  Var w = g.parameter("w", t11(3.0));
  const auto grads = g.backward(diff::square(w));
  EXPECT_EQ(grads.at("w")(0, 0), 6.0);
}

TEST(Backward, ConstantGraphGivesZero) {
  Graph g;
  g.parameter("w", t11(3.0));
  Var c = g.constant(t11(2.0));
  const auto grads = g.backward(c * 5.0);
  EXPECT_EQ(grads.at("w")(0, 0), 0.0);
}

TEST(Backward, SoftplusAtZero) {
  Graph g;
  Var w = g.parameter("w", t11(0.0));
  EXPECT_DOUBLE_EQ(g.backward(diff::softplus(w)).at("w")(0, 0), 0.5);
}

TEST(Backward, NonScalarOutputThrows) {
  Graph g;
  Var w = g.parameter("w", Tensor::Ones(2, 2));
  EXPECT_THROW(g.backward(w * 2.0), Error);
}

TEST(Backward, SeedScalesGradient) {
  Graph g;
  Var w = g.parameter("w", t11(3.0));
  EXPECT_EQ(g.backward(diff::square(w), -1.0).at("w")(0, 0), -6.0);
}

TEST(Backward, Linearity) {
  Rng rng(3);
  const Tensor x = uniform(4, 3, rng);
  const Tensor w0 = uniform(3, 2, rng);
  auto f1 = [&](Graph& g, Var w) { return diff::sum(diff::exp(diff::matmul(g.constant(x), w))); };
  auto f2 = [&](Graph& g, Var w) { return diff::mean(diff::softplus(diff::matmul(g.constant(x), w))); };
  Graph g;
  Var w = g.parameter("w", w0);
  const Tensor a = g.backward(f1(g, w)).at("w");
  const Tensor b = g.backward(f2(g, w)).at("w");
  const Tensor ab = g.backward(f1(g, w) + f2(g, w)).at("w");
  EXPECT_LT(rel_err(ab, a + b), 1e-14);
}

TEST(Backward, StopGradientIsExactZero) {
  Graph g;
  Var w = g.parameter("w", t11(2.0));
  Var v = g.parameter("v", t11(5.0));
  const auto grads = g.backward(diff::square(w) * diff::stop_gradient(v) + diff::stop_gradient(diff::exp(v)));
  EXPECT_EQ(grads.at("w")(0, 0), 20.0);
  EXPECT_EQ(grads.at("v")(0, 0), 0.0);
  EXPECT_FALSE(diff::stop_gradient(v).requires_grad());
}

TEST(Backward, StopGradientGradientIsTheDetachedOne) {
  Rng rng(5);
  const Tensor a0 = uniform(3, 4, rng);
  const Tensor b0 = uniform(3, 4, rng);
  Graph g;
  Var a = g.variable(a0);
  Var b = g.variable(b0);
  Var out = diff::sum(a * diff::stop_gradient(b) + diff::stop_gradient(diff::square(a)));
  const std::vector<Var> wrt{a, b};
  const auto grads = g.gradient(out, wrt);
  EXPECT_EQ(grads[0], b0);
  EXPECT_EQ(grads[1], Tensor::Zero(3, 4));
}

TEST(Backward, ReusedTapeStaysBounded) {
  Graph g;
  Var w = g.parameter("w", t11(2.0));
  Var out = diff::square(w);
  const std::size_t before = g.size();
  g.backward(out);
  g.backward(out);
  EXPECT_EQ(g.size(), before);
}

TEST(FiniteDifference, Examples) {
  auto sq = [](const Tensor& p) { return p(0, 0) * p(0, 0); };
  EXPECT_NEAR(diff::finite_difference_gradient(sq, t11(3.0), 1e-5)(0, 0), 6.0, 1e-8);
  auto ex = [](const Tensor& p) { return std::exp(p(0, 0)); };
  EXPECT_NEAR(diff::finite_difference_gradient(ex, t11(0.0), 1e-5)(0, 0), 1.0, 1e-8);
  EXPECT_THROW(diff::finite_difference_gradient(sq, t11(1.0), 0.0), Error);
  EXPECT_THROW(diff::finite_difference_gradient(sq, t11(1.0), -1e-5), Error);
}

// ---------------------------------------------------------------------------
// Every op against central differences at 100 random points. The scalar
// being differentiated is sum(op(inputs) * probe) with a fixed random probe
// so that each output element gets a distinct weight.

using OpFn = std::function<Var(Graph&, const std::vector<Var>&)>;

struct OpCase {
  std::string name;
  int arity;
  OpFn fn;
  // input shapes given random extents (r, c)
  std::function<std::vector<Shape>(Eigen::Index, Eigen::Index)> shapes;
  double lo = -2.0;
  double hi = 2.0;
  // inputs are redrawn while this returns false (keeps points off kinks)
  std::function<bool(const std::vector<Tensor>&)> admissible = [](const std::vector<Tensor>&) { return true; };
};

bool away_from(const Tensor& t, double kink, double margin) {
  return ((t.array() - kink).abs() > margin).all();
}

std::vector<Shape> same(Eigen::Index r, Eigen::Index c, int n) { return std::vector<Shape>(n, Shape{r, c}); }

std::vector<OpCase> op_cases() {
  using V = std::vector<Var>;
  std::vector<OpCase> cases = {
      {"matmul", 2, [](Graph&, const V& v) { return diff::matmul(v[0], v[1]); },
       [](auto r, auto c) { return std::vector<Shape>{{r, c}, {c, r + 1}}; }},
      {"transpose", 1, [](Graph&, const V& v) { return diff::transpose(v[0]); },
       [](auto r, auto c) { return same(r, c, 1); }},
      {"add", 2, [](Graph&, const V& v) { return v[0] + v[1]; }, [](auto r, auto c) { return same(r, c, 2); }},
      {"add_broadcast_row", 2, [](Graph&, const V& v) { return v[0] + v[1]; },
       [](auto r, auto c) { return std::vector<Shape>{{r, c}, {1, c}}; }},
      {"add_broadcast_col", 2, [](Graph&, const V& v) { return v[1] + v[0]; },
       [](auto r, auto c) { return std::vector<Shape>{{r, c}, {r, 1}}; }},
      {"sub", 2, [](Graph&, const V& v) { return v[0] - v[1]; },
       [](auto r, auto c) { return std::vector<Shape>{{r, c}, {1, 1}}; }},
      {"mul", 2, [](Graph&, const V& v) { return v[0] * v[1]; },
       [](auto r, auto c) { return std::vector<Shape>{{r, c}, {r, 1}}; }},
      {"div", 2, [](Graph&, const V& v) { return v[0] / v[1]; },
       [](auto r, auto c) { return std::vector<Shape>{{r, c}, {1, c}}; }, 0.5, 2.0},
      {"scale", 1, [](Graph&, const V& v) { return 1.5 * v[0] - v[0] / 4.0; },
       [](auto r, auto c) { return same(r, c, 1); }},
      {"add_scalar", 1, [](Graph&, const V& v) { return 2.0 - (v[0] + 3.0); },
       [](auto r, auto c) { return same(r, c, 1); }},
      {"neg", 1, [](Graph&, const V& v) { return -v[0]; }, [](auto r, auto c) { return same(r, c, 1); }},
      {"exp", 1, [](Graph&, const V& v) { return diff::exp(v[0]); }, [](auto r, auto c) { return same(r, c, 1); }},
      {"log", 1, [](Graph&, const V& v) { return diff::log(v[0]); }, [](auto r, auto c) { return same(r, c, 1); },
       0.2, 3.0},
      {"square", 1, [](Graph&, const V& v) { return diff::square(v[0]); },
       [](auto r, auto c) { return same(r, c, 1); }},
      {"sqrt", 1, [](Graph&, const V& v) { return diff::sqrt(v[0]); }, [](auto r, auto c) { return same(r, c, 1); },
       0.2, 3.0},
      {"softplus", 1, [](Graph&, const V& v) { return diff::softplus(v[0]); },
       [](auto r, auto c) { return same(r, c, 1); }, -6.0, 6.0},
      {"sigmoid", 1, [](Graph&, const V& v) { return diff::sigmoid(v[0]); },
       [](auto r, auto c) { return same(r, c, 1); }, -6.0, 6.0},
      {"elu", 1, [](Graph&, const V& v) { return diff::elu(v[0]); }, [](auto r, auto c) { return same(r, c, 1); }},
      {"elu_prime", 1, [](Graph&, const V& v) { return diff::elu_prime(v[0]); },
       [](auto r, auto c) { return same(r, c, 1); }, -2.0, 2.0,
       [](const std::vector<Tensor>& t) { return away_from(t[0], 0.0, 1e-3); }},
      {"relu", 1, [](Graph&, const V& v) { return diff::relu(v[0]); }, [](auto r, auto c) { return same(r, c, 1); },
       -2.0, 2.0, [](const std::vector<Tensor>& t) { return away_from(t[0], 0.0, 1e-3); }},
      {"clamp", 1, [](Graph&, const V& v) { return diff::clamp(v[0], -0.5, 0.7); },
       [](auto r, auto c) { return same(r, c, 1); }, -2.0, 2.0,
       [](const std::vector<Tensor>& t) { return away_from(t[0], -0.5, 1e-3) && away_from(t[0], 0.7, 1e-3); }},
      {"sum", 1, [](Graph&, const V& v) { return diff::sum(diff::square(v[0])); },
       [](auto r, auto c) { return same(r, c, 1); }},
      {"mean", 1, [](Graph&, const V& v) { return diff::mean(diff::exp(v[0])); },
       [](auto r, auto c) { return same(r, c, 1); }},
      {"sum_rows", 1, [](Graph&, const V& v) { return diff::sum_rows(diff::square(v[0])); },
       [](auto r, auto c) { return same(r, c, 1); }},
      {"sum_cols", 1, [](Graph&, const V& v) { return diff::sum_cols(diff::square(v[0])); },
       [](auto r, auto c) { return same(r, c, 1); }},
      {"broadcast_to", 1, [](Graph&, const V& v) { return diff::square(diff::broadcast_to(v[0], {3, v[0].shape()[1]})); },
       [](auto, auto c) { return std::vector<Shape>{{1, c}}; }},
      {"reduce_to", 1, [](Graph&, const V& v) { return diff::square(diff::reduce_to(v[0], {1, 1})); },
       [](auto r, auto c) { return same(r, c, 1); }},
      {"concat_cols", 2, [](Graph&, const V& v) { return diff::square(diff::concat_cols(v[0], v[1])); },
       [](auto r, auto c) { return std::vector<Shape>{{r, c}, {r, 2}}; }},
      {"slice_cols", 1,
       [](Graph&, const V& v) { return diff::exp(diff::slice_cols(v[0], 1, v[0].shape()[1] - 1)); },
       [](auto r, auto c) { return std::vector<Shape>{{r, c + 1}}; }},
      {"log_mean_exp", 1, [](Graph&, const V& v) { return diff::log_mean_exp(3.0 * v[0]); },
       [](auto r, auto c) { return same(r, c, 1); }},
  };
  return cases;
}

class OpGradient : public ::testing::TestWithParam<std::size_t> {};

TEST_P(OpGradient, MatchesFiniteDifferencesAt100Points) {
  const OpCase op = op_cases()[GetParam()];
  Rng rng = make_stream(GetParam(), "test.op");
  std::uniform_int_distribution<int> extent(1, 4);
  double worst = 0.0;
  for (int point = 0; point < 100; ++point) {
    const auto shapes = op.shapes(extent(rng), extent(rng));
    std::vector<Tensor> inputs;
    do {
      inputs.clear();
      for (const auto& s : shapes) inputs.push_back(uniform(s[0], s[1], rng, op.lo, op.hi));
    } while (!op.admissible(inputs));

    Tensor probe;
    {
      Graph g;
      std::vector<Var> vars;
      for (const auto& t : inputs) vars.push_back(g.constant(t));
      const Shape out = op.fn(g, vars).shape();
      probe = uniform(out[0], out[1], rng);
    }
    auto evaluate = [&](const std::vector<Tensor>& in, std::vector<Var>* vars_out, Graph& g) {
      std::vector<Var> vars;
      for (const auto& t : in) vars.push_back(g.variable(t));
      if (vars_out) *vars_out = vars;
      return diff::sum(op.fn(g, vars) * g.constant(probe));
    };

    Graph g;
    std::vector<Var> vars;
    Var out = evaluate(inputs, &vars, g);
    const auto analytic = g.gradient(out, vars);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      auto f = [&](const Tensor& p) {
        std::vector<Tensor> in = inputs;
        in[k] = p;
        Graph h;
        return evaluate(in, nullptr, h).item();
      };
      const Tensor numeric = diff::finite_difference_gradient(f, inputs[k], 1e-5);
      worst = std::max(worst, rel_err(analytic[k], numeric));
    }
  }
  EXPECT_LT(worst, 1e-4) << op.name;
}

INSTANTIATE_TEST_SUITE_P(AllOps, OpGradient, ::testing::Range<std::size_t>(0, op_cases().size()),
                         [](const auto& info) { return op_cases()[info.param].name; });

// Second-order: the gradient of a function of a gradient, as used by the
// critic's gradient penalty.
TEST(SecondOrder, GradientOfGradientNormMatchesFiniteDifferences) {
  Rng rng(11);
  for (int point = 0; point < 100; ++point) {
    const Tensor x0 = uniform(3, 2, rng);
    const Tensor w0 = uniform(2, 3, rng);
    const Tensor v0 = uniform(3, 1, rng);
    auto penalty = [&](Graph& g, Var w, std::vector<Var>* grad_out) {
      Var x = g.variable(x0);
      Var f = diff::sum(diff::matmul(diff::elu(diff::matmul(x, w)), g.constant(v0)));
      const std::vector<Var> wrt{x};
      const auto gx = g.grad(f, wrt);
      if (grad_out) *grad_out = gx;
      return diff::mean(diff::square(gx[0])) + diff::sigmoid(diff::sum(gx[0]));
    };
    Graph g;
    Var w = g.variable(w0);
    Var p = penalty(g, w, nullptr);
    const std::vector<Var> wrt{w};
    const Tensor analytic = g.gradient(p, wrt)[0];
    auto f = [&](const Tensor& wp) {
      Graph h;
      return penalty(h, h.variable(wp), nullptr).item();
    };
    EXPECT_LT(rel_err(analytic, diff::finite_difference_gradient(f, w0, 1e-5)), 1e-4) << "point " << point;
  }
}

TEST(SecondOrder, FirstGradientValueMatchesAnalytic) {
  Graph g;
  Var x = g.variable(t11(0.3));
  const std::vector<Var> wrt{x};
  const auto gx = g.grad(diff::exp(diff::square(x)), wrt);
  EXPECT_NEAR(gx[0].item(), 2 * 0.3 * std::exp(0.09), 1e-15);
  const auto gxx = g.grad(gx[0], wrt);
  EXPECT_NEAR(gxx[0].item(), (2 + 4 * 0.09) * std::exp(0.09), 1e-14);
}

TEST(Graph, ParameterNamesAreReported) {
  Graph g;
  g.parameter("a", t11(1));
  g.parameter("b", Tensor::Zero(2, 2));
  Var c = g.parameter("c", t11(2));
  const auto grads = g.backward(diff::square(c));
  ASSERT_EQ(grads.size(), 3u);
  EXPECT_EQ(grads.at("b"), Tensor::Zero(2, 2));
  EXPECT_EQ(grads.at("c")(0, 0), 4.0);
}

}  // namespace
