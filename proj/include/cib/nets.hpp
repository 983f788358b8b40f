#pragma once

#include "cib/graph.hpp"
#include "cib/rng.hpp"
#include "cib/tensor.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cib {

enum class Activation { elu, relu };
enum class OutcomeKind { continuous, binary };

std::string_view to_string(Activation a);
std::string_view to_string(OutcomeKind k);
Activation parse_activation(std::string_view s);
OutcomeKind parse_outcome_kind(std::string_view s);

struct MlpSpec {
  int input_dim = 1;
  std::vector<int> hidden_dims{64};
  int output_dim = 1;
  Activation activation = Activation::elu;

  void validate() const;
  /// sum over layers of in*out + out
  std::size_t parameter_count() const;
};

/// y = x W + b with W [in, out] and b [1, out].
struct Affine {
  Tensor weight;
  Tensor bias;

  static Affine glorot(int in, int out, Rng& rng);
  static Affine zeros(int in, int out);
};

/// Hidden layers are activated, the last layer is linear.
struct Mlp {
  MlpSpec spec;
  std::vector<Affine> layers;

  static Mlp create(const MlpSpec& spec, Rng& rng);
};

/// Activated trunk layers followed by two affine heads into R^{d_z}.
/// `spec.output_dim` is d_z; each head maps the last hidden layer to it.
struct GaussianEncoder {
  MlpSpec spec;
  std::vector<Affine> trunk;
  Affine mu_head;
  Affine sigma_head;

  std::size_t parameter_count() const;
};

struct OutcomeHead {
  Affine layer;
};

/// Statistics network f(x, z, t) of the conditional-MI critic.
struct StatisticsNetwork {
  Mlp net;
};

/// Diagonal Gaussian r(z) with scale exp(log_scale).
struct MarginalPrior {
  Tensor mean;
  Tensor log_scale;
};

struct PropensityClassifier {
  Mlp net;
};

struct ModelConfig {
  int input_dim = 1;
  int representation_dim = 64;
  std::vector<int> hidden_dims{64, 64};
  Activation activation = Activation::elu;
  OutcomeKind outcome = OutcomeKind::continuous;
  double sigma_floor = 1e-3;
  bool use_propensity = false;
  double propensity_clip = 0.05;
  /// z = mu at train and predict time (TARNET-like configuration).
  bool deterministic_encoder = false;

  void validate() const;
};

enum class ParamGroup { encoder, heads, prior, critic, propensity };

/// Every parameter of the estimator. Parameter names are stable and used as
/// keys for gradients, optimizer state and checkpoints.
struct CibModel {
  ModelConfig config;
  GaussianEncoder encoder;
  OutcomeHead head0;
  OutcomeHead head1;
  MarginalPrior prior;
  StatisticsNetwork critic;
  std::optional<PropensityClassifier> propensity;

  static CibModel create(const ModelConfig& config, Rng& init);

  using Visitor = std::function<void(const std::string&, Tensor&)>;
  using ConstVisitor = std::function<void(const std::string&, const Tensor&)>;
  void for_each_parameter(ParamGroup group, const Visitor& fn);
  void for_each_parameter(ParamGroup group, const ConstVisitor& fn) const;
  void for_each_parameter(const Visitor& fn);
  void for_each_parameter(const ConstVisitor& fn) const;
  std::size_t parameter_count(ParamGroup group) const;
};

// Graph-bound views of the networks. A frozen copy wraps every parameter in
// stop_gradient so the consumer's loss leaves those parameters untouched.

struct BoundAffine {
  diff::Var weight;
  diff::Var bias;
};

struct BoundMlp {
  std::vector<BoundAffine> layers;
  Activation activation = Activation::elu;
};

struct BoundEncoder {
  BoundMlp trunk;
  BoundAffine mu;
  BoundAffine sigma;
  double sigma_floor = 1e-3;
};

struct BoundHead {
  BoundAffine layer;
  OutcomeKind kind = OutcomeKind::continuous;
};

struct BoundPrior {
  diff::Var mean;
  diff::Var log_scale;
};

struct BoundCritic {
  BoundMlp net;
};

struct BoundPropensity {
  BoundMlp net;
  double clip = 0.05;
};

struct BoundModel {
  BoundEncoder encoder;
  BoundHead head0;
  BoundHead head1;
  BoundPrior prior;
  BoundCritic critic;
  std::optional<BoundPropensity> propensity;

  const BoundHead& head(int treatment) const { return treatment == 0 ? head0 : head1; }
};

BoundModel bind(diff::Graph& graph, const CibModel& model);

BoundAffine frozen(const BoundAffine& a);
BoundMlp frozen(const BoundMlp& m);
BoundHead frozen(const BoundHead& h);
BoundCritic frozen(const BoundCritic& c);

diff::Var activate(diff::Var x, Activation a);
diff::Var affine(const BoundAffine& layer, diff::Var x);
diff::Var mlp_forward(const BoundMlp& mlp, diff::Var x);

struct GaussianOutput {
  diff::Var mu;
  diff::Var sigma;
};

/// Conditional Gaussian p(z|x); sigma = softplus(.) + sigma_floor.
GaussianOutput encode(const BoundEncoder& encoder, diff::Var x);

/// z = mu + sigma * eps
diff::Var reparameterize(diff::Var mu, diff::Var sigma, diff::Var eps);

/// Raw head output: mean (continuous) or logit (binary), [n, 1].
diff::Var head_output(const BoundHead& head, diff::Var z);

/// Mean of the unit-variance Gaussian, or Bernoulli probability.
diff::Var predict_outcome(const BoundHead& head, diff::Var z);

/// Scalar critic value per row of concat(x, z, t).
diff::Var critic_value(const BoundCritic& critic, diff::Var x, diff::Var z, diff::Var t);

/// log r(z) per row, [n, 1].
diff::Var prior_log_density(const BoundPrior& prior, diff::Var z);

/// s(t=1|x) clipped to [clip, 1 - clip].
diff::Var propensity(const BoundModel& model, diff::Var x);

}  // namespace cib
