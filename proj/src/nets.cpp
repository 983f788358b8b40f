#include "cib/nets.hpp"

#include "cib/error.hpp"

#include <cmath>
#include <numbers>

namespace cib {

using diff::Var;

std::string_view to_string(Activation a) { return a == Activation::elu ? "elu" : "relu"; }

std::string_view to_string(OutcomeKind k) { return k == OutcomeKind::continuous ? "continuous" : "binary"; }

Activation parse_activation(std::string_view s) {
  if (s == "elu") return Activation::elu;
  if (s == "relu") return Activation::relu;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

OutcomeKind parse_outcome_kind(std::string_view s) {
  if (s == "continuous") return OutcomeKind::continuous;
  if (s == "binary") return OutcomeKind::binary;
  throw ConfigError("unknown outcome kind '" + std::string(s) + "'");
}

void MlpSpec::validate() const {
  if (input_dim < 1 || output_dim < 1) throw ConfigError("MLP input and output dims must be >= 1");
  if (hidden_dims.empty() || hidden_dims.size() > 3) throw ConfigError("MLP needs 1 to 3 hidden layers");
  for (int h : hidden_dims)
    if (h < 1) throw ConfigError("MLP hidden dims must be >= 1");
}

std::size_t MlpSpec::parameter_count() const {
  std::size_t count = 0;
  int in = input_dim;
  for (int h : hidden_dims) {
    count += static_cast<std::size_t>(in) * h + h;
    in = h;
  }
  return count + static_cast<std::size_t>(in) * output_dim + output_dim;
}

Affine Affine::glorot(int in, int out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Affine a = zeros(in, out);
  for (Eigen::Index i = 0; i < a.weight.size(); ++i) a.weight.data()[i] = dist(rng);
  return a;
}

Affine Affine::zeros(int in, int out) { return {Tensor::Zero(in, out), Tensor::Zero(1, out)}; }

Mlp Mlp::create(const MlpSpec& spec, Rng& rng) {
  spec.validate();
  Mlp mlp{spec, {}};
  int in = spec.input_dim;
  for (int h : spec.hidden_dims) {
    mlp.layers.push_back(Affine::glorot(in, h, rng));
    in = h;
  }
  mlp.layers.push_back(Affine::glorot(in, spec.output_dim, rng));
  return mlp;
}

void ModelConfig::validate() const {
  if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
  if (representation_dim < 1) throw ConfigError("representation_dim must be >= 1");
  if (hidden_dims.empty() || hidden_dims.size() > 3) throw ConfigError("hidden_dims must have 1 to 3 entries");
  for (int h : hidden_dims)
    if (h < 1) throw ConfigError("hidden dims must be >= 1");
  if (!(sigma_floor > 0.0)) throw ConfigError("sigma_floor must be positive");
  if (!(propensity_clip > 0.0 && propensity_clip < 0.5)) throw ConfigError("propensity_clip must lie in (0, 0.5)");
}

CibModel CibModel::create(const ModelConfig& config, Rng& init) {
  config.validate();
  CibModel m;
  m.config = config;
  const int dz = config.representation_dim;
  const int last_hidden = config.hidden_dims.back();

  m.encoder.spec = {config.input_dim, config.hidden_dims, dz, config.activation};
  int in = config.input_dim;
  for (int h : config.hidden_dims) {
    m.encoder.trunk.push_back(Affine::glorot(in, h, init));
    in = h;
  }
  m.encoder.mu_head = Affine::glorot(last_hidden, dz, init);
  m.encoder.sigma_head = Affine::glorot(last_hidden, dz, init);
  m.head0.layer = Affine::glorot(dz, 1, init);
  m.head1.layer = Affine::glorot(dz, 1, init);
  m.prior.mean = Tensor::Zero(1, dz);
  m.prior.log_scale = Tensor::Zero(1, dz);
  m.critic.net = Mlp::create({config.input_dim + dz + 1, config.hidden_dims, 1, config.activation}, init);
  if (config.use_propensity)
    m.propensity = PropensityClassifier{Mlp::create({config.input_dim, config.hidden_dims, 1, config.activation}, init)};
  return m;
}

std::size_t GaussianEncoder::parameter_count() const {
  const std::size_t last = spec.hidden_dims.back();
  const std::size_t dz = spec.output_dim;
  // MlpSpec counts trunk + one head; the sigma head is the second head.
  return spec.parameter_count() + last * dz + dz;
}

namespace {

template <typename AffineT, typename Fn>
void visit_affine(const std::string& prefix, AffineT& a, Fn&& fn) {
  fn(prefix + ".weight", a.weight);
  fn(prefix + ".bias", a.bias);
}

template <typename Layers, typename Fn>
void visit_layers(const std::string& prefix, Layers& layers, Fn&& fn) {
  for (std::size_t i = 0; i < layers.size(); ++i) visit_affine(prefix + "." + std::to_string(i), layers[i], fn);
}

template <typename Model, typename Fn>
void visit_group(Model& m, ParamGroup group, Fn&& fn) {
  switch (group) {
    case ParamGroup::encoder:
      visit_layers("encoder.trunk", m.encoder.trunk, fn);
      visit_affine("encoder.mu", m.encoder.mu_head, fn);
      visit_affine("encoder.sigma", m.encoder.sigma_head, fn);
      return;
    case ParamGroup::heads:
      visit_affine("head0", m.head0.layer, fn);
      visit_affine("head1", m.head1.layer, fn);
      return;
    case ParamGroup::prior:
      fn("prior.mean", m.prior.mean);
      fn("prior.log_scale", m.prior.log_scale);
      return;
    case ParamGroup::critic:
      visit_layers("critic", m.critic.net.layers, fn);
      return;
    case ParamGroup::propensity:
      if (m.propensity) visit_layers("propensity", m.propensity->net.layers, fn);
      return;
  }
}

constexpr ParamGroup kAllGroups[] = {ParamGroup::encoder, ParamGroup::heads, ParamGroup::prior, ParamGroup::critic,
                                     ParamGroup::propensity};

}  // namespace

void CibModel::for_each_parameter(ParamGroup group, const Visitor& fn) { visit_group(*this, group, fn); }

void CibModel::for_each_parameter(ParamGroup group, const ConstVisitor& fn) const { visit_group(*this, group, fn); }

void CibModel::for_each_parameter(const Visitor& fn) {
  for (ParamGroup g : kAllGroups) visit_group(*this, g, fn);
}

void CibModel::for_each_parameter(const ConstVisitor& fn) const {
  for (ParamGroup g : kAllGroups) visit_group(*this, g, fn);
}

std::size_t CibModel::parameter_count(ParamGroup group) const {
  std::size_t n = 0;
  for_each_parameter(group, ConstVisitor([&n](const std::string&, const Tensor& t) { n += t.size(); }));
  return n;
}

namespace {

BoundAffine bind_affine(diff::Graph& g, const std::string& prefix, const Affine& a) {
  return {g.parameter(prefix + ".weight", a.weight), g.parameter(prefix + ".bias", a.bias)};
}

BoundMlp bind_layers(diff::Graph& g, const std::string& prefix, const std::vector<Affine>& layers, Activation act) {
  BoundMlp out;
  out.activation = act;
  for (std::size_t i = 0; i < layers.size(); ++i)
    out.layers.push_back(bind_affine(g, prefix + "." + std::to_string(i), layers[i]));
  return out;
}

}  // namespace

BoundModel bind(diff::Graph& g, const CibModel& m) {
  BoundModel b;
  b.encoder.trunk = bind_layers(g, "encoder.trunk", m.encoder.trunk, m.config.activation);
  b.encoder.mu = bind_affine(g, "encoder.mu", m.encoder.mu_head);
  b.encoder.sigma = bind_affine(g, "encoder.sigma", m.encoder.sigma_head);
  b.encoder.sigma_floor = m.config.sigma_floor;
  b.head0 = {bind_affine(g, "head0", m.head0.layer), m.config.outcome};
  b.head1 = {bind_affine(g, "head1", m.head1.layer), m.config.outcome};
  b.prior = {g.parameter("prior.mean", m.prior.mean), g.parameter("prior.log_scale", m.prior.log_scale)};
  b.critic.net = bind_layers(g, "critic", m.critic.net.layers, m.config.activation);
  if (m.propensity)
    b.propensity = BoundPropensity{bind_layers(g, "propensity", m.propensity->net.layers, m.config.activation),
                                   m.config.propensity_clip};
  return b;
}

BoundAffine frozen(const BoundAffine& a) { return {diff::stop_gradient(a.weight), diff::stop_gradient(a.bias)}; }

BoundMlp frozen(const BoundMlp& m) {
  BoundMlp out;
  out.activation = m.activation;
  for (const auto& l : m.layers) out.layers.push_back(frozen(l));
  return out;
}

BoundHead frozen(const BoundHead& h) { return {frozen(h.layer), h.kind}; }

BoundCritic frozen(const BoundCritic& c) { return {frozen(c.net)}; }

Var activate(Var x, Activation a) { return a == Activation::elu ? diff::elu(x) : diff::relu(x); }

Var affine(const BoundAffine& layer, Var x) { return diff::matmul(x, layer.weight) + layer.bias; }

Var mlp_forward(const BoundMlp& mlp, Var x) {
  Var h = x;
  for (std::size_t i = 0; i + 1 < mlp.layers.size(); ++i) h = activate(affine(mlp.layers[i], h), mlp.activation);
  return affine(mlp.layers.back(), h);
}

GaussianOutput encode(const BoundEncoder& encoder, Var x) {
  Var h = x;
  for (const auto& layer : encoder.trunk.layers) h = activate(affine(layer, h), encoder.trunk.activation);
  Var mu = affine(encoder.mu, h);
  Var sigma = diff::softplus(affine(encoder.sigma, h)) + encoder.sigma_floor;
  return {mu, sigma};
}

Var reparameterize(Var mu, Var sigma, Var eps) { return mu + sigma * eps; }

Var head_output(const BoundHead& head, Var z) { return affine(head.layer, z); }

Var predict_outcome(const BoundHead& head, Var z) {
  Var raw = head_output(head, z);
  return head.kind == OutcomeKind::binary ? diff::sigmoid(raw) : raw;
}

Var critic_value(const BoundCritic& critic, Var x, Var z, Var t) {
  return mlp_forward(critic.net, diff::concat_cols(diff::concat_cols(x, z), t));
}

Var prior_log_density(const BoundPrior& prior, Var z) {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  Var standardized = (z - prior.mean) / diff::exp(prior.log_scale);
  Var per_dim = diff::square(standardized) * -0.5 - prior.log_scale - half_log_2pi;
  return diff::sum_cols(per_dim);
}

Var propensity(const BoundModel& model, Var x) {
  if (!model.propensity) throw ConfigError("propensity classifier is disabled in this model");
  const double clip = model.propensity->clip;
  return diff::clamp(diff::sigmoid(mlp_forward(model.propensity->net, x)), clip, 1.0 - clip);
}

}  // namespace cib
