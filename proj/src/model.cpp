#include "proselflc/model.hpp"

#include <cmath>
#include <string>

#include "proselflc/errors.hpp"
#include "proselflc/rng.hpp"

namespace proselflc {

std::string_view to_string(Activation act) {
  return act == Activation::relu ? "relu" : "tanh";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw InvalidParameter("unknown activation '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
  if (input_dim < 1) throw InvalidParameter("model: input_dim must be >= 1");
  if (classes < 2) throw InvalidParameter("model: classes must be >= 2");
  if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) {
    throw InvalidParameter("model: init_scale must be finite and >= 0");
  }
}

LayerSet zeros_like(const LayerSet& layers) {
  LayerSet out;
  out.reserve(layers.size());
  for (const auto& l : layers) {
    out.push_back({l.in, l.out, std::vector<double>(l.weights.size(), 0.0),
                   std::vector<double>(l.bias.size(), 0.0)});
  }
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

Model init_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Model m{cfg, {}};
  SplitMix64 rng(derive_seed(seed, "model-init"));
  auto make = [&](std::size_t in, std::size_t out) {
    DenseLayer l{in, out, std::vector<double>(in * out), std::vector<double>(out, 0.0)};
    const double scale = cfg.init_scale / std::sqrt(static_cast<double>(in));
    for (double& w : l.weights) w = scale * rng.normal();
    return l;
  };
  if (cfg.hidden_dim == 0) {
    m.layers.push_back(make(cfg.input_dim, cfg.classes));
  } else {
    m.layers.push_back(make(cfg.input_dim, cfg.hidden_dim));
    m.layers.push_back(make(cfg.hidden_dim, cfg.classes));
  }
  return m;
}

namespace {

void affine(const DenseLayer& l, std::span<const double> x, std::vector<double>& y) {
  y.resize(l.out);
  for (std::size_t o = 0; o < l.out; ++o) {
    const double* w = l.weights.data() + o * l.in;
    double acc = l.bias[o];
    for (std::size_t i = 0; i < l.in; ++i) acc += w[i] * x[i];
    y[o] = acc;
  }
}

double activate(Activation act, double v) {
  return act == Activation::relu ? (v > 0.0 ? v : 0.0) : std::tanh(v);
}

double activate_grad(Activation act, double pre, double post) {
  return act == Activation::relu ? (pre > 0.0 ? 1.0 : 0.0) : 1.0 - post * post;
}

// grads.weights += scale * delta x^T, grads.bias += scale * delta
void accumulate(DenseLayer& g, std::span<const double> x, std::span<const double> delta,
                double scale) {
  for (std::size_t o = 0; o < g.out; ++o) {
    const double d = scale * delta[o];
    if (d == 0.0) continue;
    double* w = g.weights.data() + o * g.in;
    for (std::size_t i = 0; i < g.in; ++i) w[i] += d * x[i];
    g.bias[o] += d;
  }
}

}  // namespace

void forward(const Model& model, std::span<const double> x, ForwardCache& cache) {
  if (x.size() != model.config.input_dim) {
    throw ShapeError("forward: input has " + std::to_string(x.size()) + " features, model expects " +
                     std::to_string(model.config.input_dim));
  }
  if (model.layers.size() == 1) {
    affine(model.layers[0], x, cache.logits);
    return;
  }
  affine(model.layers[0], x, cache.hidden_pre);
  cache.hidden.resize(cache.hidden_pre.size());
  for (std::size_t h = 0; h < cache.hidden.size(); ++h) {
    cache.hidden[h] = activate(model.config.activation, cache.hidden_pre[h]);
  }
  affine(model.layers[1], cache.hidden, cache.logits);
}

std::vector<double> forward(const Model& model, std::span<const double> x) {
  ForwardCache cache;
  forward(model, x, cache);
  return std::move(cache.logits);
}

void backward(const Model& model, std::span<const double> x, const ForwardCache& cache,
              std::span<const double> dlogits, double scale, LayerSet& grads) {
  if (model.layers.size() == 1) {
    accumulate(grads[0], x, dlogits, scale);
    return;
  }
  const DenseLayer& top = model.layers[1];
  accumulate(grads[1], cache.hidden, dlogits, scale);
  std::vector<double> delta(top.in, 0.0);
  for (std::size_t o = 0; o < top.out; ++o) {
    const double d = dlogits[o];
    const double* w = top.weights.data() + o * top.in;
    for (std::size_t h = 0; h < top.in; ++h) delta[h] += d * w[h];
  }
  for (std::size_t h = 0; h < delta.size(); ++h) {
    delta[h] *= activate_grad(model.config.activation, cache.hidden_pre[h], cache.hidden[h]);
  }
  accumulate(grads[0], x, delta, scale);
}

}  // namespace proselflc
