#pragma once

// Linear softmax classifier or one-hidden-layer network with hand-written
// backpropagation: z = W2 act(W1 x + b1) + b2, or z = W x + b when
// hidden_dim == 0.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace proselflc {

enum class Activation { relu, tanh };

std::string_view to_string(Activation act);
Activation parse_activation(std::string_view name);

struct ModelConfig {
  std::size_t input_dim = 1;
  std::size_t hidden_dim = 32;  // 0 selects the linear model
  std::size_t classes = 2;
  double init_scale = 1.0;
  Activation activation = Activation::relu;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Weights are out x in, row-major.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Same shape as a model's layers; used for gradients and momentum buffers.
using LayerSet = std::vector<DenseLayer>;

LayerSet zeros_like(const LayerSet& layers);

struct Model {
  ModelConfig config;
  LayerSet layers;

  std::size_t parameter_count() const;
  friend bool operator==(const Model&, const Model&) = default;
};

/// Zero-mean Gaussian weights scaled by init_scale / sqrt(fan_in), zero biases.
Model init_model(const ModelConfig& cfg, std::uint64_t seed);

struct ForwardCache {
  std::vector<double> hidden_pre;
  std::vector<double> hidden;
  std::vector<double> logits;
};

std::vector<double> forward(const Model& model, std::span<const double> x);
void forward(const Model& model, std::span<const double> x, ForwardCache& cache);

/// Adds d(loss)/d(params) for one example to `grads`, scaled by `scale`.
void backward(const Model& model, std::span<const double> x, const ForwardCache& cache,
              std::span<const double> dlogits, double scale, LayerSet& grads);

}  // namespace proselflc
