#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "triaccel/precision.hpp"

namespace triaccel {

// Row-major dense matrix, just enough for the small nets here.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}
  double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

enum class Activation : uint8_t { Identity, Relu, Tanh };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct LayerSpec {
  int in_dim = 0;
  int out_dim = 0;
  Activation act = Activation::Identity;
};

struct Layer {
  LayerSpec spec;
  Matrix weight;              // out_dim x in_dim
  std::vector<double> bias;   // out_dim
};

// Fully connected net with full-width master parameters. Softmax
// cross-entropy loss over the last layer's outputs.
class Network {
 public:
  Network() = default;
  // Gaussian init: weights N(0, scale/sqrt(in_dim)) per layer, biases zero.
  // `init_scales` may be empty (all 1.0) or one scale per layer.
  static Network make(const std::vector<LayerSpec>& specs, uint64_t seed,
                      const std::vector<double>& init_scales = {});

  int layer_count() const { return static_cast<int>(layers_.size()); }
  int input_dim() const { return layers_.front().spec.in_dim; }
  int output_dim() const { return layers_.back().spec.out_dim; }
  const Layer& layer(int l) const { return layers_[l]; }
  Layer& layer(int l) { return layers_[l]; }

  // Parameter count of one layer: in*out weights + out biases.
  int layer_param_count(int l) const;
  int param_count() const;

  // Flattened view of a layer's parameters (weights row-major, then bias).
  std::vector<double> get_layer_params(int l) const;
  void set_layer_params(int l, std::span<const double> flat);

  // FNV-1a over the raw bits of every parameter, for integrity checks.
  uint64_t param_hash() const;

 private:
  std::vector<Layer> layers_;
};

using PrecisionMap = std::vector<PrecisionMode>;

// Activations cached by forward() for the matching backward().
// Everything stored here has already been quantized to its layer's mode.
struct ForwardCache {
  std::vector<Matrix> inputs;    // per layer: quantized input batch
  std::vector<Matrix> preacts;   // per layer: quantized pre-activation
  std::vector<Matrix> outputs;   // per layer: quantized activation output
  std::vector<Matrix> qweights;  // per layer: quantized weight copy
  std::vector<std::vector<double>> qbiases;
  const Matrix& logits() const { return outputs.back(); }
};

// Runs the batch through quantized compute copies of the parameters. Master
// weights are read-only here. Throws ConfigError on dimension mismatch or if
// precision_map does not cover every layer.
ForwardCache forward(const Network& net, const Matrix& batch, const PrecisionMap& precision_map);

struct BackwardResult {
  double loss = 0.0;
  // Per layer, flattened like get_layer_params (weights then bias).
  std::vector<std::vector<double>> grads;
  // True when the loss or any gradient element came out non-finite.
  bool non_finite = false;
};

// Backward pass mirroring forward's quantization: gradient tensors entering
// and leaving each layer are quantized to that layer's mode. When any layer
// runs FP16 the loss gradient is multiplied by loss_scale before the pass and
// the returned gradients are divided by it after quantization.
BackwardResult backward(const Network& net, const ForwardCache& cache,
                        std::span<const int> labels, const PrecisionMap& precision_map,
                        double loss_scale = 1024.0);

// Mean softmax cross-entropy of already-computed logits.
double softmax_cross_entropy(const Matrix& logits, std::span<const int> labels);

// Fraction of argmax hits in percent, computed at full width on the master
// weights.
double evaluate_accuracy_pct(const Network& net, const Matrix& inputs, std::span<const int> labels);

}  // namespace triaccel
