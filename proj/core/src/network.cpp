#include "triaccel/network.hpp"

#include <cmath>
#include <cstring>

#include "triaccel/errors.hpp"
#include "triaccel/rng.hpp"

namespace triaccel {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::Identity;
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw ConfigError("unknown activation '" + s + "'");
}

Network Network::make(const std::vector<LayerSpec>& specs, uint64_t seed,
                      const std::vector<double>& init_scales) {
  if (specs.empty()) throw ConfigError("network needs at least one layer");
  if (!init_scales.empty() && init_scales.size() != specs.size())
    throw ConfigError("init_scales must match layer count");
  for (size_t l = 1; l < specs.size(); ++l) {
    if (specs[l].in_dim != specs[l - 1].out_dim)
      throw ConfigError("layer dimension chain broken at layer " + std::to_string(l));
  }
  Network net;
  Rng rng(mix_seed(seed, 0x1e17));
  for (size_t l = 0; l < specs.size(); ++l) {
    Layer layer;
    layer.spec = specs[l];
    layer.weight = Matrix(specs[l].out_dim, specs[l].in_dim);
    layer.bias.assign(specs[l].out_dim, 0.0);
    const double scale =
        (init_scales.empty() ? 1.0 : init_scales[l]) / std::sqrt(static_cast<double>(specs[l].in_dim));
    for (double& w : layer.weight.data) w = rng.normal() * scale;
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

int Network::layer_param_count(int l) const {
  const LayerSpec& s = layers_[l].spec;
  return s.in_dim * s.out_dim + s.out_dim;
}

int Network::param_count() const {
  int total = 0;
  for (int l = 0; l < layer_count(); ++l) total += layer_param_count(l);
  return total;
}

std::vector<double> Network::get_layer_params(int l) const {
  const Layer& layer = layers_[l];
  std::vector<double> flat(layer.weight.data);
  flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
  return flat;
}

void Network::set_layer_params(int l, std::span<const double> flat) {
  Layer& layer = layers_[l];
  const size_t wn = layer.weight.data.size();
  if (flat.size() != wn + layer.bias.size())
    throw ConfigError("set_layer_params: wrong parameter count");
  std::copy(flat.begin(), flat.begin() + wn, layer.weight.data.begin());
  std::copy(flat.begin() + wn, flat.end(), layer.bias.begin());
}

uint64_t Network::param_hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  for (const Layer& layer : layers_) {
    for (double v : layer.weight.data) feed(v);
    for (double v : layer.bias) feed(v);
  }
  return h;
}

namespace {

double apply_act(Activation a, double z) {
  switch (a) {
    case Activation::Identity: return z;
    case Activation::Relu: return z > 0.0 ? z : 0.0;
    case Activation::Tanh: return std::tanh(z);
  }
  return z;
}

// Derivative in terms of the pre-activation z. Relu uses the a.e. derivative
// with value 0 at the kink.
double act_deriv(Activation a, double z) {
  switch (a) {
    case Activation::Identity: return 1.0;
    case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

void check_map(const Network& net, const PrecisionMap& map) {
  if (static_cast<int>(map.size()) != net.layer_count())
    throw ConfigError("precision map must cover every layer");
}

}  // namespace

ForwardCache forward(const Network& net, const Matrix& batch, const PrecisionMap& precision_map) {
  check_map(net, precision_map);
  if (batch.cols != net.input_dim())
    throw ConfigError("batch width does not match network input dim");
  if (batch.rows <= 0) throw ConfigError("empty batch");

  ForwardCache cache;
  const int L = net.layer_count();
  cache.inputs.reserve(L);
  cache.preacts.reserve(L);
  cache.outputs.reserve(L);
  cache.qweights.reserve(L);
  cache.qbiases.reserve(L);

  const Matrix* current = &batch;
  for (int l = 0; l < L; ++l) {
    const Layer& layer = net.layer(l);
    const PrecisionMode mode = precision_map[l];
    const int n = current->rows;
    const int in = layer.spec.in_dim;
    const int out = layer.spec.out_dim;

    Matrix x = *current;
    quantize_buffer(x.data, mode);
    Matrix w = layer.weight;
    quantize_buffer(w.data, mode);
    std::vector<double> b = layer.bias;
    quantize_buffer(b, mode);

    Matrix z(n, out);
    for (int r = 0; r < n; ++r) {
      for (int o = 0; o < out; ++o) {
        double acc = b[o];
        for (int i = 0; i < in; ++i) acc += x(r, i) * w(o, i);
        z(r, o) = acc;
      }
    }
    quantize_buffer(z.data, mode);

    Matrix a(n, out);
    for (size_t i = 0; i < z.data.size(); ++i) a.data[i] = apply_act(layer.spec.act, z.data[i]);
    quantize_buffer(a.data, mode);

    cache.inputs.push_back(std::move(x));
    cache.qweights.push_back(std::move(w));
    cache.qbiases.push_back(std::move(b));
    cache.preacts.push_back(std::move(z));
    cache.outputs.push_back(std::move(a));
    current = &cache.outputs.back();
  }
  return cache;
}

double softmax_cross_entropy(const Matrix& logits, std::span<const int> labels) {
  if (static_cast<int>(labels.size()) != logits.rows)
    throw ConfigError("label count does not match batch size");
  double total = 0.0;
  for (int r = 0; r < logits.rows; ++r) {
    double mx = logits(r, 0);
    for (int c = 1; c < logits.cols; ++c) mx = std::max(mx, logits(r, c));
    double denom = 0.0;
    for (int c = 0; c < logits.cols; ++c) denom += std::exp(logits(r, c) - mx);
    total += std::log(denom) - (logits(r, labels[r]) - mx);
  }
  return total / logits.rows;
}

BackwardResult backward(const Network& net, const ForwardCache& cache,
                        std::span<const int> labels, const PrecisionMap& precision_map,
                        double loss_scale) {
  check_map(net, precision_map);
  const int L = net.layer_count();
  if (static_cast<int>(cache.outputs.size()) != L)
    throw ConfigError("forward cache does not match network");
  const Matrix& logits = cache.logits();
  const int n = logits.rows;
  const int classes = logits.cols;
  if (static_cast<int>(labels.size()) != n)
    throw ConfigError("label count does not match batch size");
  for (int r = 0; r < n; ++r) {
    if (labels[r] < 0 || labels[r] >= classes) throw ConfigError("label out of range");
  }

  BackwardResult result;
  result.loss = softmax_cross_entropy(logits, labels);

  bool scale_active = false;
  for (PrecisionMode m : precision_map) scale_active |= (m == PrecisionMode::Fp16);
  const double s = scale_active ? loss_scale : 1.0;

  // d(loss)/d(logits), times the loss scale.
  Matrix g(n, classes);
  for (int r = 0; r < n; ++r) {
    double mx = logits(r, 0);
    for (int c = 1; c < classes; ++c) mx = std::max(mx, logits(r, c));
    double denom = 0.0;
    for (int c = 0; c < classes; ++c) denom += std::exp(logits(r, c) - mx);
    for (int c = 0; c < classes; ++c) {
      const double p = std::exp(logits(r, c) - mx) / denom;
      g(r, c) = s * (p - (labels[r] == c ? 1.0 : 0.0)) / n;
    }
  }

  result.grads.resize(L);
  for (int l = L - 1; l >= 0; --l) {
    const Layer& layer = net.layer(l);
    const PrecisionMode mode = precision_map[l];
    const int in = layer.spec.in_dim;
    const int out = layer.spec.out_dim;
    const Matrix& z = cache.preacts[l];
    const Matrix& x = cache.inputs[l];
    const Matrix& w = cache.qweights[l];

    Matrix delta(n, out);
    for (int r = 0; r < n; ++r)
      for (int o = 0; o < out; ++o) delta(r, o) = act_deriv(layer.spec.act, z(r, o)) * g(r, o);
    quantize_buffer(delta.data, mode);

    std::vector<double> flat(static_cast<size_t>(in) * out + out, 0.0);
    for (int o = 0; o < out; ++o) {
      for (int i = 0; i < in; ++i) {
        double acc = 0.0;
        for (int r = 0; r < n; ++r) acc += delta(r, o) * x(r, i);
        flat[static_cast<size_t>(o) * in + i] = acc;
      }
    }
    for (int o = 0; o < out; ++o) {
      double acc = 0.0;
      for (int r = 0; r < n; ++r) acc += delta(r, o);
      flat[static_cast<size_t>(in) * out + o] = acc;
    }
    quantize_buffer(flat, mode);
    if (s != 1.0)
      for (double& v : flat) v /= s;
    result.grads[l] = std::move(flat);

    if (l > 0) {
      Matrix gprev(n, in);
      for (int r = 0; r < n; ++r) {
        for (int i = 0; i < in; ++i) {
          double acc = 0.0;
          for (int o = 0; o < out; ++o) acc += delta(r, o) * w(o, i);
          gprev(r, i) = acc;
        }
      }
      quantize_buffer(gprev.data, mode);
      g = std::move(gprev);
    }
  }

  result.non_finite = !std::isfinite(result.loss);
  for (const auto& layer_grads : result.grads)
    for (double v : layer_grads) result.non_finite |= !std::isfinite(v);
  return result;
}

double evaluate_accuracy_pct(const Network& net, const Matrix& inputs, std::span<const int> labels) {
  const PrecisionMap full(net.layer_count(), PrecisionMode::Fp32);
  ForwardCache cache = forward(net, inputs, full);
  const Matrix& logits = cache.logits();
  int hits = 0;
  for (int r = 0; r < logits.rows; ++r) {
    int best = 0;
    for (int c = 1; c < logits.cols; ++c)
      if (logits(r, c) > logits(r, best)) best = c;
    if (best == labels[r]) ++hits;
  }
  return 100.0 * hits / logits.rows;
}

}  // namespace triaccel
