#include "triaccel/hvp.hpp"

#include <cmath>

#include "triaccel/errors.hpp"

namespace triaccel {

DenseHvp::DenseHvp(Matrix m) : m_(std::move(m)) {
  if (m_.rows != m_.cols) throw ConfigError("DenseHvp needs a square matrix");
  if (m_.rows == 0) throw ConfigError("DenseHvp needs a non-empty matrix");
}

std::vector<double> DenseHvp::apply(std::span<const double> v) const {
  if (static_cast<int>(v.size()) != m_.rows)
    throw ConfigError("DenseHvp::apply: direction has wrong length");
  std::vector<double> out(m_.rows, 0.0);
  for (int r = 0; r < m_.rows; ++r) {
    double acc = 0.0;
    for (int c = 0; c < m_.cols; ++c) acc += m_(r, c) * v[c];
    out[r] = acc;
  }
  return out;
}

namespace {

double act_value(Activation a, double z) {
  switch (a) {
    case Activation::Identity: return z;
    case Activation::Relu: return z > 0.0 ? z : 0.0;
    case Activation::Tanh: return std::tanh(z);
  }
  return z;
}

double act_d1(Activation a, double z) {
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

// Second derivative; relu uses 0 almost everywhere, matching the first
// derivative convention at the kink.
double act_d2(Activation a, double z) {
  switch (a) {
    case Activation::Identity: return 0.0;
    case Activation::Relu: return 0.0;
    case Activation::Tanh: {
      const double t = std::tanh(z);
      return -2.0 * t * (1.0 - t * t);
    }
  }
  return 0.0;
}

}  // namespace

NetworkLayerHvp::NetworkLayerHvp(const Network& net, int layer, const Matrix& batch,
                                 std::span<const int> labels)
    : net_(net), layer_(layer), batch_size_(batch.rows),
      labels_(labels.begin(), labels.end()), input_(batch) {
  if (layer < 0 || layer >= net.layer_count()) throw ConfigError("hvp: layer index out of range");
  if (batch.cols != net.input_dim()) throw ConfigError("hvp: batch width mismatch");
  if (static_cast<int>(labels.size()) != batch.rows)
    throw ConfigError("hvp: label count mismatch");

  const int L = net.layer_count();
  const int n = batch.rows;
  preacts_.reserve(L);
  outputs_.reserve(L);

  const Matrix* cur = &input_;
  for (int l = 0; l < L; ++l) {
    const Layer& ly = net.layer(l);
    Matrix z(n, ly.spec.out_dim);
    for (int r = 0; r < n; ++r)
      for (int o = 0; o < ly.spec.out_dim; ++o) {
        double acc = ly.bias[o];
        for (int i = 0; i < ly.spec.in_dim; ++i) acc += (*cur)(r, i) * ly.weight(o, i);
        z(r, o) = acc;
      }
    Matrix a(n, ly.spec.out_dim);
    for (size_t i = 0; i < z.data.size(); ++i) a.data[i] = act_value(ly.spec.act, z.data[i]);
    preacts_.push_back(std::move(z));
    outputs_.push_back(std::move(a));
    cur = &outputs_.back();
  }

  const Matrix& logits = outputs_.back();
  const int classes = logits.cols;
  probs_ = Matrix(n, classes);
  for (int r = 0; r < n; ++r) {
    double mx = logits(r, 0);
    for (int c = 1; c < classes; ++c) mx = std::max(mx, logits(r, c));
    double denom = 0.0;
    for (int c = 0; c < classes; ++c) denom += std::exp(logits(r, c) - mx);
    for (int c = 0; c < classes; ++c) probs_(r, c) = std::exp(logits(r, c) - mx) / denom;
  }

  // dL/da_i for every layer, walking the chain top-down once.
  out_grads_.assign(L, Matrix());
  Matrix g(n, classes);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < classes; ++c)
      g(r, c) = (probs_(r, c) - (labels_[r] == c ? 1.0 : 0.0)) / n;
  out_grads_[L - 1] = g;
  for (int l = L - 1; l > 0; --l) {
    const Layer& ly = net.layer(l);
    const Matrix& z = preacts_[l];
    Matrix gprev(n, ly.spec.in_dim);
    for (int r = 0; r < n; ++r) {
      for (int i = 0; i < ly.spec.in_dim; ++i) {
        double acc = 0.0;
        for (int o = 0; o < ly.spec.out_dim; ++o)
          acc += act_d1(ly.spec.act, z(r, o)) * out_grads_[l](r, o) * ly.weight(o, i);
        gprev(r, i) = acc;
      }
    }
    out_grads_[l - 1] = std::move(gprev);
  }
}

int NetworkLayerHvp::dim() const { return net_.layer_param_count(layer_); }

std::vector<double> NetworkLayerHvp::apply(std::span<const double> v) const {
  if (v.empty()) throw ConfigError("hvp: empty direction");
  if (static_cast<int>(v.size()) != dim()) throw ConfigError("hvp: direction has wrong length");

  const int L = net_.layer_count();
  const int n = batch_size_;
  const Layer& target = net_.layer(layer_);
  const int t_in = target.spec.in_dim;
  const int t_out = target.spec.out_dim;
  const double* V = v.data();                                  // t_out x t_in, row-major
  const double* c = v.data() + static_cast<size_t>(t_in) * t_out;

  // Directional forward: Rz/Ra vanish below the target layer.
  std::vector<Matrix> rz(L), ra(L);
  const Matrix& x_in = layer_ == 0 ? input_ : outputs_[layer_ - 1];
  rz[layer_] = Matrix(n, t_out);
  for (int r = 0; r < n; ++r)
    for (int o = 0; o < t_out; ++o) {
      double acc = c[o];
      for (int i = 0; i < t_in; ++i) acc += x_in(r, i) * V[static_cast<size_t>(o) * t_in + i];
      rz[layer_](r, o) = acc;
    }
  for (int l = layer_; l < L; ++l) {
    const Layer& ly = net_.layer(l);
    if (l > layer_) {
      rz[l] = Matrix(n, ly.spec.out_dim);
      for (int r = 0; r < n; ++r)
        for (int o = 0; o < ly.spec.out_dim; ++o) {
          double acc = 0.0;
          for (int i = 0; i < ly.spec.in_dim; ++i) acc += ra[l - 1](r, i) * ly.weight(o, i);
          rz[l](r, o) = acc;
        }
    }
    ra[l] = Matrix(n, ly.spec.out_dim);
    for (size_t i = 0; i < rz[l].data.size(); ++i)
      ra[l].data[i] = act_d1(ly.spec.act, preacts_[l].data[i]) * rz[l].data[i];
  }

  // Directional gradient of dL/da at the top: Gauss-Newton action of the
  // softmax cross-entropy Hessian on Ra_logits.
  const int classes = probs_.cols;
  Matrix rg(n, classes);
  const Matrix& r_logits = ra[L - 1];
  for (int r = 0; r < n; ++r) {
    double dot = 0.0;
    for (int k = 0; k < classes; ++k) dot += probs_(r, k) * r_logits(r, k);
    for (int k = 0; k < classes; ++k)
      rg(r, k) = probs_(r, k) * (r_logits(r, k) - dot) / n;
  }

  // Directional backward down to the target layer.
  Matrix rdelta;
  for (int l = L - 1; l >= layer_; --l) {
    const Layer& ly = net_.layer(l);
    const Matrix& z = preacts_[l];
    const Matrix& g = out_grads_[l];
    rdelta = Matrix(n, ly.spec.out_dim);
    for (int r = 0; r < n; ++r)
      for (int o = 0; o < ly.spec.out_dim; ++o) {
        const double zval = z(r, o);
        rdelta(r, o) = act_d2(ly.spec.act, zval) * rz[l](r, o) * g(r, o) +
                       act_d1(ly.spec.act, zval) * rg(r, o);
      }
    if (l > layer_) {
      Matrix rgprev(n, ly.spec.in_dim);
      for (int r = 0; r < n; ++r)
        for (int i = 0; i < ly.spec.in_dim; ++i) {
          double acc = 0.0;
          for (int o = 0; o < ly.spec.out_dim; ++o) acc += rdelta(r, o) * ly.weight(o, i);
          rgprev(r, i) = acc;
        }
      rg = std::move(rgprev);
    }
  }

  std::vector<double> out(v.size(), 0.0);
  for (int o = 0; o < t_out; ++o)
    for (int i = 0; i < t_in; ++i) {
      double acc = 0.0;
      for (int r = 0; r < n; ++r) acc += rdelta(r, o) * x_in(r, i);
      out[static_cast<size_t>(o) * t_in + i] = acc;
    }
  for (int o = 0; o < t_out; ++o) {
    double acc = 0.0;
    for (int r = 0; r < n; ++r) acc += rdelta(r, o);
    out[static_cast<size_t>(t_in) * t_out + o] = acc;
  }
  return out;
}

}  // namespace triaccel
