#pragma once

#include <memory>
#include <span>
#include <vector>

#include "triaccel/network.hpp"

namespace triaccel {

// Symmetric linear operator v -> H v. Curvature probing only ever needs
// matrix-vector products, never the matrix itself.
class HvpOperator {
 public:
  virtual ~HvpOperator() = default;
  virtual int dim() const = 0;
  // Throws ConfigError when v is empty or has the wrong length.
  virtual std::vector<double> apply(std::span<const double> v) const = 0;
};

// Explicit dense symmetric matrix, mostly for tests and scripted scenarios.
class DenseHvp : public HvpOperator {
 public:
  explicit DenseHvp(Matrix m);
  int dim() const override { return m_.rows; }
  std::vector<double> apply(std::span<const double> v) const override;
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

// Exact Hessian-vector product of the softmax cross-entropy loss restricted
// to one layer's parameter block, via a forward-over-reverse sweep. Always
// runs at full width and never touches the master weights. The direction and
// result are flattened like Network::get_layer_params.
class NetworkLayerHvp : public HvpOperator {
 public:
  NetworkLayerHvp(const Network& net, int layer, const Matrix& batch,
                  std::span<const int> labels);
  int dim() const override;
  std::vector<double> apply(std::span<const double> v) const override;

 private:
  const Network& net_;
  int layer_;
  int batch_size_;
  std::vector<int> labels_;
  Matrix input_;
  // Cached full-width passes, reused by every apply().
  std::vector<Matrix> preacts_;   // z_i
  std::vector<Matrix> outputs_;   // a_i
  std::vector<Matrix> out_grads_; // dL/da_i
  Matrix probs_;                  // softmax rows of the logits
};

}  // namespace triaccel
