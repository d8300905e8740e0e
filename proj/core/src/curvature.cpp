#include "triaccel/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "triaccel/errors.hpp"
#include "triaccel/rng.hpp"

namespace triaccel {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// Remove the components along already-found eigenvectors.
void project_out(const std::vector<EigenPair>& found, std::vector<double>& v) {
  for (const EigenPair& p : found) axpy(-dot(p.vector, v), p.vector, v);
}

EigenPair iterate_deflated(const HvpOperator& op, const CurvatureConfig& cfg,
                           const std::vector<EigenPair>& found, std::vector<double> u) {
  constexpr double kTiny = 1e-12;
  EigenPair result;

  project_out(found, u);
  double un = norm(u);
  if (un < kTiny) {
    // Start vector fell into the deflated span; whatever is left acts as zero.
    result.value = 0.0;
    result.vector = std::move(u);
    result.converged = true;
    return result;
  }
  for (double& x : u) x /= un;

  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int it = 1; it <= cfg.max_iters; ++it) {
    std::vector<double> w = op.apply(u);
    for (const EigenPair& p : found) axpy(-p.value * dot(p.vector, u), p.vector, w);

    const double lambda = dot(u, w);
    result.value = lambda;
    result.vector = u;
    result.iterations = it;
    if (!std::isnan(prev) &&
        std::fabs(lambda - prev) < cfg.tol * std::max(1.0, std::fabs(lambda))) {
      result.converged = true;
      return result;
    }
    prev = lambda;

    project_out(found, w);
    const double wn = norm(w);
    if (wn < kTiny) {
      // The operator annihilates this direction: eigenvalue 0.
      result.value = 0.0;
      result.converged = true;
      return result;
    }
    for (size_t i = 0; i < w.size(); ++i) u[i] = w[i] / wn;
  }
  result.converged = false;
  return result;
}

std::vector<double> spherical_start(int dim, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> u;
  double n = 0.0;
  do {
    u = rng.normal_vector(dim);
    n = norm(u);
  } while (n < 1e-12);
  for (double& x : u) x /= n;
  return u;
}

}  // namespace

EigenPair power_iterate(const HvpOperator& op, const CurvatureConfig& cfg) {
  if (op.dim() <= 0) throw ConfigError("power_iterate: empty operator");
  return iterate_deflated(op, cfg, {}, spherical_start(op.dim(), cfg.seed));
}

EigenPair power_iterate(const HvpOperator& op, const CurvatureConfig& cfg,
                        std::vector<double> start) {
  if (static_cast<int>(start.size()) != op.dim())
    throw ConfigError("power_iterate: start vector has wrong length");
  return iterate_deflated(op, cfg, {}, std::move(start));
}

CurvatureEstimate estimate_top_k(const HvpOperator& op, const CurvatureConfig& cfg) {
  const int dim = op.dim();
  if (cfg.top_k <= 0) throw ConfigError("estimate_top_k: top_k must be positive");
  if (cfg.top_k > dim) throw ConfigError("estimate_top_k: top_k exceeds operator dimension");

  CurvatureEstimate est;
  for (int j = 0; j < cfg.top_k; ++j) {
    std::vector<double> start = spherical_start(dim, mix_seed(cfg.seed, 0xe1, j));
    est.pairs.push_back(iterate_deflated(op, cfg, est.pairs, std::move(start)));
  }
  std::stable_sort(est.pairs.begin(), est.pairs.end(), [](const EigenPair& a, const EigenPair& b) {
    return std::fabs(a.value) > std::fabs(b.value);
  });
  return est;
}

double max_signed(const CurvatureEstimate& est) {
  if (est.pairs.empty()) throw ConfigError("max_signed: empty estimate");
  double best = est.pairs.front().value;
  for (const EigenPair& p : est.pairs) best = std::max(best, p.value);
  return best;
}

}  // namespace triaccel
