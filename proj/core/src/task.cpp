#include "triaccel/task.hpp"

#include <cmath>

#include "triaccel/errors.hpp"
#include "triaccel/rng.hpp"

namespace triaccel {

void validate(const TaskConfig& cfg) {
  if (cfg.input_dim <= 0) throw ConfigError("task: input_dim must be positive");
  if (cfg.classes < 2) throw ConfigError("task: need at least two classes");
  if (cfg.train_samples < cfg.classes || cfg.test_samples < cfg.classes)
    throw ConfigError("task: need at least one sample per class");
  if (!(cfg.noise > 0.0)) throw ConfigError("task: noise must be positive");
  if (!(cfg.mean_radius > 0.0)) throw ConfigError("task: mean_radius must be positive");
}

namespace {

Dataset sample_split(const TaskConfig& cfg, const std::vector<std::vector<double>>& means,
                     int count, Rng& rng) {
  Dataset out;
  out.inputs = Matrix(count, cfg.input_dim);
  out.labels.resize(count);
  for (int r = 0; r < count; ++r) {
    const int cls = r % cfg.classes;
    out.labels[r] = cls;
    for (int i = 0; i < cfg.input_dim; ++i)
      out.inputs(r, i) = means[cls][i] + cfg.noise * rng.normal();
  }
  return out;
}

}  // namespace

Task make_task(const TaskConfig& cfg, uint64_t seed) {
  validate(cfg);
  Rng mean_rng(mix_seed(seed, 0x7a5c));

  std::vector<std::vector<double>> means(cfg.classes);
  for (int c = 0; c < cfg.classes; ++c) {
    std::vector<double> m;
    double n = 0.0;
    do {
      m = mean_rng.normal_vector(cfg.input_dim);
      n = 0.0;
      for (double v : m) n += v * v;
      n = std::sqrt(n);
    } while (n < 1e-9);
    for (double& v : m) v *= cfg.mean_radius / n;
    means[c] = std::move(m);
  }

  Task task;
  Rng train_rng(mix_seed(seed, 0x7a5c, 1));
  Rng test_rng(mix_seed(seed, 0x7a5c, 2));
  task.train = sample_split(cfg, means, cfg.train_samples, train_rng);
  task.test = sample_split(cfg, means, cfg.test_samples, test_rng);
  return task;
}

Dataset gather(const Dataset& data, const std::vector<int>& indices) {
  Dataset out;
  out.inputs = Matrix(static_cast<int>(indices.size()), data.inputs.cols);
  out.labels.resize(indices.size());
  for (size_t r = 0; r < indices.size(); ++r) {
    const int src = indices[r];
    if (src < 0 || src >= data.size()) throw ConfigError("gather: index out of range");
    for (int c = 0; c < data.inputs.cols; ++c)
      out.inputs(static_cast<int>(r), c) = data.inputs(src, c);
    out.labels[r] = data.labels[src];
  }
  return out;
}

}  // namespace triaccel
