#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "triaccel/csv.hpp"
#include "triaccel/errors.hpp"
#include "triaccel/harness.hpp"

namespace triaccel {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cur = trim(cur);
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ConfigError("plan: key '" + key + "' has non-numeric value '" + value + "'");
  return v;
}

int64_t parse_int(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0')
    throw ConfigError("plan: key '" + key + "' has non-integer value '" + value + "'");
  return v;
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const unsigned long long v = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0' || value.front() == '-')
    throw ConfigError("plan: key '" + key + "' has non-integer value '" + value + "'");
  return v;
}

void apply_key(ExperimentPlan& plan, const std::string& section, const std::string& key,
               const std::string& value) {
  auto full = section + "." + key;
  auto bad_key = [&]() -> ConfigError {
    return ConfigError("plan: unknown key '" + key + "' in section [" + section + "]");
  };

  if (section == "experiment") {
    if (key == "modes") {
      plan.modes.clear();
      for (const std::string& m : split_list(value)) plan.modes.push_back(run_mode_from_string(m));
    } else if (key == "seeds") {
      plan.seeds.clear();
      for (const std::string& s : split_list(value)) plan.seeds.push_back(parse_u64(full, s));
    } else if (key == "workers") {
      plan.workers = static_cast<int>(parse_int(full, value));
    } else if (key == "score_mem_reference") {
      plan.score_mem_reference = value == "mem_max" ? 0 : parse_int(full, value);
    } else {
      throw bad_key();
    }
    return;
  }
  if (section == "task") {
    TaskConfig& t = plan.setup.task;
    if (key == "input_dim") t.input_dim = static_cast<int>(parse_int(full, value));
    else if (key == "classes") t.classes = static_cast<int>(parse_int(full, value));
    else if (key == "train_samples") t.train_samples = static_cast<int>(parse_int(full, value));
    else if (key == "test_samples") t.test_samples = static_cast<int>(parse_int(full, value));
    else if (key == "mean_radius") t.mean_radius = parse_double(full, value);
    else if (key == "noise") t.noise = parse_double(full, value);
    else throw bad_key();
    return;
  }
  if (section == "network") {
    ControlLoopConfig& l = plan.setup.loop;
    if (key == "hidden") {
      l.hidden.clear();
      for (const std::string& h : split_list(value))
        l.hidden.push_back(static_cast<int>(parse_int(full, h)));
    } else if (key == "activation") {
      l.activation = activation_from_string(value);
    } else if (key == "hidden_init_scale") {
      l.hidden_init_scale = parse_double(full, value);
    } else if (key == "output_init_scale") {
      l.output_init_scale = parse_double(full, value);
    } else {
      throw bad_key();
    }
    return;
  }
  if (section == "loop") {
    ControlLoopConfig& l = plan.setup.loop;
    if (key == "total_steps") l.total_steps = static_cast<int>(parse_int(full, value));
    else if (key == "ctrl_period") l.ctrl_period = static_cast<int>(parse_int(full, value));
    else if (key == "warmup_epochs") l.warmup_epochs = static_cast<int>(parse_int(full, value));
    else if (key == "momentum") l.momentum = parse_double(full, value);
    else if (key == "loss_scale") l.loss_scale = parse_double(full, value);
    else throw bad_key();
    return;
  }
  if (section == "variance") {
    if (key == "beta") plan.setup.variance_beta = parse_double(full, value);
    else throw bad_key();
    return;
  }
  if (section == "curvature") {
    CurvatureConfig& c = plan.setup.curv;
    if (key == "top_k") c.top_k = static_cast<int>(parse_int(full, value));
    else if (key == "period_steps") c.period_steps = static_cast<int>(parse_int(full, value));
    else if (key == "probe_batch") c.probe_batch = static_cast<int>(parse_int(full, value));
    else if (key == "max_iters") c.max_iters = static_cast<int>(parse_int(full, value));
    else if (key == "tol") c.tol = parse_double(full, value);
    else if (key == "seed") c.seed = parse_u64(full, value);
    else throw bad_key();
    return;
  }
  if (section == "scheduler") {
    SchedulerConfig& s = plan.setup.sched;
    if (key == "tau_low") s.tau_low = parse_double(full, value);
    else if (key == "tau_high") s.tau_high = parse_double(full, value);
    else if (key == "tau_curv") s.tau_curv = parse_double(full, value);
    else if (key == "eta0") s.eta0 = parse_double(full, value);
    else if (key == "alpha") s.alpha = parse_double(full, value);
    else throw bad_key();
    return;
  }
  if (section == "memory") {
    BatchControllerConfig& b = plan.setup.batch;
    if (key == "rho_low") b.rho_low = parse_double(full, value);
    else if (key == "rho_high") b.rho_high = parse_double(full, value);
    else if (key == "delta_up") b.delta_up = static_cast<int>(parse_int(full, value));
    else if (key == "delta_down") b.delta_down = static_cast<int>(parse_int(full, value));
    else if (key == "batch_min") b.batch_min = static_cast<int>(parse_int(full, value));
    else if (key == "batch_max") b.batch_max = static_cast<int>(parse_int(full, value));
    else if (key == "initial_batch") plan.setup.initial_batch = static_cast<int>(parse_int(full, value));
    else if (key == "overhead_bytes") plan.setup.mem_overhead_bytes = parse_int(full, value);
    else if (key == "mem_max") plan.setup.mem_max = parse_int(full, value);
    else throw bad_key();
    return;
  }
  throw ConfigError("plan: unknown section [" + section + "]");
}

}  // namespace

ExperimentPlan default_plan() {
  ExperimentPlan plan;
  plan.modes = all_run_modes();
  return plan;
}

void validate(const ExperimentPlan& plan) {
  if (plan.modes.empty()) throw ConfigError("plan: modes must be non-empty");
  if (plan.seeds.empty()) throw ConfigError("plan: seeds must be non-empty");
  for (size_t i = 0; i < plan.modes.size(); ++i)
    for (size_t j = i + 1; j < plan.modes.size(); ++j)
      if (plan.modes[i] == plan.modes[j]) throw ConfigError("plan: duplicate mode");
  for (size_t i = 0; i < plan.seeds.size(); ++i)
    for (size_t j = i + 1; j < plan.seeds.size(); ++j)
      if (plan.seeds[i] == plan.seeds[j]) throw ConfigError("plan: duplicate seed");
  if (plan.workers < 1) throw ConfigError("plan: workers must be at least 1");
  if (plan.score_mem_reference < 0) throw ConfigError("plan: negative score_mem_reference");
  validate(plan.setup);
}

ExperimentPlan parse_plan(const std::string& text) {
  ExperimentPlan plan = default_plan();
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  std::map<std::string, bool> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("plan: malformed section header at line " + std::to_string(line_no));
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw ConfigError("plan: empty section name at line " + std::to_string(line_no));
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("plan: expected 'key = value' at line " + std::to_string(line_no));
    if (section.empty())
      throw ConfigError("plan: key before any section at line " + std::to_string(line_no));
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("plan: empty key at line " + std::to_string(line_no));
    const std::string full = section + "." + key;
    if (seen[full])
      throw ConfigError("plan: duplicate key '" + full + "' at line " + std::to_string(line_no));
    seen[full] = true;
    apply_key(plan, section, key, value);
  }
  validate(plan);
  return plan;
}

std::string serialize_plan(const ExperimentPlan& plan) {
  std::string out;
  auto kv = [&out](const std::string& k, const std::string& v) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  };

  out += "[experiment]\n";
  {
    std::string modes;
    for (size_t i = 0; i < plan.modes.size(); ++i) {
      if (i) modes += ", ";
      modes += to_string(plan.modes[i]);
    }
    kv("modes", modes);
    std::string seeds;
    for (size_t i = 0; i < plan.seeds.size(); ++i) {
      if (i) seeds += ", ";
      seeds += std::to_string(plan.seeds[i]);
    }
    kv("seeds", seeds);
    kv("workers", std::to_string(plan.workers));
    kv("score_mem_reference", plan.score_mem_reference == 0
                                  ? std::string("mem_max")
                                  : std::to_string(plan.score_mem_reference));
  }

  const TaskConfig& t = plan.setup.task;
  out += "\n[task]\n";
  kv("input_dim", std::to_string(t.input_dim));
  kv("classes", std::to_string(t.classes));
  kv("train_samples", std::to_string(t.train_samples));
  kv("test_samples", std::to_string(t.test_samples));
  kv("mean_radius", format_double(t.mean_radius));
  kv("noise", format_double(t.noise));

  const ControlLoopConfig& l = plan.setup.loop;
  out += "\n[network]\n";
  {
    std::string hidden;
    for (size_t i = 0; i < l.hidden.size(); ++i) {
      if (i) hidden += ", ";
      hidden += std::to_string(l.hidden[i]);
    }
    kv("hidden", hidden);
    kv("activation", to_string(l.activation));
    kv("hidden_init_scale", format_double(l.hidden_init_scale));
    kv("output_init_scale", format_double(l.output_init_scale));
  }

  out += "\n[loop]\n";
  kv("total_steps", std::to_string(l.total_steps));
  kv("ctrl_period", std::to_string(l.ctrl_period));
  kv("warmup_epochs", std::to_string(l.warmup_epochs));
  kv("momentum", format_double(l.momentum));
  kv("loss_scale", format_double(l.loss_scale));

  out += "\n[variance]\n";
  kv("beta", format_double(plan.setup.variance_beta));

  const CurvatureConfig& c = plan.setup.curv;
  out += "\n[curvature]\n";
  kv("top_k", std::to_string(c.top_k));
  kv("period_steps", std::to_string(c.period_steps));
  kv("probe_batch", std::to_string(c.probe_batch));
  kv("max_iters", std::to_string(c.max_iters));
  kv("tol", format_double(c.tol));
  kv("seed", std::to_string(c.seed));

  const SchedulerConfig& s = plan.setup.sched;
  out += "\n[scheduler]\n";
  kv("tau_low", format_double(s.tau_low));
  kv("tau_high", format_double(s.tau_high));
  kv("tau_curv", format_double(s.tau_curv));
  kv("eta0", format_double(s.eta0));
  kv("alpha", format_double(s.alpha));

  const BatchControllerConfig& b = plan.setup.batch;
  out += "\n[memory]\n";
  kv("rho_low", format_double(b.rho_low));
  kv("rho_high", format_double(b.rho_high));
  kv("delta_up", std::to_string(b.delta_up));
  kv("delta_down", std::to_string(b.delta_down));
  kv("batch_min", std::to_string(b.batch_min));
  kv("batch_max", std::to_string(b.batch_max));
  kv("initial_batch", std::to_string(plan.setup.initial_batch));
  kv("overhead_bytes", std::to_string(plan.setup.mem_overhead_bytes));
  kv("mem_max", std::to_string(plan.setup.mem_max));

  return out;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read plan file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_plan(buf.str());
}

}  // namespace triaccel
