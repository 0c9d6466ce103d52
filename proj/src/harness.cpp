/*
 Copyright 2026 The rrl Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include "rrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "rrl/errors.hpp"

namespace rrl {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Mode m) {
  switch (m) {
    case Mode::empirical:
      return "empirical";
    case Mode::wc_data:
      return "wc_data";
    case Mode::wc_theoretical:
      return "wc_theoretical";
  }
  return "?";
}

bool ExperimentConfig::has_mode(Mode m) const { return std::find(modes.begin(), modes.end(), m) != modes.end(); }

RRLConfig ExperimentConfig::rrl_config() const {
  RRLConfig c{schedule};
  c.horizon = horizon;
  c.delta = delta;
  c.cost = cost;
  c.sigma_w = system.sigma_w;
  c.solver = solver;
  c.track_wc_data = has_mode(Mode::wc_data);
  c.track_wc_theoretical = has_mode(Mode::wc_theoretical);
  return c;
}

void ExperimentConfig::validate() const {
  const Eigen::Index nx = system.A.rows();
  if (system.A.cols() != nx || nx == 0) throw ConfigError("system.A: must be a non-empty square matrix");
  if (system.B.rows() != nx || system.B.cols() == 0) throw ConfigError("system.B: must have as many rows as system.A");
  const Eigen::Index nu = system.B.cols();
  if (!(system.sigma_w > 0.0)) throw ConfigError("system.sigma_w: must be positive");
  if (cost.Q.rows() != nx || cost.Q.cols() != nx) throw ConfigError("cost.Q: must be n_x x n_x");
  if (cost.R.rows() != nu || cost.R.cols() != nu) throw ConfigError("cost.R: must be n_u x n_u");
  try {
    cost.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("cost: ") + e.what());
  }
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta: must lie in (0, 1)");
  if (horizon < 0) throw ConfigError("horizon: must be nonnegative");
  if (initial_data.rollouts < 1) throw ConfigError("initial_data.rollouts: must be at least 1");
  if (initial_data.length < 1) throw ConfigError("initial_data.length: must be at least 1");
  const Matrix& S = initial_data.input_covariance;
  if (S.rows() != nu || S.cols() != nu) throw ConfigError("initial_data.input_covariance: must be n_u x n_u");
  if (!is_psd(S) || (S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("initial_data.input_covariance: must be symmetric positive semidefinite");
  }
  if (trials < 1) throw ConfigError("trials: must be at least 1");
  if (methods.empty()) throw ConfigError("methods: must not be empty");
  if (modes.empty()) throw ConfigError("modes: must not be empty");
}

Matrix matrix_from_json(const json& j, const std::string& path) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Matrix m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.empty()) throw ConfigError(path + "[" + std::to_string(r) + "]: expected an array");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(path + "[" + std::to_string(r) + "]: ragged matrix row");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) {
        throw ConfigError(path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]: expected a number");
      }
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

namespace {

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError((path.empty() ? std::string("<root>") : path) + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError((path.empty() ? key : path + "." + key) + ": required field missing");
  return *it;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  return j.get<double>();
}

long long integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return j.get<long long>();
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(join(path, it.key()) + ": unknown field");
  }
}

template <typename T, typename F>
std::vector<T> name_list(const json& j, const std::string& path, F parse) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array of names");
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_string()) throw ConfigError(where + ": expected a string");
    T v;
    try {
      v = parse(j[i].get<std::string>());
    } catch (const Error& e) {
      throw ConfigError(where + ": " + e.what());
    }
    if (std::find(out.begin(), out.end(), v) != out.end()) throw ConfigError(where + ": duplicate entry");
    out.push_back(v);
  }
  return out;
}

Mode mode_from_string(const std::string& s) {
  if (s == "empirical") return Mode::empirical;
  if (s == "wc_data") return Mode::wc_data;
  if (s == "wc_theoretical") return Mode::wc_theoretical;
  throw Error("unknown mode '" + s + "'");
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("<root>: expected an object");
  check_keys(doc,
             {"system", "cost", "schedule", "delta", "horizon", "initial_data", "trials", "seed", "methods", "modes",
              "solver", "description"},
             "");
  ExperimentConfig c;
  c.source = doc;

  const json& sys = require(doc, "system", "");
  check_keys(sys, {"A", "B", "sigma_w"}, "system");
  c.system.A = matrix_from_json(require(sys, "A", "system"), "system.A");
  c.system.B = matrix_from_json(require(sys, "B", "system"), "system.B");
  c.system.sigma_w = number(require(sys, "sigma_w", "system"), "system.sigma_w");

  const json& cost = require(doc, "cost", "");
  check_keys(cost, {"Q", "R"}, "cost");
  c.cost.Q = matrix_from_json(require(cost, "Q", "cost"), "cost.Q");
  c.cost.R = matrix_from_json(require(cost, "R", "cost"), "cost.R");

  const json& sched = require(doc, "schedule", "");
  check_keys(sched, {"T", "N", "boundaries"}, "schedule");
  if (sched.contains("boundaries")) {
    const json& b = sched["boundaries"];
    if (!b.is_array() || b.size() < 2) throw ConfigError("schedule.boundaries: expected at least two entries");
    std::vector<int> bounds;
    for (std::size_t i = 0; i < b.size(); ++i) {
      bounds.push_back(static_cast<int>(integer(b[i], "schedule.boundaries[" + std::to_string(i) + "]")));
    }
    if (bounds.front() != 0) throw ConfigError("schedule.boundaries[0]: must be 0");
    for (std::size_t i = 1; i < bounds.size(); ++i) {
      if (bounds[i] <= bounds[i - 1]) {
        throw ConfigError("schedule.boundaries[" + std::to_string(i) + "]: boundaries must be strictly increasing");
      }
    }
    if (sched.contains("T") && integer(sched["T"], "schedule.T") != bounds.back()) {
      throw ConfigError("schedule.T: does not match the last boundary");
    }
    if (sched.contains("N") && integer(sched["N"], "schedule.N") != static_cast<long long>(bounds.size()) - 1) {
      throw ConfigError("schedule.N: does not match the number of boundaries");
    }
    c.schedule = EpochSchedule(std::move(bounds));
  } else {
    const long long T = integer(require(sched, "T", "schedule"), "schedule.T");
    const long long N = integer(require(sched, "N", "schedule"), "schedule.N");
    if (N < 1) throw ConfigError("schedule.N: must be at least 1");
    if (T < N) throw ConfigError("schedule.T: must be at least schedule.N");
    c.schedule = EpochSchedule::uniform(static_cast<int>(T), static_cast<int>(N));
  }

  if (doc.contains("delta")) c.delta = number(doc["delta"], "delta");
  if (doc.contains("horizon")) c.horizon = static_cast<int>(integer(doc["horizon"], "horizon"));

  const Eigen::Index nu = c.system.B.cols();
  c.initial_data.input_covariance = Matrix::Identity(nu, nu);
  if (doc.contains("initial_data")) {
    const json& init = doc["initial_data"];
    if (!init.is_object()) throw ConfigError("initial_data: expected an object");
    check_keys(init, {"rollouts", "length", "input_covariance"}, "initial_data");
    if (init.contains("rollouts")) {
      c.initial_data.rollouts = static_cast<int>(integer(init["rollouts"], "initial_data.rollouts"));
    }
    if (init.contains("length")) {
      c.initial_data.length = static_cast<int>(integer(init["length"], "initial_data.length"));
    }
    if (init.contains("input_covariance")) {
      c.initial_data.input_covariance =
          matrix_from_json(init["input_covariance"], "initial_data.input_covariance");
    }
  }

  if (doc.contains("trials")) c.trials = static_cast<int>(integer(doc["trials"], "trials"));
  if (doc.contains("seed")) {
    const json& s = doc["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw ConfigError("seed: expected a nonnegative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("methods")) c.methods = name_list<Planner>(doc["methods"], "methods", planner_from_string);
  if (doc.contains("modes")) c.modes = name_list<Mode>(doc["modes"], "modes", mode_from_string);

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    if (!s.is_object()) throw ConfigError("solver: expected an object");
    check_keys(s, {"feas_tol", "opt_tol", "max_iterations"}, "solver");
    SolverOptions o;
    if (s.contains("feas_tol")) o.feas_tol = number(s["feas_tol"], "solver.feas_tol");
    if (s.contains("opt_tol")) o.opt_tol = number(s["opt_tol"], "solver.opt_tol");
    if (s.contains("max_iterations")) {
      o.max_iterations = static_cast<int>(integer(s["max_iterations"], "solver.max_iterations"));
    }
    if (!(o.feas_tol > 0.0) || !(o.opt_tol > 0.0) || o.max_iterations < 1) {
      throw ConfigError("solver: tolerances and iteration limit must be positive");
    }
    if (std::getenv("RRL_SOLVER_TOL")) {
      const SolverOptions env = SolverOptions::from_env();
      o.feas_tol = env.feas_tol;
      o.opt_tol = env.opt_tol;
    }
    c.solver = o;
  }

  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
  return mix_seed(master, static_cast<std::uint64_t>(trial));
}

Dataset generate_initial_data(const LinearSystem& sys, const InitialDataProtocol& protocol, std::uint64_t seed) {
  sys.validate();
  const Eigen::Index nx = sys.nx();
  const Eigen::Index nu = sys.nu();
  const Matrix root = psd_sqrt(protocol.input_covariance);
  NoiseStreams rng = NoiseStreams::from_seed(seed);
  Dataset data(nx, nu);
  for (int r = 0; r < protocol.rollouts; ++r) {
    Vector x = Vector::Zero(nx);
    for (int t = 0; t < protocol.length; ++t) {
      Vector u = root * rng.excitation.normal(nu);
      Vector next = step(sys, x, u, rng.process);
      data.add(Transition{x, u, next});
      x = std::move(next);
    }
  }
  return data;
}

bool ExperimentResult::excess_failures() const {
  return !outcomes.empty() && 10 * failures > static_cast<int>(outcomes.size());
}

TrialOutcome run_trial(const ExperimentConfig& config, Planner method, int trial) {
  TrialOutcome out;
  out.method = method;
  out.trial = trial;
  out.seed = trial_seed(config.seed, trial);
  try {
    const Dataset initial = generate_initial_data(config.system, config.initial_data, mix_seed(out.seed, 1));
    NoiseStreams rng = NoiseStreams::from_seed(mix_seed(out.seed, 2));
    TrialResult r = receding_horizon_run(config.system, initial, config.rrl_config(), rng, method);
    r.seed = out.seed;
    out.result = std::move(r);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

std::vector<TidyRow> tidy_rows(const TrialOutcome& outcome, const ExperimentConfig& config) {
  std::vector<TidyRow> rows;
  if (!outcome.result) return rows;
  const TrialResult& r = *outcome.result;
  const std::string method = to_string(outcome.method);
  auto emit = [&](const std::string& metric, const std::vector<double>& values, bool total) {
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      rows.push_back(TidyRow{method, outcome.trial, static_cast<int>(i) + 1, metric, values[i]});
      sum += values[i];
    }
    if (total) rows.push_back(TidyRow{method, outcome.trial, 0, metric, sum});
  };
  if (config.has_mode(Mode::empirical)) emit("empirical_cost", r.empirical_cost, true);
  if (config.has_mode(Mode::wc_data)) emit("wc_cost_data", r.wc_cost_data, true);
  if (config.has_mode(Mode::wc_theoretical)) emit("wc_cost_theoretical", r.wc_cost_theoretical, true);
  emit("information", r.information, false);
  return rows;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw Error("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw Error("quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

std::vector<AggregateRow> aggregate(const std::vector<TidyRow>& rows) {
  using Key = std::tuple<std::string, int, std::string>;
  std::map<Key, std::size_t> index;
  std::vector<Key> order;
  std::vector<std::vector<double>> samples;
  for (const auto& r : rows) {
    Key k{r.method, r.epoch, r.metric};
    auto [it, inserted] = index.emplace(k, samples.size());
    if (inserted) {
      order.push_back(k);
      samples.emplace_back();
    }
    samples[it->second].push_back(r.value);
  }
  std::vector<AggregateRow> out;
  for (std::size_t g = 0; g < order.size(); ++g) {
    const auto& [method, epoch, metric] = order[g];
    const auto& v = samples[g];
    out.push_back(AggregateRow{method, epoch, metric, quantile(v, 0.5), quantile(v, 0.25), quantile(v, 0.75),
                               static_cast<int>(v.size())});
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw Error(path.string() + ": write failed");
}

std::string epoch_label(int epoch) { return epoch == 0 ? "total" : std::to_string(epoch); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_tidy_csv(std::ostream& out, const std::vector<TidyRow>& rows) {
  out << "method,trial,epoch,metric,value\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.trial << ',' << epoch_label(r.epoch) << ',' << r.metric << ',' << fmt(r.value) << '\n';
  }
}

std::vector<TidyRow> read_tidy_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "method,trial,epoch,metric,value") {
    throw Error("results table: unexpected header");
  }
  std::vector<TidyRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 5) throw Error("results table line " + std::to_string(lineno) + ": expected 5 fields");
    TidyRow r;
    r.method = cells[0];
    try {
      r.trial = std::stoi(cells[1]);
      r.epoch = cells[2] == "total" ? 0 : std::stoi(cells[2]);
    } catch (const std::exception&) {
      throw Error("results table line " + std::to_string(lineno) + ": bad trial or epoch");
    }
    r.metric = cells[3];
    char* end = nullptr;
    r.value = std::strtod(cells[4].c_str(), &end);
    if (end == cells[4].c_str() || *end != '\0') {
      throw Error("results table line " + std::to_string(lineno) + ": bad value");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "method,epoch,metric,median,q1,q3,n\n";
  for (const auto& r : rows) {
    out << r.method << ',' << epoch_label(r.epoch) << ',' << r.metric << ',' << fmt(r.median) << ',' << fmt(r.q1)
        << ',' << fmt(r.q3) << ',' << r.count << '\n';
  }
}

json to_json(const TrialOutcome& outcome, const ExperimentConfig& config) {
  json j;
  j["method"] = to_string(outcome.method);
  j["trial"] = outcome.trial;
  j["seed"] = outcome.seed;
  j["status"] = outcome.result ? "ok" : "failed";
  if (!outcome.result) {
    j["error"] = outcome.error;
  } else {
    const TrialResult& r = *outcome.result;
    j["epochs"] = config.schedule.epochs();
    j["empirical_cost"] = r.empirical_cost;
    j["wc_cost_data"] = r.wc_cost_data;
    j["wc_cost_theoretical"] = r.wc_cost_theoretical;
    j["information"] = r.information;
    json policies = json::array();
    for (const auto& p : r.policies) {
      policies.push_back({{"K", matrix_to_json(p.K)}, {"Sigma", matrix_to_json(p.Sigma)}});
    }
    j["policies"] = std::move(policies);
    j["fallback"] = r.fallback;
    j["greedy_alpha"] = r.greedy_alpha;
    j["notes"] = r.notes;
  }
  j["config"] = config.source;
  return j;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const fs::path& out_dir, int jobs) {
  config.validate();
  std::vector<std::pair<Planner, int>> tasks;
  for (Planner m : config.methods) {
    for (int t = 0; t < config.trials; ++t) tasks.emplace_back(m, t);
  }

  ExperimentResult result;
  result.outcomes.resize(tasks.size());
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min<int>(jobs, static_cast<int>(tasks.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      result.outcomes[k] = run_trial(config, tasks[k].first, tasks[k].second);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < jobs; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  fs::create_directories(out_dir);
  json failed = json::array();
  for (const auto& o : result.outcomes) {
    const fs::path dir = out_dir / to_string(o.method);
    fs::create_directories(dir);
    char name[32];
    std::snprintf(name, sizeof name, "trial_%04d.json", o.trial);
    write_text(dir / name, to_json(o, config).dump(2) + "\n");
    if (!o.result) {
      ++result.failures;
      failed.push_back({{"method", to_string(o.method)}, {"trial", o.trial}, {"error", o.error}});
    }
    auto rows = tidy_rows(o, config);
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }
  result.aggregates = aggregate(result.rows);

  std::ostringstream results, aggregates;
  write_tidy_csv(results, result.rows);
  write_aggregate_csv(aggregates, result.aggregates);
  write_text(out_dir / "results.csv", results.str());
  write_text(out_dir / "aggregate.csv", aggregates.str());
  json summary;
  summary["trials"] = config.trials;
  json methods = json::array();
  for (Planner m : config.methods) methods.push_back(to_string(m));
  summary["methods"] = methods;
  summary["runs"] = result.outcomes.size();
  summary["failures"] = result.failures;
  summary["failed"] = failed;
  summary["excess_failures"] = result.excess_failures();
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  return result;
}

}  // namespace rrl
