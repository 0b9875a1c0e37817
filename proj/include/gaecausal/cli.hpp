#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gaecausal/error.hpp"
#include "gaecausal/eval.hpp"
#include "gaecausal/io.hpp"
#include "gaecausal/model.hpp"
#include "gaecausal/optimizer.hpp"
#include "gaecausal/synth.hpp"

namespace gaecausal {

// Lists every invalid field, one per line.
class ValidationError : public PreconditionError {
 public:
  explicit ValidationError(const std::vector<std::string>& problems)
      : PreconditionError(join(problems)), problems_(problems) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string s = "invalid configuration:";
    for (const std::string& m : p) s += "\n  " + m;
    return s;
  }
  std::vector<std::string> problems_;
};

// Seed streams derived from a run's root seed.
inline constexpr std::uint64_t kGraphStream = 11;
inline constexpr std::uint64_t kDataStream = 12;
inline constexpr std::uint64_t kInitStream = 13;

struct RunConfig {
  GraphSpec graph;
  SemSpec sem;
  std::size_t n = 3000;
  TrainConfig train;
  ModelConfig model;  // model.l always follows sem.l
  double tau = 0.3;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3};
  std::vector<std::size_t> d_list{10};
  std::vector<ModelKind> methods{ModelKind::Gae, ModelKind::Linear};
  std::filesystem::path out_dir = "runs";
  std::size_t jobs = 1;
  std::optional<std::filesystem::path> plot_data;

  void validate() const {
    std::vector<std::string> problems;
    auto check = [&](auto&& fn) {
      try {
        fn();
      } catch (const PreconditionError& e) {
        problems.emplace_back(e.what());
      }
    };
    check([&] { graph.validate(); });
    check([&] { sem.validate(); });
    check([&] { train.validate(); });
    if (n < 1) problems.emplace_back("n: must be >= 1");
    if (!(tau >= 0.0)) problems.emplace_back("tau: must be >= 0");
    if (seeds.empty()) problems.emplace_back("seeds: need at least one seed");
    if (d_list.empty()) problems.emplace_back("d_list: need at least one size");
    for (std::size_t d : d_list)
      if (d < 2 || graph.expected_degree >= static_cast<double>(d))
        problems.emplace_back("d_list: size " + std::to_string(d) +
                              " must be >= 2 and exceed the expected degree");
    if (methods.empty()) problems.emplace_back("methods: need at least one method");
    if (jobs < 1) problems.emplace_back("jobs: must be >= 1");
    if (model.hidden < 1 || model.layers < 1)
      problems.emplace_back("hidden/layers: must be >= 1");
    if (model.l_latent < 1) problems.emplace_back("l_latent: must be >= 1");
    if (!problems.empty()) throw ValidationError(problems);
  }

  ModelConfig architecture(ModelKind kind) const {
    ModelConfig m = model;
    m.kind = kind;
    m.l = sem.l;
    return m;
  }
};

inline Json to_json(const GraphSpec& g) {
  return {{"d", g.d},
          {"expected_degree", g.expected_degree},
          {"weight_low", g.weight_low},
          {"weight_high", g.weight_high}};
}

inline Json to_json(const SemSpec& s) {
  return {{"kind", to_string(s.kind)},
          {"l", s.l},
          {"base", to_string(s.base)},
          {"noise_scale", s.noise_scale}};
}

inline Json to_json(const TrainConfig& t) {
  return {{"lambda", t.lambda},
          {"lr", t.lr},
          {"inner_steps", t.inner_steps},
          {"max_outer", t.max_outer},
          {"beta", t.beta},
          {"gamma", t.gamma},
          {"h_tol", t.h_tol},
          {"rho_max", t.rho_max},
          {"rho_init", t.rho_init},
          {"alpha_init", t.alpha_init},
          {"adam_beta1", t.adam_beta1},
          {"adam_beta2", t.adam_beta2},
          {"adam_eps", t.adam_eps},
          {"zero_diagonal", t.zero_diagonal},
          {"seed", t.seed}};
}

inline Json to_json(const ModelConfig& m) {
  return {{"method", to_string(m.kind)},
          {"l", m.l},
          {"l_latent", m.l_latent},
          {"hidden", m.hidden},
          {"layers", m.layers}};
}

// The fully resolved configuration of one (method, d, seed) run.
struct RunSpec {
  ModelKind method = ModelKind::Gae;
  std::size_t d = 10;
  std::uint64_t seed = 0;
};

inline GraphSpec graph_for(const RunConfig& cfg, std::size_t d, std::uint64_t seed) {
  GraphSpec g = cfg.graph;
  g.d = d;
  g.seed = mix_seed(seed, kGraphStream);
  return g;
}

inline TrainConfig train_for(const RunConfig& cfg, std::uint64_t seed) {
  TrainConfig t = cfg.train;
  t.seed = mix_seed(seed, kInitStream);
  return t;
}

inline Json dataset_json(const RunConfig& cfg, std::size_t d, std::uint64_t seed) {
  Json g = to_json(graph_for(cfg, d, seed));
  g["seed"] = graph_for(cfg, d, seed).seed;
  return {{"graph", g},
          {"sem", to_json(cfg.sem)},
          {"n", cfg.n},
          {"root_seed", seed},
          {"data_seed", mix_seed(seed, kDataStream)}};
}

inline Json run_json(const RunConfig& cfg, const RunSpec& run) {
  Json j = dataset_json(cfg, run.d, run.seed);
  j["model"] = to_json(cfg.architecture(run.method));
  j["train"] = to_json(train_for(cfg, run.seed));
  j["tau"] = cfg.tau;
  return j;
}

// Whole-config view, written next to generate/train outputs.
inline Json to_json(const RunConfig& cfg) {
  Json j;
  j["graph"] = to_json(cfg.graph);
  j["sem"] = to_json(cfg.sem);
  j["n"] = cfg.n;
  j["model"] = to_json(cfg.model);
  j["model"].erase("method");
  j["train"] = to_json(cfg.train);
  j["tau"] = cfg.tau;
  j["seeds"] = cfg.seeds;
  j["d_list"] = cfg.d_list;
  Json methods = Json::array();
  for (ModelKind m : cfg.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["jobs"] = cfg.jobs;
  return j;
}

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline Dataset make_dataset(const RunConfig& cfg, std::size_t d, std::uint64_t seed) {
  Dataset ds = generate_dataset(graph_for(cfg, d, seed), cfg.sem, cfg.n, mix_seed(seed, kDataStream));
  return ds;
}

// ---- generate -------------------------------------------------------------

inline std::filesystem::path dataset_file(const RunConfig& cfg, std::size_t d, std::uint64_t seed) {
  return cfg.out_dir / (to_string(cfg.sem.kind) + "_d" + std::to_string(d) + "_seed" +
                        std::to_string(seed) + ".csv");
}

// One dataset file plus metadata sidecar per seed.
inline std::vector<std::filesystem::path> cmd_generate(const RunConfig& cfg) {
  cfg.validate();
  std::vector<std::filesystem::path> written;
  for (std::uint64_t seed : cfg.seeds) {
    const std::filesystem::path path = dataset_file(cfg, cfg.graph.d, seed);
    write_dataset(path, make_dataset(cfg, cfg.graph.d, seed));
    written.push_back(path);
  }
  Json resolved = to_json(cfg);
  resolved.erase("d_list");
  resolved.erase("methods");
  write_atomic(cfg.out_dir / "config.json", resolved.dump(2) + "\n");
  return written;
}

// ---- train ----------------------------------------------------------------

struct TrainOutcome {
  TrainResult result;
  WeightedAdjacency effective;  // gain-rescaled A, the thresholded quantity
  ThresholdResult graph;
};

inline TrainOutcome train_and_threshold(const Tensor3& x, const TrainConfig& tc,
                                        const ModelConfig& arch, double tau) {
  TrainOutcome out;
  out.result = train(x, tc, arch);
  out.effective = effective_adjacency(out.result.params, x);
  out.graph = threshold(out.effective, tau);
  return out;
}

inline BinaryGraph read_binary_graph(const std::filesystem::path& path) {
  const Matrix m = read_grid(path);
  if (!m.is_square()) throw ParseError(path.string() + ": graph grid must be square");
  return BinaryGraph::support_of(m);
}

inline void write_train_outputs(const std::filesystem::path& dir, const TrainOutcome& out,
                                const Json& config) {
  write_atomic(dir / "adjacency.csv", format_grid(out.result.params.adjacency.matrix()));
  write_atomic(dir / "effective_adjacency.csv", format_grid(out.effective.matrix()));
  write_atomic(dir / "graph.csv", format_grid(out.graph.graph.to_matrix()));
  Json report = to_json(out.result.report);
  report["repairs"] = out.graph.repairs;
  write_atomic(dir / "report.json", report.dump(2) + "\n");
  write_atomic(dir / "config.json", config.dump(2) + "\n");
}

// Trains the first configured method on a dataset file, seeding the model from
// the first configured seed. The dataset must match the configured d and l.
inline TrainOutcome cmd_train(const RunConfig& cfg, const std::filesystem::path& dataset_path) {
  cfg.validate();
  const Dataset ds = read_dataset(dataset_path);
  if (ds.x.d() != cfg.graph.d || ds.x.l() != cfg.sem.l)
    throw PreconditionError("train: dataset has d=" + std::to_string(ds.x.d()) +
                            ", l=" + std::to_string(ds.x.l()) + " but config expects d=" +
                            std::to_string(cfg.graph.d) + ", l=" + std::to_string(cfg.sem.l));
  const ModelKind method = cfg.methods.front();
  const TrainConfig tc = train_for(cfg, cfg.seeds.front());
  const TrainOutcome out = train_and_threshold(ds.x, tc, cfg.architecture(method), cfg.tau);

  Json config;
  config["dataset"] = dataset_path.string();
  config["n"] = ds.x.n();
  config["d"] = ds.x.d();
  config["root_seed"] = cfg.seeds.front();
  config["model"] = to_json(cfg.architecture(method));
  config["train"] = to_json(tc);
  config["tau"] = cfg.tau;
  write_train_outputs(cfg.out_dir, out, config);
  return out;
}

// ---- eval -----------------------------------------------------------------

// Truth may be a dense grid or a dataset metadata sidecar (.json).
inline Matrix read_truth(const std::filesystem::path& path) {
  if (path.extension() == ".json") {
    const Json meta = parse_json(read_text(path), path.string());
    if (!meta.contains("truth")) throw ParseError(path.string() + ": no 'truth' field");
    return grid_from_json(meta.at("truth"), path.string() + " truth");
  }
  return read_grid(path);
}

inline MetricsRow cmd_eval(const std::filesystem::path& pred_path,
                           const std::filesystem::path& truth_path, double tau,
                           const std::string& method = "-", const std::string& sem_kind = "-") {
  require(tau >= 0.0, "eval: tau must be >= 0");
  const Matrix pred = read_grid(pred_path);
  const Matrix truth = read_truth(truth_path);
  if (!pred.is_square() || !truth.is_square() || pred.rows() != truth.rows())
    throw PreconditionError("eval: prediction is " + std::to_string(pred.rows()) + "x" +
                            std::to_string(pred.cols()) + ", truth is " +
                            std::to_string(truth.rows()) + "x" + std::to_string(truth.cols()));
  const ThresholdResult t = threshold(WeightedAdjacency(pred), tau);
  MetricsRow row;
  row.method = method;
  row.sem_kind = sem_kind;
  row.d = pred.rows();
  row.metrics = shd(t.graph, BinaryGraph::support_of(truth));
  row.repairs = t.repairs;
  return row;
}

// ---- bench ----------------------------------------------------------------

struct BenchCell {
  std::string method;
  std::string sem_kind;
  std::size_t d = 0;
  MetricsSummary summary;
};

struct BenchResult {
  std::vector<MetricsRow> rows;
  std::vector<BenchCell> cells;
  std::vector<std::string> failures;
  std::size_t executed = 0;
  std::size_t reused = 0;
};

inline std::string format_summary(const std::vector<BenchCell>& cells) {
  std::string s =
      "method,sem_kind,d,runs,shd_mean,shd_std,tpr_mean,tpr_std,wall_time_mean,wall_time_std\n";
  for (const BenchCell& c : cells) {
    const MetricsSummary& m = c.summary;
    s += c.method + "," + c.sem_kind + "," + std::to_string(c.d) + "," + std::to_string(m.runs) +
         "," + format_double(m.shd.mean) + "," + format_double(m.shd.std) + "," +
         format_double(m.tpr.mean) + "," + format_double(m.tpr.std) + "," +
         format_double(m.wall_time_seconds.mean) + "," +
         format_double(m.wall_time_seconds.std) + "\n";
  }
  return s;
}

// SHD and TPR against d, one line per (method, d).
inline std::string format_plot_data(const std::vector<BenchCell>& cells) {
  std::string s = "method,d,shd_mean,shd_std,tpr_mean,tpr_std\n";
  for (const BenchCell& c : cells)
    s += c.method + "," + std::to_string(c.d) + "," + format_double(c.summary.shd.mean) + "," +
         format_double(c.summary.shd.std) + "," + format_double(c.summary.tpr.mean) + "," +
         format_double(c.summary.tpr.std) + "\n";
  return s;
}

inline std::string format_metrics(const std::vector<MetricsRow>& rows) {
  std::string s(kMetricsHeader);
  s += '\n';
  for (const MetricsRow& r : rows) s += format_metrics_row(r) + "\n";
  return s;
}

inline std::filesystem::path run_dir(const RunConfig& cfg, const RunSpec& run) {
  return cfg.out_dir / "runs" /
         (to_string(run.method) + "_d" + std::to_string(run.d) + "_seed" +
          std::to_string(run.seed) + "_" + hex16(fnv1a(run_json(cfg, run).dump())).substr(0, 12));
}

inline std::filesystem::path cached_dataset(const RunConfig& cfg, std::size_t d,
                                            std::uint64_t seed) {
  const Json j = dataset_json(cfg, d, seed);
  return cfg.out_dir / "data" /
         (to_string(cfg.sem.kind) + "_d" + std::to_string(d) + "_seed" + std::to_string(seed) +
          "_" + hex16(fnv1a(j.dump())).substr(0, 12) + ".csv");
}

// Runs (or reuses) one bench cell entry. A run counts as complete once its
// metrics.csv exists.
inline MetricsRow bench_run(const RunConfig& cfg, const RunSpec& run, bool* reused = nullptr) {
  const std::filesystem::path dir = run_dir(cfg, run);
  const std::filesystem::path done = dir / "metrics.csv";
  if (std::filesystem::exists(done)) {
    std::vector<MetricsRow> rows = parse_metrics(read_text(done));
    if (rows.size() == 1) {
      if (reused) *reused = true;
      return rows.front();
    }
  }
  if (reused) *reused = false;

  const std::filesystem::path data_path = cached_dataset(cfg, run.d, run.seed);
  Dataset ds;
  if (std::filesystem::exists(data_path) && std::filesystem::exists(sidecar_path(data_path))) {
    ds = read_dataset(data_path);
  } else {
    ds = make_dataset(cfg, run.d, run.seed);
    write_dataset(data_path, ds);
  }

  const TrainOutcome out =
      train_and_threshold(ds.x, train_for(cfg, run.seed), cfg.architecture(run.method), cfg.tau);
  Json config = run_json(cfg, run);
  config["dataset"] = data_path.string();
  write_train_outputs(dir, out, config);

  MetricsRow row;
  row.method = to_string(run.method);
  row.sem_kind = to_string(cfg.sem.kind);
  row.d = run.d;
  row.l = cfg.sem.l;
  row.seed = run.seed;
  row.metrics = shd(out.graph.graph, BinaryGraph::support_of(ds.truth.matrix()));
  row.metrics.wall_time_seconds = out.result.report.wall_time_seconds;
  row.repairs = out.graph.repairs;
  write_atomic(done, format_metrics({row}));
  return row;
}

// Full sweep over methods x d_list x seeds. Failed runs are recorded and the
// sweep continues; completed runs on disk are reused.
inline BenchResult cmd_bench(const RunConfig& cfg) {
  cfg.validate();
  std::vector<RunSpec> runs;
  for (ModelKind m : cfg.methods)
    for (std::size_t d : cfg.d_list)
      for (std::uint64_t s : cfg.seeds) runs.push_back(RunSpec{m, d, s});

  std::vector<std::optional<MetricsRow>> results(runs.size());
  std::vector<std::string> errors(runs.size());
  std::vector<char> reused(runs.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < runs.size(); k = next++) {
      try {
        bool r = false;
        results[k] = bench_run(cfg, runs[k], &r);
        reused[k] = r ? 1 : 0;
      } catch (const std::exception& e) {
        errors[k] = e.what();
        try {
          write_atomic(run_dir(cfg, runs[k]) / "error.txt", std::string(e.what()) + "\n");
        } catch (const std::exception&) {
        }
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t j = 1; j < std::min(cfg.jobs, runs.size()); ++j) pool.emplace_back(worker);
    worker();
  }

  BenchResult out;
  std::map<std::pair<std::string, std::size_t>, std::vector<GraphMetrics>> groups;
  std::vector<std::pair<std::string, std::size_t>> order;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    if (!results[k]) {
      out.failures.push_back(to_string(runs[k].method) + " d=" + std::to_string(runs[k].d) +
                             " seed=" + std::to_string(runs[k].seed) + ": " + errors[k]);
      continue;
    }
    (reused[k] ? out.reused : out.executed) += 1;
    out.rows.push_back(*results[k]);
    const auto key = std::make_pair(results[k]->method, results[k]->d);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(results[k]->metrics);
  }
  for (const auto& key : order)
    out.cells.push_back(BenchCell{key.first, to_string(cfg.sem.kind), key.second,
                                  aggregate(groups[key])});

  write_atomic(cfg.out_dir / "runs.csv", format_metrics(out.rows));
  write_atomic(cfg.out_dir / "summary.csv", format_summary(out.cells));
  write_atomic(cfg.out_dir / "config.json", to_json(cfg).dump(2) + "\n");
  if (cfg.plot_data) write_atomic(*cfg.plot_data, format_plot_data(out.cells));
  if (!out.failures.empty()) {
    std::string s;
    for (const std::string& f : out.failures) s += f + "\n";
    write_atomic(cfg.out_dir / "failures.txt", s);
  }
  return out;
}

}  // namespace gaecausal
