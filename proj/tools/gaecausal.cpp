// Command-line front end: generate, train, eval, bench.
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaecausal/cli.hpp"

namespace gc = gaecausal;

namespace {

struct Flags {
  std::string sem = "gim";
  std::string base = "gim";
  std::vector<std::string> methods{"gae", "linear"};
  std::string out = "runs";
  std::string plot_data;
};

void add_data_options(CLI::App* app, gc::RunConfig& cfg, Flags& f) {
  app->add_option("--d", cfg.graph.d, "number of variables")->capture_default_str();
  app->add_option("--n", cfg.n, "samples per dataset")->capture_default_str();
  app->add_option("--degree", cfg.graph.expected_degree, "expected node degree")
      ->capture_default_str();
  app->add_option("--weight-low", cfg.graph.weight_low, "smallest |edge weight|")
      ->capture_default_str();
  app->add_option("--weight-high", cfg.graph.weight_high, "largest |edge weight|")
      ->capture_default_str();
  app->add_option("--sem", f.sem, "linear | gim | pnl | vector")->capture_default_str();
  app->add_option("--l", cfg.sem.l, "per-variable dimension (vector data)")
      ->capture_default_str();
  app->add_option("--base", f.base, "scalar SEM behind vector data")->capture_default_str();
  app->add_option("--seeds", cfg.seeds, "root seeds")->capture_default_str()->delimiter(',');
  app->add_option("--out", f.out, "output directory")->capture_default_str();
}

void add_train_options(CLI::App* app, gc::RunConfig& cfg, Flags& f) {
  gc::TrainConfig& t = cfg.train;
  app->add_option("--methods,--method", f.methods, "gae | gae-additive | linear")
      ->capture_default_str()
      ->delimiter(',');
  app->add_option("--lambda", t.lambda, "l1 weight on A")->capture_default_str();
  app->add_option("--lr", t.lr, "Adam learning rate")->capture_default_str();
  app->add_option("--inner-steps", t.inner_steps, "Adam steps per outer iteration")
      ->capture_default_str();
  app->add_option("--max-outer", t.max_outer, "outer iteration limit")->capture_default_str();
  app->add_option("--beta", t.beta, "penalty growth factor")->capture_default_str();
  app->add_option("--gamma", t.gamma, "required progress ratio")->capture_default_str();
  app->add_option("--h-tol", t.h_tol, "acyclicity tolerance")->capture_default_str();
  app->add_option("--rho-max", t.rho_max, "penalty limit")->capture_default_str();
  app->add_option("--rho-init", t.rho_init, "initial penalty")->capture_default_str();
  app->add_option("--alpha-init", t.alpha_init, "initial multiplier")->capture_default_str();
  app->add_flag("--zero-diagonal", t.zero_diagonal, "hold the diagonal of A at zero");
  app->add_option("--l-latent", cfg.model.l_latent, "latent dimension")->capture_default_str();
  app->add_option("--hidden", cfg.model.hidden, "hidden units per MLP layer")
      ->capture_default_str();
  app->add_option("--layers", cfg.model.layers, "layers per MLP")->capture_default_str();
  app->add_option("--tau", cfg.tau, "edge threshold")->capture_default_str();
}

void resolve(gc::RunConfig& cfg, const Flags& f) {
  cfg.sem.kind = gc::parse_sem_kind(f.sem);
  cfg.sem.base = gc::parse_sem_kind(f.base);
  cfg.methods.clear();
  for (const std::string& m : f.methods) cfg.methods.push_back(gc::parse_model_kind(m));
  cfg.out_dir = f.out;
  if (!f.plot_data.empty()) cfg.plot_data = f.plot_data;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal structure learning with graph autoencoders"};
  app.set_config("--config", "", "key-value config file; flags override its values");
  app.require_subcommand(1);

  gc::RunConfig cfg;
  Flags flags;

  CLI::App* gen = app.add_subcommand("generate", "write synthetic datasets, one per seed");
  add_data_options(gen, cfg, flags);

  CLI::App* tr = app.add_subcommand("train", "learn a graph from a dataset file");
  std::string data_path;
  tr->add_option("dataset", data_path, "dataset .csv (sidecar .json alongside)")->required();
  add_train_options(tr, cfg, flags);
  tr->add_option("--seed", cfg.seeds, "root seed for initialization")->expected(1);
  tr->add_option("--out", flags.out, "output directory")->capture_default_str();

  CLI::App* ev = app.add_subcommand("eval", "score a learned adjacency against the truth");
  std::string pred_path, truth_path, metrics_out;
  ev->add_option("prediction", pred_path, "learned adjacency grid")->required();
  ev->add_option("truth", truth_path, "true adjacency grid or dataset .json")->required();
  ev->add_option("--tau", cfg.tau, "edge threshold")->capture_default_str();
  ev->add_option("--write", metrics_out, "also write the metrics row to this file");

  CLI::App* bench = app.add_subcommand("bench", "generate, train and score a full sweep");
  add_data_options(bench, cfg, flags);
  add_train_options(bench, cfg, flags);
  bench->add_option("--d-list", cfg.d_list, "graph sizes")->delimiter(',')->capture_default_str();
  bench->add_option("--jobs", cfg.jobs, "parallel runs")->capture_default_str();
  bench->add_option("--plot-data", flags.plot_data, "write SHD/TPR vs d table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) {
      resolve(cfg, flags);
      for (const auto& p : gc::cmd_generate(cfg)) std::cout << p.string() << "\n";
    } else if (tr->parsed()) {
      if (tr->count("--methods") == 0) flags.methods = {"gae"};
      resolve(cfg, flags);
      const gc::Json meta = gc::parse_json(gc::read_text(gc::sidecar_path(data_path)),
                                           gc::sidecar_path(data_path).string());
      cfg.graph.d = meta.at("d").get<std::size_t>();
      cfg.sem.l = meta.at("l").get<std::size_t>();
      cfg.sem.kind = gc::parse_sem_kind(meta.at("sem_kind").get<std::string>());
      // Graph-generation settings are unused here; keep them valid for small d.
      if (cfg.graph.expected_degree >= static_cast<double>(cfg.graph.d))
        cfg.graph.expected_degree = static_cast<double>(cfg.graph.d) / 2.0;
      const gc::TrainOutcome out = gc::cmd_train(cfg, data_path);
      const gc::TrainReport& r = out.result.report;
      std::printf("termination=%s outer=%zu h=%.3e edges=%zu repairs=%zu time=%.2fs\n",
                  gc::to_string(r.termination).c_str(), r.outer_iterations, r.final_h,
                  out.graph.graph.edge_count(), out.graph.repairs, r.wall_time_seconds);
    } else if (ev->parsed()) {
      const gc::MetricsRow row = gc::cmd_eval(pred_path, truth_path, cfg.tau);
      const std::string table = gc::format_metrics({row});
      std::cout << table;
      if (!metrics_out.empty()) gc::write_atomic(metrics_out, table);
    } else if (bench->parsed()) {
      resolve(cfg, flags);
      const gc::BenchResult r = gc::cmd_bench(cfg);
      std::cout << gc::format_summary(r.cells);
      std::fprintf(stderr, "%zu runs executed, %zu reused, %zu failed\n", r.executed, r.reused,
                   r.failures.size());
      for (const std::string& f : r.failures) std::fprintf(stderr, "failed: %s\n", f.c_str());
      if (!r.failures.empty()) return 3;
    }
  } catch (const gc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
