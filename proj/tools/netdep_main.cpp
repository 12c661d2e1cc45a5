// Command-line front end: network generation, transmission simulation, LMM and
// NAM fitting, pre-whitening, association tests, and the full rejection-rate
// table. All stochastic subcommands require an explicit --seed, and results
// are byte-identical to the equivalent library calls.

#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "netdep/netdep.hpp"

namespace {

struct NetworkInput {
  std::string path;
  std::string format = "edges";  // edges | dense
  int n = -1;                    // explicit node count for edge lists
};

void add_network_options(CLI::App* cmd, NetworkInput& net) {
  cmd->add_option("--network", net.path, "network CSV file")->required();
  cmd->add_option("--network-format", net.format, "edges (src,dst edge list) or dense")
      ->check(CLI::IsMember({"edges", "dense"}))
      ->capture_default_str();
  cmd->add_option("--n", net.n,
                  "node count for edge lists whose trailing nodes are isolated");
}

netdep::AdjacencyMatrix load_network(const NetworkInput& net) {
  if (net.format == "dense") return netdep::io::read_adjacency_dense_csv(net.path);
  return netdep::io::read_edge_list_csv(net.path, net.n);
}

void write_json_output(const nlohmann::json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw netdep::ParameterError(out_path + ": cannot open for writing");
    out << text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"network-dependence correction toolkit"};
  app.require_subcommand(1);

  // gen-network
  struct {
    int n = 500;
    long ties = 500;
    std::uint64_t seed = 0;
    std::string out;
    bool dense = false;
  } gen;
  auto* gen_cmd = app.add_subcommand("gen-network", "sample a G(n,M) network");
  gen_cmd->add_option("--n", gen.n, "number of nodes")->required();
  gen_cmd->add_option("--ties", gen.ties, "number of undirected edges")->required();
  gen_cmd->add_option("--seed", gen.seed, "RNG seed")->required();
  gen_cmd->add_option("--out", gen.out, "output CSV path")->required();
  gen_cmd->add_flag("--dense", gen.dense, "write a dense 0/1 matrix instead of an edge list");

  // simulate
  struct {
    NetworkInput net;
    std::string process = "direct";
    double kappa = 0.0, alpha = 0.0, rho = 0.0;
    int steps = 1;
    double noise_sd = 1.0, baseline_sd = 1.0;
    int replicates = 1;
    std::uint64_t seed = 0;
    std::string out;
  } sim;
  auto* sim_cmd = app.add_subcommand("simulate", "draw outcomes from a transmission process");
  add_network_options(sim_cmd, sim.net);
  sim_cmd->add_option("--process", sim.process, "direct or equilibrium")
      ->check(CLI::IsMember({"direct", "equilibrium"}))
      ->capture_default_str();
  sim_cmd->add_option("--kappa", sim.kappa, "peer-influence weight (direct)");
  sim_cmd->add_option("--alpha", sim.alpha, "self weight (direct)");
  sim_cmd->add_option("--steps", sim.steps, "number of update steps (direct)");
  sim_cmd->add_option("--rho", sim.rho, "autocorrelation strength (equilibrium)");
  sim_cmd->add_option("--noise-sd", sim.noise_sd, "noise standard deviation")
      ->capture_default_str();
  sim_cmd->add_option("--baseline-sd", sim.baseline_sd, "baseline standard deviation")
      ->capture_default_str();
  sim_cmd->add_option("--replicates", sim.replicates, "number of independent draws")
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "RNG seed")->required();
  sim_cmd->add_option("--out", sim.out, "output CSV path")->required();

  // fit-lmm
  struct {
    NetworkInput net;
    std::string y_path, x_path, out;
    int d = 2;
  } lmm;
  auto* lmm_cmd =
      app.add_subcommand("fit-lmm", "fit the polynomial-covariance linear mixed model");
  add_network_options(lmm_cmd, lmm.net);
  lmm_cmd->add_option("--y", lmm.y_path, "outcome vector CSV")->required();
  lmm_cmd->add_option("--x", lmm.x_path, "covariate vector CSV (omit for a marginal fit)");
  lmm_cmd->add_option("--d", lmm.d, "polynomial covariance order")->capture_default_str();
  lmm_cmd->add_option("--out", lmm.out, "output JSON path (stdout if omitted)");

  // fit-nam
  struct {
    NetworkInput net;
    std::string y_path, x_path, out;
    bool row_normalize = false;
  } nam;
  auto* nam_cmd = app.add_subcommand("fit-nam", "fit the network autocorrelation model");
  add_network_options(nam_cmd, nam.net);
  nam_cmd->add_option("--y", nam.y_path, "outcome vector CSV")->required();
  nam_cmd->add_option("--x", nam.x_path, "covariate vector CSV (omit for a marginal fit)");
  nam_cmd->add_flag("--row-normalize", nam.row_normalize, "use row-normalized weights");
  nam_cmd->add_option("--out", nam.out, "output JSON path (stdout if omitted)");

  // whiten
  struct {
    NetworkInput net;
    std::string in_path, out, fit_out;
    std::string method = "lmm";
    int d = 2;
  } whiten;
  auto* whiten_cmd = app.add_subcommand("whiten", "pre-whiten a vector against its network");
  add_network_options(whiten_cmd, whiten.net);
  whiten_cmd->add_option("--in", whiten.in_path, "input vector CSV")->required();
  whiten_cmd->add_option("--method", whiten.method, "lmm or nam")
      ->check(CLI::IsMember({"lmm", "nam"}))
      ->capture_default_str();
  whiten_cmd->add_option("--d", whiten.d, "polynomial covariance order (lmm)")
      ->capture_default_str();
  whiten_cmd->add_option("--out", whiten.out, "whitened vector CSV path")->required();
  whiten_cmd->add_option("--fit-out", whiten.fit_out, "also write the fit JSON here");

  // assoc
  struct {
    std::string x_path, y_path;
    std::string measure = "ols";
    int perms = 199;
    std::uint64_t seed = 0;
    bool seed_set = false;
  } assoc;
  auto* assoc_cmd = app.add_subcommand("assoc", "test association between two vectors");
  assoc_cmd->add_option("--x", assoc.x_path, "first vector CSV")->required();
  assoc_cmd->add_option("--y", assoc.y_path, "second vector CSV")->required();
  assoc_cmd->add_option("--measure", assoc.measure, "ols or dcorr")
      ->check(CLI::IsMember({"ols", "dcorr"}))
      ->capture_default_str();
  assoc_cmd->add_option("--perms", assoc.perms, "permutation count for dcorr")
      ->capture_default_str();
  auto* assoc_seed =
      assoc_cmd->add_option("--seed", assoc.seed, "RNG seed (required for dcorr)");

  // reproduce-table1
  struct {
    std::string config, out;
    int threads = -1;
  } table;
  auto* table_cmd =
      app.add_subcommand("reproduce-table1", "run the full rejection-rate experiment");
  table_cmd->add_option("--config", table.config, "scenario grid JSON")->required();
  table_cmd->add_option("--out", table.out, "report CSV path")->required();
  table_cmd->add_option("--threads", table.threads, "worker threads (overrides config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) {
      const auto a = netdep::erdos_renyi_gnm(gen.n, gen.ties, gen.seed);
      if (gen.dense) {
        netdep::io::write_matrix_csv(gen.out, a.matrix());
      } else {
        netdep::io::write_edge_list_csv(gen.out, a);
      }
    } else if (*sim_cmd) {
      const auto a = load_network(sim.net);
      auto draw = [&](std::uint64_t seed) {
        if (sim.process == "direct") {
          netdep::DirectProcessConfig cfg;
          cfg.kappa = sim.kappa;
          cfg.alpha = sim.alpha;
          cfg.steps = sim.steps;
          cfg.noise_sd = sim.noise_sd;
          cfg.baseline_sd = sim.baseline_sd;
          return netdep::simulate_direct(a, cfg, seed);
        }
        netdep::EquilibriumProcessConfig cfg;
        cfg.rho = sim.rho;
        cfg.noise_sd = sim.noise_sd;
        cfg.baseline_sd = sim.baseline_sd;
        return netdep::simulate_equilibrium(a, cfg, seed);
      };
      if (sim.replicates < 1) throw netdep::ParameterError("--replicates must be >= 1");
      if (sim.replicates == 1) {
        netdep::io::write_vector_csv(sim.out, draw(sim.seed));
      } else {
        Eigen::MatrixXd ensemble(sim.replicates, a.n());
        for (int r = 0; r < sim.replicates; ++r) {
          ensemble.row(r) =
              draw(netdep::derive_seed(sim.seed, {static_cast<std::uint64_t>(r)}))
                  .transpose();
        }
        netdep::io::write_matrix_csv(sim.out, ensemble);
      }
    } else if (*lmm_cmd) {
      const auto a = load_network(lmm.net);
      const auto y = netdep::io::read_vector_csv(lmm.y_path);
      netdep::LmmFit fit;
      if (lmm.x_path.empty()) {
        fit = netdep::marginal_fit_and_whiten(y, a, lmm.d).second;
      } else {
        fit = netdep::fit_lmm(y, netdep::io::read_vector_csv(lmm.x_path), a, lmm.d);
      }
      write_json_output(netdep::io::to_json(fit), lmm.out);
    } else if (*nam_cmd) {
      const auto a = load_network(nam.net);
      const auto y = netdep::io::read_vector_csv(nam.y_path);
      const auto w = nam.row_normalize ? netdep::NamWeights::row_normalized(a)
                                       : netdep::NamWeights::raw(a);
      const netdep::NamFit fit =
          nam.x_path.empty()
              ? netdep::fit_nam_marginal(y, w)
              : netdep::fit_nam(y, netdep::io::read_vector_csv(nam.x_path), w);
      write_json_output(netdep::io::to_json(fit), nam.out);
    } else if (*whiten_cmd) {
      const auto a = load_network(whiten.net);
      const auto v = netdep::io::read_vector_csv(whiten.in_path);
      if (whiten.method == "lmm") {
        const auto [w, fit] = netdep::marginal_fit_and_whiten(v, a, whiten.d);
        netdep::io::write_vector_csv(whiten.out, w);
        if (!whiten.fit_out.empty()) write_json_output(netdep::io::to_json(fit), whiten.fit_out);
      } else {
        const auto [w, fit] = netdep::nam_prewhiten(v, a);
        netdep::io::write_vector_csv(whiten.out, w);
        if (!whiten.fit_out.empty()) write_json_output(netdep::io::to_json(fit), whiten.fit_out);
      }
    } else if (*assoc_cmd) {
      const auto x = netdep::io::read_vector_csv(assoc.x_path);
      const auto y = netdep::io::read_vector_csv(assoc.y_path);
      netdep::TestResult result;
      if (assoc.measure == "ols") {
        result = netdep::ols_test(x, y);
      } else {
        if (assoc_seed->count() == 0) {
          throw netdep::ParameterError("--seed is required for the dcorr permutation test");
        }
        result = netdep::dcorr_test(x, y, assoc.perms, assoc.seed);
      }
      write_json_output(netdep::io::to_json(result), "");
    } else if (*table_cmd) {
      netdep::TableConfig cfg = netdep::io::read_table_config(table.config);
      if (table.threads >= 0) cfg.threads = table.threads;
      const netdep::RejectionReport report = netdep::run_table(cfg);
      std::ofstream out(table.out);
      if (!out) throw netdep::ParameterError(table.out + ": cannot open for writing");
      out << report.to_csv();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
