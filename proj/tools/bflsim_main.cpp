#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "bflsim/config_io.hpp"
#include "bflsim/sim.hpp"

namespace {

using namespace bflsim;

SimConfig pick_config(const std::string& name) {
  if (name == "desk") return builtin_desk_config();
  if (name == "table4") return builtin_table4_config();
  return load_config(name);
}

std::string num_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct Cell {
  PolicyKind policy;
  double v = 0.0;
  std::uint64_t seed = 0;
  std::string name;
};

int run_command(const std::string& config_name,
                const std::vector<std::string>& policies,
                const std::vector<double>& vs,
                const std::vector<std::uint64_t>& seeds, int rounds,
                const std::string& output, int workers, bool stochastic,
                bool oracle) {
  SimConfig base = pick_config(config_name);
  if (rounds > 0) base.rounds = rounds;
  if (stochastic) base.stochastic_mining = true;
  if (oracle) base.oracle_check = true;

  std::vector<PolicyKind> kinds;
  if (policies.empty()) kinds.push_back(base.policy);
  for (const auto& p : policies) kinds.push_back(parse_policy(p));
  const std::vector<double> v_list =
      vs.empty() ? std::vector<double>{base.system.lyapunov_v} : vs;
  const std::vector<std::uint64_t> seed_list =
      seeds.empty() ? std::vector<std::uint64_t>{base.seed} : seeds;

  std::vector<Cell> cells;
  for (const auto k : kinds)
    for (const double v : v_list)
      for (const auto s : seed_list)
        cells.push_back({k, v, s,
                         policy_name(k) + "_v" + num_tag(v) + "_s" +
                             std::to_string(s)});

  std::filesystem::create_directories(output);

  std::atomic<std::size_t> next{0};
  std::atomic<int> failed{0};
  std::mutex print_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      SimConfig sc = base;
      sc.policy = cell.policy;
      sc.system.lyapunov_v = cell.v;
      sc.seed = cell.seed;
      const std::string stem = output + "/" + cell.name;
      try {
        const MetricsSeries series = run(sc);
        const LtaSummary lta = lta_report(series);
        write_metrics_csv(stem + ".csv", series);
        write_summary_json(stem + "_summary.json", sc, lta, series.solver);
        std::lock_guard<std::mutex> lock(print_mu);
        std::printf(
            "%s: rounds=%d data_rate=%.6g energy_rate_max=%.6g loss=%.6g "
            "acc=%.4f\n",
            cell.name.c_str(), lta.rounds, lta.lta_data,
            lta.lta_energy_w.size() ? lta.lta_energy_w.maxCoeff() : 0.0,
            lta.final_loss, lta.final_accuracy);
      } catch (const std::exception& e) {
        failed.fetch_add(1);
        std::lock_guard<std::mutex> lock(print_mu);
        std::printf("%s: FAILED: %s\n", cell.name.c_str(), e.what());
      }
    }
  };

  const int pool = std::max(1, std::min<int>(workers, int(cells.size())));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(pool));
  for (int w = 0; w < pool; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return failed.load() ? 1 : 0;
}

int validate_command(const std::string& config_name, bool params) {
  const SimConfig sc = pick_config(config_name);
  validate(sc.fleet, sc.system);
  std::printf("ok: %d clients, policy %s, V=%g, rounds=%d, seed=%llu\n",
              int(sc.fleet.size()), policy_name(sc.policy).c_str(),
              sc.system.lyapunov_v, sc.rounds,
              static_cast<unsigned long long>(sc.seed));
  if (!params) return 0;
  const auto& sys = sc.system;
  std::printf("system (SI):\n");
  std::printf("  bandwidth_hz        %.17g\n", sys.bandwidth_hz);
  std::printf("  noise_psd_w_hz      %.17g\n", sys.noise_psd_w_hz);
  std::printf("  pathloss_const      %.17g\n", sys.pathloss_const);
  std::printf("  ref_distance_m      %.17g\n", sys.ref_distance_m);
  std::printf("  pathloss_exp        %.17g\n", sys.pathloss_exp);
  std::printf("  rho_clamp           [%.17g, %.17g]\n", sys.rho_min,
              sys.rho_max);
  std::printf("  mining_difficulty   %.17g\n", sys.mining_difficulty);
  std::printf("  mining_confidence   %.17g\n", sys.mining_confidence);
  std::printf("  local_epochs        %d\n", sys.local_epochs);
  std::printf("  step_size           %.17g\n", sys.step_size);
  std::printf("  lyapunov_v          %.17g\n", sys.lyapunov_v);
  std::printf("  approx_slack        %.17g\n", sys.approx_slack);
  for (const auto& p : sc.fleet) {
    std::printf("client %d:\n", p.id);
    std::printf("  dataset_size        %.17g\n", p.dataset_size);
    std::printf("  cycles_per_sample   %.17g\n", p.cycles_per_sample);
    std::printf("  switch_cap          %.17g\n", p.switch_cap);
    std::printf("  model_bits          %.17g\n", p.model_bits);
    std::printf("  distance_m          %.17g\n", p.distance_m);
    std::printf("  f_range_hz          [%.17g, %.17g]\n", p.f_min_hz,
                p.f_max_hz);
    std::printf("  p_range_w           [%.17g, %.17g]\n", p.p_min_w,
                p.p_max_w);
    std::printf("  energy_supply_w     %.17g\n", p.energy_supply_w);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete-time simulator of a blockchain-assisted federated "
               "learning network with per-round schedule optimization"};
  app.require_subcommand(1);

  std::string config = "desk";
  std::vector<std::string> policies;
  std::vector<double> vs;
  std::vector<std::uint64_t> seeds;
  int rounds = -1;
  std::string output = ".";
  int workers = 1;
  bool stochastic = false;
  bool oracle = false;
  bool params = false;

  auto* run_cmd =
      app.add_subcommand("run", "simulate one cell or a policy/V/seed sweep");
  run_cmd->add_option("--config", config,
                      "config file path or builtin name (desk, table4)");
  run_cmd->add_option("--policy", policies,
                      "scheduling policies (dracs, cs, ec, sa)");
  run_cmd->add_option("--v", vs, "drift-penalty weights to sweep");
  run_cmd->add_option("--seed", seeds, "seeds to sweep");
  run_cmd->add_option("--rounds", rounds, "override the round count");
  run_cmd->add_option("--output", output, "directory for csv/json results");
  run_cmd->add_option("--workers", workers, "cells run in parallel");
  run_cmd->add_flag("--stochastic-mining", stochastic,
                    "draw block times instead of using their quantile");
  run_cmd->add_flag("--oracle", oracle,
                    "cross-check every round against the dense grid");

  auto* validate_cmd =
      app.add_subcommand("validate", "load a config and check feasibility");
  validate_cmd->add_option("--config", config,
                           "config file path or builtin name (desk, table4)");
  validate_cmd->add_flag("--params", params,
                         "echo all loaded values in SI units");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed())
      return run_command(config, policies, vs, seeds, rounds, output, workers,
                         stochastic, oracle);
    return validate_command(config, params);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
