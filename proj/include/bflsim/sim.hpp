#pragma once

#include <cstdint>
#include <vector>

#include "bflsim/fl.hpp"
#include "bflsim/policies.hpp"
#include "bflsim/types.hpp"

namespace bflsim {

struct SimConfig {
  SystemConfig system;
  std::vector<ClientProfile> fleet;
  FlOptions fl;
  PolicyKind policy = PolicyKind::dracs;
  int rounds = 2000;
  std::uint64_t seed = 1;
  int metric_cadence = 1;        // evaluate the global model every k rounds
  bool stochastic_mining = false;  // draw block time instead of its quantile
  bool oracle_check = false;     // cross-check every round against the grid
  int oracle_levels = 0;         // 0 picks a default by fleet size
};

// worst observed per-round solver effort and residuals over a run
struct SolverAggregates {
  int outer_iters_max = 0;
  long long bcd_passes_total = 0;
  int mining_iters_max = 0;
  int golden_iters_max = 0;
  long long monotone_violations_total = 0;
  double max_resid_over_xi = 0.0;  // |inf U| / xi, worst round
};

// per-round logs; the backlog row is the queue after the round's update
struct MetricsSeries {
  std::vector<double> tau_s;
  std::vector<double> data;
  std::vector<double> delta_v;
  std::vector<double> loss;
  std::vector<double> accuracy;
  Matrix energy_j;   // rounds x clients
  Matrix backlog_j;  // rounds x clients
  SolverAggregates solver;
};

// every ratio below is recomputed from the raw per-round logs
struct LtaSummary {
  int rounds = 0;
  double time_total_s = 0.0;
  double data_total = 0.0;
  double lta_data = 0.0;  // sum D / sum tau
  Array energy_total_j;
  Array lta_energy_w;     // sum E / sum tau, per client
  Array final_backlog_j;
  double final_loss = 0.0;
  double final_accuracy = 0.0;
};

MetricsSeries run(const SimConfig& sc);

LtaSummary lta_report(const MetricsSeries& series);

}  // namespace bflsim
