#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace bflsim {

using Array = Eigen::ArrayXd;
using BoolArray = Eigen::Array<int, Eigen::Dynamic, 1>;  // 0/1 schedule mask

// Static per-client description. All quantities are SI after config load
// (watts, hertz, bits, meters); dBm/dB inputs are converted at parse time.
struct ClientProfile {
  int id = 0;
  double dataset_size = 1.0;        // D_n, samples held locally
  double cycles_per_sample = 1.0;   // c_n, CPU cycles to process one sample
  double switch_cap = 1e-28;        // v_n, effective switched capacitance
  double model_bits = 1.0;          // gamma_n, uplink payload per round
  double distance_m = 1.0;          // d_n, client-to-leader distance
  double f_min_hz = 1.0;            // CPU frequency range, shared by
  double f_max_hz = 1.0;            //   training and mining
  double p_min_w = 1.0;             // transmit power range
  double p_max_w = 1.0;
  double energy_supply_w = 1.0;     // E_n^sup, long-term average power budget
};

// System-wide physical and algorithmic constants.
struct SolverOptions {
  int l1_max = 64;        // outer Dinkelbach bisection cap
  int l2_max = 50;        // BCD passes per start
  int l3_max = 100;       // inner 1-D iteration cap (mining Dinkelbach etc.)
  int bcd_restarts = 3;   // total BCD starts (1 canonical + rest random)
  double xi_rel = 1e-6;   // outer tolerance, relative to Dinkelbach bracket
  double golden_rel = 1e-6;  // golden-section relative interval width
};

struct SystemConfig {
  double bandwidth_hz = 180e3;          // B
  double noise_psd_w_hz = 3.981071705534986e-21;  // N0 (-174 dBm/Hz)
  double pathloss_const = 1e-3;         // h0 at reference distance (-30 dB)
  double ref_distance_m = 1.0;          // d0
  double pathloss_exp = 2.0;            // nu
  double rho_min = 0.1;                 // fading clamp range, rho ~ Exp(1)
  double rho_max = 10.0;
  double mining_difficulty = 2e9;       // alpha, expected cycles per block
  double mining_confidence = 1.0 - 1e-10;  // p0, block-found quantile
  int local_epochs = 1;                 // K
  double step_size = 1e-3;              // beta, local GD step
  double lyapunov_v = 5.0;              // V, drift-penalty weight
  double approx_slack = 0.0;            // C, per-round suboptimality allowance
  SolverOptions solver;
};

// Per-round fading realization and resulting channel gains.
struct ChannelState {
  Array rho;   // clamped Exp(1) draws
  Array gain;  // h_n = h0 * rho * (d0/d)^nu
};

// One round's decision variables.
struct Action {
  BoolArray schedule;   // i_n
  Array train_freq_hz;  // f_n^tra
  Array tx_power_w;     // P_n
  Array mine_freq_hz;   // f_n^bloc
};

struct PhaseBreakdown {
  Array train_s;   // per-client local training time (0 if unscheduled)
  Array uplink_s;  // per-client uplink time (0 if unscheduled)
  double mine_s = 0.0;  // shared mining time
  Array train_j;
  Array uplink_j;
  Array mine_j;
};

// Realized latency/energy/data for one round.
struct RoundOutcome {
  double latency_s = 0.0;  // tau(t)
  double data_size = 0.0;  // D(t), total scheduled samples
  Array energy_j;          // E_n(t), per-client total
  PhaseBreakdown phases;
};

void validate(const ClientProfile& p);
void validate(const SystemConfig& c);
void validate(const std::vector<ClientProfile>& fleet, const SystemConfig& c);
void validate_action(const std::vector<ClientProfile>& fleet, const Action& a);

}  // namespace bflsim
