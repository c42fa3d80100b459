#pragma once

#include <utility>

#include "bflsim/sysmodel.hpp"
#include "bflsim/types.hpp"

namespace bflsim {

// Virtual energy-deficit queues, one per client, in joules.
struct QueueState {
  Array backlog;  // Z_n(t)
  int round = 0;  // t

  static QueueState zeros(Eigen::Index n) {
    return QueueState{Array::Zero(n), 0};
  }
};

// Constants behind the [O(1/V), O(sqrt(V))] trade-off bounds.
struct TheoremBounds {
  double h_const = 0.0;        // H
  double tau_min = 0.0;        // all-scheduled latency bounds
  double tau_max = 0.0;
  double latency_floor = 0.0;  // universal floor (empty schedule, max mining)
  double delta_min = 0.0;      // drift-penalty ratio enclosure at given queues
  double delta_max = 0.0;
  double phi_opt_proxy = 0.0;  // upper estimate of the optimal LTA data rate
  double g1 = 0.0;             // 2(H + tau_max)
  double g2 = 0.0;             // 2(tau_max * phi_opt_proxy - min_n D_n)
  double g1_alt = 0.0;         // 2(H + tau_max * C), slack-weighted variant
  double g2_alt = 0.0;         // 2(tau_max * phi_opt_proxy - sum_n D_n)
  double approx_slack = 0.0;   // C
};

struct TradeoffBounds {
  double gap_bound = 0.0;        // (H/tau_min + C) / V
  double excess_bound = 0.0;     // per-client LTA energy overshoot at T
  double radicand = 0.0;         // (G1 + V G2)/T + sum Z(0)^2 / T^2
  double radicand_alt = 0.0;     // slack-weighted radicand (may be < 0)
  double excess_bound_alt = 0.0; // NaN when radicand_alt < 0
};

// Z_n(t+1) = max(Z_n + E_n - E_sup,n * tau, 0), elementwise.
Array queue_update(const Array& backlog, const Array& energy_j,
                   const Array& energy_supply_w, double latency_s);

// Delta_V = (-V * D + sum_n Z_n E_n) / tau for a realized round.
double drift_penalty_ratio(const RoundOutcome& out, const Array& backlog,
                           double v_weight);
double drift_penalty_ratio(const std::vector<ClientProfile>& fleet,
                           const SystemConfig& c, const ChannelState& ch,
                           const Action& a, const Array& backlog,
                           double v_weight);

// U(eta) = -V * D + sum_n Z_n E_n - eta * tau (Dinkelbach numerator).
double u_value(const RoundOutcome& out, const Array& backlog, double v_weight,
               double eta);

// H = 1/2 sum_n [ (E_n^worst)^2 + (E_n^sup tau_n^worst)^2 ], with the
// worst-case uplink rate taken at the mean clamped fading.
double compute_h(const std::vector<ClientProfile>& fleet,
                 const SystemConfig& c);

// All-scheduled straggler latency bounds (best/worst channel, fastest/slowest
// settings). tau_min is NOT a floor for subset schedules; use latency_floor.
std::pair<double, double> tau_bounds(const std::vector<ClientProfile>& fleet,
                                     const SystemConfig& c);

// Shortest possible round: empty schedule, everyone mining at f_max.
double latency_floor(const std::vector<ClientProfile>& fleet,
                     const SystemConfig& c);

// Sign-correct enclosure of Delta_V over all feasible actions at the given
// queue state; the Dinkelbach bisection bracket.
std::pair<double, double> delta_bounds(const Array& backlog,
                                       const std::vector<ClientProfile>& fleet,
                                       const SystemConfig& c, double v_weight);

TheoremBounds make_theorem_bounds(const std::vector<ClientProfile>& fleet,
                                  const SystemConfig& c, const Array& backlog,
                                  double v_weight);

// Gap and queue-excess bounds at horizon T (rounds) for start sum |Z(0)|^2.
TradeoffBounds theorem_gap_bounds(const TheoremBounds& b, double v_weight,
                                  int rounds, double sum_z0_sq);

}  // namespace bflsim
