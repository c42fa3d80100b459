#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bflsim/lyapunov.hpp"
#include "bflsim/types.hpp"

namespace bflsim {

// Raised when an iteration cap is exhausted before the tolerance is met.
struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by stage solvers when a case has no feasible completion; callers
// skip the case. Surfaces to users only if *no* case is feasible, which the
// always-feasible empty/incumbent candidates prevent.
struct InfeasibleCase : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything the per-round optimizer sees.
struct RoundInputs {
  const std::vector<ClientProfile>* fleet = nullptr;
  const SystemConfig* cfg = nullptr;
  ChannelState channel;
  Array backlog;          // Z_n(t), joules
  double v_weight = 0.0;  // V
};

struct MiningSolution {
  Array freq;          // f_n^bloc
  double value = 0.0;  // fractional objective at freq (mining share of U)
  int iters = 0;       // inner Dinkelbach iterations used
};

struct BcdOutcome {
  BoolArray schedule;
  Array train_freq;
  Array tx_power;
  double value = 0.0;  // g (schedule/train/power share of U)
  int passes = 0;      // BCD passes across all starts
  int monotone_violations = 0;
  std::vector<double> trace;  // g after every sub-step, all starts
};

struct SolveStats {
  int outer_iters = 0;
  int bcd_passes = 0;
  int mining_iters_max = 0;
  int golden_iters_max = 0;
  int monotone_violations = 0;
  double xi_abs = 0.0;
  double inf_u = 0.0;  // |U| residual at accepted eta
  double eta = 0.0;
  double delta_lo = 0.0;
  double delta_hi = 0.0;
};

struct SolveReport {
  Action action;
  double delta_v = 0.0;  // drift-penalty ratio achieved by action
  SolveStats stats;
  std::vector<double> bcd_trace;  // from the accepted outer iteration
};

// g: the schedule/train-frequency/transmit-power share of the Dinkelbach
// numerator, -V sum_i D + sum_i Z E^sched - eta * straggler time.
double stage_value(const RoundInputs& in, const BoolArray& schedule,
                   const Array& train_freq, const Array& tx_power, double eta);

// Mining-frequency fractional subproblem, inner Dinkelbach over the
// closed-form parametric minimizer.
MiningSolution solve_mining_freq(const RoundInputs& in, double eta,
                                 double xi_abs);

// Exact schedule stage: straggler case analysis, one case per candidate
// straggler plus the empty case; ties go to the lowest-index case and
// zero scores leave a client unscheduled.
BoolArray solve_scheduling(const RoundInputs& in, const Array& train_freq,
                           const Array& tx_power, double eta);

// Train-frequency stage: per-straggler closed forms (cube-root stationary
// point clamped to both the lower- and the upper-bounded case interval),
// best candidate by true objective. Returns all-f_min when nothing is
// scheduled.
Array solve_train_freq(const RoundInputs& in, const BoolArray& schedule,
                       const Array& tx_power, const Array& incumbent_freq,
                       double eta);

// Transmit-power stage: per-straggler golden-section search with
// non-stragglers at their cheapest feasible power; infeasible cases skipped.
Array solve_tx_power(const RoundInputs& in, const BoolArray& schedule,
                     const Array& train_freq, const Array& incumbent_power,
                     double eta, int* golden_iters = nullptr);

// Block coordinate descent over the three stages at fixed eta; canonical
// start plus deterministic random restarts. fixed_schedule freezes the
// schedule stage (baseline policies reuse the continuous stages).
BcdOutcome bcd_loop(const RoundInputs& in, double eta, double xi_abs,
                    std::uint64_t restart_seed,
                    const BoolArray* fixed_schedule = nullptr,
                    int* golden_iters = nullptr);

// Full per-round optimizer: Dinkelbach bisection on eta over the
// delta_bounds bracket, each iteration solving mining + BCD.
SolveReport solve_round(const RoundInputs& in, std::uint64_t restart_seed,
                        const BoolArray* fixed_schedule = nullptr);

// Exhaustive grid reference: schedule bits x train/power/mining levels per
// client. Grid points sit at f_min + k/levels * (f_max - f_min), k = 0..levels,
// so level counts with common divisors nest. N <= 4, levels <= 12.
std::pair<Action, double> brute_force_round(const RoundInputs& in,
                                            int grid_levels);

}  // namespace bflsim
