#include "bflsim/sim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "bflsim/lyapunov.hpp"
#include "bflsim/solver.hpp"
#include "bflsim/sysmodel.hpp"

namespace bflsim {

namespace {

constexpr std::uint64_t kChannelStream = 0x6368616e6e656cULL;
constexpr std::uint64_t kMiningStream = 0x626c6f636bULL;
constexpr std::uint64_t kDataStream = 0x64617461ULL;
constexpr std::uint64_t kTestStream = 0x74657374ULL;

int default_oracle_levels(int n) {
  if (n <= 1) return 12;
  if (n == 2) return 8;
  return 4;
}

void fold_stats(SolverAggregates& agg, const SolveStats& s) {
  agg.outer_iters_max = std::max(agg.outer_iters_max, s.outer_iters);
  agg.bcd_passes_total += s.bcd_passes;
  agg.mining_iters_max = std::max(agg.mining_iters_max, s.mining_iters_max);
  agg.golden_iters_max = std::max(agg.golden_iters_max, s.golden_iters_max);
  agg.monotone_violations_total += s.monotone_violations;
  if (s.xi_abs > 0.0)
    agg.max_resid_over_xi =
        std::max(agg.max_resid_over_xi, std::abs(s.inf_u) / s.xi_abs);
}

}  // namespace

MetricsSeries run(const SimConfig& sc) {
  validate(sc.fleet, sc.system);
  if (sc.rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (sc.metric_cadence < 1)
    throw std::invalid_argument("metric cadence must be >= 1");
  const int n = static_cast<int>(sc.fleet.size());
  const int t_end = sc.rounds;
  if (sc.oracle_check && n > 3)
    throw std::invalid_argument("oracle checks need at most 3 clients");

  Rng channel_rng(mix_seed(sc.seed, kChannelStream));
  Rng mining_rng(mix_seed(sc.seed, kMiningStream));

  std::vector<LocalDataset> local(n);
  Array dataset_sizes(n);
  for (int i = 0; i < n; ++i) {
    const auto samples = static_cast<int>(std::llround(sc.fleet[i].dataset_size));
    Rng r(mix_seed(sc.seed ^ kDataStream, static_cast<std::uint64_t>(i) + 1));
    local[i] = make_synthetic(samples, sc.fl, r);
    dataset_sizes[i] = sc.fleet[i].dataset_size;
  }
  Rng test_rng(mix_seed(sc.seed ^ kDataStream, kTestStream));
  const LocalDataset test = make_synthetic(sc.fl.test_samples, sc.fl, test_rng);

  MetricsSeries m;
  m.tau_s.resize(t_end);
  m.data.resize(t_end);
  m.delta_v.resize(t_end);
  m.loss.resize(t_end);
  m.accuracy.resize(t_end);
  m.energy_j = Matrix(t_end, n);
  m.backlog_j = Matrix(t_end, n);

  Array z = Array::Zero(n);
  Array supply(n);
  for (int i = 0; i < n; ++i) supply[i] = sc.fleet[i].energy_supply_w;
  Array energy_sum = Array::Zero(n);
  double time_sum = 0.0;
  ModelParams global = zero_model(sc.fl.feature_dim);
  EvalResult ev = evaluate(global, test);
  const int oracle_levels = sc.oracle_levels > 0
                                ? sc.oracle_levels
                                : default_oracle_levels(n);

  for (int t = 0; t < t_end; ++t) {
    const ChannelState ch = sample_channel(channel_rng, sc.fleet, sc.system);
    RoundInputs in;
    in.fleet = &sc.fleet;
    in.cfg = &sc.system;
    in.channel = ch;
    in.backlog = z;
    in.v_weight = sc.system.lyapunov_v;
    const std::uint64_t restart_seed =
        mix_seed(sc.seed, static_cast<std::uint64_t>(t));

    SolveReport rep;
    try {
      if (sc.policy == PolicyKind::cs || sc.policy == PolicyKind::ec) {
        // shadow solve supplies this round's cardinality hint
        SolveReport shadow = solve_round(in, restart_seed);
        fold_stats(m.solver, shadow.stats);
        const int hint = shadow.action.schedule.sum();
        rep = decide(sc.policy, in, restart_seed, energy_sum, time_sum, hint);
      } else {
        rep = decide(sc.policy, in, restart_seed, energy_sum, time_sum);
      }
    } catch (const NonConvergence& e) {
      throw NonConvergence("round " + std::to_string(t + 1) + ": " + e.what());
    }
    fold_stats(m.solver, rep.stats);

    if (sc.oracle_check) {
      const auto [ref_action, ref_delta] = brute_force_round(in, oracle_levels);
      const double tol = 0.02 * std::abs(ref_delta) + 1e-9;
      if (rep.delta_v > ref_delta + tol)
        throw std::runtime_error(
            "oracle check failed at round " + std::to_string(t + 1) +
            ": solver " + std::to_string(rep.delta_v) + " vs grid " +
            std::to_string(ref_delta));
    }

    RoundOutcome out;
    if (sc.stochastic_mining) {
      const double mean_s =
          sc.system.mining_difficulty / rep.action.mine_freq_hz.sum();
      out = compute_round_with_mining_time(sc.fleet, sc.system, ch, rep.action,
                                           mean_s * mining_rng.exp1());
    } else {
      out = compute_round(sc.fleet, sc.system, ch, rep.action);
    }
    const double dv = drift_penalty_ratio(out, z, sc.system.lyapunov_v);

    if (rep.action.schedule.any()) {
      std::vector<ModelParams> locals(n, global);
      for (int i = 0; i < n; ++i) {
        if (!rep.action.schedule[i]) continue;
        locals[i] = local_train(global, local[i], sc.system.local_epochs,
                                sc.system.step_size, sc.fl.l2_reg);
      }
      global = aggregate(locals, rep.action.schedule, dataset_sizes);
    }
    if (t % sc.metric_cadence == 0 || t + 1 == t_end)
      ev = evaluate(global, test);

    z = queue_update(z, out.energy_j, supply, out.latency_s);

    m.tau_s[t] = out.latency_s;
    m.data[t] = out.data_size;
    m.delta_v[t] = dv;
    m.loss[t] = ev.loss;
    m.accuracy[t] = ev.accuracy;
    m.energy_j.row(t) = out.energy_j.transpose();
    m.backlog_j.row(t) = z.transpose();

    energy_sum += out.energy_j;
    time_sum += out.latency_s;
  }
  return m;
}

LtaSummary lta_report(const MetricsSeries& series) {
  const auto t_end = static_cast<int>(series.tau_s.size());
  if (t_end < 1) throw std::invalid_argument("empty metrics series");
  const int n = static_cast<int>(series.energy_j.cols());

  LtaSummary s;
  s.rounds = t_end;
  s.energy_total_j = Array::Zero(n);
  for (int t = 0; t < t_end; ++t) {
    s.time_total_s += series.tau_s[t];
    s.data_total += series.data[t];
    s.energy_total_j += series.energy_j.row(t).transpose().array();
  }
  s.lta_data = s.time_total_s > 0.0 ? s.data_total / s.time_total_s : 0.0;
  s.lta_energy_w = s.time_total_s > 0.0
                       ? Array(s.energy_total_j / s.time_total_s)
                       : Array(Array::Zero(n));
  s.final_backlog_j = series.backlog_j.row(t_end - 1).transpose().array();
  s.final_loss = series.loss[t_end - 1];
  s.final_accuracy = series.accuracy[t_end - 1];
  return s;
}

}  // namespace bflsim
