#include "bflsim/lyapunov.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bflsim {

namespace {

// worst-case (slowest) uplink rate at mean clamped fading and minimum power
double worst_rate_mean_fading(const ClientProfile& p, const SystemConfig& c) {
  const double rho_bar = clamped_exp_mean(c.rho_min, c.rho_max);
  return uplink_rate(c, p.p_min_w, channel_gain(p, c, rho_bar));
}

double pow_cycles(const SystemConfig& c) {
  // -alpha ln(1 - p0): expected-cycle budget scaled to the p0 quantile
  return -c.mining_difficulty * std::log1p(-c.mining_confidence);
}

}  // namespace

Array queue_update(const Array& backlog, const Array& energy_j,
                   const Array& energy_supply_w, double latency_s) {
  if (backlog.size() != energy_j.size() ||
      backlog.size() != energy_supply_w.size())
    throw std::invalid_argument("queue_update: mismatched array sizes");
  if (latency_s < 0.0)
    throw std::invalid_argument("queue_update: negative latency");
  return (backlog + energy_j - energy_supply_w * latency_s).max(0.0);
}

double drift_penalty_ratio(const RoundOutcome& out, const Array& backlog,
                           double v_weight) {
  if (out.latency_s <= 0.0)
    throw std::domain_error("drift_penalty_ratio: latency must be > 0");
  return (-v_weight * out.data_size + (backlog * out.energy_j).sum()) /
         out.latency_s;
}

double drift_penalty_ratio(const std::vector<ClientProfile>& fleet,
                           const SystemConfig& c, const ChannelState& ch,
                           const Action& a, const Array& backlog,
                           double v_weight) {
  return drift_penalty_ratio(compute_round(fleet, c, ch, a), backlog,
                             v_weight);
}

double u_value(const RoundOutcome& out, const Array& backlog, double v_weight,
               double eta) {
  return -v_weight * out.data_size + (backlog * out.energy_j).sum() -
         eta * out.latency_s;
}

double compute_h(const std::vector<ClientProfile>& fleet,
                 const SystemConfig& c) {
  double sum_fmin = 0.0;
  for (const auto& p : fleet) sum_fmin += p.f_min_hz;
  const double mine_s_worst = pow_cycles(c) / sum_fmin;

  double h = 0.0;
  for (const auto& p : fleet) {
    const double rate = worst_rate_mean_fading(p, c);
    const double e_worst =
        p.switch_cap * p.cycles_per_sample * c.local_epochs * p.dataset_size *
            p.f_max_hz * p.f_max_hz +
        p.p_max_w * p.model_bits / rate +
        p.switch_cap * p.f_max_hz * p.f_max_hz * p.f_max_hz * mine_s_worst;
    const double tau_worst =
        p.cycles_per_sample * c.local_epochs * p.dataset_size / p.f_min_hz +
        p.model_bits / rate + mine_s_worst;
    h += 0.5 * (e_worst * e_worst +
                p.energy_supply_w * p.energy_supply_w * tau_worst * tau_worst);
  }
  return h;
}

std::pair<double, double> tau_bounds(const std::vector<ClientProfile>& fleet,
                                     const SystemConfig& c) {
  double sum_fmin = 0.0;
  double sum_fmax = 0.0;
  for (const auto& p : fleet) {
    sum_fmin += p.f_min_hz;
    sum_fmax += p.f_max_hz;
  }
  double straggler_best = 0.0;
  double straggler_worst = 0.0;
  for (const auto& p : fleet) {
    const double rate_best =
        uplink_rate(c, p.p_max_w, channel_gain(p, c, c.rho_max));
    const double rate_worst =
        uplink_rate(c, p.p_min_w, channel_gain(p, c, c.rho_min));
    const double t_best =
        p.cycles_per_sample * c.local_epochs * p.dataset_size / p.f_max_hz +
        p.model_bits / rate_best;
    const double t_worst =
        p.cycles_per_sample * c.local_epochs * p.dataset_size / p.f_min_hz +
        p.model_bits / rate_worst;
    straggler_best = std::max(straggler_best, t_best);
    straggler_worst = std::max(straggler_worst, t_worst);
  }
  return {straggler_best + pow_cycles(c) / sum_fmax,
          straggler_worst + pow_cycles(c) / sum_fmin};
}

double latency_floor(const std::vector<ClientProfile>& fleet,
                     const SystemConfig& c) {
  double sum_fmax = 0.0;
  for (const auto& p : fleet) sum_fmax += p.f_max_hz;
  return pow_cycles(c) / sum_fmax;
}

std::pair<double, double> delta_bounds(const Array& backlog,
                                       const std::vector<ClientProfile>& fleet,
                                       const SystemConfig& c, double v_weight) {
  if (backlog.size() != static_cast<Eigen::Index>(fleet.size()))
    throw std::invalid_argument("delta_bounds: backlog size != fleet size");
  double sum_fmin = 0.0;
  double sum_fmax = 0.0;
  double sum_data = 0.0;
  for (const auto& p : fleet) {
    sum_fmin += p.f_min_hz;
    sum_fmax += p.f_max_hz;
    sum_data += p.dataset_size;
  }
  const double floor_s = pow_cycles(c) / sum_fmax;
  const double tau_hi = tau_bounds(fleet, c).second;

  // numerator enclosure: energy is at least the mining floor (everyone mines
  // at f_min while the sum runs at f_max), at most the per-phase worst case
  // at the unluckiest clamped fading.
  double num_lo = -v_weight * sum_data;
  double num_hi = 0.0;
  const double mine_s_lo = pow_cycles(c) / sum_fmax;
  const double mine_s_hi = pow_cycles(c) / sum_fmin;
  for (Eigen::Index i = 0; i < backlog.size(); ++i) {
    const auto& p = fleet[i];
    const double z = backlog[i];
    if (z < 0.0) throw std::invalid_argument("delta_bounds: negative backlog");
    num_lo += z * p.switch_cap * p.f_min_hz * p.f_min_hz * p.f_min_hz *
              mine_s_lo;
    const double rate_worst =
        uplink_rate(c, p.p_min_w, channel_gain(p, c, c.rho_min));
    const double e_hi =
        p.switch_cap * p.cycles_per_sample * c.local_epochs * p.dataset_size *
            p.f_max_hz * p.f_max_hz +
        p.p_max_w * p.model_bits / rate_worst +
        p.switch_cap * p.f_max_hz * p.f_max_hz * p.f_max_hz * mine_s_hi;
    num_hi += z * e_hi;
  }

  const double lo = num_lo < 0.0 ? num_lo / floor_s : num_lo / tau_hi;
  const double hi = num_hi > 0.0 ? num_hi / floor_s : 0.0;
  return {lo, hi};
}

TheoremBounds make_theorem_bounds(const std::vector<ClientProfile>& fleet,
                                  const SystemConfig& c, const Array& backlog,
                                  double v_weight) {
  TheoremBounds b;
  b.h_const = compute_h(fleet, c);
  std::tie(b.tau_min, b.tau_max) = tau_bounds(fleet, c);
  b.latency_floor = latency_floor(fleet, c);
  std::tie(b.delta_min, b.delta_max) =
      delta_bounds(backlog, fleet, c, v_weight);
  double sum_data = 0.0;
  double min_data = std::numeric_limits<double>::infinity();
  for (const auto& p : fleet) {
    sum_data += p.dataset_size;
    min_data = std::min(min_data, p.dataset_size);
  }
  b.phi_opt_proxy = sum_data / b.tau_min;
  b.g1 = 2.0 * (b.h_const + b.tau_max);
  b.g2 = 2.0 * (b.tau_max * b.phi_opt_proxy - min_data);
  b.g1_alt = 2.0 * (b.h_const + b.tau_max * c.approx_slack);
  b.g2_alt = 2.0 * (b.tau_max * b.phi_opt_proxy - sum_data);
  b.approx_slack = c.approx_slack;
  return b;
}

TradeoffBounds theorem_gap_bounds(const TheoremBounds& b, double v_weight,
                                  int rounds, double sum_z0_sq) {
  if (rounds < 1) throw std::invalid_argument("theorem_gap_bounds: rounds < 1");
  if (v_weight <= 0.0)
    throw std::invalid_argument("theorem_gap_bounds: V must be > 0");
  TradeoffBounds r;
  const double t = static_cast<double>(rounds);
  r.gap_bound = (b.h_const / b.tau_min + b.approx_slack) / v_weight;
  r.radicand = (b.g1 + v_weight * b.g2) / t + sum_z0_sq / (t * t);
  r.excess_bound = std::sqrt(r.radicand) / b.tau_min;
  r.radicand_alt = (b.g1_alt - v_weight * b.g2_alt) / t + sum_z0_sq / (t * t);
  r.excess_bound_alt =
      r.radicand_alt >= 0.0
          ? std::sqrt(r.radicand_alt) / b.tau_min
          : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace bflsim
