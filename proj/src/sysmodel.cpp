#include "bflsim/sysmodel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bflsim {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void validate(const ClientProfile& p) {
  const std::string tag = "client " + std::to_string(p.id) + ": ";
  require(p.dataset_size >= 1.0, tag + "dataset_size must be >= 1");
  require(p.cycles_per_sample > 0.0, tag + "cycles_per_sample must be > 0");
  require(p.switch_cap > 0.0, tag + "switch_cap must be > 0");
  require(p.model_bits > 0.0, tag + "model_bits must be > 0");
  require(p.distance_m > 0.0, tag + "distance_m must be > 0");
  require(p.f_min_hz > 0.0, tag + "f_min_hz must be > 0");
  require(p.f_max_hz >= p.f_min_hz, tag + "f_max_hz must be >= f_min_hz");
  require(p.p_min_w > 0.0, tag + "p_min_w must be > 0");
  require(p.p_max_w >= p.p_min_w, tag + "p_max_w must be >= p_min_w");
  require(p.energy_supply_w > 0.0, tag + "energy_supply_w must be > 0");
}

void validate(const SystemConfig& c) {
  require(c.bandwidth_hz > 0.0, "bandwidth_hz must be > 0");
  require(c.noise_psd_w_hz > 0.0, "noise_psd_w_hz must be > 0");
  require(c.pathloss_const > 0.0, "pathloss_const must be > 0");
  require(c.ref_distance_m > 0.0, "ref_distance_m must be > 0");
  require(c.pathloss_exp >= 0.0, "pathloss_exp must be >= 0");
  require(c.rho_min > 0.0 && c.rho_max >= c.rho_min,
          "fading clamp range must satisfy 0 < rho_min <= rho_max");
  require(c.mining_difficulty > 0.0, "mining_difficulty must be > 0");
  require(c.mining_confidence > 0.0 && c.mining_confidence < 1.0,
          "mining_confidence must lie in (0, 1)");
  require(c.local_epochs >= 1, "local_epochs must be >= 1");
  require(c.step_size > 0.0, "step_size must be > 0");
  require(c.lyapunov_v >= 0.0, "lyapunov_v must be >= 0");
  require(c.approx_slack >= 0.0, "approx_slack must be >= 0");
  require(c.solver.l1_max >= 1 && c.solver.l2_max >= 1 && c.solver.l3_max >= 1,
          "solver iteration caps must be >= 1");
  require(c.solver.bcd_restarts >= 1, "bcd_restarts must be >= 1");
  require(c.solver.xi_rel > 0.0, "xi_rel must be > 0");
  require(c.solver.golden_rel > 0.0, "golden_rel must be > 0");
}

void validate(const std::vector<ClientProfile>& fleet, const SystemConfig& c) {
  require(!fleet.empty(), "fleet must contain at least one client");
  validate(c);
  for (const auto& p : fleet) validate(p);
}

void validate_action(const std::vector<ClientProfile>& fleet, const Action& a) {
  const auto n = static_cast<Eigen::Index>(fleet.size());
  require(a.schedule.size() == n && a.train_freq_hz.size() == n &&
              a.tx_power_w.size() == n && a.mine_freq_hz.size() == n,
          "action arrays must match fleet size");
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = fleet[i];
    const std::string tag = "client " + std::to_string(p.id) + ": ";
    require(a.schedule[i] == 0 || a.schedule[i] == 1,
            tag + "schedule entry must be 0/1");
    require(a.train_freq_hz[i] >= p.f_min_hz && a.train_freq_hz[i] <= p.f_max_hz,
            tag + "train frequency outside [f_min, f_max]");
    require(a.mine_freq_hz[i] >= p.f_min_hz && a.mine_freq_hz[i] <= p.f_max_hz,
            tag + "mining frequency outside [f_min, f_max]");
    require(a.tx_power_w[i] >= p.p_min_w && a.tx_power_w[i] <= p.p_max_w,
            tag + "transmit power outside [P_min, P_max]");
  }
}

double clamped_exp_mean(double lo, double hi) {
  return lo + std::exp(-lo) - std::exp(-hi);
}

double channel_gain(const ClientProfile& p, const SystemConfig& c, double rho) {
  return c.pathloss_const * rho *
         std::pow(c.ref_distance_m / p.distance_m, c.pathloss_exp);
}

ChannelState sample_channel(Rng& rng, const std::vector<ClientProfile>& fleet,
                            const SystemConfig& c) {
  const auto n = static_cast<Eigen::Index>(fleet.size());
  ChannelState ch;
  ch.rho = Array(n);
  ch.gain = Array(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double rho = std::clamp(rng.exp1(), c.rho_min, c.rho_max);
    ch.rho[i] = rho;
    ch.gain[i] = channel_gain(fleet[i], c, rho);
  }
  return ch;
}

double uplink_rate(const SystemConfig& c, double p_w, double h) {
  if (h <= 0.0) throw std::domain_error("channel gain must be > 0");
  if (p_w <= 0.0) throw std::domain_error("transmit power must be > 0");
  const double snr = p_w * h / (c.bandwidth_hz * c.noise_psd_w_hz);
  return c.bandwidth_hz * log2_1p(snr);
}

double training_time(const ClientProfile& p, const SystemConfig& c,
                     bool scheduled, double f_hz) {
  if (!scheduled) return 0.0;
  return p.cycles_per_sample * c.local_epochs * p.dataset_size / f_hz;
}

double training_energy(const ClientProfile& p, const SystemConfig& c,
                       bool scheduled, double f_hz) {
  if (!scheduled) return 0.0;
  return p.switch_cap * p.cycles_per_sample * c.local_epochs * p.dataset_size *
         f_hz * f_hz;
}

double uplink_time(const ClientProfile& p, const SystemConfig& c,
                   bool scheduled, double p_w, double h) {
  if (!scheduled) return 0.0;
  return p.model_bits / uplink_rate(c, p_w, h);
}

double uplink_energy(const ClientProfile& p, const SystemConfig& c,
                     bool scheduled, double p_w, double h) {
  if (!scheduled) return 0.0;
  return p_w * uplink_time(p, c, true, p_w, h);
}

double mining_time(const SystemConfig& c, const Array& mine_freq_hz) {
  const double total = mine_freq_hz.sum();
  if (total <= 0.0)
    throw std::domain_error("mining requires a positive total frequency");
  return -c.mining_difficulty * std::log1p(-c.mining_confidence) / total;
}

double mining_energy(const ClientProfile& p, double mine_freq_hz,
                     double mine_time_s) {
  return p.switch_cap * mine_time_s * mine_freq_hz * mine_freq_hz *
         mine_freq_hz;
}

RoundOutcome compute_round_with_mining_time(
    const std::vector<ClientProfile>& fleet, const SystemConfig& c,
    const ChannelState& ch, const Action& a, double mine_time_s) {
  validate_action(fleet, a);
  const auto n = static_cast<Eigen::Index>(fleet.size());
  RoundOutcome out;
  out.phases.train_s = Array::Zero(n);
  out.phases.uplink_s = Array::Zero(n);
  out.phases.train_j = Array::Zero(n);
  out.phases.uplink_j = Array::Zero(n);
  out.phases.mine_j = Array::Zero(n);
  out.phases.mine_s = mine_time_s;
  out.energy_j = Array::Zero(n);

  double straggler = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = fleet[i];
    const bool on = a.schedule[i] != 0;
    out.phases.train_s[i] = training_time(p, c, on, a.train_freq_hz[i]);
    out.phases.uplink_s[i] = uplink_time(p, c, on, a.tx_power_w[i], ch.gain[i]);
    out.phases.train_j[i] = training_energy(p, c, on, a.train_freq_hz[i]);
    out.phases.uplink_j[i] =
        uplink_energy(p, c, on, a.tx_power_w[i], ch.gain[i]);
    out.phases.mine_j[i] = mining_energy(p, a.mine_freq_hz[i], mine_time_s);
    straggler = std::max(straggler,
                         out.phases.train_s[i] + out.phases.uplink_s[i]);
    if (on) out.data_size += p.dataset_size;
  }
  out.latency_s = straggler + mine_time_s;
  out.energy_j =
      out.phases.train_j + out.phases.uplink_j + out.phases.mine_j;
  return out;
}

RoundOutcome compute_round(const std::vector<ClientProfile>& fleet,
                           const SystemConfig& c, const ChannelState& ch,
                           const Action& a) {
  return compute_round_with_mining_time(fleet, c, ch, a,
                                        mining_time(c, a.mine_freq_hz));
}

}  // namespace bflsim
