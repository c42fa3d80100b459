#pragma once

#include "bflsim/rng.hpp"
#include "bflsim/types.hpp"

namespace bflsim {

// log2(1+x) computed via log1p so huge SNR values stay in the log domain.
inline double log2_1p(double x) { return std::log1p(x) / M_LN2; }

// mean of clamp(X, lo, hi) for X ~ Exp(1): lo + e^-lo - e^-hi
double clamped_exp_mean(double lo, double hi);

// h_n for a given fading draw rho
double channel_gain(const ClientProfile& p, const SystemConfig& c, double rho);

// block-fading draw for every client, rho ~ Exp(1) clamped to [rho_min, rho_max]
ChannelState sample_channel(Rng& rng, const std::vector<ClientProfile>& fleet,
                            const SystemConfig& c);

// Shannon uplink rate in bit/s for transmit power p_w and gain h
double uplink_rate(const SystemConfig& c, double p_w, double h);

// Per-client phase quantities. `scheduled` gates the result to 0 like the
// i_n factor in the model; frequency/power arguments are validated against
// the profile range by the composite compute_round only, so these stay cheap.
double training_time(const ClientProfile& p, const SystemConfig& c,
                     bool scheduled, double f_hz);
double training_energy(const ClientProfile& p, const SystemConfig& c,
                       bool scheduled, double f_hz);
double uplink_time(const ClientProfile& p, const SystemConfig& c,
                   bool scheduled, double p_w, double h);
double uplink_energy(const ClientProfile& p, const SystemConfig& c,
                     bool scheduled, double p_w, double h);

// Shared proof-of-work time: the p0-quantile of the exponential block time,
// -alpha ln(1-p0) / sum_n f_n^bloc. Every client mines, so the sum must be
// positive.
double mining_time(const SystemConfig& c, const Array& mine_freq_hz);
double mining_energy(const ClientProfile& p, double mine_freq_hz,
                     double mine_time_s);

// Composite per-round evaluation: straggler latency plus mining, per-client
// energy, total scheduled data.
RoundOutcome compute_round(const std::vector<ClientProfile>& fleet,
                           const SystemConfig& c, const ChannelState& ch,
                           const Action& a);

// Same, but with the mining time overridden (stochastic-mining mode draws it
// from the exponential instead of using the quantile).
RoundOutcome compute_round_with_mining_time(
    const std::vector<ClientProfile>& fleet, const SystemConfig& c,
    const ChannelState& ch, const Action& a, double mine_time_s);

}  // namespace bflsim
