#pragma once

#include <stdexcept>
#include <string>

#include "bflsim/solver.hpp"
#include "bflsim/types.hpp"

namespace bflsim {

enum class PolicyKind { dracs, cs, ec, sa };

// Raised when cs/ec is asked to decide without the round's dracs cardinality.
struct MissingHint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

PolicyKind parse_policy(const std::string& name);
std::string policy_name(PolicyKind kind);

// top-k clients by achievable uplink rate at p_max; ties to the lower index.
BoolArray cs_schedule(const std::vector<ClientProfile>& fleet,
                      const SystemConfig& cfg, const ChannelState& channel,
                      int count);

// bottom-k clients by running time-average energy draw sum E / sum tau,
// taken as 0 before any time has elapsed; ties to the lower index.
BoolArray ec_schedule(const Array& energy_sum_j, double time_sum_s, int count);

BoolArray sa_schedule(int n);

// One round's decision. dracs solves the round outright; baselines freeze
// their schedule and reuse the continuous stages against the same queues.
// count_hint is the dracs schedule size this round (cs/ec only; < 0 = absent).
// energy_sum/time_sum are the run-so-far totals ec ranks on.
SolveReport decide(PolicyKind kind, const RoundInputs& in,
                   std::uint64_t restart_seed, const Array& energy_sum_j,
                   double time_sum_s, int count_hint = -1);

}  // namespace bflsim
