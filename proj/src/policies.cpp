#include "bflsim/policies.hpp"

#include <algorithm>
#include <numeric>

#include "bflsim/sysmodel.hpp"

namespace bflsim {

namespace {

// stable top-k / bottom-k: order by key, ties by index
BoolArray pick_k(const Array& key, int count, bool largest) {
  const int n = static_cast<int>(key.size());
  if (count < 0 || count > n)
    throw std::invalid_argument("schedule count out of range");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return largest ? key[a] > key[b] : key[a] < key[b];
  });
  BoolArray bits = BoolArray::Zero(n);
  for (int i = 0; i < count; ++i) bits[order[i]] = 1;
  return bits;
}

}  // namespace

PolicyKind parse_policy(const std::string& name) {
  if (name == "dracs") return PolicyKind::dracs;
  if (name == "cs") return PolicyKind::cs;
  if (name == "ec") return PolicyKind::ec;
  if (name == "sa") return PolicyKind::sa;
  throw std::invalid_argument("unknown policy '" + name +
                              "' (expected dracs, cs, ec or sa)");
}

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::dracs: return "dracs";
    case PolicyKind::cs: return "cs";
    case PolicyKind::ec: return "ec";
    case PolicyKind::sa: return "sa";
  }
  throw std::invalid_argument("unknown policy kind");
}

BoolArray cs_schedule(const std::vector<ClientProfile>& fleet,
                      const SystemConfig& cfg, const ChannelState& channel,
                      int count) {
  const int n = static_cast<int>(fleet.size());
  Array rate(n);
  for (int i = 0; i < n; ++i)
    rate[i] = uplink_rate(cfg, fleet[i].p_max_w, channel.gain[i]);
  return pick_k(rate, count, true);
}

BoolArray ec_schedule(const Array& energy_sum_j, double time_sum_s,
                      int count) {
  Array avg = time_sum_s > 0.0 ? Array(energy_sum_j / time_sum_s)
                               : Array(Array::Zero(energy_sum_j.size()));
  return pick_k(avg, count, false);
}

BoolArray sa_schedule(int n) { return BoolArray::Constant(n, 1); }

SolveReport decide(PolicyKind kind, const RoundInputs& in,
                   std::uint64_t restart_seed, const Array& energy_sum_j,
                   double time_sum_s, int count_hint) {
  if (kind == PolicyKind::dracs) return solve_round(in, restart_seed);

  const int n = static_cast<int>(in.fleet->size());
  BoolArray fixed;
  switch (kind) {
    case PolicyKind::cs:
      if (count_hint < 0) throw MissingHint("cs needs the dracs count hint");
      fixed = cs_schedule(*in.fleet, *in.cfg, in.channel, count_hint);
      break;
    case PolicyKind::ec:
      if (count_hint < 0) throw MissingHint("ec needs the dracs count hint");
      fixed = ec_schedule(energy_sum_j, time_sum_s, count_hint);
      break;
    case PolicyKind::sa:
      fixed = sa_schedule(n);
      break;
    default:
      throw std::invalid_argument("unknown policy kind");
  }
  return solve_round(in, restart_seed, &fixed);
}

}  // namespace bflsim
