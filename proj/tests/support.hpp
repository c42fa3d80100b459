#pragma once

// shared builders for the unit tests: a reference client, default system
// constants, and owning bundles that RoundInputs can point into.

#include <cstdint>
#include <vector>

#include "bflsim/policies.hpp"
#include "bflsim/rng.hpp"
#include "bflsim/sysmodel.hpp"

namespace testkit {

using namespace bflsim;

// desk-like client: 60 Mbit payload, 1-4 GHz, 23-30 dBm, 200 m
inline ClientProfile client(int id, double dataset = 1000.0,
                            double supply = 0.6) {
  ClientProfile p;
  p.id = id;
  p.dataset_size = dataset;
  p.cycles_per_sample = 2e3;
  p.switch_cap = 1e-28;
  p.model_bits = 60e6;
  p.distance_m = 200.0;
  p.f_min_hz = 1e9;
  p.f_max_hz = 4e9;
  p.p_min_w = 0.19952623149688797;
  p.p_max_w = 1.0;
  p.energy_supply_w = supply;
  return p;
}

inline SystemConfig system_defaults() { return SystemConfig{}; }

// owning bundle; inputs() wires the pointer fields
struct Instance {
  std::vector<ClientProfile> fleet;
  SystemConfig cfg;
  ChannelState channel;
  Array backlog;
  double v = 5.0;

  RoundInputs inputs() const {
    RoundInputs in;
    in.fleet = &fleet;
    in.cfg = &cfg;
    in.channel = channel;
    in.backlog = backlog;
    in.v_weight = v;
    return in;
  }
};

// varied but feasible: random payloads, budgets, queue depths and fading
inline Instance random_instance(int n, std::uint64_t seed, double v,
                                double z_max) {
  Instance io;
  Rng rng(seed);
  io.cfg = system_defaults();
  io.backlog = Array(n);
  for (int i = 0; i < n; ++i) {
    ClientProfile p = client(i, 500.0 + 4000.0 * rng.uniform01(),
                             0.1 + rng.uniform01());
    p.model_bits = 1e6 * (1.0 + 99.0 * rng.uniform01());
    io.fleet.push_back(p);
    io.backlog[i] = rng.bernoulli(0.25) ? 0.0 : z_max * rng.uniform01();
  }
  io.channel = sample_channel(rng, io.fleet, io.cfg);
  io.v = v;
  return io;
}

// any feasible action for the bundle's fleet
inline Action random_action(const Instance& io, Rng& rng,
                            double schedule_p = 0.7) {
  const int n = static_cast<int>(io.fleet.size());
  Action a;
  a.schedule = BoolArray(n);
  a.train_freq_hz = Array(n);
  a.tx_power_w = Array(n);
  a.mine_freq_hz = Array(n);
  for (int i = 0; i < n; ++i) {
    const auto& p = io.fleet[i];
    a.schedule[i] = rng.bernoulli(schedule_p) ? 1 : 0;
    a.train_freq_hz[i] = rng.uniform(p.f_min_hz, p.f_max_hz);
    a.tx_power_w[i] = rng.uniform(p.p_min_w, p.p_max_w);
    a.mine_freq_hz[i] = rng.uniform(p.f_min_hz, p.f_max_hz);
  }
  return a;
}

}  // namespace testkit
