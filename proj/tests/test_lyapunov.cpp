#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>
#include <utility>

#include "bflsim/lyapunov.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bflsim;
using doctest::Approx;

TEST_CASE("queue recursion drains by the supplied power and clamps at zero") {
  // exact arithmetic: 0.5 + 0.75 - 0.25 * 1
  Array z1 = queue_update(Array::Constant(1, 0.5), Array::Constant(1, 0.75),
                          Array::Constant(1, 0.25), 1.0);
  CHECK(z1[0] == 1.0);

  Array z2 = queue_update(Array::Constant(1, 0.5), Array::Constant(1, 0.8),
                          Array::Constant(1, 0.4), 1.0);
  CHECK(z2[0] == Approx(0.9).epsilon(1e-15));

  // deficit never goes negative
  Array z3 = queue_update(Array::Constant(1, 0.1), Array::Constant(1, 0.0),
                          Array::Constant(1, 1.0), 1.0);
  CHECK(z3[0] == 0.0);

  // drain scales with the round time
  Array z4 = queue_update(Array::Constant(1, 2.0), Array::Constant(1, 1.0),
                          Array::Constant(1, 0.5), 4.0);
  CHECK(z4[0] == 1.0);

  // elementwise over the fleet
  Array z(2), e(2), s(2);
  z << 0.0, 10.0;
  e << 5.0, 0.0;
  s << 1.0, 1.0;
  Array z5 = queue_update(z, e, s, 2.0);
  CHECK(z5[0] == 3.0);
  CHECK(z5[1] == 8.0);
}

TEST_CASE("drift-penalty ratio matches the hand-computed quotient") {
  RoundOutcome out;
  out.latency_s = 2.0;
  out.data_size = 100.0;
  out.energy_j = Array(2);
  out.energy_j << 1.0, 2.0;
  Array z(2);
  z << 3.0, 4.0;
  // (-5 * 100 + 3 * 1 + 4 * 2) / 2
  CHECK(drift_penalty_ratio(out, z, 5.0) == -244.5);

  out.latency_s = 0.0;
  CHECK_THROWS_AS(drift_penalty_ratio(out, z, 5.0), std::domain_error);
  out.latency_s = -1.0;
  CHECK_THROWS_AS(drift_penalty_ratio(out, z, 5.0), std::domain_error);
}

TEST_CASE("dinkelbach numerator is the ratio-minus-eta line times round time") {
  RoundOutcome out;
  out.latency_s = 2.0;
  out.data_size = 100.0;
  out.energy_j = Array(2);
  out.energy_j << 1.0, 2.0;
  Array z(2);
  z << 3.0, 4.0;
  CHECK(u_value(out, z, 5.0, 0.0) == -489.0);
  CHECK(u_value(out, z, 5.0, -244.5) == 0.0);
  CHECK(u_value(out, z, 5.0, -300.0) == Approx(111.0).epsilon(1e-15));

  // identity against realized rounds at random eta
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    testkit::Instance io = testkit::random_instance(3, seed, 5.0, 40.0);
    Rng rng(seed ^ 0xabcdULL);
    Action a = testkit::random_action(io, rng);
    RoundOutcome r = compute_round(io.fleet, io.cfg, io.channel, a);
    const double ratio = drift_penalty_ratio(r, io.backlog, io.v);
    for (int k = 0; k < 5; ++k) {
      const double eta = 2000.0 * (rng.uniform01() - 0.5);
      const double want = (ratio - eta) * r.latency_s;
      CHECK(u_value(r, io.backlog, io.v, eta) ==
            Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("profile-level ratio overload agrees with the outcome form") {
  for (std::uint64_t seed = 11; seed <= 16; ++seed) {
    testkit::Instance io = testkit::random_instance(2, seed, 7.0, 30.0);
    Rng rng(seed);
    Action a = testkit::random_action(io, rng);
    const double via_outcome = drift_penalty_ratio(
        compute_round(io.fleet, io.cfg, io.channel, a), io.backlog, io.v);
    const double direct = drift_penalty_ratio(io.fleet, io.cfg, io.channel, a,
                                              io.backlog, io.v);
    CHECK(direct == via_outcome);
  }
}

TEST_CASE("quadratic drift constant recomposes from public phase functions") {
  std::vector<ClientProfile> fleet{testkit::client(0, 1000.0, 0.6),
                                   testkit::client(1, 4000.0, 0.2)};
  fleet[1].model_bits = 90e6;
  SystemConfig cfg = testkit::system_defaults();

  Array fmin(2);
  fmin << fleet[0].f_min_hz, fleet[1].f_min_hz;
  const double mine_worst = mining_time(cfg, fmin);
  const double rho_bar = clamped_exp_mean(cfg.rho_min, cfg.rho_max);

  double want = 0.0;
  for (const auto& p : fleet) {
    const double gain_bar = channel_gain(p, cfg, rho_bar);
    const double e_worst =
        training_energy(p, cfg, true, p.f_max_hz) +
        p.p_max_w * uplink_time(p, cfg, true, p.p_min_w, gain_bar) +
        mining_energy(p, p.f_max_hz, mine_worst);
    const double tau_worst = training_time(p, cfg, true, p.f_min_hz) +
                             uplink_time(p, cfg, true, p.p_min_w, gain_bar) +
                             mine_worst;
    want += 0.5 * (e_worst * e_worst + p.energy_supply_w * p.energy_supply_w *
                                           tau_worst * tau_worst);
  }
  CHECK(compute_h(fleet, cfg) == Approx(want).epsilon(1e-12));
}

TEST_CASE("all-scheduled latency bounds enclose realized rounds") {
  std::vector<ClientProfile> fleet{testkit::client(0, 1000.0, 0.6),
                                   testkit::client(1, 4000.0, 0.2)};
  fleet[1].model_bits = 90e6;
  SystemConfig cfg = testkit::system_defaults();

  // closed form rebuilt from the scalar phase functions
  double best = 0.0;
  double worst = 0.0;
  for (const auto& p : fleet) {
    const double t_best =
        training_time(p, cfg, true, p.f_max_hz) +
        uplink_time(p, cfg, true, p.p_max_w, channel_gain(p, cfg, cfg.rho_max));
    const double t_worst =
        training_time(p, cfg, true, p.f_min_hz) +
        uplink_time(p, cfg, true, p.p_min_w, channel_gain(p, cfg, cfg.rho_min));
    best = std::max(best, t_best);
    worst = std::max(worst, t_worst);
  }
  Array fmin(2), fmax(2);
  fmin << fleet[0].f_min_hz, fleet[1].f_min_hz;
  fmax << fleet[0].f_max_hz, fleet[1].f_max_hz;
  auto [lo, hi] = tau_bounds(fleet, cfg);
  CHECK(lo == Approx(best + mining_time(cfg, fmax)).epsilon(1e-15));
  CHECK(hi == Approx(worst + mining_time(cfg, fmin)).epsilon(1e-15));
  REQUIRE(lo < hi);

  // every fully scheduled round lands inside
  for (std::uint64_t seed = 21; seed <= 40; ++seed) {
    testkit::Instance io = testkit::random_instance(3, seed, 5.0, 20.0);
    auto [b_lo, b_hi] = tau_bounds(io.fleet, io.cfg);
    Rng rng(seed);
    Action a = testkit::random_action(io, rng);
    a.schedule.setConstant(1);
    RoundOutcome out = compute_round(io.fleet, io.cfg, io.channel, a);
    CHECK(out.latency_s >= b_lo);
    CHECK(out.latency_s <= b_hi);
  }
}

TEST_CASE("latency floor undercuts every feasible round") {
  for (std::uint64_t seed = 41; seed <= 55; ++seed) {
    testkit::Instance io = testkit::random_instance(2, seed, 5.0, 20.0);
    const double floor_s = latency_floor(io.fleet, io.cfg);
    Rng rng(seed);
    for (int k = 0; k < 6; ++k) {
      Action a = testkit::random_action(io, rng, 0.4);
      RoundOutcome out = compute_round(io.fleet, io.cfg, io.channel, a);
      CHECK(out.latency_s >= floor_s);
    }
    // attained exactly by an empty schedule mining flat out
    Action a = testkit::random_action(io, rng);
    a.schedule.setConstant(0);
    for (int i = 0; i < 2; ++i) a.mine_freq_hz[i] = io.fleet[i].f_max_hz;
    RoundOutcome out = compute_round(io.fleet, io.cfg, io.channel, a);
    CHECK(out.latency_s == Approx(floor_s).epsilon(1e-15));
  }
}

TEST_CASE("ratio enclosure brackets random feasible actions") {
  int checked = 0;
  for (std::uint64_t seed = 61; seed <= 72; ++seed) {
    const int n = 1 + static_cast<int>(seed % 4);
    const double v = seed % 3 == 0 ? 0.01 : 50.0;
    const double z_max = seed % 2 == 0 ? 500.0 : 5.0;
    testkit::Instance io = testkit::random_instance(n, seed, v, z_max);
    auto [lo, hi] = delta_bounds(io.backlog, io.fleet, io.cfg, io.v);
    REQUIRE(lo <= hi);
    Rng rng(seed * 31 + 7);
    for (int k = 0; k < 25; ++k) {
      Action a = testkit::random_action(io, rng, 0.6);
      const double d = drift_penalty_ratio(io.fleet, io.cfg, io.channel, a,
                                           io.backlog, io.v);
      CHECK(d >= lo);
      CHECK(d <= hi);
      ++checked;
    }
  }
  CHECK(checked == 300);

  // idle queues pin the upper end at zero
  testkit::Instance io = testkit::random_instance(3, 99, 5.0, 10.0);
  io.backlog.setZero();
  auto [lo, hi] = delta_bounds(io.backlog, io.fleet, io.cfg, io.v);
  CHECK(hi == 0.0);
  CHECK(lo < 0.0);
}

TEST_CASE("bound bundle fields match their standalone recomputations") {
  testkit::Instance io = testkit::random_instance(3, 5, 12.0, 80.0);
  io.cfg.approx_slack = 2.5;
  TheoremBounds b = make_theorem_bounds(io.fleet, io.cfg, io.backlog, io.v);

  CHECK(b.h_const == compute_h(io.fleet, io.cfg));
  auto [t_lo, t_hi] = tau_bounds(io.fleet, io.cfg);
  CHECK(b.tau_min == t_lo);
  CHECK(b.tau_max == t_hi);
  CHECK(b.latency_floor == latency_floor(io.fleet, io.cfg));
  auto [d_lo, d_hi] = delta_bounds(io.backlog, io.fleet, io.cfg, io.v);
  CHECK(b.delta_min == d_lo);
  CHECK(b.delta_max == d_hi);

  double sum_data = 0.0;
  double min_data = io.fleet[0].dataset_size;
  for (const auto& p : io.fleet) {
    sum_data += p.dataset_size;
    min_data = std::min(min_data, p.dataset_size);
  }
  CHECK(b.phi_opt_proxy == Approx(sum_data / t_lo).epsilon(1e-15));
  CHECK(b.g1 == Approx(2.0 * (b.h_const + t_hi)).epsilon(1e-15));
  CHECK(b.g2 ==
        Approx(2.0 * (t_hi * b.phi_opt_proxy - min_data)).epsilon(1e-15));
  CHECK(b.g1_alt == Approx(2.0 * (b.h_const + t_hi * 2.5)).epsilon(1e-15));
  CHECK(b.g2_alt ==
        Approx(2.0 * (t_hi * b.phi_opt_proxy - sum_data)).epsilon(1e-15));
  CHECK(b.approx_slack == 2.5);
}

TEST_CASE("gap and excess bounds follow the closed forms and scale with v") {
  testkit::Instance io = testkit::random_instance(3, 77, 5.0, 50.0);
  TheoremBounds b = make_theorem_bounds(io.fleet, io.cfg, io.backlog, io.v);
  REQUIRE(b.g2 > 0.0);
  REQUIRE(b.g2_alt > 0.0);

  const double v = 1000.0;
  const int rounds = 400;
  const double z0sq = 123.5;
  TradeoffBounds r = theorem_gap_bounds(b, v, rounds, z0sq);
  const double t = static_cast<double>(rounds);
  CHECK(r.gap_bound ==
        Approx((b.h_const / b.tau_min + b.approx_slack) / v).epsilon(1e-15));
  CHECK(r.radicand ==
        Approx((b.g1 + v * b.g2) / t + z0sq / (t * t)).epsilon(1e-15));
  CHECK(r.excess_bound ==
        Approx(std::sqrt(r.radicand) / b.tau_min).epsilon(1e-15));
  CHECK(r.radicand_alt ==
        Approx((b.g1_alt - v * b.g2_alt) / t + z0sq / (t * t)).epsilon(1e-15));

  // deviation gap shrinks as 1/v while the queue excess grows
  TradeoffBounds r_lo = theorem_gap_bounds(b, 100.0, rounds, 0.0);
  TradeoffBounds r_mid = theorem_gap_bounds(b, 1e4, rounds, 0.0);
  TradeoffBounds r_hi = theorem_gap_bounds(b, 1e6, rounds, 0.0);
  CHECK(r_lo.gap_bound > r_mid.gap_bound);
  CHECK(r_mid.gap_bound > r_hi.gap_bound);
  CHECK(r_lo.gap_bound == Approx(1e4 * r_hi.gap_bound).epsilon(1e-12));
  CHECK(r_lo.excess_bound < r_mid.excess_bound);
  CHECK(r_mid.excess_bound < r_hi.excess_bound);

  // longer horizons wash out the start-up excess
  TradeoffBounds r_short = theorem_gap_bounds(b, v, 100, 0.0);
  TradeoffBounds r_long = theorem_gap_bounds(b, v, 10000, 0.0);
  CHECK(r_long.excess_bound < r_short.excess_bound);

  // the slack-weighted radicand can go negative and reports no bound
  TradeoffBounds r_neg = theorem_gap_bounds(b, 1e9, 100, 0.0);
  CHECK(r_neg.radicand_alt < 0.0);
  CHECK(std::isnan(r_neg.excess_bound_alt));

  TradeoffBounds r_pos = theorem_gap_bounds(b, 1e-6, 100, 0.0);
  CHECK(r_pos.radicand_alt > 0.0);
  CHECK(r_pos.excess_bound_alt ==
        Approx(std::sqrt(r_pos.radicand_alt) / b.tau_min).epsilon(1e-15));
}

TEST_CASE("degenerate inputs are rejected") {
  Array z = Array::Constant(2, 1.0);
  Array e = Array::Constant(1, 1.0);
  Array s = Array::Constant(2, 1.0);
  CHECK_THROWS_AS(queue_update(z, e, s, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(queue_update(z, Array::Constant(2, 1.0), e, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      queue_update(z, Array::Constant(2, 1.0), s, -0.5),
      std::invalid_argument);

  std::vector<ClientProfile> fleet{testkit::client(0), testkit::client(1)};
  SystemConfig cfg = testkit::system_defaults();
  CHECK_THROWS_AS(delta_bounds(Array::Constant(1, 0.0), fleet, cfg, 5.0),
                  std::invalid_argument);
  Array neg(2);
  neg << -1.0, 0.0;
  CHECK_THROWS_AS(delta_bounds(neg, fleet, cfg, 5.0), std::invalid_argument);

  TheoremBounds b =
      make_theorem_bounds(fleet, cfg, Array::Constant(2, 1.0), 5.0);
  CHECK_THROWS_AS(theorem_gap_bounds(b, 5.0, 0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(theorem_gap_bounds(b, 0.0, 10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(theorem_gap_bounds(b, -1.0, 10, 0.0), std::invalid_argument);
}
