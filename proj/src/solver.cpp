#include "bflsim/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "bflsim/rng.hpp"
#include "bflsim/sysmodel.hpp"

namespace bflsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-round precomputed quantities; all stage solvers work off this.
struct Ctx {
  const std::vector<ClientProfile>& fleet;
  const SystemConfig& cfg;
  const ChannelState& ch;
  const Array& z;
  double v;
  int n;
  double neg_a;    // -alpha ln(1-p0) > 0
  double bn0;      // B * N0
  double sum_fmin = 0.0;
  double sum_fmax = 0.0;
  Array ckd;       // c K D, cycles per round
  Array vckd;      // v c K D
  Array zv;        // Z v

  explicit Ctx(const RoundInputs& in)
      : fleet(*in.fleet),
        cfg(*in.cfg),
        ch(in.channel),
        z(in.backlog),
        v(in.v_weight),
        n(static_cast<int>(in.fleet->size())),
        neg_a(-cfg.mining_difficulty * std::log1p(-cfg.mining_confidence)),
        bn0(cfg.bandwidth_hz * cfg.noise_psd_w_hz) {
    ckd = Array(n);
    vckd = Array(n);
    zv = Array(n);
    for (int i = 0; i < n; ++i) {
      const auto& p = fleet[i];
      ckd[i] = p.cycles_per_sample * cfg.local_epochs * p.dataset_size;
      vckd[i] = p.switch_cap * ckd[i];
      zv[i] = z[i] * p.switch_cap;
      sum_fmin += p.f_min_hz;
      sum_fmax += p.f_max_hz;
    }
  }

  double rate(int i, double p_w) const {
    return cfg.bandwidth_hz * log2_1p(p_w * ch.gain[i] / bn0);
  }
  double up_time(int i, double p_w) const {
    return fleet[i].model_bits / rate(i, p_w);
  }
  double up_energy(int i, double p_w) const { return p_w * up_time(i, p_w); }
  double tr_time(int i, double f) const { return ckd[i] / f; }
  double tr_energy(int i, double f) const { return vckd[i] * f * f; }
  double time(int i, double f, double p_w) const {
    return tr_time(i, f) + up_time(i, p_w);
  }
  // -V D_n + Z_n (train + uplink energy): the per-client schedule score
  double score(int i, double f, double p_w) const {
    return -v * fleet[i].dataset_size +
           z[i] * (tr_energy(i, f) + up_energy(i, p_w));
  }
};

void check_inputs(const RoundInputs& in) {
  if (!in.fleet || !in.cfg)
    throw std::invalid_argument("round inputs missing fleet or config");
  validate(*in.fleet, *in.cfg);
  const auto n = static_cast<Eigen::Index>(in.fleet->size());
  if (in.channel.gain.size() != n || in.backlog.size() != n)
    throw std::invalid_argument("round inputs: array sizes != fleet size");
  if ((in.channel.gain <= 0.0).any())
    throw std::domain_error("round inputs: channel gains must be > 0");
  if ((in.backlog < 0.0).any())
    throw std::invalid_argument("round inputs: negative queue backlog");
  if (in.v_weight < 0.0)
    throw std::invalid_argument("round inputs: V must be >= 0");
}

double g_value(const Ctx& c, const BoolArray& s, const Array& f,
               const Array& p, double eta) {
  double acc = 0.0;
  double straggler = 0.0;
  for (int i = 0; i < c.n; ++i) {
    if (!s[i]) continue;
    acc += c.score(i, f[i], p[i]);
    straggler = std::max(straggler, c.time(i, f[i], p[i]));
  }
  return acc - eta * straggler;
}

// ---- mining stage ---------------------------------------------------------

// fractional objective: neg_a * (sum Z v f^3 - eta) / sum f
double mining_value(const Ctx& c, const Array& f, double eta) {
  const double cube = (c.zv * f * f * f).sum();
  return c.neg_a * (cube - eta) / f.sum();
}

// argmin of the parametric problem neg_a*(sum zv f^3 - eta) - mu * sum f
Array mining_parametric_argmin(const Ctx& c, double mu) {
  Array f(c.n);
  for (int i = 0; i < c.n; ++i) {
    const auto& p = c.fleet[i];
    if (c.zv[i] > 0.0) {
      if (mu > 0.0) {
        f[i] = std::clamp(std::sqrt(mu / (3.0 * c.neg_a * c.zv[i])),
                          p.f_min_hz, p.f_max_hz);
      } else {
        f[i] = p.f_min_hz;  // cubic term strictly increasing, no stationary
      }
    } else {
      // zero backlog: only -mu f remains; ties (mu = 0) go to f_max
      f[i] = mu >= 0.0 ? p.f_max_hz : p.f_min_hz;
    }
  }
  return f;
}

MiningSolution mining_solve(const Ctx& c, double eta, double tol, int cap) {
  // whole-numerator enclosure of the fractional optimum; the single-sign
  // collapse keeps the enclosure tight on either sign
  const double cube_min =
      [&] {
        double s = 0.0;
        for (int i = 0; i < c.n; ++i)
          s += c.zv[i] * std::pow(c.fleet[i].f_min_hz, 3);
        return s;
      }();
  const double cube_max =
      [&] {
        double s = 0.0;
        for (int i = 0; i < c.n; ++i)
          s += c.zv[i] * std::pow(c.fleet[i].f_max_hz, 3);
        return s;
      }();
  const double num_min = c.neg_a * (cube_min - eta);
  const double num_max = c.neg_a * (cube_max - eta);
  const double h_lo = num_min >= 0.0 ? num_min / c.sum_fmax
                                     : num_min / c.sum_fmin;
  const double h_hi = num_max >= 0.0 ? num_max / c.sum_fmin
                                     : num_max / c.sum_fmax;

  double mu = 0.5 * (h_lo + h_hi);
  Array f;
  bool accepted = false;
  int it = 0;
  while (it < cap) {
    ++it;
    f = mining_parametric_argmin(c, mu);
    const double cube = (c.zv * f * f * f).sum();
    const double sum_f = f.sum();
    const double numer = c.neg_a * (cube - eta);
    const double residual = numer - mu * sum_f;
    // the residual lives on the numerator scale (value times sum_f), so the
    // acceptance has to as well; the noise term covers cancellation between
    // the two like-sized products near the fixed point
    const double noise = 1e-12 * (std::abs(numer) + std::abs(mu) * sum_f);
    if (std::abs(residual) <= std::max(tol * sum_f, noise)) {
      accepted = true;
      break;
    }
    const double mu_next = numer / sum_f;
    if (std::abs(mu_next - mu) <= 1e-13 * std::max(1.0, std::abs(mu))) {
      mu = mu_next;  // fixed point at float resolution
      accepted = true;
      break;
    }
    mu = mu_next;
  }
  if (!accepted)
    throw NonConvergence("mining Dinkelbach exhausted its iteration cap");

  // zero-backlog clients are decided by sign(mu); check the flipped extreme
  // against the fractional objective and keep the better block
  bool any_zero = false;
  for (int i = 0; i < c.n; ++i)
    if (c.zv[i] == 0.0) any_zero = true;
  if (any_zero) {
    Array flipped = f;
    for (int i = 0; i < c.n; ++i) {
      if (c.zv[i] != 0.0) continue;
      const auto& p = c.fleet[i];
      flipped[i] = f[i] == p.f_max_hz ? p.f_min_hz : p.f_max_hz;
    }
    if (mining_value(c, flipped, eta) < mining_value(c, f, eta)) f = flipped;
  }
  return {f, mining_value(c, f, eta), it};
}

// ---- schedule stage -------------------------------------------------------

BoolArray scheduling_solve(const Ctx& c, const Array& f, const Array& p,
                           double eta) {
  // empty case first: value 0; client cases improve on it only strictly,
  // which keeps ties at the lowest-index case
  double best_g = 0.0;
  BoolArray best = BoolArray::Zero(c.n);
  for (int j = 0; j < c.n; ++j) {
    const double t_j = c.time(j, f[j], p[j]);
    BoolArray bits = BoolArray::Zero(c.n);
    bits[j] = 1;
    double g = c.score(j, f[j], p[j]);
    for (int k = 0; k < c.n; ++k) {
      if (k == j || c.time(k, f[k], p[k]) > t_j) continue;
      const double sc = c.score(k, f[k], p[k]);
      if (sc < 0.0) {
        g += sc;
        bits[k] = 1;
      }
    }
    g -= eta * t_j;
    if (g < best_g) {
      best_g = g;
      best = bits;
    }
  }
  return best;
}

// ---- train-frequency stage ------------------------------------------------

// stationary point of z v ckd f^2 - eta ckd / f, i.e. f^3 = -eta / (2 z v)
double train_stationary(const Ctx& c, int r, double eta) {
  if (eta >= 0.0) return 0.0;  // no interior stationary point, callers clamp
  const double zv2 = 2.0 * c.z[r] * c.fleet[r].switch_cap;
  if (zv2 <= 0.0) return kInf;  // free energy: push to the upper clamp
  return std::cbrt(-eta / zv2);
}

Array train_solve(const Ctx& c, const BoolArray& s, const Array& p,
                  const Array& incumbent, double eta) {
  std::vector<int> sched;
  for (int i = 0; i < c.n; ++i)
    if (s[i]) sched.push_back(i);

  Array base(c.n);
  for (int i = 0; i < c.n; ++i) base[i] = c.fleet[i].f_min_hz;
  if (sched.empty()) return base;

  double best_g = g_value(c, s, base, p, eta);  // all-f_min candidate
  Array best = base;

  auto consider = [&](int r, double f_r) {
    Array f = base;
    f[r] = std::clamp(f_r, c.fleet[r].f_min_hz, c.fleet[r].f_max_hz);
    const double g = g_value(c, s, f, p, eta);
    if (g < best_g) {
      best_g = g;
      best = f;
    }
  };

  for (int r : sched) {
    const auto& pr = c.fleet[r];
    // fastest the others can be while r stays the straggler: others at f_min
    double m_r = 0.0;
    for (int k : sched)
      if (k != r) m_r = std::max(m_r, c.time(k, c.fleet[k].f_min_hz, p[k]));
    const double u_r = c.up_time(r, p[r]);
    const double stat = train_stationary(c, r, eta);

    // lower-clamped reading: bound the case interval below at the frequency
    // equalizing r's time with m_r
    double lo1 = pr.f_min_hz;
    if (m_r > u_r) lo1 = std::max(lo1, c.ckd[r] / (m_r - u_r));
    lo1 = std::min(lo1, pr.f_max_hz);
    consider(r, eta >= 0.0 ? lo1 : std::clamp(stat, lo1, pr.f_max_hz));

    // hypothesis-consistent reading: r must not undercut m_r, so the same
    // equalizer clamps from above
    double hi2 = pr.f_max_hz;
    if (m_r > u_r) hi2 = std::min(hi2, c.ckd[r] / (m_r - u_r));
    if (hi2 >= pr.f_min_hz) {
      consider(r, eta >= 0.0 ? pr.f_min_hz
                             : std::clamp(stat, pr.f_min_hz, hi2));
    }
  }

  // incumbent keeps the BCD pass monotone
  const double g_inc = g_value(c, s, incumbent, p, eta);
  if (g_inc < best_g) return incumbent;
  return best;
}

// ---- transmit-power stage -------------------------------------------------

template <class F>
double golden_min(F&& fn, double a, double b, double rel, int cap,
                  int* iters) {
  if (b <= a) return a;
  const double gr = 0.6180339887498948482;
  const double width0 = b - a;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = fn(x1);
  double f2 = fn(x2);
  int it = 0;
  while ((b - a) > rel * width0 && it < cap) {
    ++it;
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = fn(x2);
    }
  }
  if (iters) *iters = std::max(*iters, it);
  double xs[4] = {a, x1, x2, b};
  double xbest = xs[0];
  double fbest = fn(xs[0]);
  for (double x : {xs[1], xs[2], xs[3]}) {
    const double fx = fn(x);
    if (fx < fbest) {
      fbest = fx;
      xbest = x;
    }
  }
  return xbest;
}

// power whose uplink time equals `target_s`, unclamped
double power_for_uplink_time(const Ctx& c, int i, double target_s) {
  const double bits_per_hz =
      c.fleet[i].model_bits / (c.cfg.bandwidth_hz * target_s);
  return (std::exp2(bits_per_hz) - 1.0) * c.bn0 / c.ch.gain[i];
}

Array power_solve(const Ctx& c, const BoolArray& s, const Array& f,
                  const Array& incumbent, double eta, int* golden_iters) {
  std::vector<int> sched;
  for (int i = 0; i < c.n; ++i)
    if (s[i]) sched.push_back(i);

  Array base(c.n);
  for (int i = 0; i < c.n; ++i) base[i] = c.fleet[i].p_min_w;
  if (sched.empty()) return base;

  auto value_of = [&](const Array& p) { return g_value(c, s, f, p, eta); };
  double best_g = value_of(incumbent);
  Array best = incumbent;

  auto try_case = [&](int r, double p_r) {
    Array p = base;
    p[r] = std::clamp(p_r, c.fleet[r].p_min_w, c.fleet[r].p_max_w);
    const double t_r = c.time(r, f[r], p[r]);
    // non-stragglers take the cheapest power meeting the straggler's time;
    // uplink energy is increasing in P, so the lower feasible end is optimal
    // (and the unique choice when Z = 0 under the energy tie-break)
    for (int k : sched) {
      if (k == r) continue;
      const auto& pk = c.fleet[k];
      const double slack = t_r - c.tr_time(k, f[k]);
      if (slack <= 0.0) return;  // infeasible case: k cannot fit at any power
      const double req = power_for_uplink_time(c, k, slack);
      if (req > pk.p_max_w * (1.0 + 1e-12)) return;  // infeasible case
      p[k] = std::clamp(req, pk.p_min_w, pk.p_max_w);
    }
    const double g = value_of(p);
    if (g < best_g) {
      best_g = g;
      best = p;
    }
  };

  const double rel = c.cfg.solver.golden_rel;
  const int cap = c.cfg.solver.l3_max;
  for (int r : sched) {
    const auto& pr = c.fleet[r];
    double m_r = 0.0;
    for (int k : sched)
      if (k != r) m_r = std::max(m_r, c.time(k, f[k], c.fleet[k].p_min_w));
    const double tr_r = c.tr_time(r, f[r]);

    // straggler's own 1-D objective: z P gamma / rate - eta * (tr + up)
    auto phi = [&](double p_w) {
      return c.z[r] * c.up_energy(r, p_w) - eta * (tr_r + c.up_time(r, p_w));
    };

    // consistent reading: r's time stays >= m_r, so power is capped above
    double p_hi = pr.p_max_w;
    double p_eq = pr.p_max_w;
    if (m_r > tr_r) {
      p_eq = power_for_uplink_time(c, r, m_r - tr_r);
      p_hi = std::min(pr.p_max_w, p_eq);
    }
    if (p_hi >= pr.p_min_w) {
      try_case(r, golden_min(phi, pr.p_min_w, p_hi, rel, cap, golden_iters));
    }
    // lower-clamped reading: bound from below at the equalizing power
    const double p_lo = std::clamp(p_eq, pr.p_min_w, pr.p_max_w);
    try_case(r, golden_min(phi, p_lo, pr.p_max_w, rel, cap, golden_iters));
  }
  return best;
}

// ---- BCD ------------------------------------------------------------------

struct Start {
  BoolArray schedule;
  Array train_freq;
  Array tx_power;
};

std::vector<Start> make_starts(const Ctx& c, const SolverOptions& opt,
                               std::uint64_t seed, const BoolArray* fixed) {
  std::vector<Start> starts;
  Start canonical;
  canonical.schedule =
      fixed ? *fixed : BoolArray::Constant(c.n, 1);
  canonical.train_freq = Array(c.n);
  canonical.tx_power = Array(c.n);
  for (int i = 0; i < c.n; ++i) {
    canonical.train_freq[i] = c.fleet[i].f_max_hz;
    canonical.tx_power[i] = c.fleet[i].p_max_w;
  }
  starts.push_back(canonical);

  Rng rng(mix_seed(seed, 0x62636473ULL));  // "bcds"
  for (int r = 1; r < opt.bcd_restarts; ++r) {
    Start st;
    st.schedule = BoolArray(c.n);
    st.train_freq = Array(c.n);
    st.tx_power = Array(c.n);
    for (int i = 0; i < c.n; ++i) {
      st.schedule[i] = rng.bernoulli(0.5) ? 1 : 0;
      st.train_freq[i] = rng.uniform(c.fleet[i].f_min_hz, c.fleet[i].f_max_hz);
      st.tx_power[i] = rng.uniform(c.fleet[i].p_min_w, c.fleet[i].p_max_w);
    }
    if (fixed) st.schedule = *fixed;
    starts.push_back(st);
  }
  return starts;
}

BcdOutcome bcd_from_starts(const Ctx& c, double eta, double tol,
                           const std::vector<Start>& starts,
                           const BoolArray* fixed, int* golden_iters) {
  BcdOutcome out;
  double best_g = kInf;
  const double mono_slack = 1e-9;

  // unscheduled coordinates never enter g; pinning them to the low ends
  // keeps every iterate a genuine fixed-point candidate for all stages
  auto canonical = [&](const BoolArray& s, Array& f, Array& p) {
    for (int i = 0; i < c.n; ++i) {
      if (s[i]) continue;
      f[i] = c.fleet[i].f_min_hz;
      p[i] = c.fleet[i].p_min_w;
    }
  };

  for (const auto& st : starts) {
    BoolArray s = st.schedule;
    Array f = st.train_freq;
    Array p = st.tx_power;
    canonical(s, f, p);
    double g = g_value(c, s, f, p, eta);
    out.trace.push_back(g);

    for (int pass = 0;; ++pass) {
      if (pass >= c.cfg.solver.l2_max)
        throw NonConvergence("BCD exhausted its pass cap");
      const double g_pass = g;
      if (!fixed) {
        s = scheduling_solve(c, f, p, eta);
        canonical(s, f, p);
        const double g1 = g_value(c, s, f, p, eta);
        if (g1 > g + mono_slack * std::max(1.0, std::abs(g)))
          ++out.monotone_violations;
        g = g1;
        out.trace.push_back(g);
      }
      f = train_solve(c, s, p, f, eta);
      const double g2 = g_value(c, s, f, p, eta);
      if (g2 > g + mono_slack * std::max(1.0, std::abs(g)))
        ++out.monotone_violations;
      g = g2;
      out.trace.push_back(g);

      p = power_solve(c, s, f, p, eta, golden_iters);
      const double g3 = g_value(c, s, f, p, eta);
      if (g3 > g + mono_slack * std::max(1.0, std::abs(g)))
        ++out.monotone_violations;
      g = g3;
      out.trace.push_back(g);

      ++out.passes;
      if (g_pass - g < tol) break;
    }
    if (g < best_g) {
      best_g = g;
      out.schedule = s;
      out.train_freq = f;
      out.tx_power = p;
      out.value = g;
    }
  }
  return out;
}

Action assemble_action(const Ctx& c, const BcdOutcome& bcd,
                       const Array& mine_freq) {
  Action a;
  a.schedule = bcd.schedule;
  a.train_freq_hz = bcd.train_freq;
  a.tx_power_w = bcd.tx_power;
  a.mine_freq_hz = mine_freq;
  for (int i = 0; i < c.n; ++i) {
    if (!a.schedule[i]) {  // canonical values for the unscheduled
      a.train_freq_hz[i] = c.fleet[i].f_min_hz;
      a.tx_power_w[i] = c.fleet[i].p_min_w;
    }
  }
  return a;
}

}  // namespace

double stage_value(const RoundInputs& in, const BoolArray& schedule,
                   const Array& train_freq, const Array& tx_power,
                   double eta) {
  check_inputs(in);
  Ctx c(in);
  return g_value(c, schedule, train_freq, tx_power, eta);
}

MiningSolution solve_mining_freq(const RoundInputs& in, double eta,
                                 double xi_abs) {
  check_inputs(in);
  Ctx c(in);
  return mining_solve(c, eta, xi_abs, in.cfg->solver.l3_max);
}

BoolArray solve_scheduling(const RoundInputs& in, const Array& train_freq,
                           const Array& tx_power, double eta) {
  check_inputs(in);
  Ctx c(in);
  return scheduling_solve(c, train_freq, tx_power, eta);
}

Array solve_train_freq(const RoundInputs& in, const BoolArray& schedule,
                       const Array& tx_power, const Array& incumbent_freq,
                       double eta) {
  check_inputs(in);
  Ctx c(in);
  return train_solve(c, schedule, tx_power, incumbent_freq, eta);
}

Array solve_tx_power(const RoundInputs& in, const BoolArray& schedule,
                     const Array& train_freq, const Array& incumbent_power,
                     double eta, int* golden_iters) {
  check_inputs(in);
  Ctx c(in);
  int iters = 0;
  Array p = power_solve(c, schedule, train_freq, incumbent_power, eta, &iters);
  if (golden_iters) *golden_iters = iters;
  return p;
}

BcdOutcome bcd_loop(const RoundInputs& in, double eta, double xi_abs,
                    std::uint64_t restart_seed, const BoolArray* fixed_schedule,
                    int* golden_iters) {
  check_inputs(in);
  Ctx c(in);
  const auto starts = make_starts(c, in.cfg->solver, restart_seed,
                                  fixed_schedule);
  return bcd_from_starts(c, eta, xi_abs, starts, fixed_schedule, golden_iters);
}

SolveReport solve_round(const RoundInputs& in, std::uint64_t restart_seed,
                        const BoolArray* fixed_schedule) {
  check_inputs(in);
  if (fixed_schedule &&
      fixed_schedule->size() != static_cast<Eigen::Index>(in.fleet->size()))
    throw std::invalid_argument("fixed schedule size != fleet size");
  Ctx c(in);
  const SolverOptions& opt = in.cfg->solver;

  SolveReport rep;
  auto [d_lo, d_hi] = delta_bounds(in.backlog, *in.fleet, *in.cfg, in.v_weight);
  rep.stats.delta_lo = d_lo;
  rep.stats.delta_hi = d_hi;
  const double width = d_hi - d_lo;
  const double xi = opt.xi_rel * width;

  if (!(xi > 0.0)) {
    // V = 0 with empty queues: every feasible action has Delta_V = 0
    BcdOutcome trivial;
    trivial.schedule =
        fixed_schedule ? *fixed_schedule : BoolArray::Zero(c.n);
    trivial.train_freq = Array(c.n);
    trivial.tx_power = Array(c.n);
    Array mine(c.n);
    for (int i = 0; i < c.n; ++i) {
      trivial.train_freq[i] = c.fleet[i].f_min_hz;
      trivial.tx_power[i] = c.fleet[i].p_min_w;
      mine[i] = c.fleet[i].f_max_hz;
    }
    rep.action = assemble_action(c, trivial, mine);
    rep.delta_v = drift_penalty_ratio(
        compute_round(*in.fleet, *in.cfg, in.channel, rep.action), in.backlog,
        in.v_weight);
    rep.stats.xi_abs = 0.0;
    return rep;
  }

  const int bisection_cap =
      static_cast<int>(std::ceil(std::log2(width / xi))) + 5;
  const int max_outer = std::min(opt.l1_max, bisection_cap);
  auto starts = make_starts(c, opt, restart_seed, fixed_schedule);

  // the first probe at the bracket midpoint yields an incumbent action;
  // after that each probe sits at the incumbent's own ratio. the incumbent
  // is kept as a warm start, so the inner value at its ratio is at most
  // zero: the probe either lands within xi (done) or uncovers a strictly
  // better action and the ratio drops by more than xi over its round time.
  // a plain midpoint walk stalls here whenever the discrete schedule flips
  // between adjacent eta values, because the inner value then jumps across
  // zero by more than xi. the bracket is kept as a fallback for the probe
  // choice and for the iteration cap.
  double lo = d_lo;
  double hi = d_hi;
  double best_ratio = kInf;
  bool have_carry = false;
  bool accepted = false;
  std::vector<std::array<double, 3>> hist;
  for (int s = 1; s <= max_outer; ++s) {
    const double eta = have_carry && best_ratio > lo && best_ratio <= hi
                           ? best_ratio
                           : 0.5 * (lo + hi);
    MiningSolution mine = mining_solve(c, eta, xi, opt.l3_max);
    BcdOutcome bcd = bcd_from_starts(c, eta, xi, starts, fixed_schedule,
                                     &rep.stats.golden_iters_max);
    const double u = bcd.value + mine.value;

    rep.stats.outer_iters = s;
    rep.stats.bcd_passes += bcd.passes;
    rep.stats.monotone_violations += bcd.monotone_violations;
    rep.stats.mining_iters_max =
        std::max(rep.stats.mining_iters_max, mine.iters);

    Action act = assemble_action(c, bcd, mine.freq);
    const double ratio = drift_penalty_ratio(
        compute_round(*in.fleet, *in.cfg, in.channel, act), in.backlog,
        in.v_weight);
    hist.push_back({eta, u, ratio});
    if (ratio < best_ratio) {
      best_ratio = ratio;
      Start carry{bcd.schedule, bcd.train_freq, bcd.tx_power};
      if (have_carry) {
        starts.back() = std::move(carry);
      } else {
        starts.push_back(std::move(carry));
        have_carry = true;
      }
    }

    if (std::abs(u) <= xi) {
      rep.action = std::move(act);
      rep.stats.inf_u = u;
      rep.stats.eta = eta;
      rep.bcd_trace = std::move(bcd.trace);
      accepted = true;
      break;
    }
    if (u < 0.0) {
      hi = std::min(eta, ratio);
    } else {
      lo = eta;
      hi = std::min(hi, ratio);
    }
    if (hi < lo) lo = d_lo;  // a late find undercut the certified range
  }
  if (!accepted) {
    std::string msg =
        "Dinkelbach bisection exhausted its iteration cap without meeting xi";
    char buf[128];
    std::snprintf(buf, sizeof buf, " (xi=%.6g, steps eta/u/ratio:", xi);
    msg += buf;
    for (const auto& h : hist) {
      std::snprintf(buf, sizeof buf, " %.10g/%.6g/%.10g", h[0], h[1], h[2]);
      msg += buf;
    }
    msg += ")";
    throw NonConvergence(msg);
  }

  rep.stats.xi_abs = xi;
  rep.delta_v = drift_penalty_ratio(
      compute_round(*in.fleet, *in.cfg, in.channel, rep.action), in.backlog,
      in.v_weight);
  return rep;
}

std::pair<Action, double> brute_force_round(const RoundInputs& in,
                                            int grid_levels) {
  check_inputs(in);
  Ctx c(in);
  if (c.n > 4)
    throw std::invalid_argument("brute_force_round: at most 4 clients");
  if (grid_levels < 1 || grid_levels > 12)
    throw std::invalid_argument("brute_force_round: levels must be in [1,12]");

  auto grid = [&](double lo, double hi) {
    std::vector<double> g;
    if (hi <= lo) {
      g.push_back(lo);
      return g;
    }
    for (int k = 0; k <= grid_levels; ++k)
      g.push_back(lo + (hi - lo) * static_cast<double>(k) /
                           static_cast<double>(grid_levels));
    return g;
  };

  // per-client scheduled candidates: (f, p) grid; plus one unscheduled entry
  struct Cand {
    double f, p, time, score;
    int on;
  };
  std::vector<std::vector<Cand>> cands(c.n);
  for (int i = 0; i < c.n; ++i) {
    const auto& pr = c.fleet[i];
    cands[i].push_back({pr.f_min_hz, pr.p_min_w, 0.0, 0.0, 0});
    for (double f : grid(pr.f_min_hz, pr.f_max_hz))
      for (double p : grid(pr.p_min_w, pr.p_max_w))
        cands[i].push_back({f, p, c.time(i, f, p), c.score(i, f, p), 1});
  }

  // mining combos, enumerated once: (sum f, sum zv f^3)
  struct MineCombo {
    double tau_b, num;
    std::vector<int> idx;
  };
  std::vector<std::vector<double>> fgrids(c.n);
  for (int i = 0; i < c.n; ++i)
    fgrids[i] = grid(c.fleet[i].f_min_hz, c.fleet[i].f_max_hz);
  std::vector<MineCombo> mines;
  std::vector<int> midx(c.n, 0);
  for (;;) {
    double sum_f = 0.0;
    double cube = 0.0;
    for (int i = 0; i < c.n; ++i) {
      const double f = fgrids[i][midx[i]];
      sum_f += f;
      cube += c.zv[i] * f * f * f;
    }
    const double tau_b = c.neg_a / sum_f;
    mines.push_back({tau_b, tau_b * cube, midx});
    int i = 0;
    for (; i < c.n; ++i) {
      if (++midx[i] < static_cast<int>(fgrids[i].size())) break;
      midx[i] = 0;
    }
    if (i == c.n) break;
  }

  double best = kInf;
  std::vector<int> best_sched(c.n, 0);
  const MineCombo* best_mine = nullptr;

  std::vector<int> sidx(c.n, 0);
  for (;;) {
    double straggler = 0.0;
    double score = 0.0;
    for (int i = 0; i < c.n; ++i) {
      const Cand& cd = cands[i][sidx[i]];
      if (cd.on) {
        straggler = std::max(straggler, cd.time);
        score += cd.score;
      }
    }
    for (const auto& m : mines) {
      const double delta = (score + m.num) / (straggler + m.tau_b);
      if (delta < best) {
        best = delta;
        best_sched = sidx;
        best_mine = &m;
      }
    }
    int i = 0;
    for (; i < c.n; ++i) {
      if (++sidx[i] < static_cast<int>(cands[i].size())) break;
      sidx[i] = 0;
    }
    if (i == c.n) break;
  }

  Action a;
  a.schedule = BoolArray(c.n);
  a.train_freq_hz = Array(c.n);
  a.tx_power_w = Array(c.n);
  a.mine_freq_hz = Array(c.n);
  for (int i = 0; i < c.n; ++i) {
    const Cand& cd = cands[i][best_sched[i]];
    a.schedule[i] = cd.on;
    a.train_freq_hz[i] = cd.f;
    a.tx_power_w[i] = cd.p;
    a.mine_freq_hz[i] = fgrids[i][best_mine->idx[i]];
  }
  return {a, best};
}

}  // namespace bflsim
