#include "bflsim/config_io.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bflsim/lyapunov.hpp"
#include "bflsim/policies.hpp"

namespace bflsim {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw std::invalid_argument(where + ": " + msg);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string::size_type pos = 0;
  for (;;) {
    const auto next = s.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

// logarithmic suffixes convert the value, linear ones scale it
double convert(double x, const std::string& unit, const std::string& where) {
  if (unit.empty()) return x;
  if (unit == "dBm" || unit == "dBm/Hz") return std::pow(10.0, (x - 30.0) / 10.0);
  if (unit == "dB") return std::pow(10.0, x / 10.0);
  if (unit == "W" || unit == "Hz" || unit == "m" || unit == "s" ||
      unit == "J" || unit == "bit")
    return x;
  if (unit == "mW") return x * 1e-3;
  if (unit == "kHz" || unit == "kbit" || unit == "km") return x * 1e3;
  if (unit == "MHz" || unit == "Mbit") return x * 1e6;
  if (unit == "GHz" || unit == "Gbit") return x * 1e9;
  fail(where, "unknown unit '" + unit +
                  "' (known: W, mW, dBm, dBm/Hz, dB, GHz, MHz, kHz, Hz, km, m, "
                  "s, J, Gbit, Mbit, kbit, bit)");
}

long long parse_int(const std::string& text, const std::string& where) {
  const double x = parse_quantity(text, where);
  const auto i = std::llround(x);
  if (std::fabs(x - double(i)) > 1e-9 * std::max(1.0, std::fabs(x)))
    fail(where, "expected an integer, got '" + trim(text) + "'");
  return i;
}

std::uint64_t parse_seed(const std::string& text, const std::string& where) {
  const std::string body = trim(text);
  if (body.empty() || body[0] == '-')
    fail(where, "expected an unsigned integer, got '" + body + "'");
  const char* begin = body.c_str();
  char* end = nullptr;
  const unsigned long long u = std::strtoull(begin, &end, 0);
  if (end == begin || *end != '\0')
    fail(where, "expected an unsigned integer, got '" + body + "'");
  return u;
}

bool parse_flag(const std::string& text, const std::string& where) {
  const std::string body = trim(text);
  if (body == "1" || body == "true" || body == "yes" || body == "on")
    return true;
  if (body == "0" || body == "false" || body == "no" || body == "off")
    return false;
  fail(where, "expected a boolean (0/1/true/false), got '" + body + "'");
}

// every top-level key, also the set scanned for environment overrides
constexpr const char* kTopKeys[] = {
    "rounds",         "seed",
    "policy",         "v",
    "metric_cadence", "stochastic_mining",
    "oracle_check",   "oracle_levels",
    "bandwidth",      "noise_psd",
    "pathloss_const", "ref_distance",
    "pathloss_exp",   "rho_min",
    "rho_max",        "mining_difficulty",
    "mining_confidence", "local_epochs",
    "step_size",      "approx_slack",
    "xi_rel",         "golden_rel",
    "l1_max",         "l2_max",
    "l3_max",         "bcd_restarts",
    "feature_dim",    "cluster_shift",
    "l2_reg",         "test_samples"};

void apply_top(SimConfig& sc, const std::string& key, const std::string& value,
               const std::string& where) {
  auto num = [&] { return parse_quantity(value, where); };
  auto integer = [&] { return static_cast<int>(parse_int(value, where)); };
  if (key == "rounds") sc.rounds = integer();
  else if (key == "seed") sc.seed = parse_seed(value, where);
  else if (key == "policy") {
    try {
      sc.policy = parse_policy(trim(value));
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
  } else if (key == "v") sc.system.lyapunov_v = num();
  else if (key == "metric_cadence") sc.metric_cadence = integer();
  else if (key == "stochastic_mining") sc.stochastic_mining = parse_flag(value, where);
  else if (key == "oracle_check") sc.oracle_check = parse_flag(value, where);
  else if (key == "oracle_levels") sc.oracle_levels = integer();
  else if (key == "bandwidth") sc.system.bandwidth_hz = num();
  else if (key == "noise_psd") sc.system.noise_psd_w_hz = num();
  else if (key == "pathloss_const") sc.system.pathloss_const = num();
  else if (key == "ref_distance") sc.system.ref_distance_m = num();
  else if (key == "pathloss_exp") sc.system.pathloss_exp = num();
  else if (key == "rho_min") sc.system.rho_min = num();
  else if (key == "rho_max") sc.system.rho_max = num();
  else if (key == "mining_difficulty") sc.system.mining_difficulty = num();
  else if (key == "mining_confidence") sc.system.mining_confidence = num();
  else if (key == "local_epochs") sc.system.local_epochs = integer();
  else if (key == "step_size") sc.system.step_size = num();
  else if (key == "approx_slack") sc.system.approx_slack = num();
  else if (key == "xi_rel") sc.system.solver.xi_rel = num();
  else if (key == "golden_rel") sc.system.solver.golden_rel = num();
  else if (key == "l1_max") sc.system.solver.l1_max = integer();
  else if (key == "l2_max") sc.system.solver.l2_max = integer();
  else if (key == "l3_max") sc.system.solver.l3_max = integer();
  else if (key == "bcd_restarts") sc.system.solver.bcd_restarts = integer();
  else if (key == "feature_dim") sc.fl.feature_dim = integer();
  else if (key == "cluster_shift") sc.fl.cluster_shift = num();
  else if (key == "l2_reg") sc.fl.l2_reg = num();
  else if (key == "test_samples") sc.fl.test_samples = integer();
  else fail(where, "unknown key '" + key + "'");
}

struct ClientSpec {
  ClientProfile proto;
  int count = 1;
};

void apply_client(ClientSpec& s, const std::string& key,
                  const std::string& value, const std::string& where) {
  auto num = [&] { return parse_quantity(value, where); };
  if (key == "count") {
    s.count = static_cast<int>(parse_int(value, where));
    if (s.count < 1) fail(where, "count must be >= 1");
  } else if (key == "dataset") s.proto.dataset_size = num();
  else if (key == "cycles_per_sample") s.proto.cycles_per_sample = num();
  else if (key == "switch_cap") s.proto.switch_cap = num();
  else if (key == "model_bits") s.proto.model_bits = num();
  else if (key == "distance") s.proto.distance_m = num();
  else if (key == "f_min") s.proto.f_min_hz = num();
  else if (key == "f_max") s.proto.f_max_hz = num();
  else if (key == "p_min") s.proto.p_min_w = num();
  else if (key == "p_max") s.proto.p_max_w = num();
  else if (key == "energy_supply") s.proto.energy_supply_w = num();
  else fail(where, "unknown client key '" + key + "'");
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json to_json(const Array& a) {
  return std::vector<double>(a.data(), a.data() + a.size());
}

}  // namespace

double parse_quantity(const std::string& text, const std::string& where) {
  const std::string body = trim(text);
  if (body.empty()) fail(where, "empty value");
  const char* begin = body.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (end == begin) fail(where, "expected a number, got '" + body + "'");
  return convert(x, trim(std::string(end)), where);
}

SimConfig parse_config(std::istream& in, const std::string& name) {
  SimConfig sc;
  std::vector<ClientSpec> specs;
  ClientSpec* cur = nullptr;
  std::vector<std::array<std::string, 3>> top;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    if (body.front() == '[') {
      if (body != "[client]") fail(where, "unknown section '" + body + "'");
      specs.emplace_back();
      cur = &specs.back();
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail(where, "expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) fail(where, "empty key");
    if (cur) apply_client(*cur, key, value, where);
    else top.push_back({key, value, where});
  }
  for (const auto& kv : top) apply_top(sc, kv[0], kv[1], kv[2]);
  for (const char* key : kTopKeys) {
    std::string env_name = "BFLSIM_";
    for (const char* p = key; *p; ++p)
      env_name += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
    if (const char* v = std::getenv(env_name.c_str()))
      apply_top(sc, key, v, "environment " + env_name);
  }
  int id = 0;
  for (const auto& s : specs)
    for (int k = 0; k < s.count; ++k) {
      sc.fleet.push_back(s.proto);
      sc.fleet.back().id = id++;
    }
  return sc;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  return parse_config(in, path);
}

const std::string& desk_config_text() {
  static const std::string text = R"cfg(# six clients on one desk: three light data holders with a roomy power
# budget, three heavy holders on a tight one. the uplink payloads are
# deliberately heavy so member choice moves the round clock even over a
# few rounds, and one light holder is a weak device: verbose updates, a
# slow cpu, and a low transmit ceiling make it the round straggler
# whenever it is scheduled, while its energy draw stays the smallest.
rounds = 2000
seed = 1
policy = dracs
v = 1000
metric_cadence = 1
stochastic_mining = 0

bandwidth = 180 kHz
noise_psd = -174 dBm/Hz
pathloss_const = -30 dB
ref_distance = 1 m
pathloss_exp = 2
rho_min = 0.1
rho_max = 10
mining_difficulty = 2e9
mining_confidence = 0.9999999999
local_epochs = 1
step_size = 1e-3
approx_slack = 0

xi_rel = 1e-6
golden_rel = 1e-6
l1_max = 64
l2_max = 50
l3_max = 100
bcd_restarts = 3

feature_dim = 14
cluster_shift = 1.2
l2_reg = 1e-4
test_samples = 4000

[client]
count = 2
dataset = 1000
cycles_per_sample = 2e3
switch_cap = 1e-28
model_bits = 60 Mbit
distance = 200 m
f_min = 1 GHz
f_max = 4 GHz
p_min = 23 dBm
p_max = 30 dBm
energy_supply = 0.6 W

[client]
count = 1
dataset = 1000
cycles_per_sample = 2e3
switch_cap = 1e-28
model_bits = 90 Mbit
distance = 200 m
f_min = 1 GHz
f_max = 1 GHz
p_min = 23 dBm
p_max = 23.5 dBm
energy_supply = 0.6 W

[client]
count = 3
dataset = 4000
cycles_per_sample = 2e3
switch_cap = 1e-28
model_bits = 60 Mbit
distance = 200 m
f_min = 1 GHz
f_max = 4 GHz
p_min = 23 dBm
p_max = 30 dBm
energy_supply = 0.2 W
)cfg";
  return text;
}

const std::string& table4_config_text() {
  static const std::string text = R"cfg(# twenty-client reference setup with the published physical constants and
# a lightweight model payload.
rounds = 2000
seed = 1
policy = dracs
v = 30000
metric_cadence = 1
stochastic_mining = 0

bandwidth = 180 kHz
noise_psd = -174 dBm/Hz
pathloss_const = -30 dB
ref_distance = 1 m
pathloss_exp = 2
rho_min = 0.1
rho_max = 10
mining_difficulty = 2e9
mining_confidence = 0.9999999999
local_epochs = 1
step_size = 1e-3
approx_slack = 0

xi_rel = 1e-6
golden_rel = 1e-6
l1_max = 64
l2_max = 50
l3_max = 100
bcd_restarts = 3

feature_dim = 14
cluster_shift = 1.2
l2_reg = 1e-4
test_samples = 4000

[client]
count = 10
dataset = 1000
cycles_per_sample = 2e3
switch_cap = 1e-28
model_bits = 0.1 Mbit
distance = 200 m
f_min = 1 GHz
f_max = 4 GHz
p_min = 23 dBm
p_max = 30 dBm
energy_supply = 600 mW

[client]
count = 10
dataset = 4000
cycles_per_sample = 2e3
switch_cap = 1e-28
model_bits = 0.1 Mbit
distance = 200 m
f_min = 1 GHz
f_max = 4 GHz
p_min = 23 dBm
p_max = 30 dBm
energy_supply = 200 mW
)cfg";
  return text;
}

SimConfig builtin_desk_config() {
  std::istringstream in(desk_config_text());
  return parse_config(in, "builtin:desk");
}

SimConfig builtin_table4_config() {
  std::istringstream in(table4_config_text());
  return parse_config(in, "builtin:table4");
}

void write_metrics_csv(const std::string& path, const MetricsSeries& s) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  const auto rounds = static_cast<int>(s.tau_s.size());
  const auto n = static_cast<int>(s.energy_j.cols());
  out << "t,tau,D";
  for (int i = 0; i < n; ++i) out << ",E_" << i;
  for (int i = 0; i < n; ++i) out << ",Z_" << i;
  out << ",delta_V,loss,accuracy\n";
  for (int t = 0; t < rounds; ++t) {
    out << (t + 1) << ',' << fmt17(s.tau_s[t]) << ',' << fmt17(s.data[t]);
    for (int i = 0; i < n; ++i) out << ',' << fmt17(s.energy_j(t, i));
    for (int i = 0; i < n; ++i) out << ',' << fmt17(s.backlog_j(t, i));
    out << ',' << fmt17(s.delta_v[t]) << ',' << fmt17(s.loss[t]) << ','
        << fmt17(s.accuracy[t]) << '\n';
  }
  out.flush();
  if (!out) fail(path, "write failed");
}

MetricsSeries read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  std::string line;
  if (!std::getline(in, line)) fail(path, "empty file");
  const auto head = split(trim(line), ',');
  int n = 0;
  for (const auto& h : head)
    if (h.rfind("E_", 0) == 0) ++n;
  const auto want = 6 + 2 * static_cast<std::size_t>(n);
  if (head.size() != want || head[0] != "t" || head[1] != "tau")
    fail(path, "unexpected header");
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto fields = split(body, ',');
    if (fields.size() != want)
      fail(where, "expected " + std::to_string(want) + " fields, got " +
                      std::to_string(fields.size()));
    std::vector<double> row(want);
    for (std::size_t i = 0; i < want; ++i) {
      const char* b = fields[i].c_str();
      char* e = nullptr;
      row[i] = std::strtod(b, &e);
      if (e == b) fail(where, "bad number '" + fields[i] + "'");
    }
    rows.push_back(std::move(row));
  }
  MetricsSeries s;
  const auto rounds = static_cast<int>(rows.size());
  s.tau_s.resize(rounds);
  s.data.resize(rounds);
  s.delta_v.resize(rounds);
  s.loss.resize(rounds);
  s.accuracy.resize(rounds);
  s.energy_j.resize(rounds, n);
  s.backlog_j.resize(rounds, n);
  for (int t = 0; t < rounds; ++t) {
    const auto& r = rows[t];
    s.tau_s[t] = r[1];
    s.data[t] = r[2];
    for (int i = 0; i < n; ++i) s.energy_j(t, i) = r[3 + i];
    for (int i = 0; i < n; ++i) s.backlog_j(t, i) = r[3 + n + i];
    s.delta_v[t] = r[3 + 2 * n];
    s.loss[t] = r[4 + 2 * n];
    s.accuracy[t] = r[5 + 2 * n];
  }
  return s;
}

std::string lta_json_text(const LtaSummary& lta) {
  json j;
  j["rounds"] = lta.rounds;
  j["time_total_s"] = lta.time_total_s;
  j["data_total"] = lta.data_total;
  j["lta_data"] = lta.lta_data;
  j["energy_total_j"] = to_json(lta.energy_total_j);
  j["lta_energy_w"] = to_json(lta.lta_energy_w);
  j["final_backlog_j"] = to_json(lta.final_backlog_j);
  j["final_loss"] = lta.final_loss;
  j["final_accuracy"] = lta.final_accuracy;
  return j.dump();
}

std::string summary_json_text(const SimConfig& sc, const LtaSummary& lta,
                              const SolverAggregates& solver) {
  json j;
  j["run"] = {{"policy", policy_name(sc.policy)},
              {"v", sc.system.lyapunov_v},
              {"seed", sc.seed},
              {"rounds", sc.rounds},
              {"clients", sc.fleet.size()},
              {"stochastic_mining", sc.stochastic_mining}};
  j["lta"] = json::parse(lta_json_text(lta));
  const auto z0 = Array::Zero(static_cast<Eigen::Index>(sc.fleet.size()));
  const auto tb =
      make_theorem_bounds(sc.fleet, sc.system, z0, sc.system.lyapunov_v);
  const auto tr =
      theorem_gap_bounds(tb, sc.system.lyapunov_v, sc.rounds, 0.0);
  j["bounds"] = {{"h_const", tb.h_const},
                 {"tau_min", tb.tau_min},
                 {"tau_max", tb.tau_max},
                 {"latency_floor", tb.latency_floor},
                 {"delta_min", tb.delta_min},
                 {"delta_max", tb.delta_max},
                 {"phi_opt_proxy", tb.phi_opt_proxy},
                 {"g1", tb.g1},
                 {"g2", tb.g2},
                 {"g1_alt", tb.g1_alt},
                 {"g2_alt", tb.g2_alt},
                 {"approx_slack", tb.approx_slack},
                 {"gap_bound", tr.gap_bound},
                 {"excess_bound", tr.excess_bound},
                 {"radicand", tr.radicand},
                 {"radicand_alt", tr.radicand_alt},
                 {"excess_bound_alt", tr.excess_bound_alt}};
  j["solver"] = {{"outer_iters_max", solver.outer_iters_max},
                 {"bcd_passes_total", solver.bcd_passes_total},
                 {"mining_iters_max", solver.mining_iters_max},
                 {"golden_iters_max", solver.golden_iters_max},
                 {"monotone_violations_total", solver.monotone_violations_total},
                 {"max_resid_over_xi", solver.max_resid_over_xi}};
  return j.dump(2) + "\n";
}

void write_summary_json(const std::string& path, const SimConfig& sc,
                        const LtaSummary& lta, const SolverAggregates& solver) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  out << summary_json_text(sc, lta, solver);
  out.flush();
  if (!out) fail(path, "write failed");
}

}  // namespace bflsim
