#pragma once

#include <iosfwd>
#include <string>

#include "bflsim/lyapunov.hpp"
#include "bflsim/sim.hpp"

namespace bflsim {

// flat key = value text, '#' comments, repeated [client] sections expanded
// by their `count`. values accept unit suffixes (dBm, dB, mW, W, GHz, MHz,
// kHz, Hz, m, km, s, J) converted to SI at parse time. errors cite
// name:line. after parsing, BFLSIM_<UPPERCASE_KEY> environment variables
// override top-level keys.
SimConfig parse_config(std::istream& in, const std::string& name);
SimConfig load_config(const std::string& path);

// single scalar with optional unit suffix, same rules as config values
double parse_quantity(const std::string& text, const std::string& where);

// the two bundled setups; identical to configs/desk.cfg and
// configs/table4.cfg
SimConfig builtin_desk_config();
SimConfig builtin_table4_config();
const std::string& desk_config_text();
const std::string& table4_config_text();

// per-round log, 17 significant digits so values round-trip bit-exactly.
// columns: t, tau, D, E_0.., Z_0.., delta_V, loss, accuracy
void write_metrics_csv(const std::string& path, const MetricsSeries& s);
MetricsSeries read_metrics_csv(const std::string& path);  // solver stats zeroed

// the recomputable part of a summary; csv re-ingestion plus lta_report
// reproduces this text byte for byte
std::string lta_json_text(const LtaSummary& lta);

// full summary: run metadata, lta block, trade-off bound constants at the
// run horizon, solver effort aggregates
void write_summary_json(const std::string& path, const SimConfig& sc,
                        const LtaSummary& lta, const SolverAggregates& solver);
std::string summary_json_text(const SimConfig& sc, const LtaSummary& lta,
                              const SolverAggregates& solver);

}  // namespace bflsim
