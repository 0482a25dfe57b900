#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spad/ctmc.hpp"
#include "spad/distribution.hpp"
#include "spad/model.hpp"
#include "spad/pulsesim.hpp"
#include "spad/ratefn.hpp"
#include "spad/stats.hpp"

namespace spad::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Throws std::invalid_argument unless `doc.schema_version` is supported.
void check_schema(const json& doc, const std::string& what);

/// Reads and parses a JSON file. std::runtime_error when unreadable,
/// std::invalid_argument when malformed.
json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);

/// %.17g, the form used for every CSV number.
std::string format_double(double v);

// Models. Ising: {"type":"ising","n":n,"weights":[[n x n]],"biases":[n]}.
// Potts: {"type":"potts","sizes":[q...],"biases":[[q_i]...],
//         "weights":{"i,j":[[q_i x q_j]]}} with i < j, zero blocks omitted.
json model_to_json(const Model& model);
Model model_from_json(const json& doc);
Model load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const Model& model);

// Rate functions: {"kind":"exponential","r0","T","offset"},
// {"kind":"erfc","r0","T_prime","offset"}, {"kind":"tabulated","x","rates","T","offset"}.
json rate_to_json(const RateFunction& f);
RateFunction rate_from_json(const json& doc);

// Schedules: {"points":[[t, T], ...]}.
json schedule_to_json(const Schedule& s);
Schedule schedule_from_json(const json& doc);
Schedule load_schedule(const std::filesystem::path& path);

// Pulse configs: {"photon_rate","filter_tau","amplitude","duration","dt","refilter_tau"?}.
json pulse_to_json(const PulseConfig& c);
PulseConfig pulse_from_json(const json& doc);

/// Run settings of a sampling config file; every key is optional.
/// {"rate":{...},"split":bool,"temperature":T,"blackout":s,
///  "sample_mode":"dwell"|"clocked","sample_period":s,
///  "max_events":n,"max_time":s,"latch":{"stage_delay":s,"q":n}}
struct RunSpec {
  RateFunction rate = RateFunction::exponential(1e6, 1.0);
  bool split = true;
  std::optional<double> temperature;
  SimConfig sim;
};
RunSpec run_spec_from_json(const json& doc);

json distribution_to_json(const Distribution& d);
json empirical_to_json(const EmpiricalDistribution& d);

// CSV outputs, header line first.
std::string samples_csv(std::span<const Sample> samples);           // index,weight,time
std::vector<Sample> samples_from_csv(const std::filesystem::path& path);
std::string events_csv(std::span<const EventRecord> events);        // time,node,value
std::string trace_csv(const Trace& trace);                          // t,amplitude
std::string transfer_csv(std::span<const RatePoint> curve);         // threshold,rate
std::string sweep_csv(std::span<const TransferPoint> curve);        // bias,p_plus
std::string kl_curve_csv(std::span<const KlPoint> curve);           // samples,kl
/// index,energy,prob
std::string distribution_csv(std::span<const double> energies, const Distribution& d);
/// One row per state: index,energy,exact,empirical.
std::string energy_probability_csv(std::span<const double> energies, const Distribution& exact,
                                   const Distribution& empirical);

}  // namespace spad::io
