#include "spad/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spad::io {

namespace {

template <typename Fn>
auto guarded(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(what + ": " + e.what());
  }
}

double number(const json& doc, const char* key) {
  const auto& v = doc.at(key);
  if (!v.is_number()) throw std::invalid_argument(std::string("expected a number for '") + key + "'");
  return v.get<double>();
}

std::optional<double> optional_number(const json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return number(doc, key);
}

std::string pair_key(std::size_t i, std::size_t j) { return std::to_string(i) + "," + std::to_string(j); }

}  // namespace

void check_schema(const json& doc, const std::string& what) {
  if (!doc.is_object() || !doc.contains("schema_version"))
    throw std::invalid_argument(what + ": missing schema_version");
  const auto& v = doc.at("schema_version");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
    throw std::invalid_argument(what + ": unsupported schema_version " + v.dump());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_json(const std::filesystem::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Models

json model_to_json(const Model& model) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  if (const auto* ising = std::get_if<IsingModel>(&model)) {
    const std::size_t n = ising->size();
    doc["type"] = "ising";
    doc["n"] = n;
    json weights = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < n; ++j) row.push_back(ising->weight(i, j));
      weights.push_back(std::move(row));
    }
    doc["weights"] = std::move(weights);
    doc["biases"] = ising->biases();
    return doc;
  }
  const auto& potts = std::get<PottsModel>(model);
  doc["type"] = "potts";
  doc["sizes"] = std::vector<int>(potts.sizes().begin(), potts.sizes().end());
  json biases = json::array();
  for (std::size_t i = 0; i < potts.size(); ++i) {
    json row = json::array();
    for (int a = 0; a < potts.states(i); ++a) row.push_back(potts.bias(i, a));
    biases.push_back(std::move(row));
  }
  doc["biases"] = std::move(biases);
  json weights = json::object();
  for (std::size_t i = 0; i < potts.size(); ++i)
    for (std::size_t j = i + 1; j < potts.size(); ++j) {
      bool any = false;
      json block = json::array();
      for (int a = 0; a < potts.states(i); ++a) {
        json row = json::array();
        for (int b = 0; b < potts.states(j); ++b) {
          const double w = potts.weight(i, j, a, b);
          any = any || w != 0.0;
          row.push_back(w);
        }
        block.push_back(std::move(row));
      }
      if (any) weights[pair_key(i, j)] = std::move(block);
    }
  doc["weights"] = std::move(weights);
  return doc;
}

Model model_from_json(const json& doc) {
  check_schema(doc, "model");
  return guarded("model", [&]() -> Model {
    const auto type = doc.at("type").get<std::string>();
    if (type == "ising") {
      const auto biases = doc.at("biases").get<std::vector<double>>();
      const auto rows = doc.at("weights").get<std::vector<std::vector<double>>>();
      const std::size_t n = biases.size();
      if (doc.contains("n") && doc.at("n").get<std::size_t>() != n)
        throw std::invalid_argument("model: n does not match the bias count");
      if (rows.size() != n) throw std::invalid_argument("model: weights must be n x n");
      std::vector<double> flat;
      flat.reserve(n * n);
      for (const auto& row : rows) {
        if (row.size() != n) throw std::invalid_argument("model: weights must be n x n");
        flat.insert(flat.end(), row.begin(), row.end());
      }
      return IsingModel(std::move(flat), biases);
    }
    if (type != "potts") throw std::invalid_argument("model: unknown type '" + type + "'");
    PottsModel potts(doc.at("sizes").get<std::vector<int>>());
    const auto biases = doc.at("biases").get<std::vector<std::vector<double>>>();
    if (biases.size() != potts.size()) throw std::invalid_argument("model: one bias row per node required");
    for (std::size_t i = 0; i < potts.size(); ++i) {
      if (biases[i].size() != static_cast<std::size_t>(potts.states(i)))
        throw std::invalid_argument("model: bias row length must equal the node's label count");
      for (int a = 0; a < potts.states(i); ++a) potts.set_bias(i, a, biases[i][a]);
    }
    for (const auto& [key, block] : doc.at("weights").items()) {
      std::size_t i = 0;
      std::size_t j = 0;
      char comma = 0;
      std::istringstream parse(key);
      if (!(parse >> i >> comma >> j) || comma != ',' || !parse.eof() || i >= j || j >= potts.size())
        throw std::invalid_argument("model: bad weight key '" + key + "' (expected \"i,j\" with i < j)");
      const auto rows = block.get<std::vector<std::vector<double>>>();
      if (rows.size() != static_cast<std::size_t>(potts.states(i)))
        throw std::invalid_argument("model: weight block '" + key + "' has the wrong shape");
      for (int a = 0; a < potts.states(i); ++a) {
        if (rows[a].size() != static_cast<std::size_t>(potts.states(j)))
          throw std::invalid_argument("model: weight block '" + key + "' has the wrong shape");
        for (int b = 0; b < potts.states(j); ++b) potts.set_weight(i, j, a, b, rows[a][b]);
      }
    }
    return potts;
  });
}

Model load_model(const std::filesystem::path& path) { return model_from_json(read_json(path)); }

void save_model(const std::filesystem::path& path, const Model& model) { write_json(path, model_to_json(model)); }

// ---------------------------------------------------------------------------
// Rate functions, schedules, pulse configs

json rate_to_json(const RateFunction& f) {
  json doc;
  switch (f.kind()) {
    case RateKind::exponential:
      doc["kind"] = "exponential";
      doc["r0"] = f.r0();
      doc["T"] = f.temperature();
      break;
    case RateKind::erfc:
      doc["kind"] = "erfc";
      doc["r0"] = f.r0();
      doc["T_prime"] = f.temperature();
      break;
    case RateKind::tabulated:
      doc["kind"] = "tabulated";
      doc["x"] = std::vector<double>(f.table_x().begin(), f.table_x().end());
      doc["rates"] = std::vector<double>(f.table_rates().begin(), f.table_rates().end());
      doc["T"] = f.temperature();
      break;
  }
  doc["offset"] = f.offset();
  return doc;
}

RateFunction rate_from_json(const json& doc) {
  return guarded("rate function", [&] {
    const auto kind = doc.at("kind").get<std::string>();
    const double offset = optional_number(doc, "offset").value_or(0.0);
    if (kind == "exponential") return RateFunction::exponential(number(doc, "r0"), number(doc, "T"), offset);
    if (kind == "erfc") return RateFunction::erfc(number(doc, "r0"), number(doc, "T_prime"), offset);
    if (kind == "tabulated")
      return RateFunction::tabulated(doc.at("x").get<std::vector<double>>(), doc.at("rates").get<std::vector<double>>(),
                                     optional_number(doc, "T").value_or(1.0), offset);
    throw std::invalid_argument("rate function: unknown kind '" + kind + "'");
  });
}

json schedule_to_json(const Schedule& s) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  json points = json::array();
  for (const auto& [t, T] : s.points) points.push_back({t, T});
  doc["points"] = std::move(points);
  return doc;
}

Schedule schedule_from_json(const json& doc) {
  check_schema(doc, "schedule");
  Schedule s = guarded("schedule", [&] {
    Schedule out;
    for (const auto& p : doc.at("points")) {
      if (!p.is_array() || p.size() != 2) throw std::invalid_argument("schedule: each point must be [time, T]");
      out.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    return out;
  });
  s.validate();
  return s;
}

Schedule load_schedule(const std::filesystem::path& path) { return schedule_from_json(read_json(path)); }

json pulse_to_json(const PulseConfig& c) {
  json doc;
  doc["photon_rate"] = c.photon_rate;
  doc["filter_tau"] = c.filter_tau;
  doc["amplitude"] = c.amplitude;
  doc["duration"] = c.duration;
  doc["dt"] = c.dt;
  doc["refilter_tau"] = c.refilter_tau ? json(*c.refilter_tau) : json(nullptr);
  return doc;
}

PulseConfig pulse_from_json(const json& doc) {
  PulseConfig c = guarded("pulse config", [&] {
    PulseConfig out;
    out.photon_rate = number(doc, "photon_rate");
    out.filter_tau = number(doc, "filter_tau");
    out.amplitude = optional_number(doc, "amplitude").value_or(out.amplitude);
    out.duration = number(doc, "duration");
    out.dt = optional_number(doc, "dt").value_or(out.filter_tau / 20.0);
    // Absent means refilter at filter_tau; null disables it.
    out.refilter_tau = doc.contains("refilter_tau") ? optional_number(doc, "refilter_tau") : out.filter_tau;
    return out;
  });
  c.validate();
  return c;
}

RunSpec run_spec_from_json(const json& doc) {
  check_schema(doc, "config");
  return guarded("config", [&] {
    RunSpec spec;
    if (doc.contains("rate")) spec.rate = rate_from_json(doc.at("rate"));
    if (doc.contains("split")) spec.split = doc.at("split").get<bool>();
    spec.temperature = optional_number(doc, "temperature");
    spec.sim.blackout = optional_number(doc, "blackout").value_or(0.0);
    if (doc.contains("sample_mode")) {
      const auto mode = doc.at("sample_mode").get<std::string>();
      if (mode == "dwell")
        spec.sim.sample_mode = SampleMode::dwell;
      else if (mode == "clocked")
        spec.sim.sample_mode = SampleMode::clocked;
      else
        throw std::invalid_argument("config: sample_mode must be dwell or clocked");
    }
    spec.sim.sample_period = optional_number(doc, "sample_period").value_or(0.0);
    if (doc.contains("max_events")) spec.sim.max_events = doc.at("max_events").get<std::uint64_t>();
    spec.sim.max_time = optional_number(doc, "max_time");
    if (doc.contains("latch"))
      spec.sim.latch = LatchConfig{number(doc.at("latch"), "stage_delay"), doc.at("latch").at("q").get<int>()};
    if (doc.contains("seed")) spec.sim.seed = doc.at("seed").get<std::uint64_t>();
    return spec;
  });
}

json distribution_to_json(const Distribution& d) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["T"] = d.temperature;
  doc["probs"] = d.probs;
  return doc;
}

json empirical_to_json(const EmpiricalDistribution& d) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["states"] = d.states();
  doc["samples"] = d.samples();
  doc["total"] = d.total();
  doc["mass"] = std::vector<double>(d.mass().begin(), d.mass().end());
  doc["probs"] = d.total() > 0.0 ? d.normalized().probs : std::vector<double>(d.states(), 0.0);
  return doc;
}

// ---------------------------------------------------------------------------
// CSV

std::string samples_csv(std::span<const Sample> samples) {
  std::string out = "index,weight,time\n";
  for (const auto& s : samples)
    out += std::to_string(s.index) + "," + format_double(s.weight) + "," + format_double(s.time) + "\n";
  return out;
}

std::vector<Sample> samples_from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "index,weight,time")
    throw std::invalid_argument(path.string() + ": expected header 'index,weight,time'");
  std::vector<Sample> samples;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    Sample s;
    char c1 = 0;
    char c2 = 0;
    std::istringstream parse(line);
    if (!(parse >> s.index >> c1 >> s.weight >> c2 >> s.time) || c1 != ',' || c2 != ',')
      throw std::invalid_argument(path.string() + ": malformed row " + std::to_string(row));
    samples.push_back(s);
  }
  return samples;
}

std::string events_csv(std::span<const EventRecord> events) {
  std::string out = "time,node,value\n";
  for (const auto& e : events)
    out += format_double(e.time) + "," + std::to_string(e.node) + "," + std::to_string(e.new_value) + "\n";
  return out;
}

std::string trace_csv(const Trace& trace) {
  std::string out = "t,amplitude\n";
  for (std::size_t k = 0; k < trace.samples.size(); ++k)
    out += format_double(trace.dt * static_cast<double>(k)) + "," + format_double(trace.samples[k]) + "\n";
  return out;
}

std::string transfer_csv(std::span<const RatePoint> curve) {
  std::string out = "threshold,rate\n";
  for (const auto& p : curve) out += format_double(p.threshold) + "," + format_double(p.rate) + "\n";
  return out;
}

std::string sweep_csv(std::span<const TransferPoint> curve) {
  std::string out = "bias,p_plus\n";
  for (const auto& p : curve) out += format_double(p.bias) + "," + format_double(p.p_plus) + "\n";
  return out;
}

std::string kl_curve_csv(std::span<const KlPoint> curve) {
  std::string out = "samples,kl\n";
  for (const auto& p : curve) out += std::to_string(p.samples) + "," + format_double(p.kl) + "\n";
  return out;
}

std::string distribution_csv(std::span<const double> energies, const Distribution& d) {
  if (d.probs.size() != energies.size()) throw std::invalid_argument("distribution_csv: size mismatch");
  std::string out = "index,energy,prob\n";
  for (std::size_t s = 0; s < energies.size(); ++s)
    out += std::to_string(s) + "," + format_double(energies[s]) + "," + format_double(d.probs[s]) + "\n";
  return out;
}

std::string energy_probability_csv(std::span<const double> energies, const Distribution& exact,
                                   const Distribution& empirical) {
  if (exact.probs.size() != energies.size() || empirical.probs.size() != energies.size())
    throw std::invalid_argument("energy_probability_csv: size mismatch");
  std::string out = "index,energy,exact,empirical\n";
  for (std::size_t s = 0; s < energies.size(); ++s)
    out += std::to_string(s) + "," + format_double(energies[s]) + "," + format_double(exact.probs[s]) + "," +
           format_double(empirical.probs[s]) + "\n";
  return out;
}

}  // namespace spad::io
