#include "spad/cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>

#include <CLI11.hpp>

#include "spad/ctmc.hpp"
#include "spad/io.hpp"
#include "spad/mapping.hpp"
#include "spad/parallel.hpp"
#include "spad/pulsesim.hpp"
#include "spad/reference.hpp"
#include "spad/stats.hpp"

#ifndef SPAD_VERSION
#define SPAD_VERSION "0.0.0"
#endif

namespace spad::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::string out = ".";
  bool json_out = false;
  std::optional<std::uint64_t> samples;
  std::optional<double> duration;
  std::optional<double> temperature;
  std::string schedule;
  std::optional<double> blackout;
  std::string sample_mode;
};

struct Invocation {
  std::string command;
  std::vector<std::string> args;
  std::string model_path;
  std::string config_path;
};

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("SPAD_ANNEAL_SEED"); env && *env) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || *end != '\0' || env[0] == '-') throw std::invalid_argument("SPAD_ANNEAL_SEED must be an unsigned integer");
    return v;
  }
  return 0;
}

void apply_sample_mode(const std::string& text, SimConfig& sim) {
  if (text.empty()) return;
  if (text == "dwell") {
    sim.sample_mode = SampleMode::dwell;
    return;
  }
  const std::string prefix = "clocked:";
  if (text.rfind(prefix, 0) != 0) throw std::invalid_argument("--sample-mode must be dwell or clocked:<period>");
  std::size_t used = 0;
  double period = 0.0;
  try {
    period = std::stod(text.substr(prefix.size()), &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("--sample-mode: bad period '" + text.substr(prefix.size()) + "'");
  }
  if (used != text.size() - prefix.size() || !(period > 0.0))
    throw std::invalid_argument("--sample-mode: period must be a positive number");
  sim.sample_mode = SampleMode::clocked;
  sim.sample_period = period;
}

// Stop criterion: --samples counts samples (events when dwell-weighted),
// --duration bounds simulated time.
void apply_stop(const Common& c, SimConfig& sim) {
  if (c.samples && c.duration) throw std::invalid_argument("give at most one of --samples and --duration");
  if (c.samples) {
    sim.max_time.reset();
    sim.max_events.reset();
    if (sim.sample_mode == SampleMode::clocked)
      sim.max_time = static_cast<double>(*c.samples) * sim.sample_period;
    else
      sim.max_events = *c.samples;
  }
  if (c.duration) {
    sim.max_events.reset();
    sim.max_time = *c.duration;
  }
}

io::RunSpec load_spec(const std::string& config_path) {
  if (config_path.empty()) return io::RunSpec{};
  return io::run_spec_from_json(io::read_json(config_path));
}

Network build_network(const Model& model, const io::RunSpec& spec, std::optional<double> T) {
  Network net = std::holds_alternative<IsingModel>(model)
                    ? Network::ising(std::get<IsingModel>(model), spec.rate, spec.split)
                    : Network::potts(std::get<PottsModel>(model), spec.rate);
  if (T) return net.with_temperature(*T);
  if (spec.temperature) return net.with_temperature(*spec.temperature);
  return net;
}

double network_temperature(const Network& net) { return net.clocks()[0].temperature(); }

void write_manifest(const Common& c, const Invocation& inv, std::uint64_t seed) {
  json doc;
  doc["schema_version"] = io::kSchemaVersion;
  doc["command"] = inv.command;
  doc["args"] = inv.args;
  doc["model_path"] = inv.model_path;
  doc["config_path"] = inv.config_path;
  doc["output_dir"] = c.out;
  doc["seed"] = seed;
  doc["version"] = std::string("spad ") + SPAD_VERSION;
  io::write_json(fs::path(c.out) / "manifest.json", doc);
}

void emit(const Common& c, std::ostream& out, const json& report, const std::string& summary) {
  if (c.json_out)
    out << report.dump() << "\n";
  else
    out << summary;
}

std::vector<double> expand_axis(const json& spec, const char* what) {
  if (spec.is_array()) return spec.get<std::vector<double>>();
  const double start = spec.at("start").get<double>();
  const double stop = spec.at("stop").get<double>();
  std::vector<double> axis;
  if (spec.contains("count")) {
    const auto count = spec.at("count").get<std::size_t>();
    if (count < 2) throw std::invalid_argument(std::string(what) + ": count must be at least 2");
    for (std::size_t k = 0; k < count; ++k)
      axis.push_back(start + (stop - start) * static_cast<double>(k) / static_cast<double>(count - 1));
    return axis;
  }
  const double step = spec.at("step").get<double>();
  if (!(step > 0.0) || stop < start) throw std::invalid_argument(std::string(what) + ": need step > 0 and stop >= start");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (std::size_t k = 0; k < count; ++k) axis.push_back(start + step * static_cast<double>(k));
  return axis;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_gen_model(const Common& c, const Invocation& inv, std::size_t n, int lo, int hi, std::ostream& out) {
  const auto seed = resolve_seed(c);
  const IsingModel model = random_model(n, lo, hi, seed);
  io::save_model(fs::path(c.out) / "model.json", model);
  write_manifest(c, inv, seed);
  json report{{"model", (fs::path(c.out) / "model.json").string()}, {"n", n}, {"seed", seed}};
  emit(c, out, report, "wrote " + (fs::path(c.out) / "model.json").string() + "\n");
  return kExitOk;
}

int cmd_map(const Common& c, const Invocation& inv, bool check, std::ostream& out) {
  const Model model = io::load_model(inv.model_path);
  const auto* ising = std::get_if<IsingModel>(&model);
  if (!ising) throw std::invalid_argument("map: input must be an Ising model");
  const PottsModel potts = ising_to_potts(*ising);
  io::save_model(fs::path(c.out) / "potts.json", potts);
  write_manifest(c, inv, 0);
  json report{{"model", (fs::path(c.out) / "potts.json").string()}, {"nodes", potts.size()}};
  if (check) {
    const auto reloaded = io::load_model(fs::path(c.out) / "potts.json");
    const auto ising_energies = enumerate_energies(model);
    const auto potts_energies = enumerate_energies(reloaded);
    const auto map = ising_to_potts_index_map(ising->size());
    double worst = 0.0;
    for (std::size_t s = 0; s < map.size(); ++s)
      worst = std::max(worst, std::abs(ising_energies[s] - potts_energies[map[s]]));
    report["max_energy_difference"] = worst;
    report["energy_equivalent"] = worst == 0.0;
    if (worst != 0.0) {
      emit(c, out, report, "energy check FAILED: max difference " + io::format_double(worst) + "\n");
      return kExitRuntime;
    }
  }
  emit(c, out, report, "wrote " + report["model"].get<std::string>() + (check ? " (energies verified)\n" : "\n"));
  return kExitOk;
}

int cmd_sample(const Common& c, const Invocation& inv, const std::string& engine, bool events, std::ostream& out) {
  const Model model = io::load_model(inv.model_path);
  io::RunSpec spec = load_spec(inv.config_path);
  const auto seed = c.seed || !spec.sim.seed ? resolve_seed(c) : spec.sim.seed;
  const StateIndex states = state_count(model);
  EmpiricalDistribution dist(states);
  std::vector<Sample> samples;
  json report;
  report["engine"] = engine;
  report["seed"] = seed;

  if (engine == "gibbs") {
    if (!c.samples) throw std::invalid_argument("sample: gibbs engine needs --samples (sweeps)");
    double T = c.temperature ? *c.temperature : spec.temperature.value_or(spec.rate.temperature());
    for (auto index : gibbs_run(model, T, *c.samples, seed)) samples.push_back(Sample{index, 1.0, 0.0});
    report["temperature"] = T;
  } else if (engine == "ctmc") {
    const Network net = build_network(model, spec, c.temperature);
    SimConfig sim = spec.sim;
    sim.seed = seed;
    if (c.blackout) sim.blackout = *c.blackout;
    apply_sample_mode(c.sample_mode, sim);
    apply_stop(c, sim);
    if (!sim.max_events && !sim.max_time) throw std::invalid_argument("sample: give --samples or --duration");
    const RunResult result = run(net, sim);
    samples = result.samples;
    report["temperature"] = network_temperature(net);
    report["events"] = result.summary.events;
    report["end_time"] = result.summary.end_time;
    if (result.summary.latch_invalid_fraction) report["latch_invalid_fraction"] = *result.summary.latch_invalid_fraction;
    if (events) io::write_text(fs::path(c.out) / "events.csv", io::events_csv(result.events));
  } else {
    throw std::invalid_argument("sample: --engine must be ctmc or gibbs");
  }
  dist.add(samples);
  io::write_text(fs::path(c.out) / "samples.csv", io::samples_csv(samples));
  io::write_json(fs::path(c.out) / "distribution.json", io::empirical_to_json(dist));
  write_manifest(c, inv, seed);
  report["samples"] = samples.size();
  emit(c, out, report, "wrote " + std::to_string(samples.size()) + " samples to " + c.out + "\n");
  return kExitOk;
}

int cmd_validate(const Common& c, const Invocation& inv, const std::string& samples_path, std::size_t batches,
                 std::ostream& out) {
  if (!c.temperature) throw std::invalid_argument("validate: --temperature is required");
  const Model model = io::load_model(inv.model_path);
  const auto samples = io::samples_from_csv(samples_path);
  if (samples.empty()) throw std::invalid_argument("validate: no samples");
  const auto energies = enumerate_energies(model);
  const Distribution exact = boltzmann_from_energies(energies, *c.temperature);
  EmpiricalDistribution empirical(exact.probs.size());
  for (const auto& s : samples) {
    if (s.index >= exact.probs.size()) throw std::invalid_argument("validate: sample index out of range");
    empirical.add(s);
  }
  const Distribution p = empirical.normalized();
  const double kl = kl_divergence(p, exact);
  const auto curve = kl_convergence(std::span<const Sample>(samples), batches, exact);
  io::write_text(fs::path(c.out) / "energy_probability.csv", io::energy_probability_csv(energies, exact, p));
  io::write_text(fs::path(c.out) / "kl_curve.csv", io::kl_curve_csv(curve));
  io::write_text(fs::path(c.out) / "exact.csv", io::distribution_csv(energies, exact));
  io::write_json(fs::path(c.out) / "exact.json", io::distribution_to_json(exact));
  write_manifest(c, inv, 0);
  json report{{"kl", kl},
              {"floor", kl_floor(exact.probs.size(), static_cast<double>(samples.size()))},
              {"samples", samples.size()},
              {"temperature", *c.temperature}};
  io::write_json(fs::path(c.out) / "report.json", report);
  emit(c, out, report, "KL = " + io::format_double(kl) + " nats over " + std::to_string(samples.size()) + " samples\n");
  return kExitOk;
}

int transfer_pulse(const Common& c, const Invocation& inv, const json& doc, bool compare_erfc, bool write_trace,
                   std::ostream& out) {
  PulseConfig pulse = io::pulse_from_json(doc.at("pulse"));
  if (c.duration) pulse.duration = *c.duration;
  pulse.validate();
  const auto thresholds = expand_axis(doc.at("thresholds"), "thresholds");
  const auto min_count = doc.value("min_count", std::uint64_t{100});
  const auto max_fraction = doc.value("max_fraction", 0.5);
  const auto seed = resolve_seed(c);

  const Trace raw = generate_trace(pulse, seed);
  const Trace counted = pulse.refilter_tau ? low_pass(raw, *pulse.refilter_tau) : raw;
  const auto curve = transfer_function(counted, thresholds);
  io::write_text(fs::path(c.out) / "transfer.csv", io::transfer_csv(curve));
  if (write_trace) io::write_text(fs::path(c.out) / "trace.csv", io::trace_csv(raw));

  json report;
  report["seed"] = seed;
  report["duration"] = counted.duration();
  json points = json::array();
  for (const auto& p : curve) {
    json row{{"threshold", p.threshold}, {"rate", p.rate}, {"count", p.count}};
    row["relative_error"] = p.count > 0 ? json(poisson_relative_error(static_cast<double>(p.count))) : json(nullptr);
    points.push_back(std::move(row));
  }
  report["points"] = std::move(points);

  const auto tail = tail_points(curve, min_count, max_fraction);
  std::vector<CurvePoint> fit_curve;
  for (const auto& p : tail) fit_curve.push_back(CurvePoint{p.threshold, p.rate});
  std::string summary = "transfer curve: " + std::to_string(curve.size()) + " thresholds\n";
  if (fit_curve.size() >= 3) {
    const auto exp_fit = fit_rate(fit_curve, RateKind::exponential);
    report["exponential"] = {{"r0", exp_fit.r0},         {"T", exp_fit.T},
                             {"residual", exp_fit.residual}, {"r_squared", exp_fit.r_squared},
                             {"decades", std::log10(fit_curve.front().y / fit_curve.back().y)}};
    summary += "exponential fit: r0 = " + io::format_double(exp_fit.r0) + ", T = " + io::format_double(exp_fit.T) +
               ", R^2 = " + io::format_double(exp_fit.r_squared) + "\n";
    if (compare_erfc) {
      const auto erfc_fit = fit_rate(fit_curve, RateKind::erfc);
      report["erfc"] = {{"r0", erfc_fit.r0},
                        {"T_prime", erfc_fit.T},
                        {"offset", erfc_fit.offset},
                        {"residual", erfc_fit.residual},
                        {"r_squared", erfc_fit.r_squared}};
      report["erfc_better"] = erfc_fit.residual < exp_fit.residual;
      summary += "erfc fit residual " + io::format_double(erfc_fit.residual) + " vs exponential " +
                 io::format_double(exp_fit.residual) + "\n";
    }
  } else {
    summary += "too few tail points to fit\n";
  }
  io::write_json(fs::path(c.out) / "report.json", report);
  write_manifest(c, inv, seed);
  emit(c, out, report, summary);
  return kExitOk;
}

int transfer_neuron(const Common& c, const Invocation& inv, const json& doc, std::ostream& out) {
  const io::RunSpec spec = io::run_spec_from_json(doc);
  IsingModel single(1);
  Network net = Network::ising(single, spec.rate, spec.split);
  if (c.temperature)
    net = net.with_temperature(*c.temperature);
  else if (spec.temperature)
    net = net.with_temperature(*spec.temperature);
  const auto biases = expand_axis(doc.at("biases"), "biases");
  SweepConfig sweep;
  sweep.seed = resolve_seed(c);
  sweep.samples_per_point = c.samples.value_or(doc.value("samples_per_point", sweep.samples_per_point));
  sweep.sample_period = doc.value("sample_period", sweep.sample_period);
  const auto curve = ising_transfer_sweep(net, 0, biases, sweep);
  io::write_text(fs::path(c.out) / "sweep.csv", io::sweep_csv(curve));

  std::vector<CurvePoint> points;
  for (const auto& p : curve) points.push_back(CurvePoint{p.bias, p.p_plus});
  const auto fit = fit_tanh(points);
  json report{{"seed", sweep.seed},
              {"temperature", network_temperature(net)},
              {"T_fit", fit.T},
              {"offset", fit.offset},
              {"residual", fit.residual}};
  io::write_json(fs::path(c.out) / "report.json", report);
  write_manifest(c, inv, sweep.seed);
  emit(c, out, report, "tanh fit: T = " + io::format_double(fit.T) + ", offset = " + io::format_double(fit.offset) + "\n");
  return kExitOk;
}

int cmd_anneal(const Common& c, const Invocation& inv, std::ostream& out) {
  const Model model = io::load_model(inv.model_path);
  io::RunSpec spec = load_spec(inv.config_path);
  const auto seed = c.seed || !spec.sim.seed ? resolve_seed(c) : spec.sim.seed;
  if (c.schedule.empty()) throw std::invalid_argument("anneal: --schedule is required");
  const Schedule schedule = io::load_schedule(c.schedule);
  const Network net = build_network(model, spec, std::nullopt);
  SimConfig sim = spec.sim;
  sim.seed = seed;
  sim.schedule = schedule;
  if (c.blackout) sim.blackout = *c.blackout;
  apply_sample_mode(c.sample_mode, sim);
  apply_stop(c, sim);
  if (!sim.max_events && !sim.max_time) sim.max_time = schedule.points.back().first;
  const AnnealResult result = anneal(net, sim);

  std::string csv = "time,energy,running_mean\n";
  for (std::size_t k = 0; k < result.samples.size(); ++k)
    csv += io::format_double(result.samples[k].time) + "," + io::format_double(result.energies[k]) + "," +
           io::format_double(result.running_mean[k]) + "\n";
  io::write_text(fs::path(c.out) / "energy_trace.csv", csv);

  json best;
  best["schema_version"] = io::kSchemaVersion;
  best["index"] = result.best_state;
  best["energy"] = result.best_energy;
  best["state"] = network_state_at(net, result.best_state).values;
  best["initial_window_mean"] = result.initial_window_mean;
  best["final_mean"] = result.final_mean;
  if (state_count(model) <= kMaxEnumeratedStates) {
    const auto ground = ground_state(model);
    best["ground_state"] = {{"index", ground.index}, {"energy", ground.energy}};
    best["found_ground_state"] = result.best_energy == ground.energy;
  }
  io::write_json(fs::path(c.out) / "best_state.json", best);
  write_manifest(c, inv, seed);
  emit(c, out, best,
       "best energy " + io::format_double(result.best_energy) + "; mean energy " +
           io::format_double(result.initial_window_mean) + " (initial window) -> " +
           io::format_double(result.final_mean) + " (final)\n");
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event-driven simulator for SPAD-based Ising/Potts Boltzmann machines"};
  app.require_subcommand(1);
  Common c;
  Invocation inv;
  inv.args = args;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "RNG seed (falls back to SPAD_ANNEAL_SEED, then 0)");
    sub->add_option("--jobs", c.jobs, "Worker threads (0: runtime default)")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", c.out, "Output directory");
    sub->add_flag("--json", c.json_out, "Print the report as JSON on stdout");
  };
  auto add_run = [&](CLI::App* sub) {
    sub->add_option("--samples", c.samples, "Samples to record");
    sub->add_option("--duration", c.duration, "Simulated seconds")->check(CLI::PositiveNumber);
    sub->add_option("--blackout", c.blackout, "Dead time after each event (s)")->check(CLI::NonNegativeNumber);
    sub->add_option("--sample-mode", c.sample_mode, "dwell or clocked:<period>");
  };

  std::size_t n = 8;
  std::vector<int> range{-8, 8};
  auto* gen = app.add_subcommand("gen-model", "Random Ising model with integer weights and biases");
  add_common(gen);
  gen->add_option("--n", n, "Neurons")->check(CLI::PositiveNumber);
  gen->add_option("--range", range, "Inclusive integer range lo hi")->expected(2);

  bool check = false;
  auto* map = app.add_subcommand("map", "Map an Ising model to an equivalent Potts model");
  add_common(map);
  map->add_option("--in", inv.model_path, "Ising model JSON")->required();
  map->add_flag("--check", check, "Verify energy equivalence over every state");

  std::string engine = "ctmc";
  bool events = false;
  auto* sample = app.add_subcommand("sample", "Sample a model");
  add_common(sample);
  add_run(sample);
  sample->add_option("--model", inv.model_path, "Model JSON")->required();
  sample->add_option("--config", inv.config_path, "Run config JSON");
  sample->add_option("--engine", engine, "ctmc or gibbs");
  sample->add_option("--temperature", c.temperature, "Temperature")->check(CLI::PositiveNumber);
  sample->add_flag("--events", events, "Also write events.csv");

  std::string samples_path;
  std::size_t batches = 50;
  auto* validate = app.add_subcommand("validate", "Compare samples with the exact Boltzmann distribution");
  add_common(validate);
  validate->add_option("--model", inv.model_path, "Model JSON")->required();
  validate->add_option("--samples", samples_path, "Samples CSV")->required();
  validate->add_option("--temperature", c.temperature, "Temperature")->check(CLI::PositiveNumber);
  validate->add_option("--batches", batches, "Sub-batches for the KL curve")->check(CLI::Range(2, 1000000));

  std::string mode = "pulse";
  bool compare_erfc = false;
  bool write_trace = false;
  auto* transfer = app.add_subcommand("transfer", "Measure a transfer function");
  add_common(transfer);
  transfer->add_option("--mode", mode, "pulse or neuron");
  transfer->add_option("--config", inv.config_path, "Transfer config JSON")->required();
  transfer->add_option("--samples", c.samples, "Samples per bias point (neuron mode)");
  transfer->add_option("--duration", c.duration, "Trace seconds (pulse mode)")->check(CLI::PositiveNumber);
  transfer->add_option("--temperature", c.temperature, "Temperature (neuron mode)")->check(CLI::PositiveNumber);
  transfer->add_flag("--compare-erfc", compare_erfc, "Also fit erfc and compare residuals");
  transfer->add_flag("--trace", write_trace, "Write trace.csv");

  auto* anneal_cmd = app.add_subcommand("anneal", "Anneal a model along a temperature schedule");
  add_common(anneal_cmd);
  add_run(anneal_cmd);
  anneal_cmd->add_option("--model", inv.model_path, "Model JSON")->required();
  anneal_cmd->add_option("--config", inv.config_path, "Run config JSON");
  anneal_cmd->add_option("--schedule", c.schedule, "Schedule JSON")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    set_jobs(c.jobs);
    fs::create_directories(c.out);
    if (*gen) {
      inv.command = "gen-model";
      if (range[0] > range[1]) throw std::invalid_argument("--range: lo must not exceed hi");
      return cmd_gen_model(c, inv, n, range[0], range[1], out);
    }
    if (*map) {
      inv.command = "map";
      return cmd_map(c, inv, check, out);
    }
    if (*sample) {
      inv.command = "sample";
      return cmd_sample(c, inv, engine, events, out);
    }
    if (*validate) {
      inv.command = "validate";
      return cmd_validate(c, inv, samples_path, batches, out);
    }
    if (*transfer) {
      inv.command = "transfer";
      const json doc = io::read_json(inv.config_path);
      io::check_schema(doc, "transfer config");
      if (mode == "pulse") return transfer_pulse(c, inv, doc, compare_erfc, write_trace, out);
      if (mode == "neuron") return transfer_neuron(c, inv, doc, out);
      throw std::invalid_argument("transfer: --mode must be pulse or neuron");
    }
    inv.command = "anneal";
    return cmd_anneal(c, inv, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace spad::cli
