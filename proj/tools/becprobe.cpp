// becprobe: command-line driver.
//
// Exit codes: 0 success, 1 computation or IO error, 2 usage or configuration error.
// Results go to stdout and files; diagnostics go to stderr.

#include "becprobe/dynamics.hpp"
#include "becprobe/error.hpp"
#include "becprobe/io.hpp"
#include "becprobe/sweeps.hpp"
#include "becprobe/units.hpp"
#include "becprobe/validation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace becprobe;

struct Overrides {
  std::string config_path;
  std::optional<int> dim;
  std::optional<std::string> temperature;
  std::optional<std::string> a_B;
  std::optional<double> horizon;
  std::optional<double> tol;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> dims;
  // trace
  std::optional<double> t_end;
  std::optional<std::size_t> points;
  // sweeps and critical brackets, "value unit"
  std::optional<std::string> lo, hi;
  std::optional<std::size_t> count;
  std::optional<std::string> spacing;
  bool plot = false;
};

RunConfig load(const Overrides& o, bool config_required = true) {
  RunConfig cfg;
  if (!o.config_path.empty())
    cfg = load_config(o.config_path);
  else if (config_required)
    throw ConfigError("--config is required");
  if (o.dim) {
    const auto d = dimension_from_int(*o.dim);
    if (!d) throw ConfigError("--dim must be 1, 2 or 3");
    cfg.physical.dim = *d;
  }
  if (o.temperature) cfg.physical.T = parse_quantity(*o.temperature, Quantity::temperature, cfg.a_Rb);
  if (o.a_B) {
    cfg.physical.a_B = parse_quantity(*o.a_B, Quantity::length, cfg.a_Rb);
    cfg.physical.gB_red_override.reset();
  }
  if (o.horizon) cfg.finder.horizon = *o.horizon;
  if (o.tol) cfg.quadrature.rel_tol = *o.tol;
  if (o.workers) cfg.workers = *o.workers;
  if (o.seed) cfg.seed = *o.seed;
  if (o.dims) cfg.sweep_dims = detail::parse_dims(*o.dims);
  if (o.t_end) cfg.trace.t_end = *o.t_end;
  if (o.points) cfg.trace.points = *o.points;
  if (o.plot) cfg.output.plot_data = true;
  cfg.finder.check();
  cfg.quadrature.check();
  if (cfg.workers < 1) throw ConfigError("--workers must be >= 1");
  return cfg;
}

std::string stem_for(const RunConfig& cfg, const Overrides& o, const std::string& command) {
  if (o.out) return *o.out;
  std::filesystem::create_directories(cfg.output.directory);
  return (std::filesystem::path(cfg.output.directory) / (cfg.output.prefix + "-" + command)).string();
}

void require_valid(const PhysicalConfig& c) {
  if (auto v = validate(c); !v.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& x : v) msg += "\n  " + x.field + ": " + x.message;
    throw ConfigError(msg);
  }
}

int cmd_trace(const Overrides& o) {
  const RunConfig cfg = load(o);
  require_valid(cfg.physical);
  const auto p = to_reduced(cfg.physical);
  const auto tr = trace(p, cfg.trace.t_end, cfg.trace.points, cfg.quadrature, cfg.workers);
  const std::string stem = stem_for(cfg, o, "trace");
  write_trace(tr, stem + ".csv");
  write_json(make_sidecar(cfg, "trace", {{"points", tr.times.size()}, {"t_end", cfg.trace.t_end}}), stem + ".json");
  if (cfg.output.plot_data) write_trace_plot_data(tr, stem);
  std::printf("wrote %s.csv (%zu points)\n", stem.c_str(), tr.times.size());
  return 0;
}

int cmd_measure(const Overrides& o) {
  const RunConfig cfg = load(o);
  require_valid(cfg.physical);
  const auto m = non_markovianity(to_reduced(cfg.physical), cfg.finder, cfg.quadrature);
  std::printf("dim %s\n", std::string(to_string(cfg.physical.dim)).c_str());
  std::printf("N %.17g\n", m.N);
  if (m.interval.present) {
    std::printf("a %.17g\nb %.17g\n", m.interval.a, m.interval.b);
    std::printf("Gamma_a %.17g\nGamma_b %.17g\n", m.gamma_a, m.gamma_b);
  } else {
    std::printf("a none\nb none\n");
  }
  for (const auto& f : m.diagnostics.flags()) std::printf("flag %s\n", f.c_str());
  const std::string stem = stem_for(cfg, o, "measure");
  write_json(make_sidecar(cfg, "measure", measure_json(m)), stem + ".json");
  return 0;
}

int cmd_sweep(const Overrides& o, SweepAxis axis) {
  const RunConfig cfg = load(o);
  SweepSpec spec;
  spec.base = cfg.physical;
  spec.axis = axis;
  spec.dims = cfg.sweep_dims;
  spec.finder = cfg.finder;
  spec.quadrature = cfg.quadrature;
  spec.workers = cfg.workers;

  RangeSettings range = axis == SweepAxis::temperature ? cfg.sweep_temperature : cfg.sweep_scattering;
  const Quantity q = axis == SweepAxis::temperature ? Quantity::temperature : Quantity::length;
  if (o.lo) range.min = parse_quantity(*o.lo, q, cfg.a_Rb);
  if (o.hi) range.max = parse_quantity(*o.hi, q, cfg.a_Rb);
  if (o.count) range.count = *o.count;
  if (o.spacing) range.spacing = detail::parse_spacing(*o.spacing);
  if (!range.configured())
    throw ConfigError("sweep range is not configured; set [sweep_" +
                      std::string(axis == SweepAxis::temperature ? "temperature" : "scattering") +
                      "] or pass --min/--max/--count");
  spec.values = range.values();

  const auto rows = run_sweep(spec);
  const std::string command = axis == SweepAxis::temperature ? "sweep-temperature" : "sweep-scattering";
  const std::string stem = stem_for(cfg, o, command);
  write_sweep(rows, axis, stem + ".csv");

  RunConfig snapshot = cfg;
  (axis == SweepAxis::temperature ? snapshot.sweep_temperature : snapshot.sweep_scattering) = range;
  nlohmann::json res;
  res["rows"] = rows.size();
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.status == RowStatus::failed;
  res["failed_rows"] = failed;
  res["indicator_transitions"] = indicator_transitions(rows, spec.dims, cfg.critical.eps_N);
  write_json(make_sidecar(snapshot, command, res), stem + ".json");
  if (cfg.output.plot_data) write_sweep_plot_data(rows, axis, stem);

  for (const auto& r : rows) {
    if (r.status == RowStatus::failed)
      std::printf("%s %.6g failed: %s\n", std::string(to_string(r.dim)).c_str(), r.value, r.error.c_str());
    else
      std::printf("%s %.6g N=%.6g\n", std::string(to_string(r.dim)).c_str(), r.value, r.measure.N);
  }
  if (failed) std::fprintf(stderr, "%zu of %zu rows failed\n", failed, rows.size());
  return 0;
}

int cmd_critical(const Overrides& o, SweepAxis axis) {
  const RunConfig cfg = load(o);
  const Quantity q = axis == SweepAxis::temperature ? Quantity::temperature : Quantity::length;
  std::optional<double> lo = axis == SweepAxis::temperature ? cfg.critical.temperature_lo : cfg.critical.scattering_lo;
  std::optional<double> hi = axis == SweepAxis::temperature ? cfg.critical.temperature_hi : cfg.critical.scattering_hi;
  if (o.lo) lo = parse_quantity(*o.lo, q, cfg.a_Rb);
  if (o.hi) hi = parse_quantity(*o.hi, q, cfg.a_Rb);
  if (!lo || !hi) throw ConfigError("critical bracket missing; set it in [critical] or pass --lo and --hi");

  CriticalOptions opt;
  opt.eps_N = cfg.critical.eps_N;
  opt.rel_width = cfg.critical.rel_width;
  opt.finder = cfg.finder;
  opt.finder.open_policy = OpenIntervalPolicy::truncate;
  opt.quadrature = cfg.quadrature;
  const auto r = critical_point(cfg.physical, cfg.physical.dim, axis, *lo, *hi, opt);

  const bool temp = axis == SweepAxis::temperature;
  std::printf("dim %s\n", std::string(to_string(cfg.physical.dim)).c_str());
  if (temp)
    std::printf("T_crit %.9g K (%.6g nK)\n", r.value, r.value * 1e9);
  else
    std::printf("a_crit %.9g m (%.6g a_Rb)\n", r.value, r.value / cfg.a_Rb);
  std::printf("bracket %.9g %.9g\nsteps %zu\n", r.lo, r.hi, r.steps);

  const std::string command = temp ? "critical-temperature" : "critical-scattering";
  RunConfig snapshot = cfg;
  if (temp) {
    snapshot.critical.temperature_lo = lo;
    snapshot.critical.temperature_hi = hi;
  } else {
    snapshot.critical.scattering_lo = lo;
    snapshot.critical.scattering_hi = hi;
  }
  write_json(make_sidecar(snapshot, command,
                          {{"value", r.value}, {"lo", r.lo}, {"hi", r.hi}, {"N_lo", r.N_lo}, {"N_hi", r.N_hi},
                           {"steps", r.steps}}),
             stem_for(cfg, o, command) + ".json");
  return 0;
}

int cmd_validate(const Overrides& o) {
  const RunConfig cfg = load(o, false);
  ValidationOptions v;
  v.seed = cfg.seed;
  v.workers = cfg.workers;
  const auto rep = run_validation(v);
  std::fputs(format_report(rep).c_str(), stdout);
  return rep.passed() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Impurity-qubit dephasing in a Bose gas: decoherence traces, non-Markovianity, crossovers"};
  app.require_subcommand(1);
  Overrides o;

  auto common = [&o](CLI::App* s, bool with_config = true) {
    if (with_config) s->add_option("--config", o.config_path, "configuration file")->required();
    s->add_option("--workers", o.workers, "worker threads");
    s->add_option("--seed", o.seed, "random seed");
    s->add_option("--horizon", o.horizon, "search horizon (reduced time units)");
    s->add_option("--tol", o.tol, "quadrature relative tolerance");
    s->add_option("--out", o.out, "output path stem");
  };
  auto physics = [&o](CLI::App* s) {
    s->add_option("--dim", o.dim, "reservoir dimension (1, 2, 3)");
    s->add_option("--temperature", o.temperature, "temperature, e.g. \"6.5 nK\"");
    s->add_option("--a-B", o.a_B, "boson scattering length, e.g. \"1.0 a_Rb\"");
  };

  auto* tr = app.add_subcommand("trace", "Gamma, gamma and coherence on a uniform time grid");
  common(tr);
  physics(tr);
  tr->add_option("--t-end", o.t_end, "last time (reduced units)");
  tr->add_option("--points", o.points, "grid points");
  tr->add_flag("--plot-data", o.plot, "also write per-curve files");

  auto* me = app.add_subcommand("measure", "negative-rate interval and N");
  common(me);
  physics(me);

  CLI::App* sweeps[2];
  sweeps[0] = app.add_subcommand("sweep-temperature", "N versus temperature");
  sweeps[1] = app.add_subcommand("sweep-scattering", "N versus boson scattering length");
  for (auto* s : sweeps) {
    common(s);
    physics(s);
    s->add_option("--min", o.lo, "first value with unit");
    s->add_option("--max", o.hi, "last value with unit");
    s->add_option("--count", o.count, "number of values");
    s->add_option("--spacing", o.spacing, "linear or log");
    s->add_option("--dims", o.dims, "dimensions, e.g. 1,2,3");
    s->add_flag("--plot-data", o.plot, "also write per-curve files");
  }

  CLI::App* crit[2];
  crit[0] = app.add_subcommand("critical-scattering", "bisect the crossover in a_B");
  crit[1] = app.add_subcommand("critical-temperature", "bisect the crossover in T");
  for (auto* s : crit) {
    common(s);
    physics(s);
    s->add_option("--lo", o.lo, "bracket start with unit");
    s->add_option("--hi", o.hi, "bracket end with unit");
  }

  auto* va = app.add_subcommand("validate", "run the built-in oracle suite");
  common(va, false);
  va->add_option("--config", o.config_path, "configuration file (optional)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (tr->parsed()) return cmd_trace(o);
    if (me->parsed()) return cmd_measure(o);
    if (sweeps[0]->parsed()) return cmd_sweep(o, SweepAxis::temperature);
    if (sweeps[1]->parsed()) return cmd_sweep(o, SweepAxis::scattering_length);
    if (crit[0]->parsed()) return cmd_critical(o, SweepAxis::scattering_length);
    if (crit[1]->parsed()) return cmd_critical(o, SweepAxis::temperature);
    if (va->parsed()) return cmd_validate(o);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
