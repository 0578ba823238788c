#pragma once

// Run configuration (flat `[section]` / `key = value` text with mandatory unit
// suffixes), canonical re-serialization, CSV output with a JSON sidecar, and
// per-curve plot data.

#include "becprobe/dynamics.hpp"
#include "becprobe/error.hpp"
#include "becprobe/quadrature.hpp"
#include "becprobe/sweeps.hpp"
#include "becprobe/units.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace becprobe {

inline constexpr std::string_view tool_name = "becprobe";
inline constexpr std::string_view tool_version = "0.3.0";

class IoError : public Error {
public:
  using Error::Error;
};

struct RangeSettings {
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
  Spacing spacing = Spacing::linear;

  bool configured() const noexcept { return count > 0; }
  std::vector<double> values() const { return make_values(min, max, count, spacing); }
};

struct TraceSettings {
  double t_end = 20.0; ///< reduced time units
  std::size_t points = 201;
};

struct CriticalSettings {
  double eps_N = 1e-6;
  double rel_width = 1e-3;
  std::optional<double> temperature_lo, temperature_hi; ///< K
  std::optional<double> scattering_lo, scattering_hi;   ///< m
};

struct OutputSettings {
  std::string directory = ".";
  std::string prefix = "becprobe";
  bool plot_data = false;
};

struct RunConfig {
  PhysicalConfig physical;
  double a_Rb = 5.31e-9; ///< reference length for the `a_Rb` unit (m)
  QuadratureSpec quadrature;
  FinderOptions finder;
  TraceSettings trace;
  RangeSettings sweep_temperature;
  RangeSettings sweep_scattering;
  std::vector<Dimension> sweep_dims{Dimension::D1, Dimension::D2, Dimension::D3};
  CriticalSettings critical;
  OutputSettings output;
  unsigned workers = 1;
  std::uint64_t seed = 42;
};

// --------------------------------------------------------------------------
// Units

enum class Quantity { length, temperature, mass, density1, density2, density3, number, integer, word };

namespace detail {

struct UnitDef {
  std::string_view name;
  Quantity quantity;
  double factor; ///< to SI
};

// a_Rb is resolved against the configured reference and handled separately.
inline constexpr UnitDef unit_table[] = {
    {"m", Quantity::length, 1.0},
    {"nm", Quantity::length, 1e-9},
    {"um", Quantity::length, 1e-6},
    {"a0", Quantity::length, si::bohr},
    {"K", Quantity::temperature, 1.0},
    {"nK", Quantity::temperature, 1e-9},
    {"uK", Quantity::temperature, 1e-6},
    {"kg", Quantity::mass, 1.0},
    {"amu", Quantity::mass, si::amu},
    {"per_m", Quantity::density1, 1.0},
    {"per_um", Quantity::density1, 1e6},
    {"per_m2", Quantity::density2, 1.0},
    {"per_um2", Quantity::density2, 1e12},
    {"per_m3", Quantity::density3, 1.0},
    {"per_um3", Quantity::density3, 1e18},
};

inline std::string_view quantity_name(Quantity q) {
  switch (q) {
  case Quantity::length: return "length (m, nm, um, a0, a_Rb)";
  case Quantity::temperature: return "temperature (K, nK, uK)";
  case Quantity::mass: return "mass (kg, amu)";
  case Quantity::density1: return "1D density (per_m, per_um)";
  case Quantity::density2: return "2D density (per_m2, per_um2)";
  case Quantity::density3: return "3D density (per_m3, per_um3)";
  case Quantity::number: return "plain number";
  case Quantity::integer: return "integer";
  case Quantity::word: return "word";
  }
  return "?";
}

inline std::string_view canonical_unit(Quantity q) {
  switch (q) {
  case Quantity::length: return "m";
  case Quantity::temperature: return "K";
  case Quantity::mass: return "kg";
  case Quantity::density1: return "per_m";
  case Quantity::density2: return "per_m2";
  case Quantity::density3: return "per_m3";
  default: return "";
  }
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::string fmt17(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::optional<double> parse_number(std::string_view s) {
  std::string str(s);
  if (str.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (end != str.c_str() + str.size()) return std::nullopt;
  return v;
}

struct KeyDef {
  std::string_view section;
  std::string_view key;
  Quantity quantity;
  std::function<void(RunConfig&, double)> set_number;
  std::function<void(RunConfig&, std::string_view)> set_word = {};
};

inline Spacing parse_spacing(std::string_view w) {
  if (w == "linear") return Spacing::linear;
  if (w == "log") return Spacing::log;
  throw ConfigError("spacing must be linear or log, got '" + std::string(w) + "'");
}

inline std::vector<Dimension> parse_dims(std::string_view w) {
  std::vector<Dimension> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    const auto d = parse_number(cur);
    if (!d || !dimension_from_int(static_cast<long>(*d)) || *d != std::floor(*d))
      throw ConfigError("dims entries must be 1, 2 or 3, got '" + cur + "'");
    out.push_back(*dimension_from_int(static_cast<long>(*d)));
    cur.clear();
  };
  for (char ch : w) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch)))
      flush();
    else
      cur += ch;
  }
  flush();
  if (out.empty()) throw ConfigError("dims must list at least one dimension");
  return out;
}

inline const std::vector<KeyDef>& key_table() {
  using Q = Quantity;
  static const std::vector<KeyDef> table = {
      {"reference", "a_Rb", Q::length, [](RunConfig& c, double v) { c.a_Rb = v; }},

      {"gas", "m_A", Q::mass, [](RunConfig& c, double v) { c.physical.m_A = v; }},
      {"gas", "m_B", Q::mass, [](RunConfig& c, double v) { c.physical.m_B = v; }},
      {"gas", "a_B", Q::length, [](RunConfig& c, double v) { c.physical.a_B = v; }},
      {"gas", "a_AB", Q::length, [](RunConfig& c, double v) { c.physical.a_AB = v; }},
      {"gas", "n0_1d", Q::density1, [](RunConfig& c, double v) { c.physical.n0[0] = v; }},
      {"gas", "n0_2d", Q::density2, [](RunConfig& c, double v) { c.physical.n0[1] = v; }},
      {"gas", "n0_3d", Q::density3, [](RunConfig& c, double v) { c.physical.n0[2] = v; }},
      {"gas", "transverse_length_1d", Q::length,
       [](RunConfig& c, double v) { c.physical.transverse_length_1d = v; }},
      {"gas", "transverse_length_2d", Q::length,
       [](RunConfig& c, double v) { c.physical.transverse_length_2d = v; }},
      {"gas", "temperature", Q::temperature, [](RunConfig& c, double v) { c.physical.T = v; }},
      {"gas", "dim", Q::integer,
       [](RunConfig& c, double v) {
         const auto d = dimension_from_int(static_cast<long>(v));
         if (!d) throw ConfigError("dim must be 1, 2 or 3");
         c.physical.dim = *d;
       }},
      {"gas", "gB_red", Q::number, [](RunConfig& c, double v) { c.physical.gB_red_override = v; }},
      {"gas", "n0_red", Q::number, [](RunConfig& c, double v) { c.physical.n0_red_override = v; }},

      {"well", "tau", Q::length, [](RunConfig& c, double v) { c.physical.tau = v; }},
      {"well", "L", Q::length, [](RunConfig& c, double v) { c.physical.L = v; }},

      {"run", "horizon", Q::number, [](RunConfig& c, double v) { c.finder.horizon = v; }},
      {"run", "workers", Q::integer,
       [](RunConfig& c, double v) {
         if (v < 1) throw ConfigError("workers must be >= 1");
         c.workers = static_cast<unsigned>(v);
       }},
      {"run", "seed", Q::integer,
       [](RunConfig& c, double v) {
         if (v < 0) throw ConfigError("seed must be >= 0");
         c.seed = static_cast<std::uint64_t>(v);
       }},
      {"run", "open_interval", Q::word, nullptr,
       [](RunConfig& c, std::string_view w) {
         if (w == "error")
           c.finder.open_policy = OpenIntervalPolicy::error;
         else if (w == "truncate")
           c.finder.open_policy = OpenIntervalPolicy::truncate;
         else
           throw ConfigError("open_interval must be error or truncate");
       }},
      {"run", "root_rel_tol", Q::number, [](RunConfig& c, double v) { c.finder.root_rel_tol = v; }},
      {"run", "coarse_points", Q::integer,
       [](RunConfig& c, double v) { c.finder.coarse_points = static_cast<std::size_t>(v); }},
      {"run", "rate_floor_rel", Q::number, [](RunConfig& c, double v) { c.finder.rate_floor_rel = v; }},
      {"run", "rate_floor_abs", Q::number, [](RunConfig& c, double v) { c.finder.rate_floor_abs = v; }},

      {"quadrature", "rel_tol", Q::number, [](RunConfig& c, double v) { c.quadrature.rel_tol = v; }},
      {"quadrature", "abs_tol", Q::number, [](RunConfig& c, double v) { c.quadrature.abs_tol = v; }},
      {"quadrature", "k_max_sigma", Q::number, [](RunConfig& c, double v) { c.quadrature.k_max_sigma = v; }},
      {"quadrature", "max_panels", Q::integer,
       [](RunConfig& c, double v) { c.quadrature.max_panels = static_cast<std::size_t>(v); }},
      {"quadrature", "oscillation_guard", Q::number,
       [](RunConfig& c, double v) { c.quadrature.oscillation_guard = v; }},

      {"trace", "t_end", Q::number, [](RunConfig& c, double v) { c.trace.t_end = v; }},
      {"trace", "points", Q::integer,
       [](RunConfig& c, double v) { c.trace.points = static_cast<std::size_t>(v); }},

      {"sweep_temperature", "min", Q::temperature, [](RunConfig& c, double v) { c.sweep_temperature.min = v; }},
      {"sweep_temperature", "max", Q::temperature, [](RunConfig& c, double v) { c.sweep_temperature.max = v; }},
      {"sweep_temperature", "count", Q::integer,
       [](RunConfig& c, double v) { c.sweep_temperature.count = static_cast<std::size_t>(v); }},
      {"sweep_temperature", "spacing", Q::word, nullptr,
       [](RunConfig& c, std::string_view w) { c.sweep_temperature.spacing = parse_spacing(w); }},

      {"sweep_scattering", "min", Q::length, [](RunConfig& c, double v) { c.sweep_scattering.min = v; }},
      {"sweep_scattering", "max", Q::length, [](RunConfig& c, double v) { c.sweep_scattering.max = v; }},
      {"sweep_scattering", "count", Q::integer,
       [](RunConfig& c, double v) { c.sweep_scattering.count = static_cast<std::size_t>(v); }},
      {"sweep_scattering", "spacing", Q::word, nullptr,
       [](RunConfig& c, std::string_view w) { c.sweep_scattering.spacing = parse_spacing(w); }},
      {"run", "dims", Q::word, nullptr,
       [](RunConfig& c, std::string_view w) { c.sweep_dims = parse_dims(w); }},

      {"critical", "eps_N", Q::number, [](RunConfig& c, double v) { c.critical.eps_N = v; }},
      {"critical", "rel_width", Q::number, [](RunConfig& c, double v) { c.critical.rel_width = v; }},
      {"critical", "temperature_lo", Q::temperature,
       [](RunConfig& c, double v) { c.critical.temperature_lo = v; }},
      {"critical", "temperature_hi", Q::temperature,
       [](RunConfig& c, double v) { c.critical.temperature_hi = v; }},
      {"critical", "scattering_lo", Q::length, [](RunConfig& c, double v) { c.critical.scattering_lo = v; }},
      {"critical", "scattering_hi", Q::length, [](RunConfig& c, double v) { c.critical.scattering_hi = v; }},

      {"output", "directory", Q::word, nullptr, [](RunConfig& c, std::string_view w) { c.output.directory = w; }},
      {"output", "prefix", Q::word, nullptr, [](RunConfig& c, std::string_view w) { c.output.prefix = w; }},
      {"output", "plot_data", Q::word, nullptr,
       [](RunConfig& c, std::string_view w) {
         if (w == "true")
           c.output.plot_data = true;
         else if (w == "false")
           c.output.plot_data = false;
         else
           throw ConfigError("plot_data must be true or false");
       }},
  };
  return table;
}

inline std::string nearest(std::string_view word, const std::vector<std::string_view>& options) {
  std::string_view best;
  std::size_t best_d = static_cast<std::size_t>(-1);
  for (auto o : options) {
    const std::size_t d = edit_distance(word, o);
    if (d < best_d) {
      best_d = d;
      best = o;
    }
  }
  return std::string(best);
}

} // namespace detail

// --------------------------------------------------------------------------
// Parsing

/// Parses the configuration text. Sections and keys are fixed; an unknown
/// key, a missing or wrong unit, or a repeated key is an error carrying the
/// line number.
inline RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  cfg.physical.T = 0.0;
  const auto& table = detail::key_table();

  std::vector<std::string_view> sections;
  for (const auto& k : table)
    if (std::find(sections.begin(), sections.end(), k.section) == sections.end()) sections.push_back(k.section);

  struct Pending {
    const detail::KeyDef* def;
    double value;
    bool relative; ///< value is in units of a_Rb
    std::size_t line;
  };
  std::vector<Pending> pending;
  std::map<std::string, std::size_t> seen;
  std::string section;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    auto fail = [line_no](const std::string& msg) -> ConfigError {
      return ConfigError("line " + std::to_string(line_no) + ": " + msg);
    };

    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = detail::trim(line);
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }

    if (line.front() == '[') {
      if (line.back() != ']') throw fail("malformed section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (std::find(sections.begin(), sections.end(), section) == sections.end())
        throw fail("unknown section [" + section + "]; did you mean [" + detail::nearest(section, sections) + "]?");
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw fail("expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    std::string_view value = detail::trim(line.substr(eq + 1));
    if (section.empty()) throw fail("key '" + key + "' appears before any [section]");
    if (key.empty()) throw fail("empty key");

    const detail::KeyDef* def = nullptr;
    std::vector<std::string_view> in_section;
    for (const auto& k : table) {
      if (k.section != section) continue;
      in_section.push_back(k.key);
      if (k.key == key) def = &k;
    }
    if (!def)
      throw fail("unknown key '" + key + "' in [" + section + "]; did you mean '" +
                 detail::nearest(key, in_section) + "'?");
    const std::string full = section + "." + key;
    if (auto it = seen.find(full); it != seen.end())
      throw fail("key '" + key + "' repeated (first set on line " + std::to_string(it->second) + ")");
    seen[full] = line_no;

    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (value.empty()) throw fail("key '" + key + "' has no value");

    try {
      if (def->quantity == Quantity::word) {
        def->set_word(cfg, value);
        continue;
      }
      const std::size_t sp = value.find_first_of(" \t");
      const std::string_view num = value.substr(0, sp);
      const std::string_view unit = sp == std::string_view::npos ? std::string_view{} : detail::trim(value.substr(sp));
      const auto x = detail::parse_number(num);
      if (!x) throw fail("key '" + key + "': cannot parse number '" + std::string(num) + "'");

      if (def->quantity == Quantity::number || def->quantity == Quantity::integer) {
        if (!unit.empty())
          throw fail("unit mismatch for key '" + key + "': expects a " +
                     std::string(detail::quantity_name(def->quantity)) + ", got unit '" + std::string(unit) + "'");
        if (def->quantity == Quantity::integer && *x != std::floor(*x))
          throw fail("key '" + key + "' expects an integer");
        def->set_number(cfg, *x);
        continue;
      }
      if (unit.empty())
        throw fail("key '" + key + "' needs a unit suffix: " + std::string(detail::quantity_name(def->quantity)));
      if (unit == "a_Rb") {
        if (def->quantity != Quantity::length || def->key == "a_Rb")
          throw fail("unit mismatch for key '" + key + "': a_Rb is a relative length unit");
        pending.push_back({def, *x, true, line_no});
        continue;
      }
      const detail::UnitDef* u = nullptr;
      for (const auto& d : detail::unit_table)
        if (d.name == unit) u = &d;
      if (!u) throw fail("key '" + key + "': unknown unit '" + std::string(unit) + "'");
      if (u->quantity != def->quantity)
        throw fail("unit mismatch for key '" + key + "': expects a " +
                   std::string(detail::quantity_name(def->quantity)) + ", got '" + std::string(unit) + "'");
      pending.push_back({def, *x * u->factor, false, line_no});
    } catch (const ConfigError& e) {
      const std::string what = e.what();
      if (what.rfind("line ", 0) == 0) throw;
      throw fail(what);
    }
  }

  // the reference length first, then everything that may be relative to it
  for (const auto& p : pending)
    if (p.def->key == "a_Rb") p.def->set_number(cfg, p.value);
  for (const auto& p : pending) {
    if (p.def->key == "a_Rb") continue;
    try {
      p.def->set_number(cfg, p.relative ? p.value * cfg.a_Rb : p.value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(p.line) + ": " + e.what());
    }
  }
  return cfg;
}

/// A single "value unit" string, e.g. "6.5 nK" or "1.0 a_Rb", in SI.
inline double parse_quantity(std::string_view text, Quantity q, double a_Rb) {
  text = detail::trim(text);
  const std::size_t sp = text.find_first_of(" \t");
  const std::string_view num = text.substr(0, sp);
  const std::string_view unit = sp == std::string_view::npos ? std::string_view{} : detail::trim(text.substr(sp));
  const auto x = detail::parse_number(num);
  if (!x) throw ConfigError("cannot parse number in '" + std::string(text) + "'");
  if (q == Quantity::number || q == Quantity::integer || q == Quantity::word) {
    if (!unit.empty()) throw ConfigError("'" + std::string(text) + "' should not carry a unit");
    return *x;
  }
  if (unit.empty())
    throw ConfigError("'" + std::string(text) + "' needs a unit: " + std::string(detail::quantity_name(q)));
  if (unit == "a_Rb" && q == Quantity::length) return *x * a_Rb;
  for (const auto& d : detail::unit_table)
    if (d.name == unit) {
      if (d.quantity != q)
        throw ConfigError("unit mismatch in '" + std::string(text) + "': expects a " +
                          std::string(detail::quantity_name(q)));
      return *x * d.factor;
    }
  throw ConfigError("unknown unit '" + std::string(unit) + "'");
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// --------------------------------------------------------------------------
// Canonical text

/// Every setting in SI base units with 17 significant digits. Parsing the
/// result reproduces `cfg` exactly.
inline std::string to_config_text(const RunConfig& cfg) {
  using detail::fmt17;
  std::ostringstream o;
  const auto& p = cfg.physical;
  auto q = [&](std::string_view key, double v, Quantity qt) {
    o << key << " = " << fmt17(v);
    if (auto u = detail::canonical_unit(qt); !u.empty()) o << ' ' << u;
    o << '\n';
  };
  o << "[reference]\n";
  q("a_Rb", cfg.a_Rb, Quantity::length);
  o << "\n[gas]\n";
  q("m_A", p.m_A, Quantity::mass);
  q("m_B", p.m_B, Quantity::mass);
  q("a_B", p.a_B, Quantity::length);
  q("a_AB", p.a_AB, Quantity::length);
  q("n0_1d", p.n0[0], Quantity::density1);
  q("n0_2d", p.n0[1], Quantity::density2);
  q("n0_3d", p.n0[2], Quantity::density3);
  if (p.transverse_length_1d) q("transverse_length_1d", *p.transverse_length_1d, Quantity::length);
  if (p.transverse_length_2d) q("transverse_length_2d", *p.transverse_length_2d, Quantity::length);
  q("temperature", p.T, Quantity::temperature);
  o << "dim = " << rank(p.dim) << '\n';
  if (p.gB_red_override) q("gB_red", *p.gB_red_override, Quantity::number);
  if (p.n0_red_override) q("n0_red", *p.n0_red_override, Quantity::number);
  o << "\n[well]\n";
  q("tau", p.tau, Quantity::length);
  q("L", p.L, Quantity::length);
  o << "\n[run]\n";
  q("horizon", cfg.finder.horizon, Quantity::number);
  o << "workers = " << cfg.workers << '\n';
  o << "seed = " << cfg.seed << '\n';
  o << "open_interval = " << (cfg.finder.open_policy == OpenIntervalPolicy::error ? "error" : "truncate") << '\n';
  q("root_rel_tol", cfg.finder.root_rel_tol, Quantity::number);
  o << "coarse_points = " << cfg.finder.coarse_points << '\n';
  q("rate_floor_rel", cfg.finder.rate_floor_rel, Quantity::number);
  q("rate_floor_abs", cfg.finder.rate_floor_abs, Quantity::number);
  o << "dims = ";
  for (std::size_t i = 0; i < cfg.sweep_dims.size(); ++i) o << (i ? "," : "") << rank(cfg.sweep_dims[i]);
  o << '\n';
  o << "\n[quadrature]\n";
  q("rel_tol", cfg.quadrature.rel_tol, Quantity::number);
  q("abs_tol", cfg.quadrature.abs_tol, Quantity::number);
  q("k_max_sigma", cfg.quadrature.k_max_sigma, Quantity::number);
  o << "max_panels = " << cfg.quadrature.max_panels << '\n';
  q("oscillation_guard", cfg.quadrature.oscillation_guard, Quantity::number);
  o << "\n[trace]\n";
  q("t_end", cfg.trace.t_end, Quantity::number);
  o << "points = " << cfg.trace.points << '\n';
  auto range = [&](std::string_view name, const RangeSettings& r, Quantity qt) {
    o << "\n[" << name << "]\n";
    q("min", r.min, qt);
    q("max", r.max, qt);
    o << "count = " << r.count << '\n';
    o << "spacing = " << (r.spacing == Spacing::linear ? "linear" : "log") << '\n';
  };
  range("sweep_temperature", cfg.sweep_temperature, Quantity::temperature);
  range("sweep_scattering", cfg.sweep_scattering, Quantity::length);
  o << "\n[critical]\n";
  q("eps_N", cfg.critical.eps_N, Quantity::number);
  q("rel_width", cfg.critical.rel_width, Quantity::number);
  if (cfg.critical.temperature_lo) q("temperature_lo", *cfg.critical.temperature_lo, Quantity::temperature);
  if (cfg.critical.temperature_hi) q("temperature_hi", *cfg.critical.temperature_hi, Quantity::temperature);
  if (cfg.critical.scattering_lo) q("scattering_lo", *cfg.critical.scattering_lo, Quantity::length);
  if (cfg.critical.scattering_hi) q("scattering_hi", *cfg.critical.scattering_hi, Quantity::length);
  o << "\n[output]\n";
  o << "directory = \"" << cfg.output.directory << "\"\n";
  o << "prefix = \"" << cfg.output.prefix << "\"\n";
  o << "plot_data = " << (cfg.output.plot_data ? "true" : "false") << '\n';
  return o.str();
}

// --------------------------------------------------------------------------
// Output files

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

inline void close_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline std::string join_flags(const std::vector<std::string>& f) {
  std::string s;
  for (const auto& x : f) s += (s.empty() ? "" : ";") + x;
  return s;
}

inline nlohmann::json number_json(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

} // namespace detail

/// Columns t, Gamma, gamma, coherence.
inline void write_trace(const DecoherenceTrace& tr, const std::string& path) {
  auto out = detail::open_out(path);
  out << "t,Gamma,gamma,coherence\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    out << detail::fmt17(tr.times[i]) << ',' << detail::fmt17(tr.gamma_factor[i]) << ','
        << detail::fmt17(tr.decay_rate[i]) << ',' << detail::fmt17(tr.coherence[i]) << '\n';
  detail::close_out(out, path);
}

/// One record per row. Failed rows keep dim, value and the error text and leave
/// the numeric fields empty.
inline void write_sweep(const std::vector<SweepRow>& rows, SweepAxis axis, const std::string& path) {
  auto out = detail::open_out(path);
  out << "dim," << (axis == SweepAxis::temperature ? "T_K" : "a_B_m")
      << ",status,N,a,b,Gamma_a,Gamma_b,intervals,flags,error\n";
  for (const auto& r : rows) {
    out << rank(r.dim) << ',' << detail::fmt17(r.value) << ',';
    if (r.status == RowStatus::failed) {
      std::string err = r.error;
      std::replace(err.begin(), err.end(), '"', '\'');
      out << "status=failed,,,,,,,,\"" << err << "\"\n";
      continue;
    }
    const auto& m = r.measure;
    out << "ok," << detail::fmt17(m.N) << ',';
    if (m.interval.present)
      out << detail::fmt17(m.interval.a) << ',' << detail::fmt17(m.interval.b) << ',' << detail::fmt17(m.gamma_a)
          << ',' << detail::fmt17(m.gamma_b);
    else
      out << ",,,";
    out << ',' << m.diagnostics.interval_count << ',' << detail::join_flags(m.diagnostics.flags()) << ",\n";
  }
  detail::close_out(out, path);
}

inline nlohmann::json reduced_json(const ReducedParams& p) {
  return {{"gB_red", p.gB_red},
          {"gAB_red", p.gAB_red},
          {"n0_red", p.n0_red},
          {"beta_red", detail::number_json(p.beta_red)},
          {"ell", p.ell},
          {"dim", rank(p.dim)},
          {"prefactor", p.prefactor}};
}

inline nlohmann::json measure_json(const MeasureResult& m) {
  nlohmann::json j{{"N", m.N},
                   {"interval_present", m.interval.present},
                   {"interval_count", m.diagnostics.interval_count},
                   {"flags", m.diagnostics.flags()},
                   {"rate_floor", m.diagnostics.rate_floor},
                   {"peak_rate", m.diagnostics.peak_rate},
                   {"rate_evaluations", m.diagnostics.rate_evaluations}};
  if (m.interval.present) {
    j["a"] = m.interval.a;
    j["b"] = m.interval.b;
    j["Gamma_a"] = m.gamma_a;
    j["Gamma_b"] = m.gamma_b;
  }
  return j;
}

/// Sidecar contents: the canonical configuration (CLI overrides applied), the
/// command, tool version, reduced parameters and free-form results.
inline nlohmann::json make_sidecar(const RunConfig& cfg, std::string_view command, const nlohmann::json& results) {
  nlohmann::json j;
  j["tool"] = tool_name;
  j["version"] = tool_version;
  j["command"] = command;
  j["config"] = to_config_text(cfg);
  try {
    j["reduced"] = reduced_json(to_reduced(cfg.physical));
  } catch (const ConfigError&) {
    j["reduced"] = nullptr;
  }
  j["results"] = results;
  return j;
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
  detail::close_out(out, path);
}

struct Sidecar {
  std::string command;
  std::string version;
  RunConfig config;
  nlohmann::json results;
};

inline Sidecar parse_sidecar(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("sidecar is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("config") || !j["config"].is_string())
    throw ConfigError("sidecar has no config text");
  Sidecar s;
  s.command = j.value("command", "");
  s.version = j.value("version", "");
  s.config = parse_config(j["config"].get<std::string>());
  s.results = j.value("results", nlohmann::json{});
  return s;
}

/// Two-column `x,y` files, one per curve, named `<stem>.<curve>.csv`.
/// Returns the paths written.
inline std::vector<std::string> write_plot_data(const std::string& stem, const std::string& x_label,
                                                const std::vector<double>& x,
                                                const std::vector<std::pair<std::string, std::vector<double>>>& curves) {
  std::vector<std::string> paths;
  for (const auto& [name, y] : curves) {
    const std::string path = stem + "." + name + ".csv";
    auto out = detail::open_out(path);
    out << x_label << ',' << name << '\n';
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
      if (std::isfinite(y[i])) out << detail::fmt17(x[i]) << ',' << detail::fmt17(y[i]) << '\n';
    detail::close_out(out, path);
    paths.push_back(path);
  }
  return paths;
}

inline std::vector<std::string> write_trace_plot_data(const DecoherenceTrace& tr, const std::string& stem) {
  return write_plot_data(stem, "t", tr.times,
                         {{"Gamma", tr.gamma_factor}, {"gamma", tr.decay_rate}, {"coherence", tr.coherence}});
}

/// One N-versus-axis curve per dimension; failed rows are omitted.
inline std::vector<std::string> write_sweep_plot_data(const std::vector<SweepRow>& rows, SweepAxis axis,
                                                      const std::string& stem) {
  std::vector<std::string> paths;
  for (Dimension d : all_dimensions) {
    std::vector<double> x, y;
    for (const auto& r : rows)
      if (r.dim == d && r.status == RowStatus::ok) {
        x.push_back(r.value);
        y.push_back(r.measure.N);
      }
    if (x.empty()) continue;
    auto p = write_plot_data(stem, axis == SweepAxis::temperature ? "T_K" : "a_B_m", x,
                             {{"N_" + std::string(to_string(d)), y}});
    paths.insert(paths.end(), p.begin(), p.end());
  }
  return paths;
}

} // namespace becprobe
