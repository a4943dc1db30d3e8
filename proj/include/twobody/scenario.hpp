#pragma once

// Scenario configuration, figure presets and table assembly behind the
// `twobody` command line tool.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "twobody/binding.hpp"
#include "twobody/dynamics.hpp"
#include "twobody/errors.hpp"
#include "twobody/table.hpp"

namespace twobody {

inline constexpr const char* kVersion = "1.0.0";

enum class SpecKind { general, celestial, equal_mass, figure1, figure2, figure3, figure4 };
enum class Units { geometrized, si };

inline const char* to_string(SpecKind k) {
  switch (k) {
    case SpecKind::general: return "general";
    case SpecKind::celestial: return "celestial";
    case SpecKind::equal_mass: return "equal-mass";
    case SpecKind::figure1: return "figure1";
    case SpecKind::figure2: return "figure2";
    case SpecKind::figure3: return "figure3";
    case SpecKind::figure4: return "figure4";
  }
  return "unknown";
}

// Independent variable of each kind.
inline bool grid_in_energy(SpecKind k) {
  return k == SpecKind::general || k == SpecKind::figure1 || k == SpecKind::figure2;
}

struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 512;
  bool lo_auto = true;
  bool hi_auto = true;
};

struct ScenarioSpec {
  SpecKind kind = SpecKind::figure1;
  TwoBodyConfig cfg;
  Units units = Units::geometrized;
  GridSpec grid;
  std::optional<double> anchor_eb;
  TableFormat format = TableFormat::csv;
  std::string out = "-";
  std::optional<std::string> plot;
  bool with_time = false;
  bool errata_diagnostic = false;
};

// --help / --version: the text to print, exit status 0.
class HelpRequested : public std::runtime_error {
 public:
  explicit HelpRequested(const std::string& text) : std::runtime_error(text) {}
};

inline constexpr double kSiGravitationalConstant = 6.67430e-11;  // m^3 kg^-1 s^-2
inline constexpr double kSiSpeedOfLight = 299792458.0;           // m/s

namespace detail {

struct RawFlags {
  std::optional<double> m1, s, G, c, rtol, atol;
  std::string units = "geom";
  std::string eb_min = "auto", eb_max = "auto", r_min = "auto", r_max = "auto", eb0 = "auto";
  std::optional<long long> samples;
  std::string format = "csv";
  std::string out = "-";
  std::optional<std::string> plot;
  bool with_time = false;
  bool errata = false;
};

inline void add_flags(CLI::App& cmd, RawFlags& f) {
  cmd.add_option("--m1", f.m1, "rest mass of the lighter body");
  cmd.add_option("--s", f.s, "mass ratio m2/m1 (>= 1)");
  cmd.add_option("--G", f.G, "gravitational constant");
  cmd.add_option("--c", f.c, "speed of light");
  cmd.add_option("--units", f.units, "geom | si");
  cmd.add_option("--eb-min", f.eb_min, "lowest binding energy (real | auto)");
  cmd.add_option("--eb-max", f.eb_max, "highest binding energy (real | auto)");
  cmd.add_option("--r-min", f.r_min, "smallest separation (real | auto)");
  cmd.add_option("--r-max", f.r_max, "largest separation (real | auto)");
  cmd.add_option("--eb0", f.eb0, "anchor binding energy of the general solver (real | auto)");
  cmd.add_option("--samples", f.samples, "number of grid points (>= 2)");
  cmd.add_option("--rtol", f.rtol, "relative tolerance");
  cmd.add_option("--atol", f.atol, "absolute tolerance");
  cmd.add_option("--format", f.format, "csv | json");
  cmd.add_option("--out", f.out, "output path, - for stdout");
  cmd.add_option("--plot", f.plot, "SVG output path");
  cmd.add_flag("--with-time", f.with_time, "reconstruct coordinate time");
  cmd.add_flag("--errata-diagnostic", f.errata, "also evaluate the verbatim printed formulas");
}

inline std::optional<double> real_or_auto(const std::string& flag, const std::string& text) {
  if (text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError(flag, flag + ": expected a real number or 'auto', got '" + text + "'");
  }
}

inline void require(bool ok, const std::string& flag, const std::string& what) {
  if (!ok) throw UsageError(flag, flag + ": " + what);
}

}  // namespace detail

/// Parses the arguments after the program name.
inline ScenarioSpec parse_args(std::span<const std::string> args) {
  CLI::App app{"Two-body infall with rest-mass deficit", "twobody"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  detail::RawFlags flags;
  const std::vector<std::pair<SpecKind, const char*>> kinds{
      {SpecKind::general, "integrate the general mass-ratio case"},
      {SpecKind::celestial, "closed form for a fixed heavy partner"},
      {SpecKind::equal_mass, "closed form for equal masses"},
      {SpecKind::figure1, "masses, speed and f1 against binding energy (s = sqrt 2)"},
      {SpecKind::figure2, "figure1 plus the separation r(E) (s = sqrt 2)"},
      {SpecKind::figure3, "celestial infall, m2 = 10000 m1, 0 <= r <= 60000"},
      {SpecKind::figure4, "equal-mass infall, 0 <= r <= 3"}};
  std::vector<CLI::App*> subs;
  for (const auto& [kind, help] : kinds) {
    CLI::App* sub = app.add_subcommand(to_string(kind), help);
    detail::add_flags(*sub, flags);
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::CallForVersion&) {
    throw HelpRequested(std::string(kVersion) + "\n");
  } catch (const CLI::ParseError& e) {
    std::string flag;
    const std::string msg = e.what();
    if (const auto pos = msg.find("--"); pos != std::string::npos) {
      const auto end = msg.find_first_of(" :=,", pos);
      flag = msg.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    }
    throw UsageError(flag, msg);
  }

  ScenarioSpec spec;
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (subs[i]->parsed()) spec.kind = kinds[i].first;
  const SpecKind kind = spec.kind;
  const bool figure = kind == SpecKind::figure1 || kind == SpecKind::figure2 || kind == SpecKind::figure3 ||
                      kind == SpecKind::figure4;

  if (flags.units == "geom") {
    spec.units = Units::geometrized;
  } else if (flags.units == "si") {
    detail::require(!figure, "--units", "figure presets are defined in geometrized units");
    spec.units = Units::si;
    spec.cfg.G = kSiGravitationalConstant;
    spec.cfg.c = kSiSpeedOfLight;
  } else {
    throw UsageError("--units", "--units: expected geom or si, got '" + flags.units + "'");
  }

  // Figure presets: m1 = 1, c = G = 1 and the preset mass ratio.
  if (kind == SpecKind::figure3) spec.cfg.s = 1e4;
  if (kind == SpecKind::figure4 || kind == SpecKind::equal_mass) spec.cfg.s = 1.0;

  if (flags.m1) {
    detail::require(*flags.m1 > 0.0, "--m1", "must be positive");
    spec.cfg.m1_inf = *flags.m1;
  }
  if (flags.s) {
    detail::require(*flags.s >= 1.0, "--s", "must be >= 1");
    detail::require(!(kind == SpecKind::equal_mass || kind == SpecKind::figure4) || *flags.s == 1.0, "--s",
                    "equal-mass scenarios require s = 1");
    spec.cfg.s = *flags.s;
  }
  if (flags.G) {
    detail::require(*flags.G > 0.0, "--G", "must be positive");
    spec.cfg.G = *flags.G;
  }
  if (flags.c) {
    detail::require(*flags.c > 0.0, "--c", "must be positive");
    spec.cfg.c = *flags.c;
  }
  if (flags.rtol) {
    detail::require(*flags.rtol > 0.0, "--rtol", "must be positive");
    spec.cfg.tol_rel = *flags.rtol;
  }
  if (flags.atol) {
    detail::require(*flags.atol > 0.0, "--atol", "must be positive");
    spec.cfg.tol_abs = *flags.atol;
  }
  if (flags.samples) {
    detail::require(*flags.samples >= 2, "--samples", "must be at least 2");
    spec.grid.count = static_cast<std::size_t>(*flags.samples);
  }
  if (flags.format == "csv") {
    spec.format = TableFormat::csv;
  } else if (flags.format == "json") {
    spec.format = TableFormat::json;
  } else {
    throw UsageError("--format", "--format: expected csv or json, got '" + flags.format + "'");
  }
  spec.out = flags.out;
  spec.plot = flags.plot;
  spec.with_time = flags.with_time;
  spec.errata_diagnostic = flags.errata;
  detail::require(!(spec.with_time && kind == SpecKind::figure1), "--with-time", "figure1 has no trajectory");

  const TwoBodyConfig& cfg = spec.cfg;
  const double ec = critical_binding_energy(cfg);
  if (grid_in_energy(kind)) {
    detail::require(flags.r_min == "auto" && flags.r_max == "auto", flags.r_min != "auto" ? "--r-min" : "--r-max",
                    std::string("not used by ") + to_string(kind) + "; give --eb-min/--eb-max");
    const auto lo = detail::real_or_auto("--eb-min", flags.eb_min);
    const auto hi = detail::real_or_auto("--eb-max", flags.eb_max);
    spec.grid.lo_auto = !lo;
    spec.grid.hi_auto = !hi;
    spec.grid.lo = lo.value_or(kind == SpecKind::figure1 ? 0.0 : 1e-6 * ec);
    spec.grid.hi = hi.value_or(ec);
    if (kind == SpecKind::figure1) {
      detail::require(spec.grid.lo >= 0.0, "--eb-min", "must be >= 0");
    } else {
      detail::require(spec.grid.lo > 0.0, "--eb-min", "must be > 0 (r is infinite at eb = 0)");
    }
    detail::require(spec.grid.hi <= ec, "--eb-max", "exceeds the critical binding energy " + format_number(ec));
    detail::require(spec.grid.hi > spec.grid.lo, "--eb-max", "must exceed --eb-min");
    if (auto a = detail::real_or_auto("--eb0", flags.eb0)) {
      detail::require(*a > 0.0 && *a < ec, "--eb0", "must lie in (0, E_c)");
      spec.anchor_eb = a;
    }
  } else {
    detail::require(flags.eb_min == "auto" && flags.eb_max == "auto", flags.eb_min != "auto" ? "--eb-min" : "--eb-max",
                    std::string("not used by ") + to_string(kind) + "; give --r-min/--r-max");
    const double c2 = cfg.c * cfg.c;
    const double r_max_default = (kind == SpecKind::celestial || kind == SpecKind::figure3)
                                     ? 6.0 * cfg.G * cfg.m2_inf() / c2
                                     : 3.0 * cfg.G * cfg.m1_inf / c2;
    const auto lo = detail::real_or_auto("--r-min", flags.r_min);
    const auto hi = detail::real_or_auto("--r-max", flags.r_max);
    spec.grid.lo_auto = !lo;
    spec.grid.hi_auto = !hi;
    spec.grid.hi = hi.value_or(r_max_default);
    detail::require(spec.grid.hi > 0.0, "--r-max", "must be positive");
    spec.grid.lo = lo.value_or(spec.grid.hi / 1e6);
    detail::require(spec.grid.lo > 0.0, "--r-min", "must be positive");
    detail::require(spec.grid.hi > spec.grid.lo, "--r-max", "must exceed --r-min");
  }
  return spec;
}

inline ScenarioSpec parse_args(const std::vector<std::string>& args) {
  return parse_args(std::span<const std::string>(args.data(), args.size()));
}

inline std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

namespace detail {

inline nlohmann::ordered_json config_json(const TwoBodyConfig& cfg) {
  nlohmann::ordered_json j;
  j["m1_inf"] = cfg.m1_inf;
  j["s"] = cfg.s;
  j["G"] = cfg.G;
  j["c"] = cfg.c;
  j["tol_rel"] = cfg.tol_rel;
  j["tol_abs"] = cfg.tol_abs;
  return j;
}

inline nlohmann::ordered_json stats_json(const SolverStats& st) {
  nlohmann::ordered_json j;
  j["steps"] = st.steps;
  j["rejected"] = st.rejected;
  j["rhs_evals"] = st.rhs_evals;
  j["max_residual"] = st.max_residual;
  j["stop"] = to_string(st.stop);
  j["partial"] = st.partial;
  j["diagnostics"] = st.diagnostics;
  if (st.terminal) {
    j["terminal"] = {{"eb", st.terminal->state.eb}, {"r", st.terminal->r}, {"m1", st.terminal->state.m1}};
  }
  return j;
}

inline std::vector<double> row_for(SpecKind kind, const TrajectorySample& smp, bool with_time) {
  const BindingState& st = smp.state;
  const double v1 = std::sqrt(st.v1_sq), v2 = std::sqrt(st.v2_sq);
  std::vector<double> row;
  switch (kind) {
    case SpecKind::figure1: row = {st.eb, st.m1, st.m2, v1, st.f1}; break;
    case SpecKind::figure2: row = {st.eb, st.m1, st.m2, v1, st.f1, smp.r}; break;
    case SpecKind::general: row = {st.eb, smp.r, st.m1, st.m2, v1, v2, st.f1}; break;
    case SpecKind::figure3: row = {smp.r, st.m1, st.eb, v1}; break;
    case SpecKind::celestial: row = {smp.r, st.eb, st.m1, v1}; break;
    case SpecKind::figure4: row = {smp.r, st.m1, 0.5 * st.eb, v1}; break;
    case SpecKind::equal_mass: row = {smp.r, st.eb, st.m1, v1}; break;
  }
  if (with_time) row.push_back(smp.t.value_or(0.0));
  return row;
}

}  // namespace detail

inline std::vector<std::string> columns_for(SpecKind kind, bool with_time) {
  std::vector<std::string> cols;
  switch (kind) {
    case SpecKind::figure1: cols = {"eb", "m1", "m2", "v1_abs", "f1"}; break;
    case SpecKind::figure2: cols = {"eb", "m1", "m2", "v1_abs", "f1", "r"}; break;
    case SpecKind::general: cols = {"eb", "r", "m1", "m2", "v1_abs", "v2_abs", "f1"}; break;
    case SpecKind::figure3: cols = {"r", "m1", "eb", "v1_abs"}; break;
    case SpecKind::celestial: cols = {"r", "eb", "m1", "v1_abs"}; break;
    case SpecKind::figure4: cols = {"r", "m1", "eb1", "v1_abs"}; break;
    case SpecKind::equal_mass: cols = {"r", "eb", "m1", "v1_abs"}; break;
  }
  if (with_time) cols.push_back("t");
  return cols;
}

inline OutputTable run(const ScenarioSpec& spec) {
  const TwoBodyConfig& cfg = spec.cfg;
  cfg.validate();
  const SpecKind kind = spec.kind;
  const double ec = critical_binding_energy(cfg);
  const std::vector<double> grid = linear_grid(spec.grid.lo, spec.grid.hi, spec.grid.count);

  OutputTable table;
  table.columns = columns_for(kind, spec.with_time);
  auto& meta = table.metadata;
  meta["artifact"] = "twobody";
  meta["version"] = kVersion;
  meta["kind"] = to_string(kind);
  meta["units"] = spec.units == Units::si ? "si" : "geom";
  meta["config"] = detail::config_json(cfg);
  meta["critical_binding_energy"] = ec;
  meta["grid"] = {{"variable", grid_in_energy(kind) ? "eb" : "r"},
                  {"min", spec.grid.lo},
                  {"max", spec.grid.hi},
                  {"samples", spec.grid.count}};
  meta["errata_corrected"] = true;

  ScenarioResult result;
  bool partial = false;
  if (kind == SpecKind::figure1) {
    result.kind = ScenarioKind::general;
    result.cfg = cfg;
    for (double eb : grid) result.samples.push_back({0.0, std::nullopt, solve_state(eb, cfg)});
  } else if (kind == SpecKind::general || kind == SpecKind::figure2) {
    const double e_stop = mass_exhaustion_energy(cfg, GeneralOptions{}.stop_mass_fraction);
    std::vector<double> inner;
    for (double eb : grid)
      if (eb < e_stop) inner.push_back(eb);
    const bool clipped = inner.size() < grid.size();
    GeneralOptions opts;
    opts.anchor_eb = spec.anchor_eb;
    result = solve_general(cfg, inner, opts);
    partial = result.stats.partial;
    // Grid points past the stop event are represented by the stop sample itself.
    if (clipped && result.stats.terminal && result.stats.stop == StopReason::mass_exhausted) {
      result.samples.push_back(*result.stats.terminal);
      meta["terminal_row"] = {{"eb", result.stats.terminal->state.eb},
                              {"replaces", grid.size() - inner.size()}};
    }
  } else if (kind == SpecKind::celestial || kind == SpecKind::figure3) {
    result = solve_celestial(cfg, grid);
    if (spec.grid.lo_auto) {
      result.samples.push_back({0.0, std::nullopt, celestial_state(0.0, cfg)});
      meta["limit_row"] = {{"r", 0.0}};
    }
  } else {
    result = solve_equal_mass(cfg, grid);
    if (spec.grid.lo_auto) {
      result.samples.push_back({0.0, std::nullopt, equal_mass_state(0.0, cfg)});
      meta["limit_row"] = {{"r", 0.0}};
    }
  }

  if (spec.with_time && !result.samples.empty()) result = reconstruct_time(std::move(result), result.samples.front().r);
  meta["solver"] = detail::stats_json(result.stats);
  meta["partial"] = partial;

  for (const auto& smp : result.samples) table.rows.push_back(detail::row_for(kind, smp, spec.with_time));
  // Rows ascend in the independent variable (eb for energy grids, r otherwise).
  if (!grid_in_energy(kind)) std::reverse(table.rows.begin(), table.rows.end());

  if (spec.errata_diagnostic) {
    nlohmann::ordered_json e;
    e["m1_printed_at_zero"] = printed::m1(0.0, cfg);
    e["m2_printed_at_zero"] = printed::m2(0.0, cfg);
    e["m2_corrected_at_zero"] = rest_masses(0.0, cfg).second;
    const double small = 1e-6 * ec;
    e["f1_printed_at_small_eb"] = {{"eb", small}, {"value", printed::f1(small, cfg)}};
    double m2_dev = 0.0, v1_dev = 0.0, ric_printed = 0.0, ric_corrected = 0.0;
    for (const auto& smp : result.samples) {
      const BindingState& st = smp.state;
      if (kind != SpecKind::celestial && kind != SpecKind::figure3)
        m2_dev = std::max(m2_dev, std::abs(printed::m2(st.eb, cfg) - st.m2));
      if ((kind == SpecKind::celestial || kind == SpecKind::figure3) && smp.r > 0.0)
        v1_dev = std::max(v1_dev, std::abs(celestial_speed_printed(smp.r, cfg) - std::sqrt(st.v1_sq)));
      if (smp.r > 0.0 && kind != SpecKind::celestial && kind != SpecKind::figure3 && st.eb < ec) {
        const double slope = -cfg.G * st.m1 * st.m2 / (smp.r * smp.r);
        ric_printed =
            std::max(ric_printed, std::abs(riccati_residual(st.eb, slope, smp.r, cfg, RiccatiForm::printed).relative()));
        ric_corrected = std::max(ric_corrected, std::abs(riccati_residual(st.eb, slope, smp.r, cfg).relative()));
      }
    }
    if (kind == SpecKind::celestial || kind == SpecKind::figure3) {
      e["v1_printed_max_deviation"] = v1_dev;
    } else {
      e["m2_printed_max_deviation"] = m2_dev;
    }
    if (kind != SpecKind::figure1 && kind != SpecKind::celestial && kind != SpecKind::figure3) {
      e["riccati_printed_max_residual"] = ric_printed;
      e["riccati_corrected_max_residual"] = ric_corrected;
    }
    meta["errata_diagnostic"] = e;
  }
  return table;
}

}  // namespace twobody
