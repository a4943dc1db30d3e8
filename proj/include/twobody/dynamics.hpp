#pragma once

// Head-on gravitational infall of two bodies whose rest masses shrink as they
// gain kinetic energy:
//
//   dE/dr = -G m1(E) m2(E) / r^2,   E(infinity) = 0.
//
// Closed forms exist for a fixed heavy partner ("celestial") and for equal
// masses.  The general case is integrated in the inverse form
// dr/dE = -r^2 / (G m1 m2), anchored at the Newtonian asymptote r = G m1 m2 / E.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twobody/binding.hpp"
#include "twobody/errors.hpp"
#include "twobody/ode.hpp"
#include "twobody/sta.hpp"

namespace twobody {

enum class ScenarioKind { general, celestial, equal_mass };

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::general: return "general";
    case ScenarioKind::celestial: return "celestial";
    case ScenarioKind::equal_mass: return "equal-mass";
  }
  return "unknown";
}

struct TrajectorySample {
  double r = 0.0;
  std::optional<double> t;
  BindingState state;
};

enum class StopReason { none, grid_end, mass_exhausted, r_floor, step_underflow, too_many_steps };

inline const char* to_string(StopReason s) {
  switch (s) {
    case StopReason::none: return "none";
    case StopReason::grid_end: return "grid_end";
    case StopReason::mass_exhausted: return "mass_exhausted";
    case StopReason::r_floor: return "r_floor";
    case StopReason::step_underflow: return "step_underflow";
    case StopReason::too_many_steps: return "too_many_steps";
  }
  return "unknown";
}

struct SolverStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
  double max_residual = 0.0;
  StopReason stop = StopReason::none;
  bool partial = false;
  std::optional<TrajectorySample> terminal;
  std::vector<std::string> diagnostics;
};

// Samples are in the order of the motion: r decreasing, eb increasing.
struct ScenarioResult {
  ScenarioKind kind = ScenarioKind::general;
  TwoBodyConfig cfg;
  std::vector<TrajectorySample> samples;
  SolverStats stats;
};

inline double newton_force(double m1, double m2, double r, double G) {
  if (!(r > 0.0)) throw DomainError("separation must be positive");
  if (!(m1 >= 0.0) || !(m2 >= 0.0)) throw DomainError("masses must be non-negative");
  return G * m1 * m2 / (r * r);
}

// (G/c^4) sqrt(p1^2 p2^2 / ((x1-x2)^2)^2) for events simultaneous in frame u.
inline double invariant_force(const sta::FourVector& p1, const sta::FourVector& p2, const sta::FourVector& x1,
                              const sta::FourVector& x2, double G, double c,
                              const sta::FourVector& u = sta::FourVector::time_axis()) {
  const sta::FourVector dx = x1 - x2;
  const double interval = sta::dot(dx, dx);
  if (interval == 0.0) throw DomainError("events coincide");
  double scale = 0.0;
  for (double x : dx.e) scale = std::max(scale, std::abs(x));
  if (std::abs(sta::dot(dx, u)) > 1e-12 * scale) throw DomainError("events are not simultaneous in the frame");
  const double p1sq = std::max(sta::dot(p1, p1), 0.0);
  const double p2sq = std::max(sta::dot(p2, p2), 0.0);
  const double c4 = c * c * c * c;
  return (G / c4) * std::sqrt(p1sq * p2sq) / std::abs(interval);
}

inline double binding_ode_rhs(double eb, double r, const TwoBodyConfig& cfg) {
  if (!(r > 0.0)) throw DomainError("separation must be positive");
  const auto [m1, m2] = rest_masses(eb, cfg);
  return -cfg.G * m1 * m2 / (r * r);
}

enum class RiccatiForm { corrected, printed };

struct RiccatiResidual {
  double value = 0.0;
  double scale = 0.0;  // sum of the magnitudes of the individual terms
  double relative() const { return scale > 0.0 ? value / scale : value; }
};

// The quartic Riccati-like polynomial obtained by substituting m1(E), m2(E)
// into dE/dr = -G m1 m2 / r^2 and clearing the denominator 4 c^4 D^2:
//
//   corrected:  G N1 N2            + 4 r^2 c^4 D^2 E' = 0
//   printed:    G N2 (2 D^2 + N2)  - 4 r^2 c^4 D^2 E' = 0
//
// with D = c^2 m (s+1) - E.  Both are evaluated from expanded coefficients.
inline RiccatiResidual riccati_residual(double eb, double deb_dr, double r, const TwoBodyConfig& cfg,
                                        RiccatiForm form = RiccatiForm::corrected) {
  const double M = cfg.m1_inf, s = cfg.s, G = cfg.G;
  const double c2 = cfg.c * cfg.c, c4 = c2 * c2, c6 = c4 * c2, c8 = c4 * c4;
  const double E = eb, E2 = E * E, E3 = E2 * E, E4 = E2 * E2;
  const double M2 = M * M, M3 = M2 * M, M4 = M2 * M2;
  const double sp = s + 1.0;

  std::array<double, 8> terms{};
  if (form == RiccatiForm::corrected) {
    terms[0] = 4.0 * M4 * s * sp * sp * c8;
    terms[1] = -4.0 * M3 * sp * sp * sp * E * c6;
    terms[2] = 6.0 * M2 * sp * sp * E2 * c4;
    terms[3] = -4.0 * M * sp * E3 * c2;
    terms[4] = E4;
  } else {
    terms[0] = 4.0 * M4 * s * sp * sp * (2.0 * s + 1.0) * c8;
    terms[1] = -4.0 * M3 * sp * (5.0 * s * s + 6.0 * s + 1.0) * E * c6;
    terms[2] = 2.0 * M2 * (11.0 * s * s + 18.0 * s + 7.0) * E2 * c4;
    terms[3] = -12.0 * M * sp * E3 * c2;
    terms[4] = 3.0 * E4;
  }
  for (int i = 0; i < 5; ++i) terms[i] *= G;
  // The bracket multiplying E'(r); its sign differs between the two forms.
  const double sign = form == RiccatiForm::corrected ? 1.0 : -1.0;
  terms[5] = sign * 4.0 * M2 * r * r * sp * sp * c8 * deb_dr;
  terms[6] = -sign * 8.0 * M * r * r * sp * E * c6 * deb_dr;
  terms[7] = sign * 4.0 * r * r * E2 * c4 * deb_dr;

  RiccatiResidual out;
  for (double t : terms) {
    out.value += t;
    out.scale += std::abs(t);
  }
  return out;
}

// --- fixed heavy partner -----------------------------------------------------

namespace detail {
inline void require_positive_grid(std::span<const double> grid, const char* what) {
  if (grid.empty()) throw DomainError(std::string(what) + " grid is empty");
  for (double r : grid)
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError(std::string(what) + " grid values must be positive");
}

inline std::vector<double> sorted_descending(std::span<const double> grid) {
  std::vector<double> out(grid.begin(), grid.end());
  std::sort(out.begin(), out.end(), std::greater<>());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) throw DomainError("grid values must be distinct");
  return out;
}
}  // namespace detail

// State at separation r when m2 stays at m2_inf; r = 0 gives the limit values.
inline BindingState celestial_state(double r, const TwoBodyConfig& cfg) {
  if (!(r >= 0.0)) throw DomainError("separation must be non-negative");
  const double c2 = cfg.c * cfg.c, M = cfg.m1_inf, s = cfg.s;
  const double x = r > 0.0 ? cfg.G * cfg.m2_inf() / (c2 * r) : std::numeric_limits<double>::infinity();
  BindingState st;
  st.eb = -c2 * M * std::expm1(-x);
  st.m1 = M * std::exp(-x);
  st.m2 = s * M;
  st.f1 = 1.0;
  // v1^2 from the s -> infinity limit with E = c^2 M (1 - e^-x): c^2 (1 - e^{-2x}).
  st.v1_sq = -c2 * std::expm1(-2.0 * x);
  st.v2_sq = st.v1_sq / (s * s);
  st.gamma1 = std::exp(x);
  st.gamma2 = sta::lorentz_gamma(std::sqrt(st.v2_sq), cfg.c);
  return st;
}

// |v1| = c (1 - e^{-x}) as printed; disagrees with m1 = m1_inf / gamma1.
inline double celestial_speed_printed(double r, const TwoBodyConfig& cfg) {
  const double x = cfg.G * cfg.m2_inf() / (cfg.c * cfg.c * r);
  return -cfg.c * std::expm1(-x);
}

inline ScenarioResult solve_celestial(const TwoBodyConfig& cfg, std::span<const double> r_grid) {
  cfg.validate();
  detail::require_positive_grid(r_grid, "r");
  ScenarioResult out{ScenarioKind::celestial, cfg, {}, {}};
  for (double r : detail::sorted_descending(r_grid)) out.samples.push_back({r, std::nullopt, celestial_state(r, cfg)});
  out.stats.stop = StopReason::grid_end;
  return out;
}

// --- equal masses ------------------------------------------------------------

inline BindingState equal_mass_state(double r, const TwoBodyConfig& cfg) {
  if (!(r >= 0.0)) throw DomainError("separation must be non-negative");
  const double c = cfg.c, c2 = c * c, M = cfg.m1_inf, G = cfg.G;
  const double den = G * M + 2.0 * c2 * r;
  BindingState st;
  st.eb = 2.0 * c2 * G * M * M / den;
  st.m1 = 2.0 * c2 * M * r / den;
  st.m2 = st.m1;
  st.f1 = 0.5;
  const double speed = c * std::sqrt(G * M * (G * M + 4.0 * c2 * r)) / den;
  st.v1_sq = std::min(speed * speed, c2);
  st.v2_sq = st.v1_sq;
  st.gamma1 = st.m1 > 0.0 ? M / st.m1 : std::numeric_limits<double>::infinity();
  st.gamma2 = st.gamma1;
  return st;
}

inline ScenarioResult solve_equal_mass(const TwoBodyConfig& cfg, std::span<const double> r_grid) {
  cfg.validate();
  if (cfg.s != 1.0) throw DomainError("equal-mass solution requires s = 1");
  detail::require_positive_grid(r_grid, "r");
  ScenarioResult out{ScenarioKind::equal_mass, cfg, {}, {}};
  for (double r : detail::sorted_descending(r_grid)) out.samples.push_back({r, std::nullopt, equal_mass_state(r, cfg)});
  out.stats.stop = StopReason::grid_end;
  return out;
}

// --- general mass ratio ------------------------------------------------------

struct GeneralOptions {
  std::optional<double> anchor_eb;        // default: min(1e-6 E_c, first grid point)
  double stop_mass_fraction = 1e-9;       // stop once m1 < fraction * m1_inf
  std::optional<double> r_floor;          // default: 1e-12 G m1_inf / c^2
  bool continue_to_stop = true;           // integrate past the grid to the stop event
};

// Smallest eb (to rounding) with m1(eb) < fraction * m1_inf, by bisection on the
// monotone m1.
inline double mass_exhaustion_energy(const TwoBodyConfig& cfg, double fraction) {
  const double ec = critical_binding_energy(cfg);
  const double threshold = fraction * cfg.m1_inf;
  double lo = 0.0, hi = ec;
  for (int i = 0; i < 2000 && hi - lo > 0.0; ++i) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (detail::rest_masses(mid, cfg, ec).first < threshold)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

namespace detail {
inline ode::StepControl step_control(const TwoBodyConfig& cfg, double atol) {
  ode::StepControl ctl;
  ctl.rtol = cfg.tol_rel;
  ctl.atol = atol;
  return ctl;
}

inline double max_riccati_residual(const ScenarioResult& res) {
  double worst = 0.0;
  for (const auto& smp : res.samples) {
    if (!(smp.r > 0.0)) continue;
    const double slope = -res.cfg.G * smp.state.m1 * smp.state.m2 / (smp.r * smp.r);
    worst = std::max(worst, std::abs(riccati_residual(smp.state.eb, slope, smp.r, res.cfg).relative()));
  }
  return worst;
}
}  // namespace detail

inline ScenarioResult solve_general(const TwoBodyConfig& cfg, std::span<const double> eb_grid,
                                    const GeneralOptions& opts = {}) {
  cfg.validate();
  const double ec = critical_binding_energy(cfg);
  if (eb_grid.empty()) throw DomainError("binding-energy grid is empty");
  for (std::size_t i = 0; i < eb_grid.size(); ++i) {
    if (!(eb_grid[i] > 0.0 && eb_grid[i] < ec)) throw DomainError("binding-energy grid must lie in (0, E_c)");
    if (i > 0 && !(eb_grid[i] > eb_grid[i - 1])) throw DomainError("binding-energy grid must be ascending");
  }

  const double anchor = std::min(opts.anchor_eb.value_or(1e-6 * ec), eb_grid.front());
  if (!(anchor > 0.0 && anchor < ec)) throw DomainError("anchor binding energy must lie in (0, E_c)");
  const double r_floor = opts.r_floor.value_or(1e-12 * cfg.G * cfg.m1_inf / (cfg.c * cfg.c));
  const double e_stop = mass_exhaustion_energy(cfg, opts.stop_mass_fraction);

  ScenarioResult out{ScenarioKind::general, cfg, {}, {}};
  auto& stats = out.stats;

  auto rhs = [&cfg, ec](double eb, const ode::State<1>& y) -> ode::State<1> {
    const double e = std::clamp(eb, 0.0, ec);
    const auto [m1, m2] = detail::rest_masses(e, cfg, ec);
    return {-y[0] * y[0] / (cfg.G * m1 * m2)};
  };
  auto below_floor = [r_floor](double, const ode::State<1>& y) { return y[0] < r_floor; };
  auto solver = ode::make_dormand_prince<1>(rhs, detail::step_control(cfg, r_floor));

  double eb = anchor;
  ode::State<1> y{cfg.G * cfg.m1_inf * cfg.m2_inf() / anchor};

  auto fail = [&](ode::Status st) {
    stats.partial = true;
    if (st == ode::Status::stopped) {
      stats.stop = StopReason::r_floor;
      stats.diagnostics.push_back("separation fell below r_floor at eb = " + std::to_string(eb));
    } else if (st == ode::Status::too_many_steps) {
      stats.stop = StopReason::too_many_steps;
      stats.diagnostics.push_back("step budget exhausted at eb = " + std::to_string(eb));
    } else {
      stats.stop = StopReason::step_underflow;
      stats.diagnostics.push_back(std::string("integration ") + ode::to_string(st) + " at eb = " + std::to_string(eb));
    }
  };

  bool ok = true;
  for (double target : eb_grid) {
    if (target >= e_stop) {
      stats.partial = true;
      stats.stop = StopReason::mass_exhausted;
      stats.diagnostics.push_back("grid extends past the mass-exhaustion point eb = " + std::to_string(e_stop));
      ok = false;
      break;
    }
    const ode::Status st = solver.advance(eb, y, target, below_floor);
    if (st != ode::Status::reached) {
      fail(st);
      ok = false;
      break;
    }
    out.samples.push_back({y[0], std::nullopt, solve_state(target, cfg)});
  }

  if (ok) stats.stop = StopReason::grid_end;
  if (ok && opts.continue_to_stop) {
    const ode::Status st = solver.advance(eb, y, e_stop, below_floor);
    if (st == ode::Status::reached) {
      stats.stop = StopReason::mass_exhausted;
    } else {
      fail(st);
    }
  }
  if (opts.continue_to_stop || !ok) stats.terminal = TrajectorySample{y[0], std::nullopt, solve_state(eb, cfg)};

  stats.steps = solver.stats().steps;
  stats.rejected = solver.stats().rejected;
  stats.rhs_evals = solver.stats().rhs_evals;
  stats.max_residual = detail::max_riccati_residual(out);
  return out;
}

namespace detail {
// Forward integration of dE/dx = G m1 m2 in x = 1/r from x = 0, E = 0.
template <class MassProduct>
ScenarioResult integrate_forward(const TwoBodyConfig& cfg, std::span<const double> r_grid, ScenarioKind kind,
                                 MassProduct&& mass_product, double e_max,
                                 BindingState (*state_of)(double, const TwoBodyConfig&)) {
  cfg.validate();
  require_positive_grid(r_grid, "r");
  ScenarioResult out{kind, cfg, {}, {}};
  auto rhs = [&](double, const ode::State<1>& y) -> ode::State<1> {
    return {cfg.G * mass_product(std::clamp(y[0], 0.0, e_max))};
  };
  auto solver = ode::make_dormand_prince<1>(rhs, step_control(cfg, cfg.tol_abs * cfg.rest_energy()));
  double x = 0.0;
  ode::State<1> y{0.0};
  for (double r : sorted_descending(r_grid)) {
    const ode::Status st = solver.advance(x, y, 1.0 / r);
    if (st != ode::Status::reached) {
      out.stats.partial = true;
      out.stats.stop = StopReason::step_underflow;
      out.stats.diagnostics.push_back(std::string("integration ") + ode::to_string(st) + " at r = " + std::to_string(r));
      break;
    }
    out.samples.push_back({r, std::nullopt, state_of(std::clamp(y[0], 0.0, e_max), cfg)});
  }
  if (!out.stats.partial) out.stats.stop = StopReason::grid_end;
  out.stats.steps = solver.stats().steps;
  out.stats.rejected = solver.stats().rejected;
  out.stats.rhs_evals = solver.stats().rhs_evals;
  return out;
}

inline BindingState celestial_state_from_energy(double eb, const TwoBodyConfig& cfg) {
  const double c2 = cfg.c * cfg.c, M = cfg.m1_inf, s = cfg.s;
  BindingState st;
  st.eb = eb;
  st.m1 = M - eb / c2;
  st.m2 = s * M;
  st.f1 = 1.0;
  st.v1_sq = v1_squared_celestial(eb, M, cfg.c);
  st.v2_sq = st.v1_sq / (s * s);
  st.gamma1 = st.m1 > 0.0 ? M / st.m1 : std::numeric_limits<double>::infinity();
  st.gamma2 = sta::lorentz_gamma(std::sqrt(st.v2_sq), cfg.c);
  return st;
}
}  // namespace detail

/// E(r) for the general mass ratio by forward integration from r = infinity.
inline ScenarioResult integrate_binding_energy(const TwoBodyConfig& cfg, std::span<const double> r_grid) {
  const double ec = critical_binding_energy(cfg);
  auto product = [&cfg, ec](double e) {
    const auto [m1, m2] = detail::rest_masses(e, cfg, ec);
    return std::max(m1, 0.0) * m2;
  };
  return detail::integrate_forward(cfg, r_grid, ScenarioKind::general, product, ec, &solve_state);
}

/// Numerical solution of dE/dr = -G m2_inf m1(r) / r^2 with m1 = m1_inf - E/c^2.
inline ScenarioResult integrate_celestial(const TwoBodyConfig& cfg, std::span<const double> r_grid) {
  const double e_max = cfg.rest_energy();
  auto product = [&cfg](double e) { return (cfg.m1_inf - e / (cfg.c * cfg.c)) * cfg.m2_inf(); };
  return detail::integrate_forward(cfg, r_grid, ScenarioKind::celestial, product, e_max,
                                   &detail::celestial_state_from_energy);
}

// --- coordinate time ---------------------------------------------------------

namespace detail {
// Integral over [a, b] of the quadratic through (x[0],y[0]), (x[1],y[1]), (x[2],y[2]).
inline double quadratic_integral(const double (&x)[3], const double (&y)[3], double a, double b) {
  const double d1 = (y[1] - y[0]) / (x[1] - x[0]);
  const double d12 = (y[2] - y[1]) / (x[2] - x[1]);
  const double d2 = (d12 - d1) / (x[2] - x[0]);
  const double h1 = x[1] - x[0];
  auto prim = [&](double u) { return y[0] * u + d1 * u * u / 2.0 + d2 * (u * u * u / 3.0 - h1 * u * u / 2.0); };
  return prim(b - x[0]) - prim(a - x[0]);
}

// Integral of the sampled function over [x[j], b] with b in [x[j], x[j+1]];
// x ascending.  Averages the two neighbouring quadratics where both exist.
inline double piece_integral(std::span<const double> x, std::span<const double> y, std::size_t j, double b) {
  const std::size_t n = x.size();
  if (n == 2) {
    const double yb = y[0] + (y[1] - y[0]) * (b - x[0]) / (x[1] - x[0]);
    return 0.5 * (y[j] + yb) * (b - x[j]);
  }
  double sum = 0.0;
  int count = 0;
  if (j >= 1) {
    const double xs[3] = {x[j], x[j + 1], x[j - 1]};
    const double ys[3] = {y[j], y[j + 1], y[j - 1]};
    sum += quadratic_integral(xs, ys, x[j], b);
    ++count;
  }
  if (j + 2 < n) {
    const double xs[3] = {x[j], x[j + 1], x[j + 2]};
    const double ys[3] = {y[j], y[j + 1], y[j + 2]};
    sum += quadratic_integral(xs, ys, x[j], b);
    ++count;
  }
  return sum / count;
}
}  // namespace detail

// t(r) = integral from r to r_start of dr' / (|v1| + |v2|); t(r_start) = 0 and
// t grows as the bodies close.  Samples outside r_start get negative times.
inline ScenarioResult reconstruct_time(ScenarioResult result, double r_start) {
  auto& samples = result.samples;
  if (samples.empty()) throw DomainError("trajectory has no samples");
  const std::size_t n = samples.size();
  std::vector<double> r(n), g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = samples[n - 1 - i];  // ascending r
    r[i] = s.r;
    const double closing = std::sqrt(s.state.v1_sq) + std::sqrt(s.state.v2_sq);
    g[i] = closing > 0.0 ? 1.0 / closing : std::numeric_limits<double>::infinity();
  }
  for (std::size_t i = 1; i < n; ++i)
    if (!(r[i] > r[i - 1])) throw DomainError("trajectory separations must be strictly monotone");
  if (!(r_start >= r.front() && r_start <= r.back())) throw DomainError("r_start outside the sampled range");

  if (n == 1) {
    samples[0].t = 0.0;
    return result;
  }
  // Zero closing speed at the start: begin one grid step inward.
  std::size_t top = n - 1;
  if (!std::isfinite(g[top])) {
    if (r_start >= r[top - 1]) {
      result.stats.diagnostics.push_back("zero closing speed at r_start; time origin moved one grid step inward");
      r_start = r[top - 1];
    }
    top = n - 2;
    if (!std::isfinite(g[top])) throw DomainError("zero closing speed away from the trajectory start");
  }
  const std::span<const double> rs(r.data(), top + 1), gs(g.data(), top + 1);

  std::vector<double> cumulative(top + 1, 0.0);
  for (std::size_t j = 0; j < top; ++j) cumulative[j + 1] = cumulative[j] + detail::piece_integral(rs, gs, j, rs[j + 1]);
  std::size_t j = std::upper_bound(rs.begin(), rs.end(), r_start) - rs.begin();
  j = j == 0 ? 0 : j - 1;
  if (j >= top) j = top;
  const double at_start = j < top ? cumulative[j] + detail::piece_integral(rs, gs, j, r_start) : cumulative[top];

  for (std::size_t i = 0; i <= top; ++i) samples[n - 1 - i].t = at_start - cumulative[i];
  return result;
}

}  // namespace twobody
