#pragma once

// Binding-energy algebra of two bodies that start at rest at infinite
// separation and pay for their kinetic energy out of their rest masses.
//
// Given the total expended binding energy E and the mass ratio s = m2_inf/m1_inf
// this yields the instantaneous rest masses, the speeds and the share f1 of E
// carried by the lighter body.
//
// Errata: the printed closed forms for f1, m1 and m2 carry the wrong sign on
// their shared denominator (E - c^2 m1_inf (1+s)).  Taken literally they give
// m2(0) = -s m1_inf and an f1 that diverges as E -> 0.  The forms used here
// have the denominator D = c^2 m1_inf (1+s) - E, which reproduces every special
// value (m1(0) = m1_inf, m2(0) = s m1_inf, m2(E_c) = m1_inf sqrt(s^2-1),
// f1(E_c) = 1/(1+s-sqrt(s^2-1))).  The verbatim forms live in namespace
// `printed` for diagnostics.  The v1^2 expression is used exactly as printed.

#include <cmath>
#include <algorithm>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "twobody/errors.hpp"
#include "twobody/sta.hpp"

namespace twobody {

struct TwoBodyConfig {
  double m1_inf = 1.0;
  double s = std::sqrt(2.0);  // m2_inf = s * m1_inf, s >= 1
  double G = 1.0;
  double c = 1.0;
  double tol_rel = 1e-9;
  double tol_abs = 1e-12;

  double m2_inf() const { return s * m1_inf; }
  double rest_energy() const { return m1_inf * c * c; }

  void validate() const {
    if (!(m1_inf > 0.0) || !std::isfinite(m1_inf)) throw DomainError("m1_inf must be positive");
    if (!(s >= 1.0) || !std::isfinite(s)) throw DomainError("mass ratio s must be >= 1");
    if (!(G > 0.0) || !std::isfinite(G)) throw DomainError("G must be positive");
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("c must be positive");
    if (!(tol_rel > 0.0) || !(tol_abs > 0.0)) throw DomainError("tolerances must be positive");
  }
};

struct BindingState {
  double eb = 0.0;
  double f1 = 0.0;
  double v1_sq = 0.0;
  double v2_sq = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double gamma1 = 1.0;
  double gamma2 = 1.0;
};

// E_c = c^2 m1_inf (s + 1 - sqrt(s^2 - 1)), written without the cancellation
// between s and sqrt(s^2 - 1).
inline double critical_binding_energy(const TwoBodyConfig& cfg) {
  cfg.validate();
  const double s = cfg.s;
  return cfg.rest_energy() * (1.0 + 1.0 / (s + std::sqrt((s - 1.0) * (s + 1.0))));
}

namespace detail {

inline double clamp_to(double x, double lo, double hi, double tol, const char* what) {
  if (x < lo - tol || x > hi + tol) {
    std::ostringstream os;
    os.precision(17);
    os << what << " = " << x << " outside [" << lo << ", " << hi << "]";
    throw DomainError(os.str());
  }
  return std::min(std::max(x, lo), hi);
}

// Accepts eb within tol_abs (scaled by m1_inf c^2) of [0, E_c] and clamps it.
inline double checked_binding_energy(double eb, const TwoBodyConfig& cfg, double ec) {
  const double slack = cfg.tol_abs * cfg.rest_energy();
  if (!(eb >= -slack && eb <= ec + slack)) {
    std::ostringstream os;
    os.precision(17);
    os << "binding energy " << eb << " outside [0, E_c = " << ec << "]";
    throw DomainError(os.str());
  }
  return std::min(std::max(eb, 0.0), ec);
}

}  // namespace detail

inline double v1_squared_unchecked(double eb, const TwoBodyConfig& cfg) {
  const double M = cfg.m1_inf, s = cfg.s, c2 = cfg.c * cfg.c, E = eb;
  const double den = E - c2 * M * (s + 1.0);
  const double poly = 4.0 * M * M * s * (s + 1.0) * c2 * c2 - 2.0 * E * M * (2.0 * s + 1.0) * c2 + E * E;
  return -E * (E - 2.0 * c2 * M) * poly / (4.0 * c2 * M * M * den * den);
}

/// Squared speed of the lighter body after expending binding energy `eb`.
inline double v1_squared(double eb, const TwoBodyConfig& cfg) {
  const double ec = critical_binding_energy(cfg);
  eb = detail::checked_binding_energy(eb, cfg, ec);
  const double c2 = cfg.c * cfg.c;
  return detail::clamp_to(v1_squared_unchecked(eb, cfg), 0.0, c2, cfg.tol_abs * c2, "v1^2");
}

/// s -> infinity limit of v1_squared: E (2 c^2 m1_inf - E) / (c^2 m1_inf^2).
inline double v1_squared_celestial(double eb, double m1_inf, double c) {
  if (!(m1_inf > 0.0) || !(c > 0.0)) throw DomainError("m1_inf and c must be positive");
  const double c2 = c * c;
  if (!(eb >= 0.0 && eb <= m1_inf * c2)) throw DomainError("binding energy outside [0, m1_inf c^2]");
  return eb * (2.0 * c2 * m1_inf - eb) / (c2 * m1_inf * m1_inf);
}

namespace detail {

// Rest masses from the sign-corrected closed forms.  With D = c^2 M (1+s) - E
// and q = c^2 M sqrt(s^2-1):
//   m2 = (D^2 + q^2) / (2 c^2 D)
//   m1 = (D^2 - q^2) / (2 c^2 D) = (E_c - E)(D + q) / (2 c^2 D)
inline std::pair<double, double> rest_masses(double eb, const TwoBodyConfig& cfg, double ec) {
  const double c2 = cfg.c * cfg.c, M = cfg.m1_inf, s = cfg.s;
  const double D = c2 * M * (1.0 + s) - eb;
  const double q = c2 * M * std::sqrt((s - 1.0) * (s + 1.0));
  if (q == 0.0) return {(ec - eb) / (2.0 * c2), D / (2.0 * c2)};  // s = 1, where D reaches 0 at E_c
  const double m1 = (ec - eb) * (D + q) / (2.0 * c2 * D);
  const double m2 = (D * D + q * q) / (2.0 * c2 * D);
  return {m1, m2};
}

}  // namespace detail

/// Instantaneous rest masses (m1, m2) without building the full state.
inline std::pair<double, double> rest_masses(double eb, const TwoBodyConfig& cfg) {
  const double ec = critical_binding_energy(cfg);
  eb = detail::checked_binding_energy(eb, cfg, ec);
  auto [m1, m2] = detail::rest_masses(eb, cfg, ec);
  return {std::max(m1, 0.0), m2};
}

inline BindingState solve_state(double eb, const TwoBodyConfig& cfg) {
  const double ec = critical_binding_energy(cfg);
  eb = detail::checked_binding_energy(eb, cfg, ec);
  const double c2 = cfg.c * cfg.c;
  const double M = cfg.m1_inf, s = cfg.s;

  BindingState st;
  st.eb = eb;
  st.v1_sq = detail::clamp_to(v1_squared_unchecked(eb, cfg), 0.0, c2, cfg.tol_abs * c2, "v1^2");
  st.v2_sq = st.v1_sq / (s * s);

  auto [m1, m2] = detail::rest_masses(eb, cfg, ec);
  st.m1 = detail::clamp_to(m1, 0.0, M, cfg.tol_abs * M, "m1");
  st.m2 = detail::clamp_to(m2, 0.0, s * M, cfg.tol_abs * s * M, "m2");

  // 1 - sqrt(1 - x) equals 1 - m1/m1_inf; the mass form is the accurate one near x = 1.
  const double x = st.v1_sq / c2;
  if (eb > 0.0 && x < 0.5) {
    st.f1 = M * c2 * (x / (1.0 + std::sqrt(1.0 - x))) / eb;
  } else if (eb > 0.0) {
    st.f1 = std::min(c2 * (M - st.m1) / eb, 1.0);
  } else {
    st.f1 = s / (s + 1.0);
  }
  st.gamma1 = st.m1 > 0.0 ? M / st.m1 : std::numeric_limits<double>::infinity();
  st.gamma2 = st.m2 > 0.0 ? s * M / st.m2 : std::numeric_limits<double>::infinity();
  return st;
}

/// p . (u - v): the share of binding energy a single body has paid.
inline double body_binding_energy(const sta::FourVector& p, const sta::FourVector& u, const sta::FourVector& v) {
  sta::require_frame_vector(u, "u");
  sta::require_frame_vector(v, "v");
  return sta::dot(p, u - v);
}

struct PowerBalance {
  double lhs;  // F (|v1| + |v2|)
  double rhs;  // (dE/dr)(dr/dt)
};

// F1.v1 + F2.v2 against the chain rule (dE/dr)(dr/dt).  When the slope is not
// supplied the gravitational one, dE/dr = -F, is used.
inline PowerBalance binding_power_identity(const BindingState& st, double force, double dr_dt,
                                           std::optional<double> deb_dr = std::nullopt) {
  const double closing = std::sqrt(st.v1_sq) + std::sqrt(st.v2_sq);
  return {force * closing, deb_dr.value_or(-force) * dr_dt};
}

/// Four-momenta of both bodies for a binding state; body 1 moves along +axis,
/// body 2 along -axis, in the frame gamma_0.
inline std::pair<sta::FourVector, sta::FourVector> four_momenta(const BindingState& st, const TwoBodyConfig& cfg,
                                                                const sta::RelVector& axis = {{1.0, 0.0, 0.0}}) {
  const double c = cfg.c;
  const double v1 = std::min(std::sqrt(st.v1_sq), std::nextafter(c, 0.0));
  const double v2 = std::min(std::sqrt(st.v2_sq), std::nextafter(c, 0.0));
  return {sta::boost_energy_momentum(cfg.m1_inf, axis, v1, c),
          sta::boost_energy_momentum(cfg.m2_inf(), -1.0 * axis, v2, c)};
}

// The closed forms exactly as printed, kept for errata diagnostics.
namespace printed {

inline double f1(double eb, const TwoBodyConfig& cfg) {
  const double M = cfg.m1_inf, s = cfg.s, c2 = cfg.c * cfg.c, E = eb;
  const double num = 2.0 * M * M * s * (s + 1.0) * c2 * c2 - 2.0 * E * M * (s + 1.0) * c2 + E * E;
  return 1.0 - M * s * c2 / E + num / (2.0 * E * (E - c2 * M * (s + 1.0)));
}

inline double m2(double eb, const TwoBodyConfig& cfg) {
  const double M = cfg.m1_inf, s = cfg.s, c2 = cfg.c * cfg.c, E = eb;
  const double num = 2.0 * M * M * s * (s + 1.0) * c2 * c2 - 2.0 * M * (s + 1.0) * E * c2 + E * E;
  return num / (2.0 * c2 * (E - c2 * M * (s + 1.0)));
}

inline double m1(double eb, const TwoBodyConfig& cfg) {
  const double M = cfg.m1_inf, s = cfg.s, c2 = cfg.c * cfg.c, E = eb;
  return M * (1.0 + s) - E / c2 - m2(eb, cfg);
}

}  // namespace printed

}  // namespace twobody
