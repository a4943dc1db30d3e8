#pragma once

// Spacetime algebra Cl(1,3) and single-particle kinematics with the rest-mass
// deficit rule m = m_inf / gamma.
//
// Signature (+,-,-,-).  A blade is addressed by the bitmask of its generators:
// bit k set <=> gamma_k is a factor, generators in ascending order.  So blade
// 0b0011 is gamma_0 gamma_1 and 0b1111 is the pseudoscalar.
//
// Relative vectors use the convention v/c = (u ^ v) / (u . v), i.e. sigma_i =
// gamma_i gamma_0 in the frame u = gamma_0.  This is the opposite sign to the
// one in Hestenes' 1974 formulation.

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>

#include "twobody/errors.hpp"

namespace twobody::sta {

inline constexpr double kUnitTolerance = 1e-12;
inline constexpr std::size_t kBlades = 16;

struct BladeProduct {
  int sign;
  unsigned blade;
};

constexpr int generator_square(unsigned k) { return k == 0 ? 1 : -1; }

constexpr int blade_grade(unsigned blade) { return std::popcount(blade); }

// Product of two basis blades, derived from gamma_j gamma_k = -gamma_k gamma_j
// (j != k) and the generator squares.
constexpr BladeProduct multiply_blades(unsigned a, unsigned b) {
  int swaps = 0;
  for (unsigned bit = 0; bit < 4; ++bit) {
    if (a & (1u << bit)) swaps += std::popcount(b & ((1u << bit) - 1u));
  }
  int sign = (swaps % 2 == 0) ? 1 : -1;
  const unsigned common = a & b;
  for (unsigned k = 0; k < 4; ++k) {
    if (common & (1u << k)) sign *= generator_square(k);
  }
  return {sign, a ^ b};
}

using SignTable = std::array<std::array<BladeProduct, kBlades>, kBlades>;

constexpr SignTable make_sign_table() {
  SignTable table{};
  for (unsigned a = 0; a < kBlades; ++a)
    for (unsigned b = 0; b < kBlades; ++b) table[a][b] = multiply_blades(a, b);
  return table;
}

inline constexpr SignTable kSignTable = make_sign_table();

namespace blade {
inline constexpr unsigned scalar = 0b0000;
inline constexpr unsigned g0 = 0b0001;
inline constexpr unsigned g1 = 0b0010;
inline constexpr unsigned g2 = 0b0100;
inline constexpr unsigned g3 = 0b1000;
inline constexpr unsigned g01 = g0 | g1;
inline constexpr unsigned g02 = g0 | g2;
inline constexpr unsigned g03 = g0 | g3;
inline constexpr unsigned g0123 = 0b1111;
}  // namespace blade

class Multivector {
 public:
  constexpr Multivector() = default;
  constexpr explicit Multivector(const std::array<double, kBlades>& coeffs) : c_(coeffs) {}

  static constexpr Multivector scalar(double s) {
    Multivector m;
    m.c_[blade::scalar] = s;
    return m;
  }
  static constexpr Multivector basis(unsigned b, double coeff = 1.0) {
    Multivector m;
    m.c_[b] = coeff;
    return m;
  }
  static constexpr Multivector vector(double e0, double e1, double e2, double e3) {
    Multivector m;
    m.c_[blade::g0] = e0;
    m.c_[blade::g1] = e1;
    m.c_[blade::g2] = e2;
    m.c_[blade::g3] = e3;
    return m;
  }

  constexpr double operator[](unsigned b) const { return c_[b]; }
  constexpr double& operator[](unsigned b) { return c_[b]; }
  constexpr const std::array<double, kBlades>& coefficients() const { return c_; }

  constexpr double scalar_part() const { return c_[blade::scalar]; }

  constexpr Multivector grade(int k) const {
    Multivector out;
    for (unsigned b = 0; b < kBlades; ++b)
      if (blade_grade(b) == k) out.c_[b] = c_[b];
    return out;
  }

  // Reverse: grade k picks up (-1)^{k(k-1)/2}.
  constexpr Multivector reverse() const {
    Multivector out;
    for (unsigned b = 0; b < kBlades; ++b) {
      const int k = blade_grade(b);
      out.c_[b] = ((k * (k - 1) / 2) % 2 == 0) ? c_[b] : -c_[b];
    }
    return out;
  }

  constexpr Multivector& operator+=(const Multivector& o) {
    for (unsigned b = 0; b < kBlades; ++b) c_[b] += o.c_[b];
    return *this;
  }
  constexpr Multivector& operator-=(const Multivector& o) {
    for (unsigned b = 0; b < kBlades; ++b) c_[b] -= o.c_[b];
    return *this;
  }
  constexpr Multivector& operator*=(double s) {
    for (double& x : c_) x *= s;
    return *this;
  }

  friend constexpr Multivector operator+(Multivector a, const Multivector& b) { return a += b; }
  friend constexpr Multivector operator-(Multivector a, const Multivector& b) { return a -= b; }
  friend constexpr Multivector operator-(Multivector a) { return a *= -1.0; }
  friend constexpr Multivector operator*(Multivector a, double s) { return a *= s; }
  friend constexpr Multivector operator*(double s, Multivector a) { return a *= s; }

  // Geometric product.
  friend constexpr Multivector operator*(const Multivector& a, const Multivector& b) {
    Multivector out;
    for (unsigned i = 0; i < kBlades; ++i) {
      if (a.c_[i] == 0.0) continue;
      for (unsigned j = 0; j < kBlades; ++j) {
        const BladeProduct p = kSignTable[i][j];
        out.c_[p.blade] += p.sign * a.c_[i] * b.c_[j];
      }
    }
    return out;
  }

  // Largest absolute coefficient.
  double max_abs() const {
    double m = 0.0;
    for (double x : c_) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  std::array<double, kBlades> c_{};
};

inline Multivector geometric_product(const Multivector& a, const Multivector& b) { return a * b; }

// Symmetric and antisymmetric halves of the product; for grade-1 arguments
// these are the inner and outer products.
inline Multivector symmetric_product(const Multivector& a, const Multivector& b) {
  return 0.5 * (a * b + b * a);
}
inline Multivector antisymmetric_product(const Multivector& a, const Multivector& b) {
  return 0.5 * (a * b - b * a);
}

/// Grade-1 element: components along gamma_0..gamma_3.
struct FourVector {
  std::array<double, 4> e{};

  static constexpr FourVector time_axis() { return {{1.0, 0.0, 0.0, 0.0}}; }

  constexpr Multivector to_multivector() const { return Multivector::vector(e[0], e[1], e[2], e[3]); }
  static constexpr FourVector from_multivector(const Multivector& m) {
    return {{m[blade::g0], m[blade::g1], m[blade::g2], m[blade::g3]}};
  }

  constexpr FourVector& operator+=(const FourVector& o) {
    for (int i = 0; i < 4; ++i) e[i] += o.e[i];
    return *this;
  }
  constexpr FourVector& operator-=(const FourVector& o) {
    for (int i = 0; i < 4; ++i) e[i] -= o.e[i];
    return *this;
  }
  friend constexpr FourVector operator+(FourVector a, const FourVector& b) { return a += b; }
  friend constexpr FourVector operator-(FourVector a, const FourVector& b) { return a -= b; }
  friend constexpr FourVector operator*(double s, FourVector a) {
    for (double& x : a.e) x *= s;
    return a;
  }
};

constexpr double dot(const FourVector& a, const FourVector& b) {
  return a.e[0] * b.e[0] - a.e[1] * b.e[1] - a.e[2] * b.e[2] - a.e[3] * b.e[3];
}

// a ^ b as a bivector.
inline Multivector wedge(const FourVector& a, const FourVector& b) {
  return antisymmetric_product(a.to_multivector(), b.to_multivector());
}

inline bool is_unit_timelike(const FourVector& v, double tol = kUnitTolerance) {
  return std::abs(dot(v, v) - 1.0) <= tol && v.e[0] > 0.0;
}

inline void require_frame_vector(const FourVector& v, const char* name) {
  if (!(v.e[0] > 0.0))
    throw DomainError(std::string(name) + " is not future-pointing");
  if (!(std::abs(dot(v, v) - 1.0) <= kUnitTolerance))
    throw DomainError(std::string(name) + " is not a unit timelike vector");
}

/// Spatial vector relative to a frame, stored on sigma_i = gamma_i gamma_0.
struct RelVector {
  std::array<double, 3> x{};

  constexpr RelVector& operator+=(const RelVector& o) {
    for (int i = 0; i < 3; ++i) x[i] += o.x[i];
    return *this;
  }
  friend constexpr RelVector operator+(RelVector a, const RelVector& b) { return a += b; }
  friend constexpr RelVector operator-(RelVector a, const RelVector& b) {
    for (int i = 0; i < 3; ++i) a.x[i] -= b.x[i];
    return a;
  }
  friend constexpr RelVector operator*(double s, RelVector a) {
    for (double& v : a.x) v *= s;
    return a;
  }
  constexpr double dot(const RelVector& o) const { return x[0] * o.x[0] + x[1] * o.x[1] + x[2] * o.x[2]; }
  double norm() const { return std::sqrt(dot(*this)); }
};

// sigma_i = gamma_i gamma_0 in the gamma_0 frame.
inline Multivector sigma(int i) {
  return Multivector::basis(1u << i) * Multivector::basis(blade::g0);
}

// Pure boost rotor R with R gamma_0 R~ = u.
inline Multivector frame_rotor(const FourVector& u) {
  const Multivector g0 = Multivector::basis(blade::g0);
  const double norm = std::sqrt(2.0 * (1.0 + u.e[0]));
  return (Multivector::scalar(1.0) + u.to_multivector() * g0) * (1.0 / norm);
}

// Relative vector of the frame u as a bivector.
inline Multivector to_bivector(const RelVector& w, const FourVector& u = FourVector::time_axis()) {
  const Multivector R = frame_rotor(u);
  const Multivector Rr = R.reverse();
  Multivector out;
  for (int i = 0; i < 3; ++i) out += w.x[i] * (R * sigma(i + 1) * Rr);
  return out;
}

// Components of a bivector on the relative basis of frame u.
inline RelVector to_relative(const Multivector& bivector, const FourVector& u = FourVector::time_axis()) {
  const Multivector R = frame_rotor(u);
  const Multivector Rr = R.reverse();
  RelVector out;
  for (int i = 0; i < 3; ++i) out.x[i] = (bivector * (R * sigma(i + 1) * Rr)).scalar_part();
  return out;
}

/// Even-grade unit element acting by x -> R x R~.
class Rotor {
 public:
  Rotor() : R_(Multivector::scalar(1.0)) {}
  explicit Rotor(const Multivector& r) : R_(r) {}

  // exp(-rapidity * vhat / 2): boosts the frame u along vhat.
  static Rotor boost(const RelVector& vhat, double rapidity,
                     const FourVector& u = FourVector::time_axis()) {
    const Multivector b = to_bivector(vhat, u);
    return Rotor(Multivector::scalar(std::cosh(rapidity / 2.0)) - std::sinh(rapidity / 2.0) * b);
  }

  const Multivector& multivector() const { return R_; }
  Multivector reverse() const { return R_.reverse(); }

  Multivector apply(const Multivector& x) const { return R_ * x * R_.reverse(); }
  FourVector apply(const FourVector& x) const {
    return FourVector::from_multivector(apply(x.to_multivector()));
  }

 private:
  Multivector R_;
};

inline double lorentz_gamma(double speed, double c) {
  const double beta = speed / c;
  return 1.0 / std::sqrt((1.0 - beta) * (1.0 + beta));
}

inline void require_subluminal(double speed, double c) {
  if (!(c > 0.0)) throw DomainError("speed of light must be positive");
  if (!(speed >= 0.0)) throw DomainError("speed must be non-negative");
  if (!(speed < c)) throw DomainError("speed must be below c (the mass is annihilated at c)");
}

struct Split {
  double gamma;
  double energy;         // E_v = gamma m_inf c^2
  RelVector momentum;    // p_v = gamma m_inf c^2 v / c
  RelVector velocity;    // v, in velocity units
};

// Energy-momentum split of p between the rest frame u and the moving frame v.
// m_inf is read off as (p . u)/c^2, which holds both for p_inf = m_inf c^2 u and
// for the deficit state p = (m_inf/gamma) c^2 v.
inline Split split(const FourVector& p, const FourVector& u, const FourVector& v, double c = 1.0) {
  require_frame_vector(u, "u");
  require_frame_vector(v, "v");
  if (!(c > 0.0)) throw DomainError("speed of light must be positive");
  const double gamma = dot(u, v);
  const double m_inf = dot(p, u) / (c * c);
  if (!(m_inf > 0.0)) throw DomainError("energy-momentum must be future-pointing");
  const RelVector beta = (1.0 / gamma) * to_relative(wedge(u, v), u);
  const double energy = gamma * m_inf * c * c;
  return {gamma, energy, energy * beta, c * beta};
}

// p = (m_inf/gamma) c^2 v obtained by the rotor sandwich R (p_inf/gamma) R~.
inline FourVector boost_energy_momentum(double m_inf, const RelVector& vhat, double speed, double c = 1.0) {
  require_subluminal(speed, c);
  if (!(m_inf >= 0.0)) throw DomainError("rest mass must be non-negative");
  if (speed == 0.0) return (m_inf * c * c) * FourVector::time_axis();
  if (!(std::abs(vhat.norm() - 1.0) <= kUnitTolerance)) throw DomainError("direction must be a unit vector");
  const double rapidity = std::atanh(speed / c);
  const double gamma = lorentz_gamma(speed, c);
  const FourVector p_rest = (m_inf * c * c / gamma) * FourVector::time_axis();
  return Rotor::boost(vhat, rapidity).apply(p_rest);
}

struct ParticleState {
  double m_inf;
  double m;
  FourVector v;
  FourVector p;
};

inline ParticleState make_particle(double m_inf, const RelVector& vhat, double speed, double c = 1.0) {
  const FourVector p = boost_energy_momentum(m_inf, vhat, speed, c);
  const double m = m_inf / lorentz_gamma(speed, c);
  FourVector v = FourVector::time_axis();
  if (speed > 0.0) v = Rotor::boost(vhat, std::atanh(speed / c)).apply(v);
  return {m_inf, m, v, p};
}

// Series coefficients in powers of v^2:
//   (gamma - 1)       = sum_k C(2k,k)/4^k            beta^{2k}
//   (1 - 1/gamma)     = sum_k C(2k,k)/(4^k (2k-1))   beta^{2k}
inline double boost_energy_coefficient(int k) {
  double a = 1.0;
  for (int j = 1; j <= k; ++j) a *= (2.0 * j - 1.0) / (2.0 * j);
  return a;
}
inline double mass_deficit_coefficient(int k) { return boost_energy_coefficient(k) / (2.0 * k - 1.0); }

struct KineticDeltas {
  double boost_exact;     // (gamma - 1) m_inf c^2
  double boost_series;
  double deficit_exact;   // (1 - 1/gamma) m_inf c^2
  double deficit_series;
};

inline KineticDeltas kinetic_deltas(double m_inf, double speed, double c, int order) {
  require_subluminal(speed, c);
  if (order < 1) throw DomainError("series order must be at least 1");
  const double beta_sq = (speed / c) * (speed / c);
  const double root = std::sqrt((1.0 - speed / c) * (1.0 + speed / c));
  const double rest_energy = m_inf * c * c;
  const double deficit = rest_energy * beta_sq / (1.0 + root);
  const double boost = deficit / root;

  double boost_series = 0.0;
  double deficit_series = 0.0;
  double power = 1.0;
  for (int k = 1; k <= order; ++k) {
    power *= beta_sq;
    boost_series += boost_energy_coefficient(k) * power;
    deficit_series += mass_deficit_coefficient(k) * power;
  }
  return {boost, rest_energy * boost_series, deficit, rest_energy * deficit_series};
}

struct KinematicDerivatives {
  RelVector force;     // F = gamma m_inf a
  double dgamma_dt;    // gamma^3 (v.a)/c^2
  double dm_dtau;      // -(gamma/c^2) F.v
  double dm_dt;        // -(1/c^2) F.v
};

inline KinematicDerivatives kinematic_derivatives(double m_inf, const RelVector& v, const RelVector& a, double c) {
  require_subluminal(v.norm(), c);
  const double gamma = lorentz_gamma(v.norm(), c);
  const RelVector force = (gamma * m_inf) * a;
  const double power = force.dot(v);
  return {force, gamma * gamma * gamma * v.dot(a) / (c * c), -gamma * power / (c * c), -power / (c * c)};
}

struct ConservationResiduals {
  double energy;
  RelVector momentum;
};

// u . sum(p) - sum(m_inf) c^2 and (u ^ sum(p)) / c^2.
inline ConservationResiduals check_system_conservation(std::span<const FourVector> momenta, const FourVector& u,
                                                       std::span<const double> rest_masses, double c) {
  if (momenta.empty()) throw DomainError("conservation check needs at least one body");
  if (momenta.size() != rest_masses.size()) throw DomainError("momenta and rest masses differ in length");
  require_frame_vector(u, "u");
  FourVector total;
  for (const FourVector& p : momenta) total += p;
  const double mass_total = std::accumulate(rest_masses.begin(), rest_masses.end(), 0.0);
  return {dot(u, total) - mass_total * c * c, (1.0 / (c * c)) * to_relative(wedge(u, total), u)};
}

}  // namespace twobody::sta
