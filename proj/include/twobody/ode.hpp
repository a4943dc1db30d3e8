#pragma once

// Adaptive Dormand-Prince 5(4) integrator with step rejection.
//
// The integrator advances a fixed-size state to requested abscissae exactly,
// so callers sample a trajectory on their own grid without dense output.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace twobody::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct StepControl {
  double rtol = 1e-9;
  double atol = 1e-12;
  double initial_step = 0.0;    // 0: chosen from the first derivative
  double min_step_rel = 1e-15;  // relative to |t|, below this the step has underflowed
  std::size_t max_steps = 1'000'000;
};

struct Stats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
};

enum class Status { reached, stopped, step_underflow, too_many_steps, non_finite };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::reached: return "reached";
    case Status::stopped: return "stopped";
    case Status::step_underflow: return "step_underflow";
    case Status::too_many_steps: return "too_many_steps";
    case Status::non_finite: return "non_finite";
  }
  return "unknown";
}

namespace dp {
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                        b6 = 11.0 / 84.0;
// b - b*, the embedded 4th order weights subtracted from the 5th order ones.
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
}  // namespace dp

template <std::size_t N, class Rhs>
class DormandPrince {
 public:
  using Vec = State<N>;

  DormandPrince(Rhs rhs, StepControl control) : rhs_(std::move(rhs)), ctl_(control) {}

  const Stats& stats() const { return stats_; }
  double last_step() const { return h_; }

  // Advance (t, y) to t_end.  `stop(t, y)` is checked after each accepted step.
  template <class Stop>
  Status advance(double& t, Vec& y, double t_end, Stop&& stop) {
    if (t == t_end) return Status::reached;
    const double dir = t_end > t ? 1.0 : -1.0;
    Vec k1 = eval(t, y);
    if (h_ == 0.0) h_ = initial_step(t, y, k1, t_end);
    h_ = dir * std::abs(h_);

    for (;;) {
      if (stats_.steps + stats_.rejected >= ctl_.max_steps) return Status::too_many_steps;
      bool last = false;
      double h = h_;
      if (dir * (t + h - t_end) >= 0.0) {
        h = t_end - t;
        last = true;
      }
      const double h_floor = ctl_.min_step_rel * std::max(std::abs(t), std::abs(t_end));
      if (std::abs(h) < h_floor && !last) return Status::step_underflow;

      Vec y_new, k7;
      const double err = attempt(t, y, k1, h, y_new, k7);
      if (!std::isfinite(err)) {
        ++stats_.rejected;
        h_ = 0.25 * h;
        if (std::abs(h_) < h_floor) return Status::non_finite;
        continue;
      }
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (err <= 1.0) {
        ++stats_.steps;
        t = last ? t_end : t + h;
        y = y_new;
        k1 = k7;
        if (!last || std::abs(h * factor) < std::abs(h_)) h_ = h * factor;
        if (last) return Status::reached;
        if (stop(t, y)) return Status::stopped;
      } else {
        ++stats_.rejected;
        h_ = h * std::min(1.0, factor);
      }
    }
  }

  Status advance(double& t, Vec& y, double t_end) {
    return advance(t, y, t_end, [](double, const Vec&) { return false; });
  }

 private:
  Vec eval(double t, const Vec& y) {
    ++stats_.rhs_evals;
    return rhs_(t, y);
  }

  double initial_step(double t, const Vec& y, const Vec& f, double t_end) const {
    if (ctl_.initial_step > 0.0) return ctl_.initial_step;
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = ctl_.atol + ctl_.rtol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1 = std::max(d1, std::abs(f[i]) / sc);
    }
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * std::abs(t_end - t) : 0.01 * d0 / d1;
    return std::min(h, std::abs(t_end - t));
  }

  // One trial step; returns the scaled error norm.
  double attempt(double t, const Vec& y, const Vec& k1, double h, Vec& y_new, Vec& k7) {
    using namespace dp;
    Vec tmp;
    auto stage = [&](auto&& combine) {
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * combine(i);
      return tmp;
    };
    const Vec k2 = eval(t + c2 * h, stage([&](std::size_t i) { return a21 * k1[i]; }));
    const Vec k3 = eval(t + c3 * h, stage([&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; }));
    const Vec k4 =
        eval(t + c4 * h, stage([&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; }));
    const Vec k5 = eval(t + c5 * h, stage([&](std::size_t i) {
                          return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i];
                        }));
    const Vec k6 = eval(t + h, stage([&](std::size_t i) {
                          return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
                        }));
    for (std::size_t i = 0; i < N; ++i)
      y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    k7 = eval(t + h, y_new);

    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = ctl_.atol + ctl_.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      sum += (e / sc) * (e / sc);
    }
    return std::sqrt(sum / static_cast<double>(N));
  }

  Rhs rhs_;
  StepControl ctl_;
  Stats stats_{};
  double h_ = 0.0;
};

template <std::size_t N, class Rhs>
DormandPrince<N, Rhs> make_dormand_prince(Rhs rhs, StepControl control = {}) {
  return DormandPrince<N, Rhs>(std::move(rhs), control);
}

}  // namespace twobody::ode
