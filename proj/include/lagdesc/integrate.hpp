#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lagdesc/error.hpp"
#include "lagdesc/systems.hpp"

namespace lagdesc {

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  /// Upper bound on |h|; non-positive or infinite means |span|.
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 10'000'000;
  double overflow_guard = 1e300;
  /// Number of leading velocity components entering the arc-length integrand.
  /// Zero means all of them (phase-space speed).
  std::size_t speed_components = 0;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      throw Error(ErrorKind::InvalidArgument, "integrator tolerances must be positive");
    if (max_steps <= 0) throw Error(ErrorKind::InvalidArgument, "max_steps must be positive");
  }
};

/// Accepted steps of one integration. `times` is monotone in the direction of
/// integration (decreasing for a negative span); arc_length is always nondecreasing.
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<double> arc_length;

  const State& final_state() const { return states.back(); }
  double total_arc() const { return arc_length.back(); }
};

struct Endpoint {
  State state;
  double time = 0.0;
  double arc = 0.0;
  long steps = 0;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DP54 {
  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                          a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                          a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
};

using Aug = std::array<double, kMaxDimension + 1>;

/// Core stepper. `observe(t, aug)` is called for the initial point and every
/// accepted step; returning false stops the integration early.
template <class Observer>
Endpoint run_dopri(const FlowSystem& sys, std::span<const double> x0, double t0, double span,
                   const IntegratorConfig& cfg, Observer&& observe) {
  cfg.validate();
  const std::size_t d = sys.dimension;
  if (x0.size() != d) throw Error(ErrorKind::InvalidArgument, sys.name + ": initial state has wrong dimension");
  if (d == 0 || d > kMaxDimension) throw Error(ErrorKind::InvalidArgument, "unsupported dimension");
  if (!(std::abs(span) > 0.0) || !std::isfinite(span))
    throw Error(ErrorKind::InvalidArgument, "integration span must be finite and nonzero");

  const std::size_t n = d + 1;  // state + arc length
  const double dir = span > 0.0 ? 1.0 : -1.0;
  const double t_end = t0 + span;
  const double hmax = (cfg.max_step > 0.0 && std::isfinite(cfg.max_step)) ? std::min(cfg.max_step, std::abs(span))
                                                                           : std::abs(span);
  const std::size_t speed_n = (cfg.speed_components == 0 || cfg.speed_components > d) ? d : cfg.speed_components;

  // Augmented right-hand side: (v(x,t), dir * |v|_speed).
  auto rhs = [&](double t, const Aug& y, Aug& out) {
    sys.velocity(std::span<const double>(y.data(), d), t, std::span<double>(out.data(), d));
    double big = 0.0;
    for (std::size_t i = 0; i < speed_n; ++i) big = std::max(big, std::abs(out[i]));
    if (big == 0.0 || !std::isfinite(big)) {
      out[d] = dir * big;
      return;
    }
    double s2 = 0.0;
    for (std::size_t i = 0; i < speed_n; ++i) s2 += (out[i] / big) * (out[i] / big);
    out[d] = dir * big * std::sqrt(s2);
  };

  auto finite_all = [n](const Aug& v) {
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(v[i])) return false;
    return true;
  };

  Aug y{}, k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, ytmp{}, ynew{}, err{};
  for (std::size_t i = 0; i < d; ++i) y[i] = x0[i];
  y[d] = 0.0;
  double t = t0;

  Endpoint result;
  if (!observe(t, std::span<const double>(y.data(), n))) {
    result.state.assign(y.begin(), y.begin() + d);
    result.time = t;
    return result;
  }

  rhs(t, y, k1);
  if (!finite_all(k1)) throw Error(ErrorKind::OverflowGuard, sys.name + ": non-finite velocity at initial state");

  auto scale = [&](double a, double b) {
    return cfg.abs_tol + cfg.rel_tol * std::max(std::abs(a), std::abs(b));
  };

  // Initial step size estimate from the state components only; the arc
  // starts at zero and would otherwise force a tiny first step.
  double h;
  {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double sk = scale(y[i], y[i]);
      dnf += (k1[i] / sk) * (k1[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    dnf /= static_cast<double>(d);
    dny /= static_cast<double>(d);
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, hmax);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + dir * h * k1[i];
    rhs(t + dir * h, ytmp, k2);
    double der2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double sk = scale(y[i], y[i]);
      der2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
    }
    der2 = std::isfinite(der2) ? std::sqrt(der2 / static_cast<double>(d)) / h : 0.0;
    const double der12 = std::max(der2, std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    h = std::min({100.0 * h, h1, hmax});
  }

  using T = DP54;
  constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
  constexpr double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;
  double facold = 1e-4;
  bool last_rejected = false;
  const double h_floor = 1e-14 * std::abs(span);
  long steps = 0;

  for (;;) {
    if (steps >= cfg.max_steps)
      throw Error(ErrorKind::StepLimitExceeded, sys.name + ": more than " + std::to_string(cfg.max_steps) + " steps");
    if (h < h_floor)
      throw Error(ErrorKind::StiffnessSuspected, sys.name + ": step size collapsed near t=" + std::to_string(t));

    bool last = false;
    if (dir * (t + dir * h - t_end) >= 0.0) {
      h = std::abs(t_end - t);
      last = true;
    }
    const double hs = dir * h;
    ++steps;

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * T::a21 * k1[i];
    rhs(t + T::c2 * hs, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * (T::a31 * k1[i] + T::a32 * k2[i]);
    rhs(t + T::c3 * hs, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * (T::a41 * k1[i] + T::a42 * k2[i] + T::a43 * k3[i]);
    rhs(t + T::c4 * hs, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (T::a51 * k1[i] + T::a52 * k2[i] + T::a53 * k3[i] + T::a54 * k4[i]);
    rhs(t + T::c5 * hs, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (T::a61 * k1[i] + T::a62 * k2[i] + T::a63 * k3[i] + T::a64 * k4[i] + T::a65 * k5[i]);
    const double t_new = last ? t_end : t + hs;
    rhs(t + hs, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + hs * (T::a71 * k1[i] + T::a73 * k3[i] + T::a74 * k4[i] + T::a75 * k5[i] + T::a76 * k6[i]);
    rhs(t_new, ynew, k7);

    double e2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err[i] = hs * (T::e1 * k1[i] + T::e3 * k3[i] + T::e4 * k4[i] + T::e5 * k5[i] + T::e6 * k6[i] + T::e7 * k7[i]);
      const double sk = scale(y[i], ynew[i]);
      e2 += (err[i] / sk) * (err[i] / sk);
    }
    double error = std::sqrt(e2 / static_cast<double>(n));

    if (!std::isfinite(error) || !finite_all(ynew) || !finite_all(k7)) {
      // Trial stage left the representable range; shrink and retry.
      h *= 0.2;
      last_rejected = true;
      continue;
    }

    const double fac11 = std::pow(std::max(error, 1e-300), expo1);
    if (error <= 1.0) {
      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      double hnew = h / fac;
      facold = std::max(error, 1e-4);
      t = t_new;
      y = ynew;
      k1 = k7;
      for (std::size_t i = 0; i < d; ++i)
        if (std::abs(y[i]) > cfg.overflow_guard)
          throw Error(ErrorKind::OverflowGuard,
                      sys.name + ": |state| exceeded overflow guard at t=" + std::to_string(t));
      if (!observe(t, std::span<const double>(y.data(), n))) break;
      if (last) break;
      hnew = std::min(hnew, hmax);
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      h = hnew;
    } else {
      h = h / std::min(facc1, fac11 / safe);
      last_rejected = true;
    }
  }

  result.state.assign(y.begin(), y.begin() + d);
  result.time = t;
  result.arc = y[d];
  result.steps = steps;
  return result;
}

}  // namespace detail

/// Integrates from (x0, t0) over `span` (negative spans run backward in time),
/// recording every accepted step.
inline Trajectory integrate(const FlowSystem& sys, std::span<const double> x0, double t0, double span,
                            const IntegratorConfig& cfg = {}) {
  Trajectory traj;
  const std::size_t d = sys.dimension;
  detail::run_dopri(sys, x0, t0, span, cfg, [&](double t, std::span<const double> aug) {
    traj.times.push_back(t);
    traj.states.emplace_back(aug.begin(), aug.begin() + static_cast<std::ptrdiff_t>(d));
    traj.arc_length.push_back(aug[d]);
    return true;
  });
  return traj;
}

/// Same integration, keeping only the final point and total arc length.
inline Endpoint integrate_endpoint(const FlowSystem& sys, std::span<const double> x0, double t0, double span,
                                   const IntegratorConfig& cfg = {}) {
  return detail::run_dopri(sys, x0, t0, span, cfg, [](double, std::span<const double>) { return true; });
}

}  // namespace lagdesc
