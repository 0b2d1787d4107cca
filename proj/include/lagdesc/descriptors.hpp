#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lagdesc/error.hpp"
#include "lagdesc/integrate.hpp"
#include "lagdesc/systems.hpp"

namespace lagdesc {

enum class DescriptorKind { MBoth, MForward, MBackward, LForward, MDp };

/// Integrand of L_f: full phase-space speed, or the speed of the configuration
/// coordinates only (first half of the state of a second-order system).
enum class SpeedNorm { Phase, Configuration };

struct DescriptorSpec {
  DescriptorKind kind = DescriptorKind::MBoth;
  double tau = 1.0;
  double t0 = 0.0;
  double p = 0.5;
  int N = 1;
  SpeedNorm speed = SpeedNorm::Phase;

  void validate() const {
    if (kind == DescriptorKind::MDp) {
      if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "MD_p requires 0 < p < 1");
      if (N < 1) throw Error(ErrorKind::InvalidArgument, "MD_p requires N >= 1");
    } else if (!(tau > 0.0) || !std::isfinite(tau)) {
      throw Error(ErrorKind::InvalidArgument, "tau must be positive");
    }
  }
};

constexpr std::string_view to_string(DescriptorKind k) {
  switch (k) {
    case DescriptorKind::MBoth: return "M";
    case DescriptorKind::MForward: return "Mf";
    case DescriptorKind::MBackward: return "Mb";
    case DescriptorKind::LForward: return "Lf";
    case DescriptorKind::MDp: return "MDp";
  }
  return "?";
}

inline DescriptorKind descriptor_kind_from_string(std::string_view s) {
  if (s == "M") return DescriptorKind::MBoth;
  if (s == "Mf") return DescriptorKind::MForward;
  if (s == "Mb") return DescriptorKind::MBackward;
  if (s == "Lf") return DescriptorKind::LForward;
  if (s == "MDp") return DescriptorKind::MDp;
  throw Error(ErrorKind::InvalidArgument, "unknown descriptor '" + std::string(s) + "'");
}

namespace detail {

inline double directional_arc(const FlowSystem& sys, std::span<const double> x0, double t0, double span,
                              const IntegratorConfig& cfg, const char* direction) {
  try {
    return integrate_endpoint(sys, x0, t0, span, cfg).arc;
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(direction) + " integration failed: " + e.what());
  }
}

}  // namespace detail

/// Arc length over [t0, t0 + tau].
inline double compute_M_forward(const FlowSystem& sys, std::span<const double> x0, double t0, double tau,
                                const IntegratorConfig& cfg = {}) {
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
  return detail::directional_arc(sys, x0, t0, tau, cfg, "forward");
}

/// Arc length over [t0 - tau, t0].
inline double compute_M_backward(const FlowSystem& sys, std::span<const double> x0, double t0, double tau,
                                 const IntegratorConfig& cfg = {}) {
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
  return detail::directional_arc(sys, x0, t0, -tau, cfg, "backward");
}

/// M(tau; x0, t0): arc length of the trajectory through x0 over [t0 - tau, t0 + tau].
inline double compute_M(const FlowSystem& sys, std::span<const double> x0, double t0, double tau,
                        const IntegratorConfig& cfg = {}) {
  return compute_M_forward(sys, x0, t0, tau, cfg) + compute_M_backward(sys, x0, t0, tau, cfg);
}

/// L_f: forward arc length over [t0, t0 + tau] with the chosen speed norm.
inline double compute_Lf(const FlowSystem& sys, std::span<const double> state, double t0, double tau,
                         const IntegratorConfig& cfg = {}, SpeedNorm speed = SpeedNorm::Phase) {
  IntegratorConfig c = cfg;
  if (speed == SpeedNorm::Configuration) {
    if (sys.dimension % 2 != 0)
      throw Error(ErrorKind::InvalidArgument, "configuration speed needs an even-dimensional (q, q') state");
    c.speed_components = sys.dimension / 2;
  }
  return compute_M_forward(sys, state, t0, tau, c);
}

/// Orbit {(x_i, y_i)}, i = -N..N, from forward and inverse iteration; index N is the initial point.
inline std::vector<std::pair<double, double>> map_orbit(const DiscreteMap2D& map, double x0, double y0, int N) {
  if (!map.inverse) throw Error(ErrorKind::MissingInverse, map.name);
  if (N < 0) throw Error(ErrorKind::InvalidArgument, "N must be nonnegative");
  const auto n = static_cast<std::size_t>(N);
  std::vector<std::pair<double, double>> orbit(2 * n + 1);
  orbit[n] = {x0, y0};
  auto check = [&](const std::pair<double, double>& p) {
    if (!std::isfinite(p.first) || !std::isfinite(p.second))
      throw Error(ErrorKind::NonFiniteOrbit, map.name + ": orbit left the representable range");
  };
  for (std::size_t i = 1; i <= n; ++i) {
    orbit[n + i] = map.step(orbit[n + i - 1].first, orbit[n + i - 1].second);
    check(orbit[n + i]);
    orbit[n - i] = (*map.inverse)(orbit[n - i + 1].first, orbit[n - i + 1].second);
    check(orbit[n - i]);
  }
  return orbit;
}

/// MD_p = sum_{i=-N}^{N-1} |x_{i+1} - x_i|^p + |y_{i+1} - y_i|^p.
inline double compute_MDp(const DiscreteMap2D& map, double x0, double y0, int N, double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "MD_p requires 0 < p < 1");
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "MD_p requires N >= 1");
  const auto orbit = map_orbit(map, x0, y0, N);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < orbit.size(); ++i) {
    sum += std::pow(std::abs(orbit[i + 1].first - orbit[i].first), p);
    sum += std::pow(std::abs(orbit[i + 1].second - orbit[i].second), p);
  }
  if (!std::isfinite(sum)) throw Error(ErrorKind::NonFiniteOrbit, map.name + ": MD_p sum overflowed");
  return sum;
}

/// Dispatches a continuous descriptor.
inline double evaluate(const FlowSystem& sys, const DescriptorSpec& spec, std::span<const double> x,
                       const IntegratorConfig& cfg = {}) {
  spec.validate();
  switch (spec.kind) {
    case DescriptorKind::MBoth: return compute_M(sys, x, spec.t0, spec.tau, cfg);
    case DescriptorKind::MForward: return compute_M_forward(sys, x, spec.t0, spec.tau, cfg);
    case DescriptorKind::MBackward: return compute_M_backward(sys, x, spec.t0, spec.tau, cfg);
    case DescriptorKind::LForward: return compute_Lf(sys, x, spec.t0, spec.tau, cfg, spec.speed);
    case DescriptorKind::MDp: break;
  }
  throw Error(ErrorKind::InvalidArgument, "MD_p is defined for discrete maps only");
}

inline double evaluate(const DiscreteMap2D& map, const DescriptorSpec& spec, std::span<const double> x) {
  spec.validate();
  if (spec.kind != DescriptorKind::MDp)
    throw Error(ErrorKind::InvalidArgument, "discrete maps support only the MD_p descriptor");
  return compute_MDp(map, x[0], x[1], spec.N, spec.p);
}

}  // namespace lagdesc
