#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "lagdesc/error.hpp"
#include "lagdesc/fieldparse.hpp"

namespace lagdesc {

inline constexpr std::size_t kMaxDimension = 6;

using State = std::vector<double>;

/// Writes v(x, t) into `out`; out.size() == x.size() == dimension.
using VelocityFn = std::function<void(std::span<const double> x, double t, std::span<double> out)>;

/// Closed-form reference values for M, where the system admits them.
struct ClosedFormOracle {
  /// M(tau, t0, x) for every state.
  std::function<double(double tau, double t0, std::span<const double> x)> m_value;
  /// M(tau; c e_i) per axis i; empty entries mean no formula on that axis.
  std::vector<std::function<double(double tau, double c)>> axis_m;
  /// Index of the coordinate hyperplane that is the stable manifold's normal, if known.
  std::optional<std::size_t> separatrix_axis;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct FlowSystem {
  std::string name;
  std::size_t dimension = 0;
  VelocityFn velocity;
  std::vector<State> equilibria;
  std::vector<State> attractors;
  std::optional<ClosedFormOracle> oracle;
  /// Coordinate names used by the CLI region and line syntax.
  std::vector<std::string> variables;
  bool incompressible = false;
  /// Box used for sanity checks (divergence, reversibility).
  std::vector<Interval> reference_region;

  State eval(std::span<const double> x, double t) const {
    if (x.size() != dimension)
      throw Error(ErrorKind::InvalidArgument, name + ": state has wrong dimension");
    State out(dimension);
    velocity(x, t, out);
    return out;
  }
};

using MapFn = std::function<std::pair<double, double>(double x, double y)>;

struct DiscreteMap2D {
  std::string name;
  MapFn step;
  std::optional<MapFn> inverse;
  std::vector<std::pair<double, double>> fixed_points;
};

/// Smooth bump supported on [0,1]: exp(-1/(x(1-x))) inside, zero elsewhere.
inline double bump_g(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return std::exp(-1.0 / (x * (1.0 - x)));
}

/// Piecewise shear profile: identity on (-1,1), arctan tails outside. C1, bounded, f'(x) = 1 on [-1,1].
inline double shear_profile(double x) {
  if (x <= -1.0) return std::atan(x + 1.0) - 1.0;
  if (x >= 1.0) return std::atan(x - 1.0) + 1.0;
  return x;
}

inline double shear_profile_derivative(double x) {
  if (x <= -1.0) return 1.0 / (1.0 + (x + 1.0) * (x + 1.0));
  if (x >= 1.0) return 1.0 / (1.0 + (x - 1.0) * (x - 1.0));
  return 1.0;
}

namespace detail {

inline std::vector<Interval> cube(std::size_t d, double half) {
  return std::vector<Interval>(d, Interval{-half, half});
}

/// |c| (e^{rate tau} - e^{-rate tau}): arc length of c e^{±rate t} over [-tau, tau].
inline double axis_arc(double rate, double tau, double c) {
  return std::abs(c) * (std::exp(rate * tau) - std::exp(-rate * tau));
}

inline std::vector<std::string> default_variables(std::size_t d) {
  if (d <= 3) {
    std::vector<std::string> names = {"x", "y", "z"};
    names.resize(d);
    return names;
  }
  std::vector<std::string> names;
  for (std::size_t i = 0; i < d; ++i) names.push_back("w" + std::to_string(i + 1));
  return names;
}

/// Planar shear x' = f(x), y' = -y f'(x); divergence free for every f.
inline FlowSystem shear_system(std::string name, std::function<double(double)> f,
                               std::function<double(double)> fprime, double fprime0) {
  FlowSystem s;
  s.name = std::move(name);
  s.dimension = 2;
  s.velocity = [f, fprime](std::span<const double> x, double, std::span<double> out) {
    out[0] = f(x[0]);
    out[1] = -x[1] * fprime(x[0]);
  };
  s.equilibria = {{0.0, 0.0}};
  ClosedFormOracle oracle;
  oracle.axis_m = {nullptr, [fprime0](double tau, double c) { return axis_arc(fprime0, tau, c); }};
  oracle.separatrix_axis = 0;
  s.oracle = std::move(oracle);
  s.variables = {"x", "y"};
  s.incompressible = true;
  s.reference_region = {{-1.0, 1.0}, {-1.0, 1.0}};
  return s;
}

}  // namespace detail

/// x_i' = rates_i x_i for i < N-1, x_N' = -rates_N x_N.
inline FlowSystem linearNd(std::vector<double> rates) {
  const std::size_t d = rates.size();
  if (d < 2 || d > kMaxDimension)
    throw Error(ErrorKind::InvalidArgument, "linearNd supports dimensions 2..6");
  for (double r : rates)
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "linearNd rates must be positive");
  FlowSystem s;
  s.name = "linearNd";
  s.dimension = d;
  s.velocity = [rates](std::span<const double> x, double, std::span<double> out) {
    const std::size_t n = rates.size();
    for (std::size_t i = 0; i + 1 < n; ++i) out[i] = rates[i] * x[i];
    out[n - 1] = -rates[n - 1] * x[n - 1];
  };
  s.equilibria = {State(d, 0.0)};
  ClosedFormOracle oracle;
  for (double r : rates)
    oracle.axis_m.push_back([r](double tau, double c) { return detail::axis_arc(r, tau, c); });
  oracle.separatrix_axis = d - 1;
  s.oracle = std::move(oracle);
  s.variables = detail::default_variables(d);
  double trace = 0.0;
  for (std::size_t i = 0; i + 1 < d; ++i) trace += rates[i];
  trace -= rates[d - 1];
  s.incompressible = trace == 0.0;
  s.reference_region = detail::cube(d, 1.0);
  return s;
}

inline FlowSystem linear3d(double l1 = 0.5, double l2 = 1.5, double l3 = 2.0) {
  FlowSystem s = linearNd({l1, l2, l3});
  s.name = "linear3d";
  return s;
}

inline FlowSystem saddle2d(double lambda = 1.0) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "saddle2d needs lambda > 0");
  FlowSystem s;
  s.name = "saddle2d";
  s.dimension = 2;
  s.velocity = [lambda](std::span<const double> x, double, std::span<double> out) {
    out[0] = lambda * x[0];
    out[1] = -lambda * x[1];
  };
  s.equilibria = {{0.0, 0.0}};
  ClosedFormOracle oracle;
  for (int i = 0; i < 2; ++i)
    oracle.axis_m.push_back([lambda](double tau, double c) { return detail::axis_arc(lambda, tau, c); });
  oracle.separatrix_axis = 1;
  s.oracle = std::move(oracle);
  s.variables = {"x", "y"};
  s.incompressible = true;
  s.reference_region = detail::cube(2, 1.0);
  return s;
}

inline FlowSystem shear_tanh() {
  return detail::shear_system(
      "shear_tanh", [](double x) { return std::tanh(x); },
      [](double x) {
        const double c = std::cosh(x);
        return 1.0 / (c * c);
      },
      1.0);
}

inline FlowSystem shear_piecewise() {
  return detail::shear_system("shear_piecewise", shear_profile, shear_profile_derivative, 1.0);
}

inline FlowSystem rotation2d() {
  FlowSystem s;
  s.name = "rotation2d";
  s.dimension = 2;
  s.velocity = [](std::span<const double> x, double, std::span<double> out) {
    out[0] = -x[1];
    out[1] = x[0];
  };
  s.equilibria = {{0.0, 0.0}};
  ClosedFormOracle oracle;
  oracle.m_value = [](double tau, double, std::span<const double> x) {
    return 2.0 * tau * std::hypot(x[0], x[1]);
  };
  s.oracle = std::move(oracle);
  s.variables = {"x", "y"};
  s.incompressible = true;
  s.reference_region = detail::cube(2, 1.0);
  return s;
}

/// h(y) = y - y|y|: equilibria at y in {-1, 0, 1}.
inline double basin_h(double y) { return y >= 0.0 ? y - y * y : y + y * y; }

inline FlowSystem basin2d() {
  FlowSystem s;
  s.name = "basin2d";
  s.dimension = 2;
  s.velocity = [](std::span<const double> x, double, std::span<double> out) {
    out[0] = -x[0] + x[1];
    out[1] = basin_h(x[1]);
  };
  s.equilibria = {{0.0, 0.0}, {1.0, 1.0}, {-1.0, -1.0}};
  s.attractors = {{1.0, 1.0}, {-1.0, -1.0}};
  s.variables = {"x", "y"};
  s.reference_region = {{-2.0, 2.0}, {-1.5, 1.5}};
  return s;
}

/// q'' = -q' + 0.1 q (1 - q^2) in first-order form (q, q').
inline FlowSystem duffing_damped() {
  FlowSystem s;
  s.name = "duffing_damped";
  s.dimension = 2;
  s.velocity = [](std::span<const double> x, double, std::span<double> out) {
    out[0] = x[1];
    out[1] = -x[1] + 0.1 * x[0] * (1.0 - x[0] * x[0]);
  };
  s.equilibria = {{0.0, 0.0}, {1.0, 0.0}, {-1.0, 0.0}};
  s.attractors = {{1.0, 0.0}, {-1.0, 0.0}};
  s.variables = {"q", "qd"};
  s.reference_region = {{-2.0, 2.0}, {-2.0, 2.0}};
  return s;
}

inline DiscreteMap2D linear_map(double lambda = 2.0) {
  if (!(lambda > 1.0)) throw Error(ErrorKind::InvalidArgument, "linear_map needs lambda > 1");
  DiscreteMap2D m;
  m.name = "linear_map";
  m.step = [lambda](double x, double y) { return std::pair{lambda * x, y / lambda}; };
  m.inverse = [lambda](double x, double y) { return std::pair{x / lambda, lambda * y}; };
  m.fixed_points = {{0.0, 0.0}};
  return m;
}

/// x' = 2x, y' = y/2 + g(x), with g the bump on [0,1]. Area preserving, global saddle at the origin.
inline DiscreteMap2D perturbed_map() {
  DiscreteMap2D m;
  m.name = "perturbed_map";
  m.step = [](double x, double y) { return std::pair{2.0 * x, 0.5 * y + bump_g(x)}; };
  m.inverse = [](double x, double y) {
    const double xp = 0.5 * x;
    return std::pair{xp, 2.0 * (y - bump_g(xp))};
  };
  m.fixed_points = {{0.0, 0.0}};
  return m;
}

struct CatalogEntry {
  std::string name;
  std::string note;
  std::variant<FlowSystem, DiscreteMap2D> model;

  bool is_flow() const { return std::holds_alternative<FlowSystem>(model); }
  std::size_t dimension() const {
    return is_flow() ? std::get<FlowSystem>(model).dimension : std::size_t{2};
  }
};

inline std::vector<CatalogEntry> catalog() {
  std::vector<CatalogEntry> out;
  out.push_back({"linear3d", "3D linear saddle x1'=0.5x1, x2'=1.5x2, x3'=-2x3 (incompressible)", linear3d()});
  out.push_back({"saddle2d", "linear saddle x'=x, y'=-y (lambda=1)", saddle2d()});
  out.push_back({"shear_tanh", "shear x'=f(x), y'=-y f'(x) with f=tanh", shear_tanh()});
  out.push_back({"shear_piecewise", "shear_piecewise (a=1, k=1): f=x on (-1,1), arctan tails", shear_piecewise()});
  out.push_back({"rotation2d", "rigid rotation x'=-y, y'=x; exact M available", rotation2d()});
  out.push_back({"basin2d", "x'=-x+y, y'=h(y); attractors (1,1), (-1,-1)", basin2d()});
  out.push_back({"duffing_damped", "q''=-q'+0.1q(1-q^2); attractors (1,0), (-1,0)", duffing_damped()});
  out.push_back({"linearNd", "N-D linear saddle, default rates (1,1,2)", [] {
                   FlowSystem s = linearNd({1.0, 1.0, 2.0});
                   return s;
                 }()});
  out.push_back({"linear_map", "discrete saddle (x,y) -> (2x, y/2)", linear_map()});
  out.push_back({"perturbed_map", "(x,y) -> (2x, y/2 + g(x)), g the smooth bump on [0,1]", perturbed_map()});
  return out;
}

inline CatalogEntry find_entry(const std::string& name) {
  for (auto& e : catalog())
    if (e.name == name) return e;
  throw Error(ErrorKind::NotInCatalog, name);
}

inline FlowSystem find_flow(const std::string& name) {
  auto e = find_entry(name);
  if (!e.is_flow()) throw Error(ErrorKind::NotInCatalog, name + " is a discrete map, not a flow");
  return std::get<FlowSystem>(std::move(e.model));
}

inline DiscreteMap2D find_map(const std::string& name) {
  auto e = find_entry(name);
  if (e.is_flow()) throw Error(ErrorKind::NotInCatalog, name + " is a flow, not a discrete map");
  return std::get<DiscreteMap2D>(std::move(e.model));
}

/// Central-difference divergence of the velocity field.
inline double numerical_divergence(const FlowSystem& s, std::span<const double> x, double t, double h = 1e-5) {
  State probe(x.begin(), x.end());
  double div = 0.0;
  for (std::size_t i = 0; i < s.dimension; ++i) {
    const double keep = probe[i];
    probe[i] = keep + h;
    const double plus = s.eval(probe, t)[i];
    probe[i] = keep - h;
    const double minus = s.eval(probe, t)[i];
    probe[i] = keep;
    div += (plus - minus) / (2.0 * h);
  }
  return div;
}

/// Builds a system from the JSON configuration
/// {"name", "dimension", "velocity": [expr...], "equilibria": [[...]], "attractors": [[...]]}.
/// Components may use x, y, z (first three coordinates), w1..w6 and t.
inline FlowSystem system_from_json(const nlohmann::json& cfg) {
  try {
    FlowSystem s;
    s.name = cfg.at("name").get<std::string>();
    const int dim = cfg.at("dimension").get<int>();
    if (dim < 1 || dim > static_cast<int>(kMaxDimension))
      throw Error(ErrorKind::ConfigError, "dimension must be in 1..6");
    s.dimension = static_cast<std::size_t>(dim);
    const auto& comps = cfg.at("velocity");
    if (!comps.is_array() || comps.size() != s.dimension)
      throw Error(ErrorKind::ConfigError, "velocity must list one expression per dimension");
    std::vector<fieldparse::Expr> exprs;
    for (const auto& c : comps) exprs.push_back(fieldparse::parse(c.get<std::string>()));

    auto read_points = [&](const char* key) {
      std::vector<State> pts;
      if (!cfg.contains(key)) return pts;
      for (const auto& p : cfg.at(key)) {
        State v = p.get<State>();
        if (v.size() != s.dimension) throw Error(ErrorKind::ConfigError, std::string(key) + " entry has wrong dimension");
        pts.push_back(std::move(v));
      }
      return pts;
    };
    s.equilibria = read_points("equilibria");
    s.attractors = read_points("attractors");
    s.variables = detail::default_variables(s.dimension);

    const std::size_t d = s.dimension;
    s.velocity = [exprs, d](std::span<const double> x, double t, std::span<double> out) {
      static const std::array<std::string, 10> names = {"x", "y", "z", "w1", "w2", "w3", "w4", "w5", "w6", "t"};
      std::array<double, 10> values{};
      values.fill(std::numeric_limits<double>::quiet_NaN());
      for (std::size_t i = 0; i < d && i < 3; ++i) values[i] = x[i];
      for (std::size_t i = 0; i < d; ++i) values[3 + i] = x[i];
      values[9] = t;
      auto lookup = [&](const std::string& name) {
        for (std::size_t i = 0; i < names.size(); ++i)
          if (names[i] == name) {
            if (std::isnan(values[i])) throw Error(ErrorKind::UnboundVariable, name);
            return values[i];
          }
        throw Error(ErrorKind::UnboundVariable, name);
      };
      for (std::size_t i = 0; i < d; ++i) out[i] = fieldparse::eval_with(exprs[i], lookup);
    };
    s.reference_region = detail::cube(s.dimension, 1.0);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
}

inline FlowSystem system_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open " + path);
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, path + ": " + e.what());
  }
  return system_from_json(cfg);
}

}  // namespace lagdesc
