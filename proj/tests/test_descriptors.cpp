#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "lagdesc/descriptors.hpp"
#include "lagdesc/verify.hpp"

using namespace lagdesc;

namespace {

// Direct orbit enumeration for x -> lambda x, y -> y / lambda.
double brute_force_mdp(double lambda, double x0, double y0, int N, double p) {
  double sum = 0.0;
  for (int i = -N; i < N; ++i) {
    const double xi = x0 * std::pow(lambda, i), xj = x0 * std::pow(lambda, i + 1);
    const double yi = y0 * std::pow(lambda, -i), yj = y0 * std::pow(lambda, -(i + 1));
    sum += std::pow(std::abs(xj - xi), p) + std::pow(std::abs(yj - yi), p);
  }
  return sum;
}

}  // namespace

TEST(Descriptors, RotationClosedForm) {
  EXPECT_NEAR(compute_M(rotation2d(), State{3, 4}, 0.0, 5.0), 50.0, 50.0 * 1e-6);
  EXPECT_NEAR(compute_M(rotation2d(), State{1, 0}, 0.0, 2.0), 4.0, 4.0 * 1e-6);
}

TEST(Descriptors, EquilibriaGiveZero) {
  for (double tau : {0.5, 5.0, 20.0}) EXPECT_EQ(compute_M(saddle2d(1), State{0, 0}, 0.0, tau), 0.0);
  EXPECT_EQ(compute_Lf(basin2d(), State{1, 1}, 0.0, 2.0), 0.0);
  EXPECT_EQ(compute_Lf(basin2d(), State{-1, -1}, 0.0, 20.0), 0.0);
}

TEST(Descriptors, StableAxisOfShear) {
  const double expected = 0.5 * (std::exp(3.0) - std::exp(-3.0));
  EXPECT_NEAR(compute_M(shear_tanh(), State{0, 0.5}, 0.0, 3.0), expected, expected * 1e-6);
  EXPECT_NEAR(expected, 10.01787, 1e-5);
}

TEST(Descriptors, MDpHandValue) {
  const double v = compute_MDp(linear_map(2), 1.0, 1.0, 1, 0.5);
  EXPECT_NEAR(v, 2.0 + std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(v, brute_force_mdp(2.0, 1.0, 1.0, 1, 0.5), 1e-12);
  const auto orbit = map_orbit(linear_map(2), 1.0, 1.0, 1);
  ASSERT_EQ(orbit.size(), 3u);
  EXPECT_EQ(orbit[0], (std::pair{0.5, 2.0}));
  EXPECT_EQ(orbit[1], (std::pair{1.0, 1.0}));
  EXPECT_EQ(orbit[2], (std::pair{2.0, 0.5}));
}

TEST(Descriptors, MDpMatchesBruteForce) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 40; ++k) {
    const double x = u(rng), y = u(rng);
    for (int N : {1, 3, 5})
      for (double p : {0.3, 0.5, 0.8})
        EXPECT_NEAR(compute_MDp(linear_map(2), x, y, N, p), brute_force_mdp(2.0, x, y, N, p), 1e-12);
  }
}

TEST(Descriptors, MDpFixedPointAndSymmetry) {
  EXPECT_EQ(compute_MDp(linear_map(2), 0.0, 0.0, 7, 0.4), 0.0);
  EXPECT_EQ(compute_MDp(perturbed_map(), 0.0, 0.0, 7, 0.4), 0.0);
  for (double x : {0.3, 1.7})
    for (double y : {-0.4, 1.1}) {
      const double v = compute_MDp(linear_map(3), x, y, 6, 0.5);
      EXPECT_EQ(v, compute_MDp(linear_map(3), -x, y, 6, 0.5));
      EXPECT_EQ(v, compute_MDp(linear_map(3), x, -y, 6, 0.5));
    }
}

TEST(Descriptors, MDpSeparable) {
  const auto map = linear_map(2);
  const int N = 4;
  const double p = 0.5;
  const double A = compute_MDp(map, 1.0, 0.0, N, p), B = compute_MDp(map, 0.0, 1.0, N, p);
  for (double x : {-1.5, 0.2, 0.9})
    for (double y : {-0.7, 0.0, 1.3}) {
      const double v = compute_MDp(map, x, y, N, p);
      EXPECT_NEAR(v, std::pow(std::abs(x), p) * A + std::pow(std::abs(y), p) * B, 1e-12 * v + 1e-15);
    }
}

TEST(Descriptors, MDpErrors) {
  DiscreteMap2D no_inverse{"forward_only", [](double x, double y) { return std::pair{x, y}; }, std::nullopt, {}};
  auto kind = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::ConfigError;
  };
  EXPECT_EQ(kind([&] { compute_MDp(no_inverse, 1, 1, 2, 0.5); }), ErrorKind::MissingInverse);
  EXPECT_EQ(kind([&] { compute_MDp(linear_map(2), 1, 1, 2000, 0.5); }), ErrorKind::NonFiniteOrbit);
  EXPECT_EQ(kind([&] { compute_MDp(linear_map(2), 1, 1, 2, 1.0); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind([&] { compute_MDp(linear_map(2), 1, 1, 0, 0.5); }), ErrorKind::InvalidArgument);
}

TEST(Descriptors, Decomposition) {
  for (const auto& [sys, x0] : std::vector<std::pair<FlowSystem, State>>{
           {saddle2d(1), {0.3, 0.4}}, {shear_tanh(), {0.02, 0.2}}, {basin2d(), {1.1, 0.5}},
           {linear3d(), {0.1, -0.2, 0.3}}}) {
    DescriptorSpec spec;
    spec.tau = 4.0;
    spec.kind = DescriptorKind::MBoth;
    const double both = evaluate(sys, spec, x0);
    spec.kind = DescriptorKind::MForward;
    const double fwd = evaluate(sys, spec, x0);
    spec.kind = DescriptorKind::MBackward;
    const double bwd = evaluate(sys, spec, x0);
    EXPECT_NEAR((fwd + bwd) / both, 1.0, 1e-9) << sys.name;
    spec.kind = DescriptorKind::LForward;
    EXPECT_EQ(evaluate(sys, spec, x0), fwd) << sys.name;
  }
}

TEST(Descriptors, MonotoneInTau) {
  const std::vector<double> taus = {0.5, 1.0, 2.0, 4.0, 8.0};
  for (const auto& sys : {saddle2d(1), rotation2d(), shear_piecewise(), basin2d(), duffing_damped()})
    for (double x = -0.9; x <= 0.9; x += 0.6)
      for (double y = -0.9; y <= 0.9; y += 0.6) {
        double prev = 0.0;
        for (double tau : taus) {
          const double m = compute_M(sys, State{x, y}, 0.0, tau);
          EXPECT_GE(m, prev) << sys.name << " tau=" << tau;
          prev = m;
        }
      }
}

TEST(Descriptors, LinearHomogeneity) {
  for (const auto& [sys, x0] :
       std::vector<std::pair<FlowSystem, State>>{{saddle2d(1), {0.3, -0.45}}, {linear3d(), {0.2, 0.1, -0.3}}})
    for (double c : {0.5, 2.0, -1.0}) {
      State scaled = x0;
      for (double& v : scaled) v *= c;
      const double base = compute_M(sys, x0, 0.0, 5.0);
      EXPECT_NEAR(compute_M(sys, scaled, 0.0, 5.0) / (std::abs(c) * base), 1.0, 1e-7) << sys.name << " c=" << c;
    }
}

TEST(Descriptors, OracleAgreement) {
  const auto rot = rotation2d();
  for (double x = -1.0; x <= 1.0; x += 0.25)
    for (double y = -1.0; y <= 1.0; y += 0.25) {
      if (x == 0.0 && y == 0.0) continue;
      const State p = {x, y};
      const double oracle = rot.oracle->m_value(3.0, 0.0, p);
      EXPECT_LT(std::abs(compute_M(rot, p, 0.0, 3.0) - oracle) / oracle, 1e-6);
    }
  for (const auto& sys : {saddle2d(1), linear3d(), shear_tanh(), shear_piecewise()})
    for (std::size_t axis = 0; axis < sys.oracle->axis_m.size(); ++axis) {
      if (!sys.oracle->axis_m[axis]) continue;
      State p(sys.dimension, 0.0);
      p[axis] = 0.25;
      const double oracle = sys.oracle->axis_m[axis](3.0, 0.25);
      EXPECT_LT(std::abs(compute_M(sys, p, 0.0, 3.0) - oracle) / oracle, 1e-6) << sys.name << " axis " << axis;
    }
}

TEST(Descriptors, BasinDerivativeIdentity) {
  const auto sys = basin2d();
  const auto cfg = verify::probe_config();
  auto lf = [&](std::span<const double> x) { return compute_Lf(sys, x, 0.0, 2.0, cfg); };
  const double fd = verify::central_difference(lf, State{1.1, 0.0}, 1);
  const double expected = (-std::exp(2.0) + std::exp(-2.0)) / 2.0;
  EXPECT_NEAR(expected, -3.626860, 1e-6);
  EXPECT_LT(std::abs(fd - expected) / std::abs(expected), 1e-3);
}

TEST(Descriptors, ConfigurationSpeed) {
  const State x = {1.1, 3.0};
  const double phase = compute_Lf(duffing_damped(), x, 0.0, 5.0);
  const double config = compute_Lf(duffing_damped(), x, 0.0, 5.0, {}, SpeedNorm::Configuration);
  EXPECT_GT(config, 0.0);
  EXPECT_LT(config, phase);
  // |q'| integrated: total variation of q. From q' > 0 start, q rises monotonically at first.
  const auto traj = integrate(duffing_damped(), x, 0.0, 5.0);
  double tv = 0.0;
  for (std::size_t k = 1; k < traj.states.size(); ++k) tv += std::abs(traj.states[k][0] - traj.states[k - 1][0]);
  EXPECT_NEAR(config, tv, 1e-3 * tv);
  EXPECT_THROW(compute_Lf(linear3d(), State{1, 1, 1}, 0.0, 1.0, {}, SpeedNorm::Configuration), Error);
}

TEST(Descriptors, SpecHandling) {
  EXPECT_EQ(descriptor_kind_from_string("M"), DescriptorKind::MBoth);
  EXPECT_EQ(descriptor_kind_from_string("Mf"), DescriptorKind::MForward);
  EXPECT_EQ(descriptor_kind_from_string("Mb"), DescriptorKind::MBackward);
  EXPECT_EQ(descriptor_kind_from_string("Lf"), DescriptorKind::LForward);
  EXPECT_EQ(descriptor_kind_from_string("MDp"), DescriptorKind::MDp);
  EXPECT_THROW(descriptor_kind_from_string("L"), Error);
  for (auto k : {DescriptorKind::MBoth, DescriptorKind::MForward, DescriptorKind::MBackward, DescriptorKind::LForward,
                 DescriptorKind::MDp})
    EXPECT_EQ(descriptor_kind_from_string(to_string(k)), k);

  DescriptorSpec mdp;
  mdp.kind = DescriptorKind::MDp;
  mdp.p = 1.5;
  EXPECT_THROW(mdp.validate(), Error);
  mdp.p = 0.5;
  mdp.N = 3;
  EXPECT_NO_THROW(mdp.validate());
  EXPECT_THROW(evaluate(saddle2d(), mdp, State{1, 1}), Error);
  DescriptorSpec m;
  EXPECT_THROW(evaluate(linear_map(), m, State{1, 1}), Error);
  m.tau = -1.0;
  EXPECT_THROW(m.validate(), Error);
  EXPECT_THROW(compute_M(saddle2d(), State{1, 1}, 0.0, 0.0), Error);
}

TEST(Descriptors, DirectionTaggedErrors) {
  // Backward integration of saddle2d blows up along y.
  try {
    compute_M(saddle2d(1), State{0, 1}, 0.0, 750.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OverflowGuard);
    EXPECT_NE(std::string(e.what()).find("integration failed"), std::string::npos);
  }
}
