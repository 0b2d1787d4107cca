#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lagdesc/verify.hpp"

using namespace lagdesc;
using namespace lagdesc::verify;

TEST(Verify, ClassifyAttractor) {
  EXPECT_EQ(classify_attractor(basin2d(), State{2, 1}), 0u);
  EXPECT_EQ(classify_attractor(basin2d(), State{2, -1}), 1u);
  EXPECT_EQ(classify_attractor(duffing_damped(), State{1.1, 0}), 0u);
  EXPECT_EQ(classify_attractor(duffing_damped(), State{-1.1, 0}), 1u);
  // On the separatrix itself nothing is reached.
  EXPECT_EQ(classify_attractor(basin2d(), State{2, 0}), std::nullopt);
  ClassifyOptions quick;
  quick.t_max = 0.1;
  EXPECT_EQ(classify_attractor(basin2d(), State{2, 1}, {}, quick), std::nullopt);
  EXPECT_THROW(classify_attractor(saddle2d(), State{1, 1}), Error);
}

TEST(Verify, SeparatrixCrossingBasin) {
  const auto line = axis_line({1.1, 0.0}, 1, {-2.0, 2.0});
  EXPECT_NEAR(separatrix_crossing(basin2d(), line), 0.0, 1e-5);
  const auto offset = axis_line({1.1, 0.0}, 1, {-0.7, 2.0});
  EXPECT_NEAR(separatrix_crossing(basin2d(), offset), 0.0, 1e-5);
}

TEST(Verify, SeparatrixCrossingDuffing) {
  ClassifyOptions opt;
  opt.t_max = 1000.0;
  const auto line = axis_line({1.1, 0.0}, 1, {0.0, 10.0}, 2);
  const double c = separatrix_crossing(duffing_damped(), line, {}, 1e-6, opt);
  EXPECT_NEAR(c, 6.17, 0.1);
  EXPECT_EQ(classify_attractor(duffing_damped(), State{1.1, c - 1e-3}, {}, opt), 0u);
  EXPECT_EQ(classify_attractor(duffing_damped(), State{1.1, c + 1e-3}, {}, opt), 1u);
}

TEST(Verify, SeparatrixCrossingErrors) {
  auto kind = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::ConfigError;
  };
  const auto same = axis_line({1.1, 0.0}, 1, {0.5, 2.0});
  EXPECT_EQ(kind([&] { separatrix_crossing(basin2d(), same); }), ErrorKind::NoSignChange);
  const auto from_axis = axis_line({1.1, 0.0}, 1, {0.0, 2.0});
  EXPECT_EQ(kind([&] { separatrix_crossing(basin2d(), from_axis); }), ErrorKind::UndecidedRegion);
}

TEST(Verify, ScanTieRule) {
  const auto line = axis_line({0.0, 0.0}, 0, {-1.0, 1.0}, 11);
  const auto flat = scan_line(line, [](std::span<const double>) { return 0.0; });
  EXPECT_EQ(flat.argmin, -1.0);
  EXPECT_EQ(flat.min_value, 0.0);
  const auto two_minima = scan_line(line, [](std::span<const double> x) { return std::abs(std::abs(x[0]) - 0.6); });
  EXPECT_NEAR(two_minima.argmin, -0.6, 1e-15);
  ASSERT_EQ(flat.params.size(), 11u);
  EXPECT_EQ(flat.params.back(), 1.0);
  for (double v : two_minima.values) EXPECT_LE(two_minima.min_value, v);
}

TEST(Verify, ScanOfMHasItsOwnArgmin) {
  // Machinery smoke test with forward M along x = 1.1 for basin2d; backward
  // orbits with |y| > 1 blow up in finite time.
  const auto line = axis_line({1.1, 0.0}, 1, {-2.0, 2.0}, 201);
  const auto scan =
      scan_line(line, [](std::span<const double> x) { return compute_M_forward(basin2d(), x, 0.0, 2.0); });
  EXPECT_GE(scan.argmin, -2.0);
  EXPECT_LE(scan.argmin, 2.0);
  for (double v : scan.values) EXPECT_LE(scan.min_value, v);
}

TEST(Verify, LineGeometry) {
  const auto line = axis_line({1.1, 7.0}, 1, {-2.0, 2.0}, 5);
  EXPECT_EQ(line.point(0.5), (State{1.1, 0.5}));
  EXPECT_EQ(line.parameter(0), -2.0);
  EXPECT_EQ(line.parameter(2), 0.0);
  EXPECT_EQ(line.parameter(4), 2.0);
}

TEST(Verify, RatioLimit) {
  const std::vector<double> taus = {2, 4, 6, 8, 10};
  const auto on_axis = ratio_limit(shear_piecewise(), 0.0, 0.25, taus);
  for (double tau : taus) EXPECT_EQ(on_axis.get("r_tau=" + verify::detail::num(tau)), 1.0);
  const auto off = ratio_limit(shear_piecewise(), 0.5, 0.25, taus);
  EXPECT_TRUE(off.pass) << off.failure;
  EXPECT_LT(off.get("final_abs_dev"), 0.01);
  EXPECT_LT(off.get("denominator_closed_form_rel_err"), 1e-6);
}

TEST(Verify, RatioLimitReportsOverflow) {
  const std::vector<double> taus = {2, 800};
  const auto r = ratio_limit(shear_piecewise(), 0.5, 0.25, taus);
  EXPECT_FALSE(r.pass);
  EXPECT_NE(r.failure.find("OverflowGuard"), std::string::npos);
}

TEST(Verify, HyperplaneAxisValue) {
  // M(6; 0.25 e_3) for rate 2 is 0.25 (e^12 - e^-12).
  const double m = compute_M(linear3d(), State{0, 0, 0.25}, 0.0, 6.0);
  const double closed = 0.25 * (std::exp(12.0) - std::exp(-12.0));
  EXPECT_NEAR(closed, 40688.698, 1e-3);
  EXPECT_LT(std::abs(m - closed) / closed, 1e-6);
  const std::vector<double> taus = {3, 6};
  const auto r = hyperplane_convergence(linear3d(), 0.25, 0.5, 3, taus);
  EXPECT_EQ(r.get("bracket_failures"), 0.0);
  EXPECT_LT(r.get("deviation_tau=6"), r.get("deviation_tau=3"));
}

TEST(Verify, DerivativeIdentity) {
  const auto r = lf_derivative_identity(basin2d(), 1.1, 2.0);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.get("expected"), -3.62686, 1e-5);
}

TEST(Verify, DiscreteOrbitFacts) {
  const auto orbit = map_orbit(perturbed_map(), 3.0, 0.0, 5);
  // Forward: x doubles, y stays exactly zero.
  EXPECT_EQ(orbit[6], (std::pair{6.0, 0.0}));
  EXPECT_EQ(orbit[7], (std::pair{12.0, 0.0}));
  // Backward: x_-1 = 1.5 (outside the bump), x_-2 = 0.75 triggers y.
  EXPECT_EQ(orbit[4], (std::pair{1.5, 0.0}));
  EXPECT_EQ(orbit[3].first, 0.75);
  EXPECT_EQ(orbit[3].second, -2.0 * bump_g(0.75));
  EXPECT_NE(orbit[3].second, 0.0);
  EXPECT_GT(std::abs(orbit[2].second), std::abs(orbit[3].second));
}

TEST(Verify, DiscreteFalsePositive) {
  const std::vector<int> Ns = {5, 10, 15};
  const auto r = discrete_false_positive(perturbed_map(), 3.0, Ns);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.get("forward_y_identically_zero"), 1.0);
  EXPECT_EQ(r.get("backward_leaves_manifold"), 1.0);
  EXPECT_EQ(r.get("backward_first_nonzero_index"), -2.0);
  EXPECT_LT(r.get("quotient_magnitude_N=5"), r.get("quotient_magnitude_N=10"));
  EXPECT_LT(r.get("quotient_magnitude_N=10"), r.get("quotient_magnitude_N=15"));
  EXPECT_FALSE(discrete_false_positive(perturbed_map(), 1.5, Ns).pass);
}

TEST(Verify, SmallClaims) {
  for (const char* id : {"rotation_identity", "axis_formula", "stable_axis_closed_form", "mdp_separable",
                         "basin2d_lf_minimum"}) {
    const auto r = run_claim(id);
    EXPECT_TRUE(r.pass) << id << " " << r.failure;
    EXPECT_EQ(r.claim, id);
    EXPECT_GE(r.seconds, 0.0);
  }
  EXPECT_THROW(run_claim("no_such"), Error);
}

TEST(Verify, ClaimIdsAreUnique) {
  const auto ids = claim_ids();
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) EXPECT_NE(ids[i].id, ids[j].id);
}

TEST(Verify, ReportsAreReproducible) {
  const auto a = run_claim("discrete_false_positive");
  const auto b = run_claim("discrete_false_positive");
  ASSERT_EQ(a.measured.size(), b.measured.size());
  for (std::size_t i = 0; i < a.measured.size(); ++i) {
    EXPECT_EQ(a.measured[i].first, b.measured[i].first);
    EXPECT_EQ(a.measured[i].second, b.measured[i].second);
  }
  EXPECT_EQ(a.pass, b.pass);
}
