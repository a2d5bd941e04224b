#include <gtest/gtest.h>

#include <cmath>

#include "holderlab/families.hpp"
#include "holderlab/problems.hpp"

using namespace holderlab;

namespace {

double max_diff(const SampledField& a, const SampledField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

SampledField relabel(const SampledField& u, const Grid& g) {
  return SampledField(g, std::vector<complex>(u.values().begin(), u.values().end()), Side::physical);
}

const Grid& heat_grid() {
  static const Grid g({8.0, M_PI / 2}, {128, 128});
  return g;
}

}  // namespace

TEST(ExampleOne, RejectsBadInput) {
  const Grid g = Grid::cube(2, M_PI, 32);
  const auto f = example1_data(g, 0.6, 1);
  EXPECT_THROW(example1_poisson(f, 1.2), std::invalid_argument);
  EXPECT_THROW(example1_poisson(f, 0.0), std::invalid_argument);
  EXPECT_THROW(example1_poisson(example1_data(Grid::cube(1, M_PI, 32), 0.6, 1), 0.6), std::invalid_argument);
  const auto leak = sample([](std::span<const double>) { return 1.0; }, g);
  EXPECT_THROW(example1_poisson(leak, 0.6), std::invalid_argument);
}

TEST(ExampleOne, SecondDerivativesGainInEveryAxis) {
  const double gamma = 0.6;
  const Grid g = Grid::cube(2, M_PI, 256);
  const auto r = example1_poisson(example1_data(g, gamma, 3, false), gamma);
  ASSERT_EQ(r.derivatives.size(), 2u);
  RecordProperty("min_fit", std::to_string(r.min_fit()));
  EXPECT_GE(r.min_fit(), gamma - 0.05);
  EXPECT_GT(r.data_x1_seminorm, 0.0);
  EXPECT_NO_THROW(r.to_json());
}

TEST(Counterexample, LogGrowthWithBoundedMixedDerivative) {
  CounterexampleOptions o;
  o.seminorm_max_points = 64;
  const auto t = example1_counterexample({32, 64, 128, 256}, o);
  ASSERT_EQ(t.increments.size(), 3u);
  for (double d : t.increments) EXPECT_NEAR(d, 4.0 * std::log(2.0), 0.1);
  EXPECT_TRUE(t.log_growth);
  EXPECT_TRUE(t.mixed_bounded);
  EXPECT_TRUE(t.rows[0].data_x1_seminorm.has_value());
  EXPECT_FALSE(t.rows[3].data_x1_seminorm.has_value());
}

TEST(Counterexample, ZeroCutoffGivesZeros) {
  CounterexampleOptions o;
  o.eta_scale = 0.0;
  o.seminorm_max_points = 32;
  const auto t = example1_counterexample({32, 64}, o);
  for (const auto& r : t.rows) {
    EXPECT_EQ(r.max_d22, 0.0);
    EXPECT_EQ(r.max_d21, 0.0);
    EXPECT_EQ(r.data_x1_seminorm.value_or(0.0), 0.0);
  }
  EXPECT_FALSE(t.log_growth);
}

TEST(ExampleTwo, RejectsGammaAtOrBelowHalf) {
  const Grid g = Grid::cube(2, M_PI, 32);
  const auto f = example2_data(g, 0.75, 1);
  EXPECT_THROW(example2_heat(f, 0.5), std::invalid_argument);
  EXPECT_THROW(example2_heat(f, 1.0), std::invalid_argument);
  EXPECT_THROW(example2_heat(f, 0.75, 0.0), std::invalid_argument);
}

TEST(ExampleTwo, TimeDerivativeAndMixedDerivativeExponents) {
  const double gamma = 0.75;
  const Grid g = Grid::cube(2, M_PI, 256);
  const auto r = example2_heat(example2_data(g, gamma, 5), gamma);
  RecordProperty("ut_space_fit", std::to_string(r.ut_space_fit()));
  RecordProperty("mixed_space_fit", std::to_string(r.mixed_space_fit()));
  EXPECT_GE(r.ut_space_fit(), 2.0 * gamma - 0.1);
  EXPECT_GE(r.mixed_space_fit(), 2.0 * gamma - 1.0 - 0.05);
  EXPECT_GT(r.data_time_seminorm(), 0.0);
}

TEST(HeatTrace, MatchesConvolutionOracle) {
  const HeatDipoleData d;
  const auto h = heat_dipole_data(heat_grid(), d);
  TraceDiagnostics diag;
  const auto rho = heat_boundary_trace(h, 1.0, &diag);
  EXPECT_LT(relative_l2(rho, heat_convolution_oracle(heat_grid(), 1.0, d)), 1e-6);
  EXPECT_LT(diag.causality_residual, 1e-8);
  EXPECT_TRUE(diag.guard_band_ok());
  EXPECT_LT(std::abs(diag.dropped_dc), 1e-12);
}

TEST(HeatTrace, ZeroAndPrecausalData) {
  const Grid g({4.0, 2.0}, {32, 32});
  EXPECT_EQ(heat_boundary_trace(SampledField::zeros(g), 1.0).max_abs(), 0.0);
  const auto bad = sample([](std::span<const double> x) { return std::exp(-x[0] * x[0]) * std::sin(x[1]); }, g);
  EXPECT_THROW(heat_boundary_trace(bad, 1.0), std::invalid_argument);
  EXPECT_THROW(heat_boundary_trace(SampledField::zeros(g), -1.0), std::invalid_argument);
}

TEST(HeatTrace, ScalingLaws) {
  const Grid g({8.0, M_PI / 2}, {64, 64});
  const auto h = heat_dipole_data(g, {});
  const auto rho = heat_boundary_trace(h, 1.0);
  // Doubling a equals stretching space by sqrt(2).
  const Grid wide({8.0, M_PI / 2 * std::sqrt(2.0)}, {64, 64});
  EXPECT_LT(max_diff(heat_boundary_trace(relabel(h, wide), 2.0), rho), 1e-9 * rho.max_abs());
  // Parabolic rescaling x -> 2x, t -> 4t scales the trace by 1/4.
  const Grid small({2.0, M_PI / 4}, {64, 64});
  EXPECT_LT(max_diff(heat_boundary_trace(relabel(h, small), 1.0), rho.scaled(0.25)), 1e-9 * rho.max_abs());
}

TEST(Oracle, ConjugateSymmetryAndSteadyLimit) {
  const auto p = ch_ode_oracle(1.3, 4.0), m = ch_ode_oracle(1.3, -4.0);
  ASSERT_TRUE(p.slope && m.slope);
  EXPECT_LT(std::abs(*p.slope - std::conj(*m.slope)), 1e-12);
  const auto s = ch_ode_oracle(2.0, 1e-9);
  ASSERT_TRUE(s.slope.has_value());
  EXPECT_NEAR(s.slope->real(), -2.0, 1e-6);
  EXPECT_TRUE(ch_ode_oracle(0.0, 1e-48).ambiguous);
  EXPECT_THROW(ch_ode_oracle(0.0, 0.0), std::invalid_argument);
  EXPECT_FALSE(p.ambiguous);
}

TEST(Oracle, CollocationAgreesWithRootBasis) {
  const auto r = ch_ode_oracle(0.7, -3.0);
  ASSERT_TRUE(r.slope && r.collocation_slope);
  EXPECT_LT(std::abs(*r.slope - *r.collocation_slope), 1e-7 * std::abs(*r.slope));
  const auto q = ch_roots(0.49, -3.0);
  EXPECT_LT(std::abs(r.fraction() - 2.0 * q.q1 * q.q2 / (q.q1 + q.q2)), 1e-12);
}

TEST(Oracle, DenominatorComparisonResolvesPlacementOfA) {
  const auto one = ch_denominator_comparison(1.0);
  const auto two = ch_denominator_comparison(2.5);
  EXPECT_LT(one.max_rel_error, 1e-8);
  EXPECT_LT(two.max_rel_error, 1e-8);
  EXPECT_TRUE(two.a_multiplies_fraction());
  EXPECT_GT(two.max_rel_error_unscaled, 1e-2);
  EXPECT_EQ(one.ambiguous_points, 0u);
}

TEST(FluxTrace, InvertsTheBoundarySymbol) {
  SchauderSetup s;
  const Grid g = s.boundary_grid();
  const auto h = causal_dipole_data(g, 2);
  TraceDiagnostics d;
  const auto rho = ch_problem2_trace(h, 1.5, &d);
  const auto back = apply_spectral(rho, [](std::size_t, std::span<const double> xi) {
    return detail::is_origin(xi) ? complex(0.0) : ch_denominator_value(detail::norm2(xi, 1), xi[0], 1.5);
  });
  EXPECT_LT(max_diff(back.real_part(), h), 1e-10 * h.max_abs());
  EXPECT_LT(d.causality_residual, 1e-5);
}

TEST(Reduction, RemainderIsLowerOrder) {
  const Grid g({4.0, 4.0}, {128, 128});
  const auto h = band_limited_field(g, 60, 4);
  for (double a : {1.0, 2.5}) {
    const auto r = ch_reduction_check(h, a, 1, {3});
    EXPECT_TRUE(r.passes()) << dump_json(r.to_json());
    EXPECT_GE(r.levels.size(), 2u);
  }
}

TEST(HalfSpace, HomogeneousSolveMeetsTraceAndBoundaryConditions) {
  SchauderSetup s;
  const auto h = causal_dipole_data(s.boundary_grid(), 3);
  HalfSpaceOptions o;
  o.norms = false;
  for (auto v : {TraceVariant::laplace_dynamic, TraceVariant::flux_dynamic}) {
    const auto sol = solve({v, 1.0, h}, o);
    EXPECT_LT(sol.trace_residual, 1e-9) << to_string(v);
    EXPECT_LT(sol.boundary_residual, 1e-7) << to_string(v);
    EXPECT_LT(sol.flux_residual, 1e-9) << to_string(v);
    EXPECT_LT(sol.decay_at_depth, 1e-8) << to_string(v);
    EXPECT_GE(sol.depth * sol.min_decay_rate, 6.0 - 1e-12);
    EXPECT_LT(sol.initial_residual, 1e-8) << to_string(v);
  }
}

TEST(HalfSpace, ZeroDataGivesZeroSolution) {
  SchauderSetup s;
  const auto z = SampledField::zeros(s.boundary_grid());
  const auto sol = ch_problem2_solve(z, 1.0);
  EXPECT_EQ(sol.u.max_abs(), 0.0);
  EXPECT_EQ(sol.rho.max_abs(), 0.0);
}

TEST(HalfSpace, SourceAndFluxSatisfyTheEquation) {
  SchauderSetup s;
  const Grid gb = s.boundary_grid();
  const auto h = causal_dipole_data(gb, 4), g = causal_dipole_data(gb, 5);
  const Grid gi({s.t_extent, s.x_extent, 3.0}, {s.t_points, s.x_points, 32});
  const auto f = sample(
      [&](std::span<const double> x) {
        return std::exp(-0.5 * std::pow((x[0] - 3.4) / 0.4, 2)) * std::exp(-8.0 * std::pow(x[2] - 1.0, 2)) *
               detail::periodic_gaussian(x[1], 0.04, s.x_extent, 1);
      },
      gi);
  const auto sol = ch_problem1_solve(h, 1.0, &f, &g);
  EXPECT_LT(sol.trace_residual, 1e-9);
  EXPECT_LT(sol.boundary_residual, 1e-7);
  EXPECT_LT(sol.flux_residual, 1e-9);
  const auto& D = sol.derivative;
  const auto r = D({1, 0, 0}) + D({0, 4, 0}) + D({0, 0, 4}) + D({0, 2, 2}).scaled(2.0) - f;
  // The even extension has a kink in f at z = 0; compare away from the wall.
  double m = 0.0;
  std::vector<std::size_t> idx(3);
  for (std::size_t i = 0; i < r.size(); ++i) {
    gi.unravel(i, idx);
    if (idx[2] > 2) m = std::max(m, std::abs(r[i]));
  }
  EXPECT_LT(m, 1e-7 * f.max_abs());
  ASSERT_TRUE(sol.f_norm && sol.g_norm && sol.interior_norm);
  EXPECT_GT(sol.interior_norm->value, 0.0);
}

TEST(HalfSpace, RejectsMismatchedSource) {
  SchauderSetup s;
  const auto h = causal_dipole_data(s.boundary_grid(), 4);
  const auto f = SampledField::zeros(Grid({s.t_extent, s.x_extent, 3.0}, {s.t_points, 16, 32}));
  EXPECT_THROW(ch_problem1_solve(h, 1.0, &f), std::invalid_argument);
  HalfSpaceOptions o;
  o.gamma = 1.0;
  EXPECT_THROW(ch_problem2_solve(h, 1.0, o), std::invalid_argument);
  EXPECT_THROW(parse_trace_variant("dirichlet"), std::invalid_argument);
}

TEST(Schauder, SmallEnsembleIsStableAndListsExcludedMembers) {
  const auto st = schauder_ratio_experiment(TraceVariant::flux_dynamic, 4, 11, {}, true);
  EXPECT_TRUE(st.stable());
  ASSERT_EQ(st.excluded.size(), 1u);
  EXPECT_EQ(st.excluded[0], 15u);
  for (const auto& r : st.ratios) EXPECT_EQ(r.values.size(), 4u);
  for (const auto& m : st.members) {
    if (m.excluded) continue;
    EXPECT_LT(m.trace_residual, 1e-9);
  }
  const std::string csv = st.to_csv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}
