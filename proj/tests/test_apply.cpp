#include <gtest/gtest.h>

#include <cmath>

#include "holderlab/apply.hpp"
#include "holderlab/families.hpp"

using namespace holderlab;

namespace {

double max_diff(const SampledField& a, const SampledField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

SampledField random_field(const Grid& g, unsigned seed) { return band_limited_field(g, g.points(0) / 2 - 2, seed); }

}  // namespace

TEST(Apply, IdentityAndZeroSymbols) {
  const Grid g = Grid::cube(2, M_PI, 32);
  const auto u = random_field(g, 1);
  EXPECT_LT(max_diff(apply_multiplier(constant_symbol(1.0, 2), u), u), 1e-12 * u.max_abs());
  EXPECT_EQ(apply_multiplier(constant_symbol(0.0, 2), u).max_abs(), 0.0);
}

TEST(Apply, SingleModeRiesz) {
  // u = exp(i(x + y)) has its spectrum at xi = (1, 1) where xi_1^2/|xi|^2 = 1/2.
  const Grid g = Grid::cube(2, M_PI, 16);
  const auto u = sample([](std::span<const double> x) { return std::exp(complex(0.0, x[0] + x[1])); }, g);
  const auto v = apply_multiplier(riesz_second_order(2, 0, 0), u);
  EXPECT_LT(max_diff(v, u.scaled(0.5)), 1e-13);
}

TEST(Apply, LinearityAndComposition) {
  const Grid g = Grid::cube(2, 3.0, 32);
  const auto u = random_field(g, 2), w = random_field(g, 3);
  const Symbol m1 = riesz_second_order(2, 1, 0), m2 = riesz_second_order(2, 0, 0);
  const auto lhs = apply_multiplier(m1, u.scaled(2.0) + w.scaled(-3.0));
  const auto rhs = apply_multiplier(m1, u).scaled(2.0) + apply_multiplier(m1, w).scaled(-3.0);
  EXPECT_LT(max_diff(lhs, rhs), 1e-12 * lhs.max_abs());
  const auto twice = apply_multiplier(m2, apply_multiplier(m1, u));
  const auto once = apply_multiplier(product(m1, m2), u);
  EXPECT_LT(max_diff(twice, once), 1e-11);
}

TEST(Apply, DcPolicies) {
  const Grid g = Grid::cube(2, M_PI, 16);
  EXPECT_EQ(dc_choice(riesz_second_order(2, 1, 0), g).policy, DcPolicy::vanishing_slice);
  EXPECT_EQ(dc_choice(constant_symbol(2.0, 2), g).policy, DcPolicy::declared_value);
  EXPECT_EQ(dc_choice(constant_symbol(2.0, 2), g).value, complex(2.0));
  // heat_resolvent 1/(i xi_0 + xi_1^2) has no limit at 0; the eight
  // neighbours on the unit-spacing lattice average to a real value by symmetry.
  const DcChoice c = dc_choice(heat_resolvent(1, 1.0), g);
  EXPECT_EQ(c.policy, DcPolicy::ring_average);
  complex expect = 0.0;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      if (a || b) expect += 1.0 / complex(b * b, a);
  EXPECT_LT(std::abs(c.value - expect / 8.0), 1e-15);
}

TEST(Apply, RejectsNonFiniteSymbolAndWrongSide) {
  const Grid g = Grid::cube(2, M_PI, 16);
  Symbol bad = constant_symbol(1.0, 2);
  bad.evaluator = [](std::span<const double> xi) { return complex(1.0 / (xi[0] - 1.0)); };
  const auto u = random_field(g, 4);
  EXPECT_THROW(apply_multiplier(bad, u), std::domain_error);
  EXPECT_THROW(apply_multiplier(constant_symbol(1.0, 2), forward_transform(u)), std::invalid_argument);
  EXPECT_THROW(apply_multiplier(constant_symbol(1.0, 3), u), std::invalid_argument);
}

TEST(Families, PowerBumpHasTheExpectedExponent) {
  const Grid g = Grid::cube(1, M_PI, 1024);
  const auto u = power_bump_field(g, 0, 0.4);
  GainOptions o;
  const auto [h0, h1] = gain_ladder(g, 0, 1, o);
  EXPECT_NEAR(*fit_exponent(u, 0, 1, h0, h1), 0.4, 0.03);
}

TEST(Families, SeededFieldsAreDeterministicAndReal) {
  const Grid g = Grid::cube(2, M_PI, 32);
  const auto p = AnisotropyProfile::from_exponents(0.5, {1.0, 1.0}, {false, true});
  EXPECT_EQ(max_diff(partial_holder_field(g, p, 9), partial_holder_field(g, p, 9)), 0.0);
  EXPECT_GT(max_diff(partial_holder_field(g, p, 9), partial_holder_field(g, p, 10)), 0.0);
  const auto b = band_limited_field(g, 5, 3);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(b[i].imag(), 0.0);
  EXPECT_THROW(band_limited_field(g, 16, 3), std::invalid_argument);
}

TEST(Gain, VanishingSliceIsNeededForTheGain) {
  // Hoelder-gamma in x_0 only, with jumps in x_1.
  const double gamma = 0.5;
  const Grid g = Grid::cube(2, M_PI, 256);
  const auto p = AnisotropyProfile::from_exponents(gamma, {1.0, 1.0}, {false, true});
  const auto u = partial_holder_field(g, p, 11);
  const GainReport riesz = gain_experiment(riesz_second_order(2, 1, 0), p, u);
  const GainReport ident = gain_experiment(constant_symbol(1.0, 2), p, u);
  const double in = *riesz.axes[1].input_fit;
  RecordProperty("input_gained_fit", std::to_string(in));
  RecordProperty("riesz_gained_fit", std::to_string(*riesz.axes[1].output_fit));
  EXPECT_LT(in, 0.2);  // jumps: no regularity beyond the smooth background
  EXPECT_GE(*riesz.axes[1].output_fit - in, gamma - 0.1);
  EXPECT_LT(*ident.axes[1].output_fit - *ident.axes[1].input_fit, 0.1);
  EXPECT_FALSE(ident.all_meet_target());
  EXPECT_EQ(riesz.dc.policy, DcPolicy::vanishing_slice);
}

TEST(Gain, EnsembleRatioIsStable) {
  const Grid g = Grid::cube(2, M_PI, 128);
  const auto p = AnisotropyProfile::from_exponents(0.5, {1.0, 1.0}, {false, true});
  const auto s = gain_ensemble(
      riesz_second_order(2, 1, 0), p, [&](unsigned long long seed) { return partial_holder_field(g, p, seed); }, 20, 7);
  EXPECT_EQ(s.ratios.size(), 20u);
  EXPECT_EQ(s.seeds.front(), 7u);
  EXPECT_TRUE(s.stable) << "max " << s.max << " median " << s.median;
  EXPECT_GT(s.median, 0.0);
}

TEST(Gain, ReportSerialization) {
  const Grid g = Grid::cube(2, M_PI, 64);
  const auto p = AnisotropyProfile::from_exponents(0.5, {1.0, 1.0}, {false, true});
  const auto r = gain_experiment(riesz_second_order(2, 1, 0), p, partial_holder_field(g, p, 1));
  const json j = r.to_json();
  EXPECT_EQ(j["dc"]["policy"], "vanishing_slice_zero");
  EXPECT_EQ(j["axes"].size(), 2u);
  EXPECT_TRUE(j["axes"][1]["input_seminorm"].is_null());
  for (const auto& a : r.axes) {
    EXPECT_GE(a.output_seminorm, 0.0);
    if (a.output_fit) {
      EXPECT_GE(*a.output_fit, 0.0);
      EXPECT_LE(*a.output_fit, a.k);
    }
  }
  const std::string csv = r.to_csv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_THROW(gain_experiment(riesz_second_order(3, 1, 0), p, partial_holder_field(g, p, 1)), std::invalid_argument);
}
