#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "holderlab/certify.hpp"

using namespace holderlab;

namespace {

Symbol polynomial_symbol(std::size_t dims, std::function<complex(std::span<const double>)> f) {
  Symbol s = constant_symbol(1.0, dims);
  s.name = "polynomial";
  s.evaluator = std::move(f);
  return s;
}

DerivativeNormOptions euclidean() {
  DerivativeNormOptions o;
  o.annulus.kind = AnnulusKind::euclidean;
  return o;
}

CertifyOptions quick_grid() {
  CertifyOptions o;
  o.lambda_grid = geometric_lambda_grid(-8, 8, 33);
  return o;
}

}  // namespace

TEST(Orders, EnumerationSizes) {
  EXPECT_EQ(isotropic_orders(3, 3).indices.size(), 20u);
  EXPECT_EQ(isotropic_orders(2, 0).indices.size(), 1u);
  EXPECT_EQ(grouped_orders({{0}, {1, 2}}, {2, 1}, 3).indices.size(), 3u * 3u);
  EXPECT_EQ(special_last_orders({{0}, {1}}, 2, 2).indices.size(), 6u);
  EXPECT_EQ(capped_per_axis_orders({{0}, {1, 2}}, 3).indices.size(), 3u * 4u);
  for (const auto& w : capped_per_axis_orders({{0, 1}, {2}}, 3).indices) {
    EXPECT_LE(w[0], 2);
    EXPECT_LE(w[1], 2);
    EXPECT_LE(w[2], 1);
  }
}

TEST(Orders, InvalidPartitionsAreRejected) {
  EXPECT_THROW(grouped_orders({{0}, {0, 1}}, {1, 1}, 2), std::invalid_argument);
  EXPECT_THROW(grouped_orders({{0}}, {1}, 2), std::invalid_argument);
  EXPECT_THROW(grouped_orders({{0}, {}}, {1, 1}, 1), std::invalid_argument);
  EXPECT_THROW(certify_grouped(heat_time_derivative(1, 1.0), {{0}, {2}}, {}, 2.0, GroupedForm::per_axis, 0.5),
               std::invalid_argument);
}

TEST(Quadrature, ShellVolumeMatchesClosedForm) {
  for (const auto& w : std::vector<std::vector<double>>{{1, 1}, {2, 1}, {1, 1, 1}, {2, 1, 1}, {1, 0.5}}) {
    std::vector<double> e;
    for (double x : w) e.push_back(1.0 / x);
    const double exact = anisotropic_annulus_volume(e, 1.0, 2.0);
    const double q = unit_shell_quadrature(w, AnnulusKind::anisotropic).volume();
    // Boundary cells use a midpoint indicator, so 3-axis shells at the
    // default budget are good to about half a percent.
    EXPECT_NEAR(q / exact, 1.0, w.size() == 2 ? 2e-3 : 1e-2) << w.size() << " axes, w0 = " << w[0];
  }
  const double disk = unit_shell_quadrature({1, 1}, AnnulusKind::euclidean).volume();
  EXPECT_NEAR(disk / (3.0 * M_PI), 1.0, 2e-3);
}

TEST(AnnulusNorm, ConstantSymbolGivesRootMeasure) {
  const Symbol one = constant_symbol(1.0, 2);
  const AnnulusNorm norm(one, isotropic_orders(2, 1), 2.0);
  const double exact = anisotropic_annulus_volume({1.0, 1.0}, 0.125, 8.0);
  for (double lam : {0.01, 1.0, 37.0}) {
    EXPECT_NEAR(norm(lam), std::sqrt(norm.measure()), 1e-12 * std::sqrt(norm.measure()));
    EXPECT_NEAR(norm(lam) / std::sqrt(exact), 1.0, 1e-3);
  }
}

TEST(AnnulusNorm, PolynomialDerivativesAgainstPolarIntegrals) {
  // m = xi_0 on the Euclidean annulus 1/8 <= |xi| <= 8:
  // int xi_0^2 = pi (8^4 - 8^-4) / 4, and D_0 m = 1 adds the area.
  const Symbol lin = polynomial_symbol(2, [](std::span<const double> x) { return complex(x[0]); });
  const double area = M_PI * (64.0 - 1.0 / 64.0);
  const double second = M_PI * (4096.0 - 1.0 / 4096.0) / 4.0;
  const double got = annulus_derivative_norm(lin, 1.0, 2.0, isotropic_orders(2, 1), euclidean());
  EXPECT_NEAR(got * got / (second + area), 1.0, 3e-3);

  // D^{(2,1)} (xi_0^2 xi_1) = 2 everywhere: exercises mixed odd/even stencils.
  const Symbol cubic = polynomial_symbol(2, [](std::span<const double> x) { return complex(x[0] * x[0] * x[1]); });
  OrderSpec only{"custom", {{2, 1}}, json::object()};
  const AnnulusNorm n21(cubic, only, 2.0, euclidean());
  EXPECT_NEAR(n21(1.0) / (2.0 * std::sqrt(n21.measure())), 1.0, 1e-6);
  EXPECT_NEAR(n21(1.0) / (2.0 * std::sqrt(area)), 1.0, 2e-3);
}

TEST(AnnulusNorm, PowerPMatchesDirectSum) {
  // For a constant c the L^p norm is |c| |B|^{1/p}.
  const Symbol c = constant_symbol(complex(0.0, 3.0), 2);
  const AnnulusNorm norm(c, isotropic_orders(2, 2), 1.25);
  EXPECT_NEAR(norm(2.0), 3.0 * std::pow(norm.measure(), 1.0 / 1.25), 1e-10 * norm(2.0));
}

TEST(AnnulusNorm, RieszIsScaleInvariant) {
  const Symbol r = riesz_second_order(3, 1, 0);
  const AnnulusNorm norm(r, isotropic_orders(3, 2), 2.0);
  const double a = norm(1.0), b = norm(4.0);
  EXPECT_NEAR(a, b, 1e-6 * a);
}

TEST(AnnulusNorm, RejectsSingularSymbolsAndBadArguments) {
  Symbol bad = polynomial_symbol(2, [](std::span<const double> x) {
    return std::abs(x[0]) < 1.0 ? complex(std::nan("")) : complex(1.0);
  });
  EXPECT_THROW(annulus_derivative_norm(bad, 1.0, 2.0, isotropic_orders(2, 0)), std::domain_error);
  EXPECT_THROW(annulus_derivative_norm(constant_symbol(1.0, 2), 1.0, 1.0, isotropic_orders(2, 0)), std::invalid_argument);
  EXPECT_THROW(annulus_derivative_norm(constant_symbol(1.0, 2), 0.0, 2.0, isotropic_orders(2, 0)), std::invalid_argument);
}

TEST(AnnulusNorm, RichardsonStabilityForLibrarySymbols) {
  struct Case {
    Symbol m;
    OrderSpec o;
  };
  const std::vector<Case> cases = {
      {riesz_second_order(3, 1, 0), isotropic_orders(3, 3)},
      {heat_time_derivative(1, 1.0), capped_per_axis_orders({{0}, {1}}, 2)},
      {ch_reduction_symbol(1, 1), special_last_orders({{0}, {1}}, 2, 2)},
      {heat_resolvent(1, 1.0), isotropic_orders(2, 3)},
  };
  for (const auto& c : cases) {
    const AnnulusNorm norm(c.m, c.o, 2.0);
    const double full = norm(1.0), half = norm(1.0, 0.5);
    EXPECT_LT(std::abs(half - full) / full, 0.005) << c.m.label();
  }
}

TEST(Certify, RieszIsotropicPasses) {
  const Symbol r = riesz_second_order(3, 1, 0);
  const auto profile = AnisotropyProfile::smooth(0.5, {1, 1, 1});
  EXPECT_EQ(isotropic_threshold_order(3, 2.0, 0.5), 3);
  const Certificate c = certify_isotropic(r, profile, 2.0, 3, quick_grid());
  EXPECT_TRUE(c.pass);
  EXPECT_LT(c.drift, 1e-6);
  EXPECT_EQ(c.per_lambda_norms.size(), 33u);
  EXPECT_EQ(c.mu_estimate, *std::max_element(c.per_lambda_norms.begin(), c.per_lambda_norms.end()));
  ASSERT_TRUE(c.richardson_change);
  EXPECT_LT(*c.richardson_change, 0.005);
  EXPECT_THROW(certify_isotropic(r, profile, 2.0, 2), std::invalid_argument);
}

TEST(Certify, ChReductionIsotropicPasses) {
  const Certificate c =
      certify_isotropic(ch_reduction_symbol(1, 0), AnisotropyProfile::smooth(0.5, {1, 1}), 2.0, 2, quick_grid());
  EXPECT_TRUE(c.pass);
  EXPECT_LT(c.drift, 1e-6);
}

TEST(Certify, HeatPerAxisFormIsLambdaConstant) {
  const Certificate c =
      certify_grouped(heat_time_derivative(1, 1.0), {{0}, {1}}, {}, 2.0, GroupedForm::per_axis, 0.5, quick_grid());
  EXPECT_TRUE(c.pass);
  EXPECT_LT(c.drift, 1e-6);
  EXPECT_EQ(c.order_terms, 6u);
}

TEST(Certify, ChReductionSpecialLastReportsBothReadings) {
  const Certificate c = certify_grouped(ch_reduction_symbol(1, 1), {{0}, {1}}, {1}, 2.0, GroupedForm::special_last,
                                        0.5, quick_grid());
  EXPECT_TRUE(c.pass);
  ASSERT_TRUE(c.alternate_label);
  ASSERT_EQ(c.alternate_norms.size(), c.per_lambda_norms.size());
  for (std::size_t i = 0; i < c.alternate_norms.size(); ++i) EXPECT_LT(c.alternate_norms[i], c.per_lambda_norms[i]);
  EXPECT_THROW(certify_grouped(ch_reduction_symbol(1, 1), {{0}, {1}}, {0}, 2.0, GroupedForm::special_last, 0.5),
               std::invalid_argument);
}

TEST(Certify, GroupedThresholds) {
  const Symbol h = heat_time_derivative(2, 1.0);
  EXPECT_THROW(certify_grouped(h, {{0}, {1, 2}}, {1, 1}, 2.0, GroupedForm::sufficient, 0.5), std::invalid_argument);
  EXPECT_THROW(certify_grouped(h, {{0}, {1, 2}}, {1, 2}, 2.0, GroupedForm::gain, 0.5), std::invalid_argument);
  CertifyOptions o;
  o.lambda_grid = {0.25, 1.0, 4.0};
  o.richardson = false;
  const Certificate c = certify_grouped(h, {{0}, {1, 2}}, {1, 2}, 2.0, GroupedForm::sufficient, 0.5, o);
  EXPECT_TRUE(c.pass);
  EXPECT_EQ(c.form, "grouped_sufficient");
}

TEST(Certify, ConstantSymbolPassesWithMeasureTerm) {
  CertifyOptions o;
  o.richardson = false;
  const Certificate c =
      certify_grouped(constant_symbol(1.0, 2), {{0}, {1}}, {2, 2}, 2.0, GroupedForm::sufficient, 0.5, o);
  EXPECT_TRUE(c.pass);
  EXPECT_NEAR(c.mu_estimate, std::sqrt(c.annulus_measure), 1e-12 * c.mu_estimate);
}

TEST(Certify, LogSymbolFails) {
  const Certificate c =
      certify_isotropic(log_distance({1.0, 1.0}), AnisotropyProfile::smooth(0.5, {1, 1}), 2.0, 2, quick_grid());
  EXPECT_FALSE(c.pass);
  EXPECT_GT(c.drift, 1.0);
}

TEST(Certify, MuIsInvariantUnderLambdaReordering) {
  CertifyOptions a;
  a.lambda_grid = {0.5, 2.0, 8.0, 0.125};
  a.richardson = false;
  CertifyOptions b = a;
  std::reverse(b.lambda_grid.begin(), b.lambda_grid.end());
  const auto profile = AnisotropyProfile::smooth(0.5, {1, 1});
  const Symbol m = log_distance({1.0, 1.0});
  EXPECT_EQ(certify_isotropic(m, profile, 2.0, 2, a).mu_estimate, certify_isotropic(m, profile, 2.0, 2, b).mu_estimate);
}

TEST(Certify, SerializesToJsonAndCsv) {
  CertifyOptions o;
  o.lambda_grid = {0.5, 1.0};
  o.richardson = false;
  const Certificate c = certify_isotropic(riesz_second_order(2, 0, 0), AnisotropyProfile::smooth(0.5, {1, 1}), 2.0, 2, o);
  const json j = c.to_json();
  EXPECT_EQ(j["form"], "isotropic");
  EXPECT_EQ(j["per_lambda_norms"].size(), 2u);
  EXPECT_EQ(j["annulus"]["rho_min"], 0.125);
  const std::string csv = c.to_csv();
  EXPECT_EQ(csv.rfind("lambda,norm\r\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(HausdorffYoung, RatiosStayBelowTheBound) {
  const Grid g = Grid::cube(2, 51.0, 256);
  const auto ratios =
      hausdorff_young_ratios(riesz_second_order(2, 1, 0), {1.0, 1.0}, build_cutoffs(), 0, g, {1.25, 1.5, 2.0});
  ASSERT_EQ(ratios.size(), 3u);
  for (const auto& e : ratios) {
    RecordProperty("ratio_p" + std::to_string(e.p), std::to_string(e.ratio / e.bound));
    EXPECT_LE(e.ratio, e.bound * (1.0 + 1e-12)) << e.p;
  }
  // Discrete Plancherel makes p = 2 an equality.
  EXPECT_NEAR(ratios[2].ratio / ratios[2].bound, 1.0, 1e-10);
}
