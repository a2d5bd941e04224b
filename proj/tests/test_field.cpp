#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "holderlab/field.hpp"
#include "holderlab/field_io.hpp"
#include "holderlab/report.hpp"

using namespace holderlab;

namespace {

SampledField random_smooth_field(const Grid& g, unsigned seed, int modes = 4) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<std::vector<double>> k(6, std::vector<double>(g.dims()));
  std::vector<complex> c(6);
  for (std::size_t t = 0; t < k.size(); ++t) {
    for (std::size_t a = 0; a < g.dims(); ++a)
      k[t][a] = std::numbers::pi / g.extent(a) * static_cast<double>(static_cast<int>(rng() % (2 * modes + 1)) - modes);
    c[t] = {nd(rng), nd(rng)};
  }
  return sample(
      [&](std::span<const double> x) {
        complex v = 0.0;
        for (std::size_t t = 0; t < k.size(); ++t) {
          double ph = 0.0;
          for (std::size_t a = 0; a < x.size(); ++a) ph += k[t][a] * x[a];
          v += c[t] * std::exp(complex(0.0, ph));
        }
        return v;
      },
      g);
}

double max_rel_diff(const SampledField& a, const SampledField& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d / std::max(a.max_abs(), 1e-300);
}

}  // namespace

TEST(Grid, SpacingTimesPointsIsTwiceExtent) {
  Grid g({1.5, 3.0}, {8, 16});
  EXPECT_DOUBLE_EQ(g.spacing(0) * 8, 3.0);
  EXPECT_DOUBLE_EQ(g.spacing(1) * 16, 6.0);
  EXPECT_EQ(g.size(), 128u);
  EXPECT_DOUBLE_EQ(g.node(0, 0), -1.5);
  EXPECT_EQ(g.frequency_index(1, 8), -8);
  EXPECT_EQ(g.frequency_index(1, 7), 7);
}

TEST(Grid, RejectsOddOrTinyAxes) {
  EXPECT_THROW(Grid({1.0}, {5}), std::invalid_argument);
  EXPECT_THROW(Grid({1.0}, {2}), std::invalid_argument);
  EXPECT_THROW(Grid({-1.0}, {8}), std::invalid_argument);
  EXPECT_THROW(Grid({1.0, 1.0}, {8}), std::invalid_argument);
}

TEST(Sample, ZeroOneAndGaussian) {
  auto g = Grid::cube(3, 8.0, 64);
  auto z = sample([](std::span<const double>) { return 0.0; }, g);
  auto o = sample([](std::span<const double>) { return 1.0; }, g);
  EXPECT_EQ(z.max_abs(), 0.0);
  for (auto v : o.values()) EXPECT_EQ(v, complex(1.0));
  auto gauss = sample(
      [](std::span<const double> x) { return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])); }, g);
  const std::size_t origin = 32 * g.stride(0) + 32 * g.stride(1) + 32;
  EXPECT_DOUBLE_EQ(gauss[origin].real(), 1.0);
}

TEST(Sample, NonFiniteReportsCoordinates) {
  auto g = Grid::cube(1, 1.0, 8);
  try {
    sample([](std::span<const double> x) { return 1.0 / x[0]; }, g);
    FAIL();
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("(0)"), std::string::npos);
  }
}

TEST(Field, RejectsNonFiniteAndWrongShape) {
  auto g = Grid::cube(1, 1.0, 4);
  EXPECT_THROW(SampledField(g, std::vector<complex>(3), Side::physical), std::invalid_argument);
  std::vector<complex> v(4);
  v[2] = std::nan("");
  EXPECT_THROW(SampledField(g, v, Side::physical), std::domain_error);
}

TEST(Transform, WrongSideRejected) {
  auto g = Grid::cube(1, 1.0, 8);
  auto u = SampledField::zeros(g);
  EXPECT_THROW(inverse_transform(u), std::invalid_argument);
  EXPECT_THROW(forward_transform(forward_transform(u)), std::invalid_argument);
}

TEST(Transform, ZeroAndConstant) {
  Grid g({2.0, 3.0}, {8, 12});
  EXPECT_EQ(forward_transform(SampledField::zeros(g)).max_abs(), 0.0);
  auto s = forward_transform(sample([](std::span<const double>) { return 1.0; }, g));
  EXPECT_NEAR(s[0].real(), g.box_volume(), 1e-12);
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LT(std::abs(s[i]), 1e-12);
}

TEST(Transform, MatchesDirectQuadratureSum) {
  // Independent O(n^2) evaluation of sum_k e^{-i x_k xi_j} u(x_k) h.
  Grid g({1.7}, {16});
  auto u = random_smooth_field(g, 3);
  auto s = forward_transform(u);
  const double h = g.spacing(0);
  for (std::size_t j = 0; j < 16; ++j) {
    complex acc = 0.0;
    for (std::size_t k = 0; k < 16; ++k) acc += std::exp(complex(0.0, -g.node(0, k) * g.frequency(0, j))) * u[k] * h;
    EXPECT_LT(std::abs(acc - s[j]), 1e-12 * std::max(1.0, std::abs(acc)));
  }
}

TEST(Transform, GaussianClosedForm) {
  Grid g({10.0}, {256});
  auto u = sample([](std::span<const double> x) { return std::exp(-x[0] * x[0] / 2); }, g);
  auto s = forward_transform(u);
  const double peak = std::sqrt(2 * std::numbers::pi);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double xi = g.frequency(0, j);
    const double exact = peak * std::exp(-xi * xi / 2);
    EXPECT_LT(std::abs(s[j] - exact) / peak, 1e-8) << "xi=" << xi;
    if (exact > 1e-3 * peak) {
      EXPECT_LT(std::abs(s[j] - exact) / exact, 1e-8);
    }
  }
}

TEST(Transform, RoundtripAndDelta) {
  Grid g({1.0, 2.0, 0.5}, {8, 16, 4});
  auto u = random_smooth_field(g, 11);
  EXPECT_LT(max_rel_diff(u, inverse_transform(forward_transform(u))), 1e-12);
  std::vector<complex> d(g.size());
  d[0] = 1.0;
  auto c = inverse_transform(SampledField(g, d, Side::frequency));
  for (auto v : c.values()) EXPECT_NEAR(std::abs(v - c[0]), 0.0, 1e-15);
  EXPECT_NEAR(c[0].real() * g.box_volume(), 1.0, 1e-12);
}

TEST(Transform, Parseval) {
  Grid g({3.0, 2.0}, {32, 16});
  auto u = random_smooth_field(g, 5, 6);
  double phys = 0.0, spec = 0.0;
  for (auto v : u.values()) phys += std::norm(v);
  phys *= g.cell_volume();
  auto s = forward_transform(u);
  for (auto v : s.values()) spec += std::norm(v);
  spec *= g.frequency_cell_volume() / std::pow(2 * std::numbers::pi, 2);
  EXPECT_LT(std::abs(phys - spec) / phys, 1e-10);
  EXPECT_LT(std::abs(u.l2_norm() - s.l2_norm()) / u.l2_norm(), 1e-10);
}

TEST(Transform, LinearityAndHermitianSymmetry) {
  Grid g({1.0, 1.5}, {16, 8});
  auto u = random_smooth_field(g, 21);
  auto v = random_smooth_field(g, 22);
  const complex a(0.3, -1.2), b(2.0, 0.5);
  auto lhs = forward_transform(u.scaled(a) + v.scaled(b));
  auto rhs = forward_transform(u).scaled(a) + forward_transform(v).scaled(b);
  EXPECT_LT(max_rel_diff(lhs, rhs), 1e-13);

  auto r = forward_transform(u.real_part());
  std::vector<std::size_t> idx(2);
  for (std::size_t i = 0; i < r.size(); ++i) {
    g.unravel(i, idx);
    const std::size_t j0 = (16 - idx[0]) % 16, j1 = (8 - idx[1]) % 8;
    EXPECT_LT(std::abs(r[i] - std::conj(r[j0 * g.stride(0) + j1])), 1e-12 * r.max_abs());
  }
}

TEST(Transform, SpectralDerivativeOfSine) {
  Grid g({std::numbers::pi}, {32});
  auto u = sample([](std::span<const double> x) { return std::sin(3 * x[0]); }, g);
  auto d = spectral_derivative(u, {1});
  auto d2 = spectral_derivative(u, {2});
  for (std::size_t k = 0; k < 32; ++k) {
    EXPECT_NEAR(d[k].real(), 3 * std::cos(3 * g.node(0, k)), 1e-12);
    EXPECT_NEAR(d2[k].real(), -9 * std::sin(3 * g.node(0, k)), 1e-11);
  }
}

TEST(FieldIo, BinaryRoundtripWithSidecar) {
  Grid g({1.0, 2.5}, {4, 6});
  auto u = random_smooth_field(g, 9);
  const auto dir = std::filesystem::temp_directory_path() / "holderlab_io_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "u.hlf").string();
  write_field(u, path);
  auto back = read_field(path);
  EXPECT_EQ(back.grid(), g);
  EXPECT_EQ(back.side(), Side::physical);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(back[i], u[i]);
  EXPECT_TRUE(std::filesystem::exists(path + ".json"));
  auto j = json::parse(std::ifstream(path + ".json"));
  EXPECT_EQ(j["points"][1], 6);
  EXPECT_EQ(j["side"], "physical");
  std::filesystem::remove_all(dir);
}
