// Acceptance run: one PASS/FAIL line per criterion with the measured values and
// the wall time. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "holderlab/certify.hpp"
#include "holderlab/field.hpp"
#include "holderlab/holder.hpp"
#include "holderlab/lpdecomp.hpp"
#include "holderlab/problems.hpp"

using namespace holderlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double rel_max(const SampledField& a, const SampledField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m / b.max_abs();
}

Outcome partition() {
  const auto c = build_cutoffs();
  double worst = 0.0;
  for (const auto& e : {std::vector<double>{1.0, 1.0, 1.0}, std::vector<double>{1.0, 0.5, 2.0},
                        std::vector<double>{1.0, 1.0, 0.75, 4.0}})
    worst = std::max(worst, partition_residual(e, c, sample_shell(e, 0.125, 8.0, 10000, 2024), -6, 6));
  return {worst < 1e-12, "max residual " + num(worst) + " over 3 profiles x 1e4 points"};
}

Outcome transforms() {
  const Grid g3({1.0, 2.0, 0.5}, {32, 32, 16});
  const auto u = sample(
      [](std::span<const double> x) {
        return std::exp(std::sin(std::numbers::pi * x[0]) + std::cos(std::numbers::pi * x[1] / 2)) *
               (1.0 + 0.5 * std::sin(2 * std::numbers::pi * x[2]));
      },
      g3);
  const double roundtrip = rel_max(inverse_transform(forward_transform(u)), u);

  const Grid g1({10.0}, {256});
  const auto s = forward_transform(sample([](std::span<const double> x) { return std::exp(-x[0] * x[0] / 2); }, g1));
  const double peak = std::sqrt(2 * std::numbers::pi);
  double gauss = 0.0;
  for (std::size_t j = 0; j < g1.size(); ++j) {
    const double xi = g1.frequency(0, j);
    gauss = std::max(gauss, std::abs(s[j] - peak * std::exp(-xi * xi / 2)) / peak);
  }

  double phys = 0.0, spec = 0.0;
  for (auto v : u.values()) phys += std::norm(v);
  phys *= g3.cell_volume();
  const SampledField su = forward_transform(u);
  for (auto v : su.values()) spec += std::norm(v);
  spec *= g3.frequency_cell_volume() / std::pow(2 * std::numbers::pi, 3);
  const double parseval = std::abs(phys - spec) / phys;
  return {roundtrip < 1e-12 && gauss < 1e-8 && parseval < 1e-10,
          "roundtrip " + num(roundtrip) + ", gaussian " + num(gauss) + ", parseval " + num(parseval)};
}

Outcome seminorms() {
  bool ok = true;
  std::string d;
  for (double gamma : {0.3, 0.5, 0.8}) {
    const auto u = sample([gamma](std::span<const double> x) { return std::pow(std::abs(x[0]), gamma); },
                          Grid({4.0}, {512}));
    const double value = partial_seminorm(u, 0, gamma, 1, Boundary::interior);
    const auto fit = fit_exponent(u, 0, 1, Boundary::interior);
    ok = ok && std::abs(value - 1.0) <= 0.02 && fit && std::abs(*fit - gamma) <= 0.03;
    d += (d.empty() ? "" : "; ") + std::string("gamma ") + num(gamma) + ": seminorm " + num(value) + ", fit " +
         (fit ? num(*fit) : std::string("none"));
  }
  return {ok, d};
}

Outcome certification() {
  CertifyOptions o;
  o.lambda_grid = geometric_lambda_grid(-8, 8, 33);
  const auto riesz = certify_isotropic(riesz_second_order(3, 1, 0), AnisotropyProfile::smooth(0.5, {1, 1, 1}), 2.0, 3, o);
  const auto heat =
      certify_grouped(heat_time_derivative(1, 1.0), {{0}, {1}}, {}, 2.0, GroupedForm::per_axis, 0.5, o);
  const auto red = certify_isotropic(ch_reduction_symbol(1, 0), AnisotropyProfile::smooth(0.5, {1, 1}), 2.0, 2, o);
  const auto log = certify_isotropic(log_distance({1.0, 1.0}), AnisotropyProfile::smooth(0.5, {1, 1}), 2.0, 2, o);
  const bool ok = riesz.pass && riesz.drift < 0.01 && heat.pass && heat.drift < 0.01 && red.pass && red.drift < 0.01 &&
                  !log.pass;
  return {ok, "drift riesz " + num(riesz.drift) + ", heat_time_derivative " + num(heat.drift) + ", ch_reduction " +
                  num(red.drift) + "; log control drift " + num(log.drift) + (log.pass ? " (passed)" : " (fails)")};
}

Outcome example_one() {
  const double gamma = 0.6;
  const auto r = example1_poisson(example1_data(Grid::cube(3, std::numbers::pi, 128), gamma, 3, false), gamma);
  const auto t = example1_counterexample({32, 64, 128, 256});
  double lo = t.increments.empty() ? 0.0 : t.increments[0], hi = lo;
  for (double v : t.increments) lo = std::min(lo, v), hi = std::max(hi, v);
  const bool spread_ok = t.increments.size() >= 2 && lo > 0.0 && (hi - lo) <= 0.25 * lo;
  const bool ok = r.min_fit() >= 0.55 && spread_ok && t.mixed_bounded;
  const auto x1_input = r.derivatives.at(0).axes.at(0).input_fit;
  return {ok, "min all-axis fit " + num(r.min_fit()) + " at 128^3 (data x1 fit " + num(x1_input.value_or(0.0)) +
                  "); increments " + num(lo) + ".." + num(hi) +
                  ", mixed derivative " + (t.mixed_bounded ? "bounded" : "unbounded")};
}

Outcome example_two() {
  const double gamma = 0.75;
  const auto r = example2_heat(example2_data(Grid::cube(2, std::numbers::pi, 256), gamma, 5), gamma);
  return {r.ut_space_fit() >= 1.4 && r.mixed_space_fit() >= 0.45,
          "u_t x-fit " + num(r.ut_space_fit()) + ", u_tx x-fit " + num(r.mixed_space_fit())};
}

Outcome heat_oracle() {
  const Grid g({8.0, std::numbers::pi / 2}, {128, 128});
  const HeatDipoleData d;
  TraceDiagnostics diag;
  const auto rho = heat_boundary_trace(heat_dipole_data(g, d), 1.0, &diag);
  const double rel = relative_l2(rho, heat_convolution_oracle(g, 1.0, d));
  return {rel < 1e-6, "relative L2 " + num(rel) + ", causality " + num(diag.causality_residual)};
}

Outcome boundary_symbol() {
  const auto one = ch_denominator_comparison(1.0, 32);
  const auto two = ch_denominator_comparison(2.5, 32);
  const bool ok = one.max_rel_error < 1e-8 && two.max_rel_error < 1e-8 && two.a_multiplies_fraction();
  return {ok, "max rel error " + num(std::max(one.max_rel_error, two.max_rel_error)) +
                  "; a multiplies the fraction (unscaled form misses by " + num(two.max_rel_error_unscaled) + ")"};
}

Outcome schauder() {
  bool ok = true;
  std::string d;
  for (auto v : {TraceVariant::laplace_dynamic, TraceVariant::flux_dynamic}) {
    const auto r = schauder_refinement(v, 20, 100, {});
    ok = ok && r.passes();
    double worst_spread = 0.0, worst_drift = 0.0;
    for (const auto* st : {&r.coarse, &r.fine})
      for (const auto& s : st->ratios) worst_spread = std::max(worst_spread, s.max / s.median);
    for (double x : r.drift) worst_drift = std::max(worst_drift, x);
    d += std::string(d.empty() ? "" : "; ") + to_string(v) + ": max/median " + num(worst_spread) + ", median drift " +
         num(worst_drift);
  }
  return {ok, d};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  const auto base = std::filesystem::temp_directory_path() / ("holderlab_accept_" + std::to_string(::getpid()));
  std::filesystem::remove_all(base);
  std::string outs[2];
  for (int i = 0; i < 2; ++i) {
    const auto dir = base / std::to_string(i);
    const std::string cmd = std::string("\"") + HOLDERLAB_CLI + "\" selftest --seed 3 --out-dir \"" + dir.string() +
                            "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) {
      std::filesystem::remove_all(base);
      return {false, "selftest run " + std::to_string(i + 1) + " failed"};
    }
    outs[i] = slurp(dir / "selftest.json") + slurp(dir / "selftest.csv");
  }
  std::filesystem::remove_all(base);
  const bool same = !outs[0].empty() && outs[0] == outs[1];
  return {same, std::to_string(outs[0].size()) + " report bytes, " + (same ? "identical" : "different")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, "partition of unity", 5, partition},
      {2, "transform stack", 10, transforms},
      {3, "seminorm estimators", 30, seminorms},
      {4, "certification lambda-stability", 120, certification},
      {5, "example 1 gain and counterexample", 300, example_one},
      {6, "example 2 exponents", 180, example_two},
      {7, "heat trace oracle", 30, heat_oracle},
      {8, "boundary symbol vs ODE oracle", 60, boundary_symbol},
      {9, "Schauder-ratio stability", 600, schauder},
      {10, "selftest determinism", 600, determinism},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs < c.limit_s;
    failed += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail << " ["
              << num(secs) << " s, limit " << num(c.limit_s) << " s]" << std::endl;
  }
  return failed;
}
