#pragma once

// Poisson and heat examples: Hoelder gain of mixed second derivatives from
// data that is Hoelder in one variable, the log-singular counterexample, and
// the time-Hoelder heat example.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "apply.hpp"
#include "families.hpp"
#include "holder.hpp"
#include "profile.hpp"
#include "report.hpp"
#include "symbols.hpp"

namespace holderlab {

namespace detail {

/// max |f| at nodes outside the central half box, relative to max |f|.
inline double outside_half_box(const SampledField& f) {
  const Grid& g = f.grid();
  const double peak = f.max_abs();
  if (peak == 0.0) return 0.0;
  std::vector<double> x(g.dims());
  double out = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    g.node_coordinates(i, x);
    bool inside = true;
    for (std::size_t a = 0; a < g.dims(); ++a) inside = inside && std::abs(x[a]) <= 0.5 * g.extent(a);
    if (!inside) out = std::max(out, std::abs(f[i]));
  }
  return out / peak;
}

}  // namespace detail

struct Example1Report {
  double gamma = 0.0;
  double data_x1_seminorm = 0.0;
  std::vector<GainReport> derivatives;  // entry k: d^2 u / dx_k dx_0

  bool all_meet_target() const {
    return std::all_of(derivatives.begin(), derivatives.end(), [](const GainReport& r) { return r.all_meet_target(); });
  }

  /// Smallest fitted output exponent over every derivative and axis; a flat
  /// output counts as its difference order.
  double min_fit() const {
    double m = 1e300;
    for (const auto& r : derivatives)
      for (const auto& a : r.axes) m = std::min(m, a.output_fit ? *a.output_fit : static_cast<double>(a.k));
    return m;
  }

  json to_json() const {
    json j;
    j["gamma"] = gamma;
    j["data_x1_seminorm"] = data_x1_seminorm;
    j["min_fit"] = min_fit();
    j["all_meet_target"] = all_meet_target();
    j["derivatives"] = json::array();
    for (std::size_t k = 0; k < derivatives.size(); ++k) {
      json e = derivatives[k].to_json();
      e["k"] = k;
      j["derivatives"].push_back(e);
    }
    return j;
  }

  std::string to_csv() const {
    CsvTable t({"k", "axis", "target_exponent", "output_fit", "output_seminorm", "gain_ratio", "meets_target"});
    for (std::size_t k = 0; k < derivatives.size(); ++k)
      for (const auto& a : derivatives[k].axes)
        t.add_row({std::to_string(k), std::to_string(a.axis), format_number(a.target_exponent),
                   a.output_fit ? format_number(*a.output_fit) : std::string("flat"), format_number(a.output_seminorm),
                   format_number(a.gain_ratio), a.meets_target ? "true" : "false"});
    return t.str();
  }
};

/// Applies xi_k xi_0 / |xi|^2 for every k to Poisson data f (so the outputs
/// are d^2 u / dx_k dx_0 for Delta u = f) and reports all-axis exponents.
/// Axis 0 carries the Hoelder hypothesis; every other axis is gained.
inline Example1Report example1_poisson(const SampledField& f, double gamma, const GainOptions& opt = {}) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("example1_poisson: gamma must lie in (0,1)");
  const Grid& g = f.grid();
  if (g.dims() < 2) throw std::invalid_argument("example1_poisson: need at least two axes");
  const double leak = detail::outside_half_box(f);
  if (leak > 1e-12)
    throw std::invalid_argument("example1_poisson: data must be supported in the central half box (relative leak " +
                                format_number(leak) + ")");
  std::vector<double> exps(g.dims(), 1.0);
  std::vector<bool> gained(g.dims(), true);
  gained[0] = false;
  const auto profile = AnisotropyProfile::from_exponents(gamma, exps, gained);
  Example1Report r;
  r.gamma = gamma;
  r.data_x1_seminorm = partial_seminorm(f, 0, gamma, 1);
  for (std::size_t k = 0; k < g.dims(); ++k)
    r.derivatives.push_back(gain_experiment(riesz_second_order(g.dims(), k, 0), profile, f, opt));
  return r;
}

namespace detail {

/// One-dimensional cutoff: 1 on |t| <= r1, 0 on |t| >= r2, smooth between.
struct Cutoff1d {
  double r1, r2, scale;

  static double step(double tau) {  // smooth 0 -> 1 on [0, 1]
    if (tau <= 0.0) return 0.0;
    if (tau >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / tau), b = std::exp(-1.0 / (1.0 - tau));
    return a / (a + b);
  }

  static double step_derivative(double tau) {
    if (tau <= 0.0 || tau >= 1.0) return 0.0;
    const double s = step(tau);
    return s * (1.0 - s) * (1.0 / (tau * tau) + 1.0 / ((1.0 - tau) * (1.0 - tau)));
  }

  double value(double t) const { return scale * (1.0 - step((std::abs(t) - r1) / (r2 - r1))); }

  double d1(double t) const {
    const double sgn = t < 0.0 ? -1.0 : 1.0;
    return -scale * sgn * step_derivative((std::abs(t) - r1) / (r2 - r1)) / (r2 - r1);
  }

  double d2(double t) const {
    const double e = 1e-5 * (r2 - r1);
    return (d1(t + e) - d1(t - e)) / (2.0 * e);
  }
};

}  // namespace detail

/// Data for example1_poisson. With jumps: |x_0 - c|^gamma terms times jump
/// factors in the other variables, inside the central half box. Without:
/// a single a |x_0 - c|^gamma under a plateau cutoff that equals 1 on
/// |x_i| <= extent/4, so the data is an exact power law across the fit
/// ladder [4 spacings, extent/8] and Hoelder only in x_0.
inline SampledField example1_data(const Grid& g, double gamma, unsigned long long seed, bool jumps = true) {
  if (jumps) {
    std::vector<double> exps(g.dims(), 1.0);
    std::vector<bool> gained(g.dims(), true);
    gained[0] = false;
    const auto profile = AnisotropyProfile::from_exponents(gamma, exps, gained);
    PartialHolderFamily fam;
    fam.support = 0.45;
    fam.spread = 0.2;
    return partial_holder_field(g, profile, seed, fam);
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("example1_data: gamma must lie in (0,1)");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(0.5, 1.5), pos(-0.05, 0.05);
  const double a = (std::bernoulli_distribution()(rng) ? 1.0 : -1.0) * amp(rng);
  const double h = g.spacing(0);
  const double c = std::round(pos(rng) * g.extent(0) / h) * h;
  std::vector<detail::Cutoff1d> cut;
  for (std::size_t i = 0; i < g.dims(); ++i) cut.push_back({0.25 * g.extent(i), 0.45 * g.extent(i), 1.0});
  return sample(
      [&](std::span<const double> x) {
        double v = a * std::pow(std::abs(x[0] - c), gamma);
        for (std::size_t i = 0; i < x.size(); ++i) v *= cut[i].value(x[i]);
        return v;
      },
      g);
}

// ---------------------------------------------------------------------------
// Counterexample u1 = (x2^2 - x3^2 + x2 x3) ln(x2^2 + x3^2) eta(x).

struct CounterexampleOptions {
  double extent = 1.0;
  double plateau = 0.25;   // eta == 1 where max |x_i| <= plateau * extent
  double support = 0.75;   // eta == 0 where max |x_i| >= support * extent
  double eta_scale = 1.0;  // 0 switches the cutoff off entirely
  double gamma = 0.5;      // order of the x1 seminorm of Delta u1
  std::size_t seminorm_max_points = 128;  // the 3-D seminorm is skipped above this
};

struct CounterexampleRow {
  std::size_t points = 0;
  double spacing = 0.0;
  double max_d22 = 0.0;  // max |d^2 u1 / dx2^2| over nodes near 0, origin line excluded
  double max_d21 = 0.0;  // max |d^2 u1 / dx2 dx1| over all nodes
  std::optional<double> data_x1_seminorm;
};

struct CounterexampleTable {
  std::vector<CounterexampleRow> rows;
  std::vector<double> increments;  // max_d22 growth per resolution doubling
  bool log_growth = false;         // successive increments within 25% of each other
  bool mixed_bounded = false;      // max_d21 and the data seminorm stay within 2x of the first row

  json to_json() const {
    json j;
    j["rows"] = json::array();
    for (const auto& r : rows)
      j["rows"].push_back({{"points", r.points},
                           {"spacing", r.spacing},
                           {"max_d22", r.max_d22},
                           {"max_d21", r.max_d21},
                           {"data_x1_seminorm", r.data_x1_seminorm ? json(*r.data_x1_seminorm) : json(nullptr)}});
    j["increments"] = increments;
    j["log_growth"] = log_growth;
    j["mixed_bounded"] = mixed_bounded;
    return j;
  }

  std::string to_csv() const {
    CsvTable t({"points", "spacing", "max_d22", "max_d21", "data_x1_seminorm"});
    for (const auto& r : rows)
      t.add_row({std::to_string(r.points), format_number(r.spacing), format_number(r.max_d22),
                 format_number(r.max_d21), r.data_x1_seminorm ? format_number(*r.data_x1_seminorm) : std::string("")});
    return t.str();
  }
};

namespace detail {

/// P = y^2 - z^2 + y z times ln(y^2 + z^2) and its derivatives; 0 at the origin.
struct LogProduct {
  double v, dy, dz, dyy;

  static LogProduct at(double y, double z) {
    const double r2 = y * y + z * z;
    if (r2 == 0.0) return {0.0, 0.0, 0.0, 0.0};
    const double L = std::log(r2), P = y * y - z * z + y * z;
    const double Py = 2.0 * y + z, Pz = y - 2.0 * z;
    LogProduct o;
    o.v = P * L;
    o.dy = Py * L + 2.0 * y * P / r2;
    o.dz = Pz * L + 2.0 * z * P / r2;
    o.dyy = 2.0 * L + 4.0 * y * Py / r2 + P * (2.0 / r2 - 4.0 * y * y / (r2 * r2));
    return o;
  }

  // Delta (P L) = 8 P / r^2 away from the origin line.
  static double laplacian(double y, double z) {
    const double r2 = y * y + z * z;
    return r2 == 0.0 ? 0.0 : 8.0 * (y * y - z * z + y * z) / r2;
  }
};

}  // namespace detail

/// Closed-form evaluation of the counterexample on cube grids of the given
/// sizes: second x2-derivative near 0 grows like log(1/h), the mixed x1-x2
/// derivative and the x1 seminorm of the data Delta u1 do not.
inline CounterexampleTable example1_counterexample(const std::vector<std::size_t>& resolutions,
                                                   const CounterexampleOptions& opt = {}) {
  if (resolutions.empty()) throw std::invalid_argument("example1_counterexample: no resolutions");
  if (!(opt.extent > 0.0) || !(0.0 < opt.plateau && opt.plateau < opt.support && opt.support < 1.0))
    throw std::invalid_argument("example1_counterexample: need 0 < plateau < support < 1 and extent > 0");
  const double L = opt.extent;
  const detail::Cutoff1d psi{opt.plateau * L, opt.support * L, 1.0};
  CounterexampleTable t;
  for (std::size_t n : resolutions) {
    const Grid g2 = Grid::cube(2, L, n);
    CounterexampleRow row;
    row.points = n;
    row.spacing = g2.spacing(0);
    // eta = eta_scale * psi(x1) psi(x2) psi(x3); at x1 = 0 psi(x1) = 1.
    double d22 = 0.0, g21 = 0.0, d1max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = g2.node(0, i);
      for (std::size_t k = 0; k < n; ++k) {
        const double z = g2.node(1, k);
        const auto p = detail::LogProduct::at(y, z);
        if (std::max(std::abs(y), std::abs(z)) <= psi.r1 && (y != 0.0 || z != 0.0))
          d22 = std::max(d22, std::abs(opt.eta_scale * p.dyy));
        // d^2 (P L eta)/dx2 dx1 = psi'(x1) [ (PL)_y psi(y) + PL psi'(y) ] psi(z)
        g21 = std::max(g21, std::abs((p.dy * psi.value(y) + p.v * psi.d1(y)) * psi.value(z)));
      }
      d1max = std::max(d1max, std::abs(psi.d1(y)));
    }
    row.max_d22 = d22;
    row.max_d21 = std::abs(opt.eta_scale) * d1max * g21;
    if (n <= opt.seminorm_max_points) {
      const Grid g3 = Grid::cube(3, L, n);
      const auto f = sample(
          [&](std::span<const double> x) {
            const double y = x[1], z = x[2];
            const auto p = detail::LogProduct::at(y, z);
            const double py = psi.value(y), pz = psi.value(z);
            const double A = detail::LogProduct::laplacian(y, z) * py * pz +
                             2.0 * (p.dy * psi.d1(y) * pz + p.dz * py * psi.d1(z)) +
                             p.v * (psi.d2(y) * pz + py * psi.d2(z));
            return opt.eta_scale * (psi.value(x[0]) * A + psi.d2(x[0]) * p.v * py * pz);
          },
          g3);
      row.data_x1_seminorm = partial_seminorm(f, 0, opt.gamma, 1);
    }
    t.rows.push_back(row);
  }
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    const double octaves = std::log2(static_cast<double>(t.rows[i].points) / t.rows[i - 1].points);
    t.increments.push_back((t.rows[i].max_d22 - t.rows[i - 1].max_d22) / octaves);
  }
  t.log_growth = !t.increments.empty();
  for (std::size_t i = 0; i < t.increments.size(); ++i) {
    t.log_growth = t.log_growth && t.increments[i] > 0.0;
    if (i > 0) t.log_growth = t.log_growth && std::abs(t.increments[i] - t.increments[i - 1]) <= 0.25 * t.increments[i - 1];
  }
  t.mixed_bounded = true;
  const auto& first = t.rows.front();
  for (const auto& r : t.rows) {
    t.mixed_bounded = t.mixed_bounded && r.max_d21 <= 2.0 * first.max_d21 + 1e-300;
    if (r.data_x1_seminorm && first.data_x1_seminorm)
      t.mixed_bounded = t.mixed_bounded && *r.data_x1_seminorm <= 2.0 * *first.data_x1_seminorm + 1e-300;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Heat example: u_t - a Delta u = f over (t, x_1..x_d), time on axis 0.

/// i xi_l i xi_0 / (i xi_0 + a |xi|^2): the symbol of d^2 u / dt dx_l.
inline Symbol heat_mixed_derivative(std::size_t d, std::size_t l, double a) {
  if (l == 0 || l > d) throw std::invalid_argument("heat_mixed_derivative: l must be a spatial axis");
  Symbol s = heat_time_derivative(d, a);
  s.name = "heat_mixed_derivative";
  s.params["l"] = static_cast<double>(l);
  s.evaluator = [l, a](std::span<const double> xi) {
    const complex num(0.0, xi[0]);
    return complex(0.0, xi[l]) * num / (num + a * detail::norm2(xi, 1));
  };
  s.sup_bound.reset();
  return s;
}

struct Example2Report {
  double gamma = 0.0;
  double a = 1.0;
  GainReport time_derivative;                 // u_t: t target gamma, x targets 2 gamma
  std::vector<GainReport> mixed_derivatives;  // u_{t x_l}: x targets 2 gamma - 1

  double ut_time_seminorm() const { return time_derivative.axes[0].output_seminorm; }
  double data_time_seminorm() const { return time_derivative.input_seminorm_sum; }

  /// Smallest fitted x-exponent of u_t (flat counts as the difference order).
  double ut_space_fit() const {
    double m = 1e300;
    for (std::size_t i = 1; i < time_derivative.axes.size(); ++i) {
      const auto& e = time_derivative.axes[i];
      m = std::min(m, e.output_fit ? *e.output_fit : static_cast<double>(e.k));
    }
    return m;
  }

  double mixed_space_fit() const {
    double m = 1e300;
    for (const auto& r : mixed_derivatives)
      for (std::size_t i = 1; i < r.axes.size(); ++i) {
        const auto& e = r.axes[i];
        m = std::min(m, e.output_fit ? *e.output_fit : static_cast<double>(e.k));
      }
    return m;
  }

  json to_json() const {
    json j;
    j["gamma"] = gamma;
    j["a"] = a;
    j["data_time_seminorm"] = data_time_seminorm();
    j["ut_time_seminorm"] = ut_time_seminorm();
    j["ut_space_fit"] = ut_space_fit();
    j["ut_space_target"] = 2.0 * gamma;
    j["mixed_space_fit"] = mixed_space_fit();
    j["mixed_space_target"] = 2.0 * gamma - 1.0;
    j["time_derivative"] = time_derivative.to_json();
    j["mixed_derivatives"] = json::array();
    for (const auto& r : mixed_derivatives) j["mixed_derivatives"].push_back(r.to_json());
    return j;
  }

  std::string to_csv() const {
    CsvTable t({"quantity", "axis", "target_exponent", "k", "output_fit", "output_seminorm"});
    auto rows = [&](const std::string& q, const GainReport& r) {
      for (const auto& e : r.axes)
        t.add_row({q, std::to_string(e.axis), format_number(e.target_exponent), std::to_string(e.k),
                   e.output_fit ? format_number(*e.output_fit) : std::string("flat"), format_number(e.output_seminorm)});
    };
    rows("u_t", time_derivative);
    for (std::size_t l = 0; l < mixed_derivatives.size(); ++l) rows("u_tx" + std::to_string(l + 1), mixed_derivatives[l]);
    return t.str();
  }
};

/// u_t and u_{t x_l} for u_t - a Delta u = f with f Hoelder-gamma in t,
/// gamma in (1/2, 1). x-exponents target 2 gamma and 2 gamma - 1.
inline Example2Report example2_heat(const SampledField& f, double gamma, double a = 1.0, const GainOptions& opt = {}) {
  if (!(gamma > 0.5 && gamma < 1.0))
    throw std::invalid_argument("example2_heat: the heat example needs a time exponent gamma in (1/2, 1), got " +
                                format_number(gamma));
  if (!(a > 0.0)) throw std::invalid_argument("example2_heat: a must be positive");
  const Grid& g = f.grid();
  if (g.dims() < 2) throw std::invalid_argument("example2_heat: need a time axis and at least one space axis");
  const std::size_t d = g.dims() - 1;
  std::vector<bool> gained(g.dims(), true);
  gained[0] = false;
  std::vector<double> exps(g.dims(), 2.0);
  exps[0] = 1.0;
  Example2Report r;
  r.gamma = gamma;
  r.a = a;
  r.time_derivative = gain_experiment(heat_time_derivative(d, a), AnisotropyProfile::from_exponents(gamma, exps, gained),
                                      f, opt);
  // u_{tx} scales like gamma' = 2 gamma - 1 with time counted at half weight.
  std::vector<double> mexps(g.dims(), 1.0);
  mexps[0] = 0.5;
  const auto mprofile = AnisotropyProfile::from_exponents(2.0 * gamma - 1.0, mexps, gained);
  for (std::size_t l = 1; l <= d; ++l)
    r.mixed_derivatives.push_back(gain_experiment(heat_mixed_derivative(d, l, a), mprofile, f, opt));
  return r;
}

/// Heat data: |t - c|^gamma terms with jumps in space (time axis 0).
inline SampledField example2_data(const Grid& g, double gamma, unsigned long long seed, bool jumps = true) {
  std::vector<bool> gained(g.dims(), true);
  gained[0] = false;
  std::vector<double> exps(g.dims(), 2.0);
  exps[0] = 1.0;
  PartialHolderFamily fam;
  fam.jumps = jumps;
  return partial_holder_field(g, AnisotropyProfile::from_exponents(gamma, exps, gained), seed, fam);
}

}  // namespace holderlab
