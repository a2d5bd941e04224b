#pragma once

// Boundary traces of the half-space dynamic-boundary problems over (t, x'),
// time on axis 0: the heat-resolvent trace, the flux-dynamic trace h / M~,
// the per-frequency half-line ODE oracle that fixes M~, a time-domain heat
// convolution oracle, and the dyadic-annulus reduction check.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"
#include "parallel.hpp"
#include "report.hpp"
#include "symbols.hpp"

namespace holderlab {

struct TraceDiagnostics {
  std::string symbol;
  complex dropped_dc = 0.0;          // data spectrum at (0,0); the output bin there is set to 0
  double data_precausal = 0.0;       // max |h| on rows t <= 0, relative to max |h|
  double data_late = 0.0;            // max |h| on rows t > T/2, relative (guard band)
  double causality_residual = 0.0;   // max |rho| on rows t <= 0, relative to max |rho|

  bool guard_band_ok() const { return data_late <= 1e-10; }

  json to_json() const {
    json j;
    j["symbol"] = symbol;
    j["dropped_dc"] = {dropped_dc.real(), dropped_dc.imag()};
    j["data_precausal"] = data_precausal;
    j["data_late"] = data_late;
    j["guard_band_ok"] = guard_band_ok();
    j["causality_residual"] = causality_residual;
    return j;
  }
};

namespace detail {

/// max |u| over time rows selected by keep(t), relative to max |u|.
template <class Keep>
double time_rows_ratio(const SampledField& u, Keep&& keep) {
  const double peak = u.max_abs();
  if (peak == 0.0) return 0.0;
  const Grid& g = u.grid();
  const std::size_t row = g.stride(0);
  double m = 0.0;
  for (std::size_t j = 0; j < g.points(0); ++j) {
    if (!keep(g.node(0, j))) continue;
    for (std::size_t i = j * row; i < (j + 1) * row; ++i) m = std::max(m, std::abs(u[i]));
  }
  return m / peak;
}

inline double precausal_ratio(const SampledField& u) {
  return time_rows_ratio(u, [](double t) { return t <= 0.0; });
}

/// rho~ = h~ / den(xi0, |xi|^2) with the (0,0) bin set to 0.
template <class Den>
SampledField divide_boundary_spectrum(const SampledField& h, Den&& den, const std::string& name, TraceDiagnostics* diag,
                                      const char* who) {
  const Grid& g = h.grid();
  if (h.side() != Side::physical) throw std::invalid_argument(std::string(who) + ": data must be on the physical side");
  if (g.dims() < 2) throw std::invalid_argument(std::string(who) + ": need a time axis and at least one space axis");
  TraceDiagnostics d;
  d.symbol = name;
  d.data_precausal = precausal_ratio(h);
  if (d.data_precausal > 1e-10)
    throw std::invalid_argument(std::string(who) + ": data must vanish for t <= 0 (relative level " +
                                format_number(d.data_precausal) + ")");
  const double T = g.extent(0);
  d.data_late = time_rows_ratio(h, [T](double t) { return t > 0.5 * T; });
  const SampledField spec = forward_transform(h);
  std::vector<complex> out(spec.values().begin(), spec.values().end());
  parallel_for(0, out.size(), [&](std::size_t i) {
    std::vector<double> xi(g.dims());
    g.frequency_coordinates(i, xi);
    if (is_origin(xi)) {
      out[i] = 0.0;
      return;
    }
    out[i] /= den(xi[0], detail::norm2(xi, 1));
  });
  d.dropped_dc = spec[0];  // flat index 0 is the zero frequency
  SampledField rho = inverse_transform(SampledField(g, std::move(out), Side::frequency)).real_part();
  d.causality_residual = precausal_ratio(rho);
  if (diag) *diag = d;
  return rho;
}

}  // namespace detail

/// Boundary trace of the Laplace-dynamic problem: rho~ = h~ / (i xi0 + a |xi|^2).
inline SampledField heat_boundary_trace(const SampledField& h1, double a, TraceDiagnostics* diag = nullptr) {
  if (!(a > 0.0)) throw std::invalid_argument("heat_boundary_trace: a must be positive");
  return detail::divide_boundary_spectrum(
      h1, [a](double xi0, double xi2) { return complex(a * xi2, xi0); }, heat_resolvent(1, a).label(), diag,
      "heat_boundary_trace");
}

/// Boundary trace of the flux-dynamic problem: rho~ = h~ / M~ with
/// M~ = i xi0 + a 2 q1 q2 / (q1 + q2).
inline SampledField ch_problem2_trace(const SampledField& h, double a, TraceDiagnostics* diag = nullptr) {
  if (!(a > 0.0)) throw std::invalid_argument("ch_problem2_trace: a must be positive");
  return detail::divide_boundary_spectrum(
      h, [a](double xi0, double xi2) { return ch_denominator_value(xi2, xi0, a); },
      ch_boundary_inverse(1, a).label(), diag, "ch_problem2_trace");
}

// ---------------------------------------------------------------------------
// Half-line ODE oracle: i xi0 u + (d^2/dz^2 - xi^2)^2 u = 0 on z > 0 with
// u(0) = 1, zero flux (u''' - xi^2 u')(0) = 0 and u bounded.

struct OracleOptions {
  bool collocation = true;
  std::size_t collocation_points = 48;  // Chebyshev polynomial degree
  double depth_factor = 20.0;           // H = depth_factor / min |Re r|
};

struct OracleResult {
  double xi = 0.0, xi0 = 0.0;
  std::array<complex, 4> roots{};    // all roots of (r^2 - xi^2)^2 + i xi0
  std::array<complex, 2> decaying{};  // the two with Re r < 0
  bool ambiguous = false;             // some root has |Re r| < 1e-10
  double min_abs_real = 0.0;
  std::optional<complex> slope;       // du/dz at 0
  std::optional<complex> collocation_slope;
  double depth = 0.0;

  /// -du/dz(0) = 2 q1 q2 / (q1 + q2).
  complex fraction() const { return -slope.value(); }
  /// i xi0 - a du/dz(0): the flux-dynamic boundary symbol.
  complex denominator(double a) const { return complex(0.0, xi0) + a * fraction(); }

  json to_json() const {
    auto c = [](complex v) { return json::array({v.real(), v.imag()}); };
    json j;
    j["xi"] = xi;
    j["xi0"] = xi0;
    j["roots"] = json::array();
    for (auto r : roots) j["roots"].push_back(c(r));
    j["decaying"] = json::array({c(decaying[0]), c(decaying[1])});
    j["ambiguous"] = ambiguous;
    j["min_abs_real"] = min_abs_real;
    j["slope"] = slope ? c(*slope) : json(nullptr);
    j["collocation_slope"] = collocation_slope ? c(*collocation_slope) : json(nullptr);
    j["depth"] = depth;
    return j;
  }
};

namespace detail {

inline complex quartic(complex r, double xi2, double xi0) {
  const complex w = r * r - xi2;
  return w * w + complex(0.0, xi0);
}

inline complex quartic_derivative(complex r, double xi2) { return 4.0 * r * (r * r - xi2); }

/// Chebyshev points cos(pi j / n) and the differentiation matrix on [-1, 1].
inline Eigen::MatrixXcd chebyshev_matrix(std::size_t n, std::vector<double>& x) {
  x.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) x[j] = std::cos(std::numbers::pi * static_cast<double>(j) / n);
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  auto c = [n](std::size_t j) { return (j == 0 || j == n) ? 2.0 : 1.0; };
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j <= n; ++j)
      if (i != j) D(i, j) = c(i) / c(j) * ((i + j) % 2 ? -1.0 : 1.0) / (x[i] - x[j]);
  for (std::size_t i = 0; i <= n; ++i) D(i, i) = -D.row(i).sum();  // negative-sum trick
  return D;
}

/// Chebyshev collocation on [0, H]: returns u'(0).
inline complex collocation_slope(double xi2, double xi0, double H, std::size_t n) {
  std::vector<double> x;
  // z = H (1 - x) / 2, so dz = -H/2 dx and node 0 sits at z = 0.
  const Eigen::MatrixXcd D = chebyshev_matrix(n, x) * (-2.0 / H);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n + 1, n + 1);
  const Eigen::MatrixXcd D2 = D * D;
  const Eigen::MatrixXcd S = D2 - xi2 * I;
  Eigen::MatrixXcd A = complex(0.0, xi0) * I + S * S;
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n + 1);
  A.row(0) = I.row(0);  // u(0) = 1
  b(0) = 1.0;
  A.row(1) = (D2 * D - xi2 * D).row(0);  // zero flux at 0
  A.row(n) = I.row(n);                   // u(H) = 0
  A.row(n - 1) = D.row(n);               // u'(H) = 0
  const Eigen::VectorXcd u = A.partialPivLu().solve(b);
  return (D.row(0) * u)(0);
}

}  // namespace detail

/// Boundary response of the half-line problem from the characteristic roots
/// (eigenvalues of the companion matrix, Newton-polished). Pairs of nearly
/// equal roots are combined through a divided difference, so xi0 = 0 works.
inline OracleResult ch_ode_oracle(double xi, double xi0, const OracleOptions& opt = {}) {
  if (xi == 0.0 && xi0 == 0.0) throw std::invalid_argument("ch_ode_oracle: (xi, xi0) must not be (0, 0)");
  if (!std::isfinite(xi) || !std::isfinite(xi0)) throw std::invalid_argument("ch_ode_oracle: non-finite frequency");
  const double xi2 = xi * xi;
  OracleResult r;
  r.xi = xi;
  r.xi0 = xi0;
  // Monic r^4 - 2 xi^2 r^2 + (xi^4 + i xi0).
  Eigen::Matrix4cd C = Eigen::Matrix4cd::Zero();
  for (int i = 1; i < 4; ++i) C(i, i - 1) = 1.0;
  C(0, 3) = -complex(xi2 * xi2, xi0);
  C(2, 3) = 2.0 * xi2;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(C, false);
  for (int i = 0; i < 4; ++i) {
    complex z = es.eigenvalues()(i);
    for (int it = 0; it < 4; ++it) {
      const complex dp = detail::quartic_derivative(z, xi2);
      if (std::abs(dp) == 0.0) break;
      const complex step = detail::quartic(z, xi2, xi0) / dp;
      const complex next = z - step;
      if (!(std::abs(detail::quartic(next, xi2, xi0)) < std::abs(detail::quartic(z, xi2, xi0)))) break;
      z = next;
    }
    r.roots[i] = z;
  }
  std::sort(r.roots.begin(), r.roots.end(), [](complex a, complex b) { return a.real() < b.real(); });
  r.min_abs_real = 1e300;
  for (auto z : r.roots) r.min_abs_real = std::min(r.min_abs_real, std::abs(z.real()));
  r.ambiguous = r.min_abs_real < 1e-10 || !(r.roots[1].real() < 0.0 && r.roots[2].real() > 0.0);
  r.decaying = {r.roots[0], r.roots[1]};
  if (r.ambiguous) return r;

  // u = e^{r1 z} + c (e^{r1 z} - e^{r2 z}) / (r1 - r2); D^k of the divided
  // difference at 0 is (r1^k - r2^k)/(r1 - r2).
  const complex r1 = r.decaying[0], r2 = r.decaying[1];
  const complex flux1 = r1 * (r1 * r1 - xi2);
  const complex flux2 = (r1 * r1 + r1 * r2 + r2 * r2) - xi2;
  const complex c = -flux1 / flux2;
  r.slope = r1 + c;
  const double decay = std::min(std::abs(r1.real()), std::abs(r2.real()));
  r.depth = opt.depth_factor / decay;
  if (opt.collocation) r.collocation_slope = detail::collocation_slope(xi2, xi0, r.depth, opt.collocation_points);
  return r;
}

struct DenominatorComparison {
  double a = 1.0;
  std::vector<double> xi, xi0;
  double max_rel_error = 0.0;          // i xi0 + a * fraction vs the closed form
  double max_rel_error_unscaled = 0.0; // i xi0 + fraction (no a) vs i xi0 - a u'(0)
  double max_collocation_difference = 0.0;  // relative, root slope vs collocation slope
  std::size_t ambiguous_points = 0;

  bool a_multiplies_fraction(double tol = 1e-8) const { return max_rel_error < tol; }

  json to_json() const {
    json j;
    j["a"] = a;
    j["xi"] = xi;
    j["xi0"] = xi0;
    j["max_rel_error"] = max_rel_error;
    j["max_rel_error_unscaled"] = max_rel_error_unscaled;
    j["max_collocation_difference"] = max_collocation_difference;
    j["ambiguous_points"] = ambiguous_points;
    j["a_multiplies_fraction"] = a_multiplies_fraction();
    return j;
  }
};

/// Log-spaced frequency grid for the denominator comparison: n values of
/// |xi| in [1e-2, 1e2] and n values of xi0, half of each sign, |xi0| in
/// [1e-2, 1e4].
inline std::pair<std::vector<double>, std::vector<double>> oracle_frequency_grid(std::size_t n) {
  if (n < 2 || n % 2) throw std::invalid_argument("oracle_frequency_grid: n must be even and >= 2");
  std::vector<double> xi(n), xi0;
  for (std::size_t i = 0; i < n; ++i) xi[i] = std::pow(10.0, -2.0 + 4.0 * i / (n - 1.0));
  const std::size_t h = n / 2;
  for (std::size_t i = 0; i < h; ++i) xi0.push_back(-std::pow(10.0, 4.0 - 6.0 * i / (h - 1.0 + (h == 1))));
  for (std::size_t i = 0; i < h; ++i) xi0.push_back(std::pow(10.0, -2.0 + 6.0 * i / (h - 1.0 + (h == 1))));
  return {xi, xi0};
}

/// Compares the oracle's i xi0 - a u'(0) with ch_denominator_value over an
/// n x n frequency grid, and records how far the fraction without a lands.
inline DenominatorComparison ch_denominator_comparison(double a, std::size_t n = 32, const OracleOptions& opt = {}) {
  if (!(a > 0.0)) throw std::invalid_argument("ch_denominator_comparison: a must be positive");
  DenominatorComparison c;
  c.a = a;
  std::tie(c.xi, c.xi0) = oracle_frequency_grid(n);
  const std::size_t total = c.xi.size() * c.xi0.size();
  std::vector<double> rel(total, 0.0), unscaled(total, 0.0), coll(total, 0.0);
  std::vector<char> amb(total, 0);
  parallel_for(0, total, [&](std::size_t k) {
    const double x = c.xi[k / c.xi0.size()], x0 = c.xi0[k % c.xi0.size()];
    const OracleResult o = ch_ode_oracle(x, x0, opt);
    if (o.ambiguous) {
      amb[k] = 1;
      return;
    }
    const complex closed = ch_denominator_value(x * x, x0, a);
    const complex ref = o.denominator(a);
    rel[k] = std::abs(closed - ref) / std::abs(ref);
    unscaled[k] = std::abs(complex(0.0, x0) + o.fraction() - ref) / std::abs(ref);
    if (o.collocation_slope) coll[k] = std::abs(*o.collocation_slope - *o.slope) / std::abs(*o.slope);
  });
  for (std::size_t k = 0; k < total; ++k) {
    c.ambiguous_points += amb[k];
    c.max_rel_error = std::max(c.max_rel_error, rel[k]);
    c.max_rel_error_unscaled = std::max(c.max_rel_error_unscaled, unscaled[k]);
    c.max_collocation_difference = std::max(c.max_collocation_difference, coll[k]);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Time-domain heat convolution oracle for dipole data
// h(t, x) = tau(t) d/dx_1 prod_i G_{sigma^2}(x_i), tau a Gaussian pulse.

struct HeatDipoleData {
  double sigma = 0.15;     // spatial Gaussian width
  double t_center = 2.2;   // pulse centre
  double t_width = 0.25;   // pulse width
};

namespace detail {

/// sum_k G_v(x + 2 L k) (deriv = 0) or its x-derivative (deriv = 1), with
/// G_v the centred Gaussian of variance v. Images for narrow kernels,
/// Fourier series for wide ones.
inline double periodic_gaussian(double x, double v, double L, int deriv) {
  const double sd = std::sqrt(v);
  if (sd <= L) {
    const int K = static_cast<int>(std::ceil((9.0 * sd + std::abs(x)) / (2.0 * L))) + 1;
    double s = 0.0;
    for (int k = -K; k <= K; ++k) {
      const double y = x + 2.0 * L * k;
      const double gv = std::exp(-0.5 * y * y / v) / std::sqrt(2.0 * std::numbers::pi * v);
      s += deriv ? -y / v * gv : gv;
    }
    return s;
  }
  const double dxi = std::numbers::pi / L;
  const int M = static_cast<int>(std::ceil(std::sqrt(90.0 / v) / dxi)) + 1;
  double s = deriv ? 0.0 : 0.5;
  for (int m = 1; m <= M; ++m) {
    const double xi = m * dxi, e = std::exp(-0.5 * v * xi * xi);
    s += deriv ? -xi * e * std::sin(xi * x) : e * std::cos(xi * x);
  }
  return s / L;
}

/// Gauss-Legendre nodes and weights on [-1, 1].
inline void gauss_legendre(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5)), dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace detail

inline SampledField heat_dipole_data(const Grid& g, const HeatDipoleData& d) {
  if (g.dims() < 2) throw std::invalid_argument("heat_dipole_data: need a time axis and a space axis");
  return sample(
      [&](std::span<const double> x) {
        const double tau = std::exp(-0.5 * std::pow((x[0] - d.t_center) / d.t_width, 2));
        double v = tau * detail::periodic_gaussian(x[1], d.sigma * d.sigma, g.extent(1), 1);
        for (std::size_t a = 2; a < x.size(); ++a)
          v *= detail::periodic_gaussian(x[a], d.sigma * d.sigma, g.extent(a), 0);
        return v;
      },
      g);
}

/// rho(t, x) = int_{s < t} tau(s) [Gamma_a(., t - s) * h_x(., s)] ds, using
/// that the heat kernel widens a Gaussian of variance v to v + 2 a (t - s).
/// The time integral is done in u = ln(v / sigma^2) by composite
/// Gauss-Legendre, which resolves the fast kernel change near s = t.
inline SampledField heat_convolution_oracle(const Grid& g, double a, const HeatDipoleData& d) {
  if (!(a > 0.0)) throw std::invalid_argument("heat_convolution_oracle: a must be positive");
  if (g.dims() < 2) throw std::invalid_argument("heat_convolution_oracle: need a time axis and a space axis");
  std::vector<double> gx, gw;
  detail::gauss_legendre(8, gx, gw);
  const double s2 = d.sigma * d.sigma;
  const double s_lo = d.t_center - 9.0 * d.t_width, s_hi = d.t_center + 9.0 * d.t_width;
  const std::size_t nt = g.points(0), row = g.stride(0);
  std::vector<complex> out(g.size());
  parallel_for(0, nt, [&](std::size_t j) {
    const double t = g.node(0, j);
    const double top = std::min(t, s_hi);
    if (top <= s_lo) return;
    const double u0 = std::log1p(2.0 * a * (t - top) / s2), u1 = std::log1p(2.0 * a * (t - s_lo) / s2);
    std::vector<double> acc(row, 0.0), xs(g.dims());
    double u = u0;
    while (u < u1) {
      const double v = s2 * std::exp(u);
      const double du = std::min({0.05, a * d.t_width / v, u1 - u});
      for (std::size_t q = 0; q < gx.size(); ++q) {
        const double uq = u + 0.5 * du * (gx[q] + 1.0);
        const double vq = s2 * std::exp(uq);
        const double s = t - (vq - s2) / (2.0 * a);
        const double weight = 0.5 * du * gw[q] * std::exp(-0.5 * std::pow((s - d.t_center) / d.t_width, 2)) * vq / (2.0 * a);
        if (weight == 0.0) continue;
        for (std::size_t k = 0; k < row; ++k) {
          g.node_coordinates(j * row + k, xs);
          double kern = detail::periodic_gaussian(xs[1], vq, g.extent(1), 1);
          for (std::size_t ax = 2; ax < g.dims(); ++ax) kern *= detail::periodic_gaussian(xs[ax], vq, g.extent(ax), 0);
          acc[k] += weight * kern;
        }
      }
      u += du;
    }
    for (std::size_t k = 0; k < row; ++k) out[j * row + k] = acc[k];
  });
  return SampledField(g, std::move(out), Side::physical);
}

/// Relative L2 distance ||a - b|| / ||b||.
inline double relative_l2(const SampledField& a, const SampledField& b) {
  const double nb = b.l2_norm();
  return nb > 0.0 ? (a - b).l2_norm() / nb : (a - b).l2_norm();
}

// ---------------------------------------------------------------------------
// Reduction check: D^alpha rho vs (i xi_l / (i xi0 + a |xi|)) D^beta h with
// alpha = beta + e_l, compared on dyadic annuli of rho = |xi0| + sum |xi_i|,
// the distance for the unit weights of the reduction symbol.

struct ReductionLevel {
  int level = 0;  // annulus 2^level <= rho < 2^{level+1}
  std::size_t bins = 0;
  double principal = 0.0;  // L2 of the principal term over the annulus
  double remainder = 0.0;  // L2 of D^alpha rho minus the principal term
  double ratio = 0.0;
};

struct ReductionCheck {
  double a = 1.0;
  std::size_t axis = 1;
  std::vector<int> beta;
  std::vector<ReductionLevel> levels;
  bool below_half = false;
  bool decreasing = false;

  bool passes() const { return !levels.empty() && below_half && decreasing; }

  json to_json() const {
    json j;
    j["a"] = a;
    j["axis"] = axis;
    j["beta"] = beta;
    j["below_half"] = below_half;
    j["decreasing"] = decreasing;
    j["passes"] = passes();
    j["levels"] = json::array();
    for (const auto& l : levels)
      j["levels"].push_back({{"level", l.level},
                             {"bins", l.bins},
                             {"principal", l.principal},
                             {"remainder", l.remainder},
                             {"ratio", l.ratio}});
    return j;
  }

  std::string to_csv() const {
    CsvTable t({"level", "bins", "principal", "remainder", "ratio"});
    for (const auto& l : levels)
      t.add_row({std::to_string(l.level), std::to_string(l.bins), format_number(l.principal),
                 format_number(l.remainder), format_number(l.ratio)});
    return t.str();
  }
};

/// Spectral comparison over complete annuli with rho >= 2^min_level inside
/// the grid's frequency box. beta indexes the space axes (axes 1..d).
inline ReductionCheck ch_reduction_check(const SampledField& h, double a, std::size_t axis, std::vector<int> beta,
                                         int min_level = 2) {
  const Grid& g = h.grid();
  const std::size_t d = g.dims() - 1;
  if (g.dims() < 2) throw std::invalid_argument("ch_reduction_check: need a time axis and a space axis");
  if (axis == 0 || axis > d) throw std::invalid_argument("ch_reduction_check: axis must be a space axis");
  if (beta.size() != d) throw std::invalid_argument("ch_reduction_check: beta needs one entry per space axis");
  if (!(a > 0.0)) throw std::invalid_argument("ch_reduction_check: a must be positive");
  ReductionCheck c;
  c.a = a;
  c.axis = axis;
  c.beta = beta;
  // Largest rho fully covered by the box: the smallest per-axis Nyquist frequency.
  double rho_box = 1e300;
  for (std::size_t ax = 0; ax <= d; ++ax)
    rho_box = std::min(rho_box, std::numbers::pi * (g.points(ax) / 2 - 1) / g.extent(ax));
  const int max_level = static_cast<int>(std::floor(std::log2(rho_box))) - 1;
  if (max_level < min_level) return c;
  std::vector<double> prin(max_level - min_level + 1, 0.0), rem(prin.size(), 0.0);
  std::vector<std::size_t> bins(prin.size(), 0);
  const SampledField spec = forward_transform(h);
  std::vector<double> xi(g.dims());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    g.frequency_coordinates(i, xi);
    double rho = 0.0;
    for (double v : xi) rho += std::abs(v);
    if (rho < std::ldexp(1.0, min_level)) continue;
    const int lev = static_cast<int>(std::floor(std::log2(rho)));
    if (lev > max_level) continue;
    complex dbeta = spec[i];
    for (std::size_t ax = 1; ax <= d; ++ax) dbeta *= std::pow(complex(0.0, xi[ax]), beta[ax - 1]);
    const complex il(0.0, xi[axis]);
    const complex dalpha = il * dbeta / ch_denominator_value(detail::norm2(xi, 1), xi[0], a);
    const complex principal = il / complex(a * std::sqrt(detail::norm2(xi, 1)), xi[0]) * dbeta;
    prin[lev - min_level] += std::norm(principal);
    rem[lev - min_level] += std::norm(dalpha - principal);
    ++bins[lev - min_level];
  }
  c.below_half = true;
  c.decreasing = true;
  for (std::size_t k = 0; k < prin.size(); ++k) {
    ReductionLevel l;
    l.level = min_level + static_cast<int>(k);
    l.bins = bins[k];
    l.principal = std::sqrt(prin[k]);
    l.remainder = std::sqrt(rem[k]);
    l.ratio = l.principal > 0.0 ? l.remainder / l.principal : 0.0;
    c.below_half = c.below_half && l.ratio < 0.5;
    if (!c.levels.empty()) c.decreasing = c.decreasing && l.ratio < c.levels.back().ratio;
    c.levels.push_back(l);
  }
  return c;
}

}  // namespace holderlab
