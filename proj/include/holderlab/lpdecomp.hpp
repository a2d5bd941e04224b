#pragma once

// Anisotropic Littlewood-Paley machinery: the distance rho, smooth cutoffs,
// the dyadic partition phi(rho / 2^j), block decomposition, localized kernels
// n_j and the kernel diagnostics (weighted moments, zero-mean slices).
//
// rho(xi) = sum_i |xi_i|^{e_i} with e_i = alpha_i or beta_k, and the dyadic
// scaling (A_j xi)_i = 2^{j / e_i} xi_i, so rho(A_j xi) = 2^j rho(xi).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"
#include "parallel.hpp"
#include "profile.hpp"
#include "symbols.hpp"

namespace holderlab {

inline double aniso_distance(std::span<const double> x, std::span<const double> exponents) {
  if (x.size() != exponents.size()) throw std::invalid_argument("aniso_distance: dimension mismatch");
  double r = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) r += std::pow(std::abs(x[i]), exponents[i]);
  return r;
}

inline double aniso_distance(std::span<const double> x, const AnisotropyProfile& p) {
  const auto e = p.exponents();
  return aniso_distance(x, std::span<const double>(e));
}

/// A_j with per-axis factors 2^{j/e_i} and determinant a_j.
struct DyadicScaler {
  std::vector<double> exponents;
  int j = 0;

  double factor(std::size_t axis) const { return std::exp2(static_cast<double>(j) / exponents.at(axis)); }

  double determinant() const {
    double s = 0.0;
    for (double e : exponents) s += 1.0 / e;
    return std::exp2(static_cast<double>(j) * s);
  }

  void apply(std::span<const double> in, std::span<double> out) const {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = factor(i) * in[i];
  }
};

/// Smooth cutoffs built from the step S(t) = f(t) / (f(t) + f(1-t)) with
/// f(t) = exp(-s / t); S = 0 for t <= 0 and S = 1 for t >= 1.
struct CutoffPair {
  double sharpness = 1.0;

  double step(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double y = sharpness / t - sharpness / (1.0 - t);
    if (y > 700.0) return 0.0;
    if (y < -700.0) return 1.0;
    return 1.0 / (1.0 + std::exp(y));
  }

  /// 1 on [0,1], 0 on [2, inf).
  double psi(double r) const { return 1.0 - step(r - 1.0); }

  /// psi(r) - psi(2r), supported in [1/2, 2].
  double phi(double r) const { return psi(r) - psi(2.0 * r); }

  /// 1 on [1/2, 2], 0 on [0, 1/4] and [4, inf).
  double omega(double r) const {
    if (r <= 0.25 || r >= 4.0) return 0.0;
    if (r < 0.5) return step((r - 0.25) / 0.25);
    if (r <= 2.0) return 1.0;
    return 1.0 - step((r - 2.0) / 2.0);
  }
};

inline CutoffPair build_cutoffs(double transition_sharpness = 1.0) {
  if (!(transition_sharpness > 0.0)) throw std::invalid_argument("build_cutoffs: sharpness must be positive");
  return CutoffPair{transition_sharpness};
}

/// Random frequencies with rho uniform in [rho_min, rho_max]: a random
/// direction is moved onto the target shell by the dilation A_t.
inline std::vector<std::vector<double>> sample_shell(const std::vector<double>& exponents, double rho_min,
                                                     double rho_max, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> target(rho_min, rho_max);
  std::vector<std::vector<double>> out;
  out.reserve(count);
  std::vector<double> xi(exponents.size());
  while (out.size() < count) {
    for (auto& v : xi) v = nd(rng);
    const double r = aniso_distance(std::span<const double>(xi), std::span<const double>(exponents));
    if (!(r > 0.0)) continue;
    const double t = target(rng) / r;
    for (std::size_t i = 0; i < xi.size(); ++i) xi[i] *= std::pow(t, 1.0 / exponents[i]);
    out.push_back(xi);
  }
  return out;
}

/// max over samples of |sum_{j=j_min}^{j_max} phi(rho / 2^j) - 1|.
inline double partition_residual(const std::vector<double>& exponents, const CutoffPair& c,
                                 const std::vector<std::vector<double>>& xi_samples, int j_min, int j_max) {
  if (j_max < j_min) throw std::invalid_argument("partition_residual: empty level range");
  double worst = 0.0;
  for (const auto& xi : xi_samples) {
    const double r = aniso_distance(std::span<const double>(xi), std::span<const double>(exponents));
    if (!(std::exp2(j_min) <= r / 4.0) || !(std::exp2(j_max) >= 4.0 * r))
      throw std::invalid_argument("partition_residual: level range [" + std::to_string(j_min) + ", " +
                                  std::to_string(j_max) + "] does not cover xi = " + detail::format_point(xi) +
                                  " (rho = " + std::to_string(r) + ")");
    double s = 0.0;
    for (int j = j_min; j <= j_max; ++j) s += c.phi(r / std::exp2(j));
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

inline double partition_residual(const AnisotropyProfile& p, const CutoffPair& c,
                                 const std::vector<std::vector<double>>& xi_samples, int j_min, int j_max) {
  return partition_residual(p.exponents(), c, xi_samples, j_min, j_max);
}

struct LevelRange {
  int j_min = 0;
  int j_max = 0;
};

/// Levels whose partition functions cover every nonzero frequency bin of
/// the grid: [floor(log2 rho_min), ceil(log2 rho_max)].
inline LevelRange default_levels(const Grid& g, const std::vector<double>& exponents) {
  if (exponents.size() != g.dims()) throw std::invalid_argument("default_levels: exponent count mismatch");
  double lo = 1e300, hi = 0.0;
  std::vector<double> xi(g.dims());
  for (std::size_t i = 1; i < g.size(); ++i) {
    g.frequency_coordinates(i, xi);
    const double r = aniso_distance(std::span<const double>(xi), std::span<const double>(exponents));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {static_cast<int>(std::floor(std::log2(lo))), static_cast<int>(std::ceil(std::log2(hi)))};
}

/// Spectra u~ * phi(rho / 2^j) for j in [j_min, j_max]; the DC bin is dropped.
inline std::vector<SampledField> block_spectra(const SampledField& u, const std::vector<double>& exponents,
                                               const CutoffPair& c, LevelRange levels) {
  if (levels.j_max < levels.j_min) throw std::invalid_argument("block_spectra: empty level range");
  const SampledField spec = u.side() == Side::physical ? forward_transform(u) : u;
  const Grid& g = spec.grid();
  if (exponents.size() != g.dims()) throw std::invalid_argument("block_spectra: exponent count mismatch");
  std::vector<double> rho(g.size());
  std::vector<double> xi(g.dims());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.frequency_coordinates(i, xi);
    rho[i] = aniso_distance(std::span<const double>(xi), std::span<const double>(exponents));
  }
  const std::size_t count = static_cast<std::size_t>(levels.j_max - levels.j_min + 1);
  std::vector<std::vector<complex>> data(count);
  parallel_for(0, count, [&](std::size_t b) {
    const double scale = std::exp2(-(levels.j_min + static_cast<int>(b)));
    auto& d = data[b];
    d.assign(g.size(), complex(0.0));
    for (std::size_t i = 1; i < g.size(); ++i) {
      const double w = c.phi(rho[i] * scale);
      if (w != 0.0) d[i] = spec[i] * w;
    }
  });
  std::vector<SampledField> out;
  out.reserve(count);
  for (auto& d : data) out.emplace_back(g, std::move(d), Side::frequency);
  return out;
}

inline std::vector<SampledField> block_decompose(const SampledField& u, const std::vector<double>& exponents,
                                                 const CutoffPair& c, LevelRange levels) {
  if (u.side() != Side::physical) throw std::invalid_argument("block_decompose: field must be on the physical side");
  auto spectra = block_spectra(u, exponents, c, levels);
  std::vector<SampledField> out;
  out.reserve(spectra.size());
  for (const auto& s : spectra) out.push_back(inverse_transform(s));
  return out;
}

namespace detail {

inline void check_kernel_resolution(const Grid& g, const std::vector<double>& exponents) {
  for (std::size_t a = 0; a < g.dims(); ++a) {
    const double w = 1.0 / exponents[a];
    const double nyquist = g.frequency_spacing(a) * static_cast<double>(g.points(a) / 2 - 1);
    const double need_max = std::pow(4.0, w);
    const double need_step = std::pow(0.25, w) / 4.0;
    if (nyquist < need_max || g.frequency_spacing(a) > need_step)
      throw std::invalid_argument("localized_kernel: grid does not resolve the annulus on axis " + std::to_string(a) +
                                  " (need max frequency >= " + std::to_string(need_max) + " and spacing <= " +
                                  std::to_string(need_step) + ")");
  }
}

/// Spectrum m(A_j xi) * weight(rho(xi)) on the grid; bins with zero weight
/// are never evaluated.
template <class Weight>
SampledField scaled_symbol_spectrum(const Symbol& m, const std::vector<double>& exponents, int j, const Grid& g,
                                    Weight&& weight) {
  if (m.dims != g.dims() || exponents.size() != g.dims())
    throw std::invalid_argument("localized kernel: symbol, profile and grid dimensions differ");
  const Symbol mj = scale(m, std::exp2(j));
  std::vector<complex> data(g.size());
  parallel_for(0, g.size(), [&](std::size_t i) {
    double xi[max_dims];
    g.frequency_coordinates(i, std::span<double>(xi, g.dims()));
    const std::span<const double> s(xi, g.dims());
    const double w = weight(aniso_distance(s, std::span<const double>(exponents)));
    data[i] = w == 0.0 ? complex(0.0) : eval(mj, s) * w;
  });
  return SampledField(g, std::move(data), Side::frequency);
}

}  // namespace detail

/// The symbol's weights must match 1/exponents for the level-j rescaling to
/// follow the profile.
inline void check_symbol_matches(const Symbol& m, const std::vector<double>& exponents) {
  if (m.weights.size() != exponents.size()) throw std::invalid_argument("symbol and profile dimensions differ");
  for (std::size_t i = 0; i < exponents.size(); ++i)
    if (std::abs(m.weights[i] * exponents[i] - 1.0) > 1e-12)
      throw std::invalid_argument("symbol weights do not match the profile exponents on axis " + std::to_string(i));
}

/// Spectrum of n_j: m(A_j xi) chi(xi) with chi = omega(rho).
inline SampledField localized_kernel_spectrum(const Symbol& m, const std::vector<double>& exponents,
                                              const CutoffPair& c, int j, const Grid& g) {
  check_symbol_matches(m, exponents);
  detail::check_kernel_resolution(g, exponents);
  return detail::scaled_symbol_spectrum(m, exponents, j, g, [&](double r) { return c.omega(r); });
}

/// n_j sampled on the level-0 grid.
inline SampledField localized_kernel(const Symbol& m, const std::vector<double>& exponents, const CutoffPair& c,
                                     int j, const Grid& g) {
  return inverse_transform(localized_kernel_spectrum(m, exponents, c, j, g));
}

/// Smallest grid passing the level-0 resolution check: frequency step
/// 4^{-w}/4 and Nyquist beyond 4^w on each axis (w = 1/exponent), plus a margin.
inline Grid minimal_kernel_grid(const std::vector<double>& exponents) {
  std::vector<double> L;
  std::vector<std::size_t> n;
  for (double e : exponents) {
    if (!(e > 0.0)) throw std::invalid_argument("minimal_kernel_grid: exponents must be positive");
    const double w = 1.0 / e;
    const double step = std::pow(0.25, w) / 4.0, top = std::pow(4.0, w);
    L.push_back(std::numbers::pi / step);
    n.push_back(2 * (static_cast<std::size_t>(std::ceil(top / step)) + 16));
  }
  return Grid(L, n);
}

/// Spectrum of theta_j = n_j * Phi: m(A_j xi) chi(xi) phi(rho(xi)).
inline SampledField theta_spectrum(const Symbol& m, const std::vector<double>& exponents, const CutoffPair& c, int j,
                                   const Grid& g) {
  check_symbol_matches(m, exponents);
  detail::check_kernel_resolution(g, exponents);
  return detail::scaled_symbol_spectrum(m, exponents, j, g, [&](double r) { return c.omega(r) * c.phi(r); });
}

inline SampledField theta_kernel(const Symbol& m, const std::vector<double>& exponents, const CutoffPair& c, int j,
                                 const Grid& g) {
  return inverse_transform(theta_spectrum(m, exponents, c, j, g));
}

struct MomentResult {
  double value = 0.0;
  double edge_fraction = 0.0;  // share of the integral outside the central half box
};

/// Quadrature of (1 + sum_{smooth i} |x_i|^{alpha_i gamma}) |n(x)| dx.
inline MomentResult moment_integral(const SampledField& n, const AnisotropyProfile& profile) {
  if (n.side() != Side::physical) throw std::invalid_argument("moment_integral: field must be on the physical side");
  const Grid& g = n.grid();
  profile.validate(g.dims());
  double total = 0.0, edge = 0.0;
  std::vector<double> x(g.dims());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double a = std::abs(n[i]);
    if (a == 0.0) continue;
    g.node_coordinates(i, x);
    double w = 1.0;
    bool outer = false;
    for (const auto& [axis, alpha] : profile.smooth_axes) w += std::pow(std::abs(x[axis]), alpha * profile.gamma);
    for (std::size_t d = 0; d < g.dims(); ++d) outer = outer || std::abs(x[d]) > 0.5 * g.extent(d);
    total += w * a;
    if (outer) edge += w * a;
  }
  MomentResult r;
  r.value = total * g.cell_volume();
  r.edge_fraction = total > 0.0 ? edge / total : 0.0;
  return r;
}

struct AdaptiveMoment {
  MomentResult moment;
  Grid grid;
};

/// Doubles the box (and the point count, keeping the spacing) until less
/// than `edge_limit` of the weighted mass sits outside the central half box.
inline AdaptiveMoment moment_integral_adaptive(const Symbol& m, const AnisotropyProfile& profile, const CutoffPair& c,
                                               int j, Grid g, double edge_limit = 0.01,
                                               std::size_t max_points = std::size_t{1} << 22) {
  const auto e = profile.exponents();
  for (;;) {
    const auto mom = moment_integral(localized_kernel(m, e, c, j, g), profile);
    if (mom.edge_fraction < edge_limit || g.size() * (std::size_t{1} << g.dims()) > max_points) return {mom, g};
    std::vector<double> L = g.extents();
    std::vector<std::size_t> n = g.point_counts();
    for (auto& v : L) v *= 2.0;
    for (auto& v : n) v *= 2;
    g = Grid(L, n);
  }
}

/// max over the kept coordinates of |integral of theta over `integrate_axes`|,
/// divided by the max over the same slices of the integral of |theta|.
inline double zero_mean_slice_residual(const SampledField& theta, const std::vector<std::size_t>& integrate_axes) {
  if (theta.side() != Side::physical) throw std::invalid_argument("zero_mean_slice_residual: physical field expected");
  const Grid& g = theta.grid();
  std::vector<bool> integrate(g.dims(), false);
  for (auto a : integrate_axes) {
    if (a >= g.dims()) throw std::invalid_argument("zero_mean_slice_residual: axis out of range");
    integrate[a] = true;
  }
  // Slice id: flat index of the kept coordinates.
  std::size_t slices = 1;
  for (std::size_t a = 0; a < g.dims(); ++a)
    if (!integrate[a]) slices *= g.points(a);
  std::vector<complex> sum(slices);
  std::vector<double> mass(slices, 0.0);
  std::vector<std::size_t> idx(g.dims());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.unravel(i, idx);
    std::size_t s = 0;
    for (std::size_t a = 0; a < g.dims(); ++a)
      if (!integrate[a]) s = s * g.points(a) + idx[a];
    sum[s] += theta[i];
    mass[s] += std::abs(theta[i]);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t s = 0; s < slices; ++s) {
    num = std::max(num, std::abs(sum[s]));
    den = std::max(den, mass[s]);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace holderlab
