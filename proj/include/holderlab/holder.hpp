#pragma once

// Finite-difference estimators for anisotropic Hoelder seminorms.
//
// The k-th difference along axis i with step h = m * spacing is
//   D^k_h u(x) = sum_r (-1)^(k-r) C(k,r) u(x + r h e_i)
// and the seminorm estimate is max over nodes and m of |D^k_h u| / h^l.
// Only grid steps are scanned, so estimates are lower bounds of the
// continuum quantity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"
#include "parallel.hpp"
#include "profile.hpp"
#include "report.hpp"

namespace holderlab {

/// periodic: stencils wrap around the box. interior: stencils that would
/// cross the box edge are skipped (for data that is not periodic).
enum class Boundary { periodic, interior };

inline const char* to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "interior"; }

namespace detail {

inline std::vector<double> binomial_row(int k) {
  std::vector<double> c(static_cast<std::size_t>(k) + 1, 1.0);
  for (int r = 1; r <= k; ++r) c[r] = c[r - 1] * (k - r + 1) / r;
  for (int r = 0; r <= k; ++r)
    if ((k - r) % 2 == 1) c[r] = -c[r];
  return c;
}

inline void check_physical(const SampledField& u, const char* who) {
  if (u.side() != Side::physical) throw std::invalid_argument(std::string(who) + ": field must be on the physical side");
}

inline void check_axis(const SampledField& u, std::size_t axis, const char* who) {
  if (axis >= u.grid().dims())
    throw std::invalid_argument(std::string(who) + ": axis " + std::to_string(axis) + " out of range");
}

}  // namespace detail

/// sup over nodes of |D^k_{m h} u| along `axis`, for each step count in `steps`.
inline std::vector<double> sup_differences(const SampledField& u, std::size_t axis, int k,
                                           const std::vector<std::size_t>& steps,
                                           Boundary boundary = Boundary::periodic) {
  detail::check_axis(u, axis, "sup_differences");
  if (k < 1) throw std::invalid_argument("sup_differences: difference order must be >= 1");
  const Grid& g = u.grid();
  const std::size_t n = g.points(axis);
  const std::size_t stride = g.stride(axis);
  const std::size_t lines = g.size() / n;
  const auto coef = detail::binomial_row(k);
  const auto vals = u.values();

  const std::size_t chunks = std::min<std::size_t>(std::max<std::size_t>(thread_count(), 1), lines);
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(steps.size(), 0.0));
  parallel_for(0, chunks, [&](std::size_t c) {
    std::vector<complex> line(n);
    auto& best = partial[c];
    const std::size_t lo = lines * c / chunks, hi = lines * (c + 1) / chunks;
    for (std::size_t li = lo; li < hi; ++li) {
      const std::size_t base = (li / stride) * n * stride + li % stride;
      for (std::size_t p = 0; p < n; ++p) line[p] = vals[base + p * stride];
      for (std::size_t s = 0; s < steps.size(); ++s) {
        const std::size_t m = steps[s];
        const std::size_t span = static_cast<std::size_t>(k) * m;
        const std::size_t last = boundary == Boundary::periodic ? n : (span < n ? n - span : 0);
        double b = best[s];
        for (std::size_t p = 0; p < last; ++p) {
          complex d = 0.0;
          for (int r = 0; r <= k; ++r) d += coef[r] * line[(p + r * m) % n];
          b = std::max(b, std::abs(d));
        }
        best[s] = b;
      }
    }
  });
  std::vector<double> out(steps.size(), 0.0);
  for (const auto& p : partial)
    for (std::size_t s = 0; s < out.size(); ++s) out[s] = std::max(out[s], p[s]);
  return out;
}

/// max over m in [1, n/(2k)] of sup |D^k_{m h} u| / (m h)^l.
inline double partial_seminorm(const SampledField& u, std::size_t axis, double l, int k,
                               Boundary boundary = Boundary::periodic) {
  detail::check_physical(u, "partial_seminorm");
  detail::check_axis(u, axis, "partial_seminorm");
  if (!(l > 0.0)) throw std::invalid_argument("partial_seminorm: exponent must be positive");
  if (!(k > l)) throw std::invalid_argument("partial_seminorm: difference order must exceed the exponent");
  const std::size_t n = u.grid().points(axis);
  if (n < static_cast<std::size_t>(k) + 1)
    throw std::invalid_argument("partial_seminorm: fewer than k+1 points on axis " + std::to_string(axis));
  const std::size_t m_max = n / (2 * static_cast<std::size_t>(k));
  if (m_max == 0) throw std::invalid_argument("partial_seminorm: k * spacing reaches the extent");
  std::vector<std::size_t> steps(m_max);
  for (std::size_t m = 1; m <= m_max; ++m) steps[m - 1] = m;
  const auto sups = sup_differences(u, axis, k, steps, boundary);
  const double h = u.grid().spacing(axis);
  double best = 0.0;
  for (std::size_t s = 0; s < steps.size(); ++s)
    best = std::max(best, sups[s] / std::pow(static_cast<double>(steps[s]) * h, l));
  return best;
}

/// Geometric step ladder (factor 2) of integer step counts inside [h_min, h_max].
inline std::vector<std::size_t> step_ladder(const Grid& g, std::size_t axis, double h_min, double h_max) {
  const double dx = g.spacing(axis);
  auto m = static_cast<std::size_t>(std::ceil(h_min / dx - 1e-9));
  const auto m_hi = static_cast<std::size_t>(std::floor(h_max / dx + 1e-9));
  std::vector<std::size_t> ladder;
  for (m = std::max<std::size_t>(m, 1); m <= m_hi; m *= 2) ladder.push_back(m);
  return ladder;
}

/// Least-squares slope of log sup|D^k_h u| against log h over a factor-2
/// ladder, clipped to [0, k]. Returns nullopt when the differences vanish
/// (flat field).
inline std::optional<double> fit_exponent(const SampledField& u, std::size_t axis, int k, double h_min,
                                          double h_max, Boundary boundary = Boundary::periodic) {
  detail::check_physical(u, "fit_exponent");
  detail::check_axis(u, axis, "fit_exponent");
  const Grid& g = u.grid();
  const double dx = g.spacing(axis);
  if (h_min < dx * (1.0 - 1e-12)) throw std::invalid_argument("fit_exponent: h_min is below the grid spacing");
  if (h_max > g.extent(axis) / (2.0 * k) * (1.0 + 1e-12))
    throw std::invalid_argument("fit_exponent: h_max exceeds extent / 2k");
  const auto ladder = step_ladder(g, axis, h_min, h_max);
  if (ladder.size() < 4)
    throw std::invalid_argument("fit_exponent: step ladder has " + std::to_string(ladder.size()) +
                                " rungs, need at least 4");
  const auto sups = sup_differences(u, axis, k, ladder, boundary);
  const double scale = std::max(u.max_abs(), 1e-300);
  std::vector<double> xs, ys;
  for (std::size_t s = 0; s < ladder.size(); ++s) {
    if (sups[s] <= 1e-13 * scale) continue;
    xs.push_back(std::log(static_cast<double>(ladder[s]) * dx));
    ys.push_back(std::log(sups[s]));
  }
  if (xs.size() < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return std::clamp(sxy / sxx, 0.0, static_cast<double>(k));
}

/// Fit over the full default ladder: spacing up to extent / 2k.
inline std::optional<double> fit_exponent(const SampledField& u, std::size_t axis, int k,
                                          Boundary boundary = Boundary::periodic) {
  const Grid& g = u.grid();
  return fit_exponent(u, axis, k, g.spacing(axis), g.extent(axis) / (2.0 * k), boundary);
}

struct SeminormEntry {
  std::size_t axis = 0;
  double l = 0.0;
  int k = 1;
  double value = 0.0;
  std::optional<double> fitted_exponent;
};

struct SeminormReport {
  std::vector<SeminormEntry> per_axis;
  double sup_norm = 0.0;
  double l2_norm = 0.0;

  double seminorm_sum() const {
    double s = 0.0;
    for (const auto& e : per_axis) s += e.value;
    return s;
  }

  /// Hoelder norm: sup norm plus the per-axis seminorms.
  double holder_norm() const { return sup_norm + seminorm_sum(); }

  json to_json() const {
    json j;
    j["sup_norm"] = sup_norm;
    j["l2_norm"] = l2_norm;
    j["per_axis"] = json::array();
    for (const auto& e : per_axis) {
      json a;
      a["axis"] = e.axis;
      a["l"] = e.l;
      a["k"] = e.k;
      a["value"] = e.value;
      a["fitted_exponent"] = e.fitted_exponent ? json(*e.fitted_exponent) : json(nullptr);
      j["per_axis"].push_back(a);
    }
    return j;
  }

  std::string to_csv() const {
    CsvTable t({"axis", "l", "k", "value", "fitted_exponent"});
    for (const auto& e : per_axis)
      t.add_row({std::to_string(e.axis), format_number(e.l), std::to_string(e.k), format_number(e.value),
                 e.fitted_exponent ? format_number(*e.fitted_exponent) : std::string("flat")});
    return t.str();
  }
};

struct SeminormOptions {
  std::vector<int> orders;             // per-axis difference order; empty = floor(l)+1
  std::vector<Boundary> boundaries;    // per-axis; empty = periodic everywhere
  bool fit = true;                     // also fit exponents over the default ladder
};

inline Boundary boundary_for(const std::vector<Boundary>& b, std::size_t axis) {
  return b.empty() ? Boundary::periodic : b.at(axis);
}

inline SeminormReport aniso_norm(const SampledField& u, const std::vector<double>& l_vector,
                                 const SeminormOptions& opt = {}) {
  detail::check_physical(u, "aniso_norm");
  const Grid& g = u.grid();
  if (l_vector.size() != g.dims()) throw std::invalid_argument("aniso_norm: one exponent per axis required");
  if (!opt.orders.empty() && opt.orders.size() != g.dims())
    throw std::invalid_argument("aniso_norm: order list length mismatch");
  if (!opt.boundaries.empty() && opt.boundaries.size() != g.dims())
    throw std::invalid_argument("aniso_norm: boundary list length mismatch");
  SeminormReport r;
  r.sup_norm = u.max_abs();
  r.l2_norm = u.l2_norm();
  for (std::size_t a = 0; a < g.dims(); ++a) {
    const double l = l_vector[a];
    if (!(l > 0.0)) throw std::invalid_argument("aniso_norm: exponent on axis " + std::to_string(a) + " must be positive");
    SeminormEntry e;
    e.axis = a;
    e.l = l;
    e.k = opt.orders.empty() ? static_cast<int>(std::floor(l)) + 1 : opt.orders[a];
    const Boundary b = boundary_for(opt.boundaries, a);
    e.value = partial_seminorm(u, a, l, e.k, b);
    if (opt.fit && step_ladder(g, a, g.spacing(a), g.extent(a) / (2.0 * e.k)).size() >= 4)
      e.fitted_exponent = fit_exponent(u, a, e.k, b);
    r.per_axis.push_back(e);
  }
  return r;
}

/// Seminorms at the profile's exponents gamma*alpha_i / gamma*beta_k.
inline SeminormReport aniso_norm(const SampledField& u, const AnisotropyProfile& profile,
                                 const SeminormOptions& opt = {}) {
  profile.validate(u.grid().dims());
  std::vector<double> l(u.grid().dims());
  for (std::size_t a = 0; a < l.size(); ++a) l[a] = profile.target_exponent(a);
  return aniso_norm(u, l, opt);
}

/// All multi-indices over `axes` entries with total order exactly `order`.
inline std::vector<std::vector<int>> multi_indices(std::size_t axes, int order) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(axes, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == axes) {
      cur[i] = left;
      out.push_back(cur);
      return;
    }
    for (int v = left; v >= 0; --v) {
      cur[i] = v;
      rec(i + 1, left - v);
    }
  };
  if (axes == 0) return out;
  rec(0, order);
  return out;
}

struct ParabolicTerm {
  std::vector<int> derivative;  // full multi-index including the time slot
  double value = 0.0;
};

struct ParabolicNormReport {
  double l1 = 0.0, l2 = 0.0;
  double sup_norm = 0.0;
  std::vector<ParabolicTerm> spatial_terms;
  ParabolicTerm time_term;
  double value = 0.0;

  json to_json() const {
    json j;
    j["l1"] = l1;
    j["l2"] = l2;
    j["sup_norm"] = sup_norm;
    j["value"] = value;
    j["spatial_terms"] = json::array();
    for (const auto& t : spatial_terms) j["spatial_terms"].push_back({{"derivative", t.derivative}, {"value", t.value}});
    j["time_term"] = {{"derivative", time_term.derivative}, {"value", time_term.value}};
    return j;
  }
};

using DerivativeProvider = std::function<SampledField(const std::vector<int>&)>;

/// |u|^(0) + sum_{|a|=[l1]} <D^a_x u>_x^(l1-[l1]) + <D_t^[l2] u>_t^(l2-[l2]).
/// The spatial Hoelder quotient is the max over spatial coordinate axes.
/// `deriv` returns the requested derivative sampled on u's grid.
inline ParabolicNormReport parabolic_norm(const SampledField& u, std::size_t time_axis, double l1, double l2,
                                          const DerivativeProvider& deriv,
                                          const std::vector<Boundary>& boundaries = {}) {
  detail::check_physical(u, "parabolic_norm");
  detail::check_axis(u, time_axis, "parabolic_norm");
  auto is_int = [](double v) { return std::abs(v - std::round(v)) < 1e-12; };
  if (!(l1 > 0.0) || !(l2 > 0.0)) throw std::invalid_argument("parabolic_norm: orders must be positive");
  if (is_int(l1) || is_int(l2)) throw std::invalid_argument("parabolic_norm: orders must not be integers");
  const Grid& g = u.grid();
  const std::size_t dims = g.dims();
  if (dims < 2) throw std::invalid_argument("parabolic_norm: need at least one spatial axis");
  const int o1 = static_cast<int>(std::floor(l1));
  const int o2 = static_cast<int>(std::floor(l2));
  const double f1 = l1 - o1, f2 = l2 - o2;

  ParabolicNormReport r;
  r.l1 = l1;
  r.l2 = l2;
  r.sup_norm = u.max_abs();
  double total = r.sup_norm;
  for (const auto& a : multi_indices(dims - 1, o1)) {
    std::vector<int> full(dims, 0);
    for (std::size_t s = 0, q = 0; s < dims; ++s)
      if (s != time_axis) full[s] = a[q++];
    const SampledField d = o1 == 0 ? u : deriv(full);
    double best = 0.0;
    for (std::size_t s = 0; s < dims; ++s)
      if (s != time_axis) best = std::max(best, partial_seminorm(d, s, f1, 1, boundary_for(boundaries, s)));
    r.spatial_terms.push_back({full, best});
    total += best;
  }
  std::vector<int> tfull(dims, 0);
  tfull[time_axis] = o2;
  const SampledField dt = o2 == 0 ? u : deriv(tfull);
  r.time_term = {tfull, partial_seminorm(dt, time_axis, f2, 1, boundary_for(boundaries, time_axis))};
  total += r.time_term.value;
  r.value = total;
  return r;
}

/// Spectral-derivative variant for periodic fields.
inline ParabolicNormReport parabolic_norm(const SampledField& u, std::size_t time_axis, double l1, double l2,
                                          const std::vector<Boundary>& boundaries = {}) {
  return parabolic_norm(
      u, time_axis, l1, l2,
      [&](const std::vector<int>& o) { return spectral_derivative(u, std::span<const int>(o)); }, boundaries);
}

}  // namespace holderlab
