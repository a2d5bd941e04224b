#pragma once

// Numerical certification of the multiplier conditions: L^p norms of the
// derivatives of xi -> m(A_lambda xi) over the annulus B_0 = {1/8 <= rho <= 8},
// swept over a geometric lambda grid.
//
// The annulus is covered by dyadic shells 2^k <= rho <= 2^{k+1}, each the
// image of the unit shell {1 <= rho <= 2} under A_{2^k}; one quadrature of
// the unit shell serves every shell and every lambda.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"
#include "lpdecomp.hpp"
#include "parallel.hpp"
#include "profile.hpp"
#include "report.hpp"
#include "symbols.hpp"

namespace holderlab {

enum class AnnulusKind { anisotropic, euclidean };

/// B_nu = {nu <= rho <= 1/nu} (anisotropic) or {nu <= |xi| <= 1/nu}; nu must
/// be a power of two no larger than 1/2.
struct Annulus {
  AnnulusKind kind = AnnulusKind::anisotropic;
  double nu = 0.125;

  int shells() const {
    const double k = -std::log2(nu);
    if (!(nu > 0.0 && nu <= 0.5) || std::abs(k - std::round(k)) > 1e-12)
      throw std::invalid_argument("annulus: nu must be 2^-K with K >= 1");
    return 2 * static_cast<int>(std::lround(k));
  }

  json describe() const {
    json j;
    j["kind"] = kind == AnnulusKind::anisotropic ? "anisotropic" : "euclidean";
    j["nu"] = nu;
    j["rho_min"] = nu;
    j["rho_max"] = 1.0 / nu;
    j["set"] = kind == AnnulusKind::anisotropic ? "nu <= rho(xi) <= 1/nu" : "nu <= |xi| <= 1/nu";
    return j;
  }
};

/// Derivative multi-indices summed in the Sobolev-type norm.
struct OrderSpec {
  std::string variant;
  std::vector<std::vector<int>> indices;
  json caps;
};

namespace detail {

// All multi-indices over `axes` (positions into a dims-long vector) with
// total order <= cap, each entry also capped by per_axis_cap.
inline void enumerate_group(const std::vector<std::size_t>& axes, int cap, int per_axis_cap,
                            std::vector<std::vector<int>>& out, std::size_t dims) {
  std::vector<int> w(dims, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
    if (pos == axes.size()) {
      out.push_back(w);
      return;
    }
    for (int o = 0; o <= std::min(left, per_axis_cap); ++o) {
      w[axes[pos]] = o;
      rec(pos + 1, left - o);
    }
    w[axes[pos]] = 0;
  };
  rec(0, cap);
}

// Tensor product of per-group index sets (entries on disjoint axes add).
inline std::vector<std::vector<int>> combine(const std::vector<std::vector<std::vector<int>>>& sets, std::size_t dims) {
  std::vector<std::vector<int>> acc{std::vector<int>(dims, 0)};
  for (const auto& set : sets) {
    std::vector<std::vector<int>> next;
    for (const auto& a : acc)
      for (const auto& b : set) {
        std::vector<int> c(dims);
        for (std::size_t i = 0; i < dims; ++i) c[i] = a[i] + b[i];
        next.push_back(std::move(c));
      }
    acc = std::move(next);
  }
  return acc;
}

inline void check_partition(const std::vector<std::vector<std::size_t>>& groups, std::size_t dims) {
  if (groups.empty()) throw std::invalid_argument("certify: empty axis partition");
  std::vector<int> seen(dims, 0);
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("certify: empty group in axis partition");
    for (std::size_t a : g) {
      if (a >= dims) throw std::invalid_argument("certify: axis " + std::to_string(a) + " out of range");
      ++seen[a];
    }
  }
  for (std::size_t i = 0; i < dims; ++i)
    if (seen[i] != 1)
      throw std::invalid_argument("certify: axis " + std::to_string(i) + " must belong to exactly one group");
}

}  // namespace detail

/// All omega with |omega| <= s.
inline OrderSpec isotropic_orders(std::size_t dims, int s) {
  if (s < 0) throw std::invalid_argument("isotropic_orders: s must be >= 0");
  std::vector<std::size_t> axes(dims);
  for (std::size_t i = 0; i < dims; ++i) axes[i] = i;
  OrderSpec o{"isotropic", {}, json::object()};
  detail::enumerate_group(axes, s, s, o.indices, dims);
  o.caps["s"] = s;
  return o;
}

/// Mixed derivatives D^{omega_1}...D^{omega_r} with |omega_i| <= s_i on group i.
inline OrderSpec grouped_orders(const std::vector<std::vector<std::size_t>>& groups, const std::vector<int>& s,
                                std::size_t dims) {
  detail::check_partition(groups, dims);
  if (s.size() != groups.size()) throw std::invalid_argument("grouped_orders: one order per group required");
  std::vector<std::vector<std::vector<int>>> sets;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (s[g] < 0) throw std::invalid_argument("grouped_orders: orders must be >= 0");
    sets.emplace_back();
    detail::enumerate_group(groups[g], s[g], s[g], sets.back(), dims);
  }
  OrderSpec o{"grouped", detail::combine(sets, dims), json::object()};
  o.caps["s"] = s;
  return o;
}

/// |omega'| <= cap over all groups but the last; each axis of the last group
/// is differentiated at most once.
inline OrderSpec special_last_orders(const std::vector<std::vector<std::size_t>>& groups, int cap, std::size_t dims) {
  detail::check_partition(groups, dims);
  if (groups.size() < 2) throw std::invalid_argument("special_last_orders: need at least two groups");
  std::vector<std::size_t> lead;
  for (std::size_t g = 0; g + 1 < groups.size(); ++g) lead.insert(lead.end(), groups[g].begin(), groups[g].end());
  std::vector<std::vector<std::vector<int>>> sets(2);
  detail::enumerate_group(lead, cap, cap, sets[0], dims);
  detail::enumerate_group(groups.back(), static_cast<int>(groups.back().size()), 1, sets[1], dims);
  OrderSpec o{"special_last", detail::combine(sets, dims), json::object()};
  o.caps["lead_total"] = cap;
  o.caps["last_per_axis"] = 1;
  return o;
}

/// omega_i in {0,1,2} off the last group, {0,1} on it.
inline OrderSpec capped_per_axis_orders(const std::vector<std::vector<std::size_t>>& groups, std::size_t dims) {
  detail::check_partition(groups, dims);
  std::vector<std::vector<std::vector<int>>> sets(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const int per = g + 1 == groups.size() ? 1 : 2;
    detail::enumerate_group(groups[g], per * static_cast<int>(groups[g].size()), per, sets[g], dims);
  }
  OrderSpec o{"per_axis", detail::combine(sets, dims), json::object()};
  o.caps["lead_per_axis"] = 2;
  o.caps["last_per_axis"] = 1;
  return o;
}

/// Quadrature nodes of the unit shell {1 <= r <= 2}, with r = rho or |xi|.
struct ShellQuadrature {
  std::vector<double> nodes;  // dims-major: node i occupies [i*dims, (i+1)*dims)
  std::vector<double> volumes;
  std::size_t dims = 0;

  std::size_t size() const { return volumes.size(); }

  double volume() const {
    double s = 0.0;
    for (double v : volumes) s += v;
    return s;
  }
};

struct QuadratureOptions {
  std::size_t cells_per_axis = 0;  // 0: chosen by dimension
  int refine_depth = -1;           // boundary-cell subdivisions; -1: chosen by dimension
};

namespace detail {

inline std::size_t default_cells(std::size_t dims) {
  switch (dims) {
    case 1: return 512;
    case 2: return 64;
    case 3: return 16;
    default: return 8;
  }
}

inline int default_depth(std::size_t dims) { return dims <= 2 ? 3 : 1; }

// Radial functional of the annulus: rho with the symbol's exponents, or |xi|.
struct Radial {
  AnnulusKind kind;
  std::vector<double> exponents;

  double operator()(std::span<const double> x) const {
    if (kind == AnnulusKind::euclidean) return std::sqrt(norm2(x));
    return aniso_distance(x, std::span<const double>(exponents));
  }
};

}  // namespace detail

inline ShellQuadrature unit_shell_quadrature(const std::vector<double>& weights, AnnulusKind kind,
                                             const QuadratureOptions& opt = {}) {
  const std::size_t n = weights.size();
  if (n == 0 || n > max_dims) throw std::invalid_argument("unit_shell_quadrature: unsupported dimension");
  detail::Radial radial{kind, {}};
  std::vector<double> half(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(weights[i] > 0.0)) throw std::invalid_argument("unit_shell_quadrature: weights must be positive");
    radial.exponents.push_back(1.0 / weights[i]);
    half[i] = kind == AnnulusKind::euclidean ? 2.0 : std::pow(2.0, weights[i]);
  }
  const std::size_t q = opt.cells_per_axis ? opt.cells_per_axis : detail::default_cells(n);
  const int depth = opt.refine_depth >= 0 ? opt.refine_depth : detail::default_depth(n);

  ShellQuadrature out;
  out.dims = n;
  std::vector<double> lo(n), hi(n), near(n), far(n), mid(n);
  std::function<void(std::vector<double>, std::vector<double>, int)> visit = [&](std::vector<double> a,
                                                                                std::vector<double> b, int level) {
    // rho is monotone in each |xi_i|, so its range over a box is attained at
    // the corners nearest to and farthest from the origin.
    for (std::size_t i = 0; i < n; ++i) {
      near[i] = (a[i] <= 0.0 && b[i] >= 0.0) ? 0.0 : std::min(std::abs(a[i]), std::abs(b[i]));
      far[i] = std::max(std::abs(a[i]), std::abs(b[i]));
    }
    const double rmin = radial(near), rmax = radial(far);
    if (rmax < 1.0 || rmin > 2.0) return;
    double vol = 1.0;
    for (std::size_t i = 0; i < n; ++i) vol *= b[i] - a[i];
    if (rmin >= 1.0 && rmax <= 2.0) {
      for (std::size_t i = 0; i < n; ++i) out.nodes.push_back(0.5 * (a[i] + b[i]));
      out.volumes.push_back(vol);
      return;
    }
    if (level >= depth) {
      for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (a[i] + b[i]);
      // Midpoints exactly on the boundary (common for rho = l1 norm on a
      // dyadic grid) count half, which removes the bias of a one-sided rule.
      const double r = radial(mid);
      if (r >= 1.0 && r <= 2.0) {
        out.nodes.insert(out.nodes.end(), mid.begin(), mid.end());
        out.volumes.push_back(r == 1.0 || r == 2.0 ? 0.5 * vol : vol);
      }
      return;
    }
    for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
      std::vector<double> ca(n), cb(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double m = 0.5 * (a[i] + b[i]);
        const bool upper = (corner >> i) & 1;
        ca[i] = upper ? m : a[i];
        cb[i] = upper ? b[i] : m;
      }
      visit(ca, cb, level + 1);
    }
  };

  std::vector<std::size_t> idx(n, 0);
  for (;;) {
    for (std::size_t i = 0; i < n; ++i) {
      const double h = 2.0 * half[i] / static_cast<double>(q);
      lo[i] = -half[i] + static_cast<double>(idx[i]) * h;
      hi[i] = lo[i] + h;
    }
    visit(lo, hi, 0);
    std::size_t i = 0;
    while (i < n && ++idx[i] == q) idx[i++] = 0;
    if (i == n) break;
  }
  return out;
}

/// Exact measure of {r0 <= rho <= r1} for rho = sum |xi_i|^{e_i}.
inline double anisotropic_annulus_volume(const std::vector<double>& exponents, double r0, double r1) {
  double logv = static_cast<double>(exponents.size()) * std::log(2.0), sum_w = 0.0;
  for (double e : exponents) {
    logv += std::lgamma(1.0 + 1.0 / e);
    sum_w += 1.0 / e;
  }
  logv -= std::lgamma(1.0 + sum_w);
  return std::exp(logv) * (std::pow(r1, sum_w) - std::pow(r0, sum_w));
}

struct DerivativeNormOptions {
  Annulus annulus;
  double step = 1e-3;  // finite-difference step relative to the shell scale
  QuadratureOptions quadrature;
};

namespace detail {

inline double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Stencil of the central difference D^omega: offsets in step units (half
// integers for odd orders) and coefficients, tensorized over axes.
struct Stencil {
  std::vector<double> offsets;  // per point, dims entries
  std::vector<double> coeffs;   // without the 1/h^|omega| factor
};

inline Stencil make_stencil(const std::vector<int>& omega) {
  const std::size_t n = omega.size();
  Stencil st;
  std::vector<int> k(n, 0);
  for (;;) {
    double c = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      c *= ((k[i] & 1) ? -1.0 : 1.0) * binom(omega[i], k[i]);
      st.offsets.push_back(0.5 * omega[i] - k[i]);
    }
    st.coeffs.push_back(c);
    std::size_t i = 0;
    while (i < n && ++k[i] > omega[i]) k[i++] = 0;
    if (i == n) break;
  }
  return st;
}

struct ScaledNode {
  std::vector<double> xi;     // physical annulus coordinates
  std::vector<double> scale;  // per-axis shell scale
  double volume;
};

// Maps the unit-shell quadrature onto the shells of the annulus.
inline std::vector<ScaledNode> annulus_nodes(const ShellQuadrature& q, const std::vector<double>& weights,
                                             const Annulus& ann) {
  const int shells = ann.shells();
  const int k0 = -shells / 2;
  std::vector<ScaledNode> nodes;
  nodes.reserve(q.size() * static_cast<std::size_t>(shells));
  for (int k = k0; k < k0 + shells; ++k) {
    std::vector<double> f(q.dims);
    double det = 1.0;
    for (std::size_t i = 0; i < q.dims; ++i) {
      f[i] = std::exp2(ann.kind == AnnulusKind::euclidean ? k : k * weights[i]);
      det *= f[i];
    }
    for (std::size_t p = 0; p < q.size(); ++p) {
      ScaledNode s{std::vector<double>(q.dims), f, q.volumes[p] * det};
      for (std::size_t i = 0; i < q.dims; ++i) s.xi[i] = f[i] * q.nodes[p * q.dims + i];
      nodes.push_back(std::move(s));
    }
  }
  return nodes;
}

}  // namespace detail

/// Prepared quadrature and stencils for one symbol and order set; reusable
/// across lambda.
class AnnulusNorm {
 public:
  AnnulusNorm(const Symbol& m, const OrderSpec& orders, double p, const DerivativeNormOptions& opt = {})
      : m_(m), p_(p), opt_(opt) {
    if (!(p > 1.0 && p <= 2.0)) throw std::invalid_argument("annulus_derivative_norm: p must lie in (1,2]");
    if (!(opt.step > 0.0 && opt.step < 0.1)) throw std::invalid_argument("annulus_derivative_norm: step must lie in (0, 0.1)");
    if (m.weights.size() != m.dims || m.dims == 0) throw std::invalid_argument("annulus_derivative_norm: symbol has no weights");
    for (const auto& w : orders.indices) {
      if (w.size() != m.dims) throw std::invalid_argument("annulus_derivative_norm: multi-index dimension mismatch");
      stencils_.push_back(detail::make_stencil(w));
    }
    if (stencils_.empty()) throw std::invalid_argument("annulus_derivative_norm: empty order set");
    quad_ = unit_shell_quadrature(m.weights, opt.annulus.kind, opt.quadrature);
    nodes_ = detail::annulus_nodes(quad_, m.weights, opt.annulus);
  }

  std::size_t node_count() const { return nodes_.size(); }
  double measure() const {
    double s = 0.0;
    for (const auto& n : nodes_) s += n.volume;
    return s;
  }

  /// (sum_omega int_B |D^omega m(A_lambda xi)|^p dxi)^{1/p}.
  double operator()(double lambda, double step_factor = 1.0) const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("annulus_derivative_norm: lambda must be positive");
    const std::size_t n = m_.dims;
    std::vector<double> factor(n);
    for (std::size_t i = 0; i < n; ++i) factor[i] = std::pow(lambda, m_.weights[i]);
    const double step = opt_.step * step_factor;
    double total = 0.0;
    double buf[max_dims], h[max_dims];
    for (const auto& node : nodes_) {
      for (std::size_t i = 0; i < n; ++i) h[i] = step * node.scale[i];
      double local = 0.0;
      for (std::size_t s = 0; s < stencils_.size(); ++s) {
        const auto& st = stencils_[s];
        complex acc(0.0);
        for (std::size_t k = 0; k < st.coeffs.size(); ++k) {
          for (std::size_t i = 0; i < n; ++i) buf[i] = factor[i] * (node.xi[i] + st.offsets[k * n + i] * h[i]);
          const complex v = m_.evaluator(std::span<const double>(buf, n));
          if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            std::vector<double> at(node.xi);
            throw std::domain_error("annulus_derivative_norm: " + m_.label() + " is singular inside the annulus near xi = " +
                                    detail::format_point(at) + " (lambda = " + format_number(lambda) + ")");
          }
          acc += st.coeffs[k] * v;
        }
        double scale = 1.0;
        for (std::size_t i = 0; i < n; ++i)
          for (int o = 0; o < st_order(s, i); ++o) scale *= h[i];
        local += std::pow(std::abs(acc) / scale, p_);
      }
      total += local * node.volume;
    }
    return std::pow(total, 1.0 / p_);
  }

 private:
  int st_order(std::size_t s, std::size_t axis) const {
    // Recover omega_axis from the stencil: the first point carries +omega/2.
    return static_cast<int>(std::lround(2.0 * stencils_[s].offsets[axis]));
  }

  Symbol m_;
  double p_;
  DerivativeNormOptions opt_;
  std::vector<detail::Stencil> stencils_;
  ShellQuadrature quad_;
  std::vector<detail::ScaledNode> nodes_;
};

inline double annulus_derivative_norm(const Symbol& m, double lambda, double p, const OrderSpec& orders,
                                      const DerivativeNormOptions& opt = {}) {
  return AnnulusNorm(m, orders, p, opt)(lambda);
}

/// Geometric grid from 2^lo to 2^hi with the given number of points.
inline std::vector<double> geometric_lambda_grid(double lo_exp = -8.0, double hi_exp = 8.0, std::size_t points = 33) {
  if (points < 2 || !(hi_exp > lo_exp)) throw std::invalid_argument("lambda grid: need >= 2 points and lo < hi");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = std::exp2(lo_exp + (hi_exp - lo_exp) * static_cast<double>(i) / static_cast<double>(points - 1));
  return g;
}

struct CertifyOptions {
  std::vector<double> lambda_grid = geometric_lambda_grid();
  double drift_bound = 0.01;  // pass requires max/min - 1 below this
  bool richardson = true;     // also evaluate at half step for lambda = 1
  DerivativeNormOptions norm;
};

struct Certificate {
  json symbol;
  double p = 2.0;
  double gamma = 0.0;
  std::string form;  // isotropic, grouped_sufficient, grouped_gain, special_last, per_axis
  std::string threshold;
  json orders;
  std::size_t order_terms = 0;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<double> lambda_grid;
  std::vector<double> per_lambda_norms;
  double mu_estimate = 0.0;
  double drift = 0.0;
  double drift_bound = 0.01;
  bool finite = true;
  bool pass = false;
  std::optional<double> richardson_change;
  json annulus;
  std::size_t quadrature_nodes = 0;
  double annulus_measure = 0.0;
  // Second enumeration reported next to the primary one (integer readings of
  // a fractional cap).
  std::optional<std::string> alternate_label;
  std::vector<double> alternate_norms;

  json to_json() const {
    json j;
    j["symbol"] = symbol;
    j["p"] = p;
    j["gamma"] = gamma;
    j["form"] = form;
    j["threshold"] = threshold;
    j["orders"] = orders;
    j["order_terms"] = order_terms;
    j["groups"] = groups;
    j["lambda_grid"] = lambda_grid;
    j["per_lambda_norms"] = per_lambda_norms;
    j["mu_estimate"] = finite ? json(mu_estimate) : json(nullptr);
    j["drift"] = finite ? json(drift) : json(nullptr);
    j["drift_bound"] = drift_bound;
    j["finite"] = finite;
    j["pass"] = pass;
    j["richardson_change"] = richardson_change ? json(*richardson_change) : json(nullptr);
    j["annulus"] = annulus;
    j["quadrature_nodes"] = quadrature_nodes;
    j["annulus_measure"] = annulus_measure;
    if (alternate_label) {
      j["alternate"]["label"] = *alternate_label;
      j["alternate"]["per_lambda_norms"] = alternate_norms;
    }
    return j;
  }

  std::string to_csv() const {
    CsvTable t(alternate_label ? std::vector<std::string>{"lambda", "norm", "alternate_norm"}
                               : std::vector<std::string>{"lambda", "norm"});
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
      std::vector<std::string> row{format_number(lambda_grid[i]), format_number(per_lambda_norms[i])};
      if (alternate_label) row.push_back(format_number(alternate_norms[i]));
      t.add_row(row);
    }
    return t.str();
  }
};

namespace detail {

inline void check_lambda_grid(const std::vector<double>& g) {
  if (g.size() < 2) throw std::invalid_argument("certify: lambda grid needs at least two points");
  for (double l : g)
    if (!(l > 0.0) || !std::isfinite(l)) throw std::invalid_argument("certify: lambda values must be positive");
}

inline std::vector<double> sweep(const AnnulusNorm& norm, const std::vector<double>& grid) {
  std::vector<double> out(grid.size());
  parallel_for(0, grid.size(), [&](std::size_t i) { out[i] = norm(grid[i]); });
  return out;
}

inline Certificate run_certificate(const Symbol& m, double p, double gamma, const OrderSpec& orders,
                                   const CertifyOptions& opt, std::string form, std::string threshold) {
  check_lambda_grid(opt.lambda_grid);
  AnnulusNorm norm(m, orders, p, opt.norm);
  Certificate c;
  c.symbol = m.describe();
  c.p = p;
  c.gamma = gamma;
  c.form = std::move(form);
  c.threshold = std::move(threshold);
  c.orders = orders.caps;
  c.orders["variant"] = orders.variant;
  c.order_terms = orders.indices.size();
  c.lambda_grid = opt.lambda_grid;
  c.drift_bound = opt.drift_bound;
  c.annulus = opt.norm.annulus.describe();
  c.quadrature_nodes = norm.node_count();
  c.annulus_measure = norm.measure();
  c.per_lambda_norms = sweep(norm, opt.lambda_grid);
  c.finite = std::all_of(c.per_lambda_norms.begin(), c.per_lambda_norms.end(), [](double v) { return std::isfinite(v); });
  if (c.finite) {
    const auto [lo, hi] = std::minmax_element(c.per_lambda_norms.begin(), c.per_lambda_norms.end());
    c.mu_estimate = *hi;
    c.drift = *lo > 0.0 ? *hi / *lo - 1.0 : (*hi > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  }
  c.pass = c.finite && c.drift <= c.drift_bound;
  if (opt.richardson) {
    const double full = norm(1.0), half = norm(1.0, 0.5);
    c.richardson_change = full > 0.0 ? std::abs(half - full) / full : std::abs(half - full);
  }
  return c;
}

// Smallest integer strictly above t.
inline int integer_above(double t) { return static_cast<int>(std::floor(t + 1e-12)) + 1; }

inline std::string fmt(double v) { return format_number(v); }

}  // namespace detail

/// Minimal integer order for the isotropic form: s > N/p + gamma.
inline int isotropic_threshold_order(std::size_t dims, double p, double gamma) {
  return detail::integer_above(static_cast<double>(dims) / p + gamma);
}

/// Isotropic Sobolev form: all derivatives of order <= s over the annulus.
inline Certificate certify_isotropic(const Symbol& m, const AnisotropyProfile& profile, double p, int s,
                                     const CertifyOptions& opt = {}) {
  profile.validate(m.dims);
  check_symbol_matches(m, profile.exponents());
  const double t = static_cast<double>(m.dims) / p + profile.gamma;
  if (!(static_cast<double>(s) > t))
    throw std::invalid_argument("certify_isotropic: order s = " + std::to_string(s) + " violates s > N/p + gamma = " +
                                detail::fmt(t) + " (holder-gain threshold)");
  Certificate c = detail::run_certificate(m, p, profile.gamma, isotropic_orders(m.dims, s), opt, "isotropic",
                                          "s > N/p + gamma = " + detail::fmt(t));
  c.groups = {{}};
  for (std::size_t i = 0; i < m.dims; ++i) c.groups[0].push_back(i);
  return c;
}

enum class GroupedForm {
  sufficient,    // s_i > N_i / p on every group
  gain,          // s_i > N_i / p + gamma on every group
  special_last,  // |omega'| <= gamma + s off the last group, omega_N in {0,1}; s > (N - N_last)/p
  per_axis,      // omega_i in {0,1,2} off the last group, {0,1} on it
};

inline const char* to_string(GroupedForm f) {
  switch (f) {
    case GroupedForm::sufficient: return "grouped_sufficient";
    case GroupedForm::gain: return "grouped_gain";
    case GroupedForm::special_last: return "special_last";
    case GroupedForm::per_axis: return "per_axis";
  }
  return "?";
}

/// Grouped form. For special_last, s holds a single entry; the fractional
/// cap gamma + s is read as the integer s + 1 (primary) and s (alternate).
/// per_axis ignores s.
inline Certificate certify_grouped(const Symbol& m, const std::vector<std::vector<std::size_t>>& groups,
                                   const std::vector<int>& s, double p, GroupedForm form, double gamma,
                                   const CertifyOptions& opt = {}) {
  if (!(p > 1.0 && p <= 2.0)) throw std::invalid_argument("certify_grouped: p must lie in (1,2]");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("certify_grouped: gamma must lie in (0,1)");
  detail::check_partition(groups, m.dims);
  Certificate c;
  switch (form) {
    case GroupedForm::sufficient:
    case GroupedForm::gain: {
      if (s.size() != groups.size()) throw std::invalid_argument("certify_grouped: one order per group required");
      std::ostringstream th;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        const double t = static_cast<double>(groups[g].size()) / p + (form == GroupedForm::gain ? gamma : 0.0);
        if (!(static_cast<double>(s[g]) > t))
          throw std::invalid_argument("certify_grouped: group " + std::to_string(g) + " order " + std::to_string(s[g]) +
                                      " violates s_i > N_i/p" + (form == GroupedForm::gain ? " + gamma" : "") + " = " +
                                      detail::fmt(t));
        th << (g ? "; " : "") << "s_" << g << " > " << detail::fmt(t);
      }
      c = detail::run_certificate(m, p, gamma, grouped_orders(groups, s, m.dims), opt, to_string(form), th.str());
      break;
    }
    case GroupedForm::special_last: {
      if (s.size() != 1) throw std::invalid_argument("certify_grouped: special_last takes a single order s");
      if (groups.size() < 2) throw std::invalid_argument("certify_grouped: special_last needs at least two groups");
      const double t = static_cast<double>(m.dims - groups.back().size()) / p;
      if (!(static_cast<double>(s[0]) > t))
        throw std::invalid_argument("certify_grouped: order " + std::to_string(s[0]) + " violates s > (N - N_last)/p = " +
                                    detail::fmt(t));
      c = detail::run_certificate(m, p, gamma, special_last_orders(groups, s[0] + 1, m.dims), opt, to_string(form),
                                  "s > (N - N_last)/p = " + detail::fmt(t) + "; cap gamma + s read as s + 1");
      CertifyOptions alt = opt;
      alt.richardson = false;
      const Certificate lower = detail::run_certificate(m, p, gamma, special_last_orders(groups, s[0], m.dims), alt,
                                                        to_string(form), "");
      c.alternate_label = "cap gamma + s read as s = " + std::to_string(s[0]);
      c.alternate_norms = lower.per_lambda_norms;
      c.pass = c.pass && lower.pass;
      break;
    }
    case GroupedForm::per_axis:
      c = detail::run_certificate(m, p, gamma, capped_per_axis_orders(groups, m.dims), opt, to_string(form),
                                  "none (fixed per-axis caps)");
      break;
  }
  c.groups = groups;
  return c;
}

struct HausdorffYoungEntry {
  double p = 2.0;
  double spectral_norm = 0.0;  // ||n~||_{L^p}
  double physical_norm = 0.0;  // ||n||_{L^p'}
  double ratio = 0.0;
  double bound = 0.0;  // (2 pi)^{-N/p}
};

/// Compares ||n||_{p'} with ||n~||_p for the localized kernel n_j on g.
inline std::vector<HausdorffYoungEntry> hausdorff_young_ratios(const Symbol& m, const std::vector<double>& exponents,
                                                               const CutoffPair& c, int j, const Grid& g,
                                                               const std::vector<double>& ps) {
  const SampledField spec = localized_kernel_spectrum(m, exponents, c, j, g);
  const SampledField ker = inverse_transform(spec);
  std::vector<HausdorffYoungEntry> out;
  for (double p : ps) {
    if (!(p > 1.0 && p <= 2.0)) throw std::invalid_argument("hausdorff_young_ratios: p must lie in (1,2]");
    const double q = p / (p - 1.0);
    double sp = 0.0, ph = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) sp += std::pow(std::abs(spec[i]), p);
    for (std::size_t i = 0; i < ker.size(); ++i) ph += std::pow(std::abs(ker[i]), q);
    HausdorffYoungEntry e;
    e.p = p;
    e.spectral_norm = std::pow(sp * g.frequency_cell_volume(), 1.0 / p);
    e.physical_norm = std::pow(ph * g.cell_volume(), 1.0 / q);
    e.ratio = e.physical_norm / e.spectral_norm;
    e.bound = std::pow(2.0 * M_PI, -static_cast<double>(g.dims()) / p);
    out.push_back(e);
  }
  return out;
}

}  // namespace holderlab
