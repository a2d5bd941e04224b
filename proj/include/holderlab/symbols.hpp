#pragma once

// Fourier multiplier symbols with scaling metadata, plus the concrete symbol
// library used by the model problems.
//
// Parabolic symbols put the time frequency xi_0 on axis 0, followed by the
// spatial frequencies.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"
#include "report.hpp"

namespace holderlab {

struct Symbol {
  using Evaluator = std::function<complex(std::span<const double>)>;

  std::string name;
  std::map<std::string, double> params;
  std::size_t dims = 0;
  Evaluator evaluator;
  std::vector<double> weights;               // A_lambda xi_i = lambda^{w_i} xi_i
  std::vector<std::size_t> vanishing_axes;   // m = 0 whenever these coordinates are all 0
  std::string singular_set = "none";
  std::optional<complex> value_at_origin;    // defined limit at xi = 0, if any
  std::optional<double> sup_bound;           // declared bound on |m|

  std::string label() const {
    std::ostringstream os;
    os << name;
    if (!params.empty()) {
      os << '{';
      bool first = true;
      for (const auto& [k, v] : params) {
        os << (first ? "" : ",") << k << '=' << format_number(v);
        first = false;
      }
      os << '}';
    }
    return os.str();
  }

  json describe() const {
    json j;
    j["name"] = name;
    j["params"] = json::object();
    for (const auto& [k, v] : params) j["params"][k] = v;
    j["dims"] = dims;
    j["weights"] = weights;
    j["vanishing_axes"] = vanishing_axes;
    j["singular_set"] = singular_set;
    j["sup_bound"] = sup_bound ? json(*sup_bound) : json(nullptr);
    return j;
  }
};

namespace detail {

inline std::string format_point(std::span<const double> xi) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < xi.size(); ++i) os << (i ? ", " : "") << xi[i];
  os << ')';
  return os.str();
}

inline bool is_origin(std::span<const double> xi) {
  return std::all_of(xi.begin(), xi.end(), [](double v) { return v == 0.0; });
}

inline double norm2(std::span<const double> xi, std::size_t from = 0) {
  double s = 0.0;
  for (std::size_t i = from; i < xi.size(); ++i) s += xi[i] * xi[i];
  return s;
}

}  // namespace detail

/// Evaluates m at xi. At the origin the declared limit is returned; a
/// symbol without one is undefined there.
inline complex eval(const Symbol& m, std::span<const double> xi) {
  if (xi.size() != m.dims)
    throw std::invalid_argument("eval: " + m.name + " expects " + std::to_string(m.dims) + " frequency components");
  if (detail::is_origin(xi)) {
    if (m.value_at_origin) return *m.value_at_origin;
    throw std::domain_error("eval: " + m.name + " is undefined at the origin");
  }
  const complex v = m.evaluator(xi);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw std::domain_error("eval: " + m.name + " is not finite at xi = " + detail::format_point(xi));
  return v;
}

inline complex eval(const Symbol& m, std::initializer_list<double> xi) {
  std::vector<double> v(xi);
  return eval(m, std::span<const double>(v));
}

/// xi -> m(A_lambda xi) with (A_lambda xi)_i = lambda^{w_i} xi_i.
inline Symbol scale(const Symbol& m, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("scale: lambda must be positive");
  Symbol s = m;
  std::vector<double> factor(m.dims);
  for (std::size_t i = 0; i < m.dims; ++i) factor[i] = std::pow(lambda, m.weights[i]);
  auto inner = m.evaluator;
  s.evaluator = [inner, factor](std::span<const double> xi) {
    double buf[max_dims];
    for (std::size_t i = 0; i < xi.size(); ++i) buf[i] = factor[i] * xi[i];
    return inner(std::span<const double>(buf, xi.size()));
  };
  return s;
}

// ---- library -------------------------------------------------------------

inline Symbol constant_symbol(complex c, std::size_t dims = 1) {
  Symbol s;
  s.name = "constant";
  s.params = {{"c", c.real()}, {"dims", static_cast<double>(dims)}};
  s.dims = dims;
  s.evaluator = [c](std::span<const double>) { return c; };
  s.weights.assign(dims, 1.0);
  s.value_at_origin = c;
  s.sup_bound = std::abs(c);
  return s;
}

/// xi_k xi_l / |xi|^2 (axes are 0-based).
inline Symbol riesz_second_order(std::size_t dims, std::size_t k, std::size_t l) {
  if (k >= dims || l >= dims) throw std::invalid_argument("riesz_second_order: axis out of range");
  Symbol s;
  s.name = "riesz";
  s.params = {{"dims", static_cast<double>(dims)}, {"k", static_cast<double>(k + 1)}, {"l", static_cast<double>(l + 1)}};
  s.dims = dims;
  s.evaluator = [k, l](std::span<const double> xi) { return complex(xi[k] * xi[l] / detail::norm2(xi)); };
  s.weights.assign(dims, 1.0);
  s.vanishing_axes = {l};
  s.singular_set = "origin only";
  s.value_at_origin = 0.0;
  s.sup_bound = 1.0;
  return s;
}

/// i xi_0 / (i xi_0 + a |xi|^2) over (xi_0, xi_1..xi_d).
inline Symbol heat_time_derivative(std::size_t d, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("heat_time_derivative: a must be positive");
  Symbol s;
  s.name = "heat_time_derivative";
  s.params = {{"a", a}, {"d", static_cast<double>(d)}};
  s.dims = d + 1;
  s.evaluator = [a](std::span<const double> xi) {
    const complex num(0.0, xi[0]);
    return num / (num + a * detail::norm2(xi, 1));
  };
  s.weights.assign(d + 1, 1.0);
  s.weights[0] = 2.0;
  s.vanishing_axes = {0};
  s.singular_set = "origin only";
  s.value_at_origin = 0.0;
  s.sup_bound = 1.0;
  return s;
}

/// 1 / (i xi_0 + a |xi|^2).
inline Symbol heat_resolvent(std::size_t d, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("heat_resolvent: a must be positive");
  Symbol s;
  s.name = "heat_resolvent";
  s.params = {{"a", a}, {"d", static_cast<double>(d)}};
  s.dims = d + 1;
  s.evaluator = [a](std::span<const double> xi) { return 1.0 / complex(a * detail::norm2(xi, 1), xi[0]); };
  s.weights.assign(d + 1, 1.0);
  s.weights[0] = 2.0;
  s.singular_set = "origin only";
  return s;
}

/// Principal square roots used by the half-space boundary symbol:
/// s = sqrt(-i xi_0), q1 = sqrt(|xi|^2 + s), q2 = sqrt(|xi|^2 - s).
struct ChRoots {
  complex s, q1, q2;
};

inline ChRoots ch_roots(double xi2, double xi0) {
  const complex s = std::sqrt(complex(0.0, -xi0));
  return {s, std::sqrt(xi2 + s), std::sqrt(xi2 - s)};
}

/// i xi_0 + a * 2 q1 q2 / (q1 + q2).
inline complex ch_denominator_value(double xi2, double xi0, double a) {
  const auto r = ch_roots(xi2, xi0);
  return complex(0.0, xi0) + a * 2.0 * r.q1 * r.q2 / (r.q1 + r.q2);
}

inline Symbol ch_boundary_denominator(std::size_t d, double a = 1.0) {
  if (!(a > 0.0)) throw std::invalid_argument("ch_boundary_denominator: a must be positive");
  Symbol s;
  s.name = "ch_boundary_denominator";
  s.params = {{"a", a}, {"d", static_cast<double>(d)}};
  s.dims = d + 1;
  s.evaluator = [a](std::span<const double> xi) { return ch_denominator_value(detail::norm2(xi, 1), xi[0], a); };
  s.weights.assign(d + 1, 1.0);
  s.weights[0] = 4.0;
  s.singular_set = "origin only";
  s.value_at_origin = 0.0;
  return s;
}

/// 1 / M~, the boundary trace symbol of the flux-dynamic problem.
inline Symbol ch_boundary_inverse(std::size_t d, double a = 1.0) {
  Symbol s = ch_boundary_denominator(d, a);
  s.name = "ch_boundary_inverse";
  s.evaluator = [a](std::span<const double> xi) { return 1.0 / ch_denominator_value(detail::norm2(xi, 1), xi[0], a); };
  s.value_at_origin.reset();
  return s;
}

/// i xi_l / (i xi_0 + a |xi|); l = 0 selects the time frequency.
inline Symbol ch_reduction_symbol(std::size_t d, std::size_t l, double a = 1.0) {
  if (l > d) throw std::invalid_argument("ch_reduction_symbol: axis out of range");
  if (!(a > 0.0)) throw std::invalid_argument("ch_reduction_symbol: a must be positive");
  Symbol s;
  s.name = "ch_reduction";
  s.params = {{"a", a}, {"d", static_cast<double>(d)}, {"l", static_cast<double>(l)}};
  s.dims = d + 1;
  s.evaluator = [l, a](std::span<const double> xi) {
    return complex(0.0, xi[l]) / complex(a * std::sqrt(detail::norm2(xi, 1)), xi[0]);
  };
  s.weights.assign(d + 1, 1.0);
  s.vanishing_axes = {l};
  s.singular_set = "origin only";
  s.value_at_origin = 0.0;
  s.sup_bound = std::max(1.0, 1.0 / a);
  return s;
}

/// log rho(xi) with rho = sum |xi_i|^{1/w_i}; unbounded under scaling.
inline Symbol log_distance(std::vector<double> weights) {
  Symbol s;
  s.name = "log_distance";
  s.params = {{"dims", static_cast<double>(weights.size())}};
  s.dims = weights.size();
  s.weights = weights;
  s.evaluator = [weights](std::span<const double> xi) {
    double r = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) r += std::pow(std::abs(xi[i]), 1.0 / weights[i]);
    return complex(std::log(r));
  };
  s.singular_set = "origin only";
  return s;
}

inline Symbol product(const Symbol& m1, const Symbol& m2) {
  if (m1.dims != m2.dims) throw std::invalid_argument("product: symbols have different dimensions");
  if (m1.weights != m2.weights) throw std::invalid_argument("product: symbols have different scaling weights");
  Symbol s;
  s.name = "product(" + m1.label() + "," + m2.label() + ")";
  s.dims = m1.dims;
  s.weights = m1.weights;
  auto e1 = m1.evaluator, e2 = m2.evaluator;
  s.evaluator = [e1, e2](std::span<const double> xi) { return e1(xi) * e2(xi); };
  s.vanishing_axes = m1.vanishing_axes;
  for (auto a : m2.vanishing_axes)
    if (std::find(s.vanishing_axes.begin(), s.vanishing_axes.end(), a) == s.vanishing_axes.end())
      s.vanishing_axes.push_back(a);
  s.singular_set = m1.singular_set == "none" ? m2.singular_set : m1.singular_set;
  if (m1.value_at_origin && m2.value_at_origin) s.value_at_origin = *m1.value_at_origin * *m2.value_at_origin;
  if (m1.sup_bound && m2.sup_bound) s.sup_bound = *m1.sup_bound * *m2.sup_bound;
  return s;
}

// ---- structural checks ---------------------------------------------------

struct SliceCheck {
  bool pass = false;
  double max_residual = 0.0;
};

/// Zeroes the coordinates in `axes`, draws the others at random (random sign,
/// log-uniform magnitude in [1/16, 16]) and checks max |m| <= tol.
inline SliceCheck check_vanishing_slice(const Symbol& m, const std::vector<std::size_t>& axes, std::size_t samples,
                                        double tol, std::uint64_t seed = 1) {
  if (samples < 100) throw std::invalid_argument("check_vanishing_slice: need at least 100 samples");
  for (auto a : axes)
    if (a >= m.dims) throw std::invalid_argument("check_vanishing_slice: axis out of range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(std::log(1.0 / 16), std::log(16.0));
  std::bernoulli_distribution sign;
  std::vector<double> xi(m.dims);
  SliceCheck r;
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < m.dims; ++i) xi[i] = (sign(rng) ? 1.0 : -1.0) * std::exp(mag(rng));
    for (auto a : axes) xi[a] = 0.0;
    r.max_residual = std::max(r.max_residual, std::abs(eval(m, std::span<const double>(xi))));
  }
  r.pass = r.max_residual <= tol;
  return r;
}

/// max over lambdas and random xi with Euclidean norm in [1/2, 2] of
/// |m(A_lambda xi) - m(xi)|.
inline double check_homogeneity(const Symbol& m, const std::vector<double>& lambdas, std::size_t samples,
                                std::uint64_t seed = 1) {
  for (double l : lambdas)
    if (!(l > 0.0)) throw std::invalid_argument("check_homogeneity: lambdas must be positive");
  std::vector<Symbol> scaled;
  for (double l : lambdas) scaled.push_back(scale(m, l));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> rad(0.5, 2.0);
  std::vector<double> xi(m.dims);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    double n2 = 0.0;
    for (auto& v : xi) {
      v = nd(rng);
      n2 += v * v;
    }
    const double r = rad(rng) / std::sqrt(n2);
    for (auto& v : xi) v *= r;
    const complex base = eval(m, std::span<const double>(xi));
    for (const auto& sm : scaled) worst = std::max(worst, std::abs(eval(sm, std::span<const double>(xi)) - base));
  }
  return worst;
}

// ---- registry --------------------------------------------------------------

struct SymbolSpec {
  std::string name;
  std::map<std::string, double> params;
};

inline const std::vector<std::string>& symbol_names() {
  static const std::vector<std::string> names = {"constant",         "riesz",        "heat_time_derivative",
                                                 "heat_resolvent",   "ch_boundary_denominator",
                                                 "ch_boundary_inverse", "ch_reduction", "log_distance"};
  return names;
}

/// Parses "name" or "name{key=value,...}".
inline SymbolSpec parse_symbol_spec(const std::string& text) {
  SymbolSpec spec;
  const auto brace = text.find('{');
  spec.name = text.substr(0, brace);
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  spec.name = trim(spec.name);
  if (spec.name.empty()) throw std::invalid_argument("symbol spec '" + text + "' has no name");
  if (brace == std::string::npos) return spec;
  if (text.back() != '}') throw std::invalid_argument("symbol spec '" + text + "' is missing a closing brace");
  std::stringstream body(text.substr(brace + 1, text.size() - brace - 2));
  std::string item;
  while (std::getline(body, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("symbol parameter '" + item + "' is not key=value");
    const std::string key = trim(item.substr(0, eq));
    const std::string val = trim(item.substr(eq + 1));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(val, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != val.size() || val.empty())
      throw std::invalid_argument("symbol parameter '" + key + "' has non-numeric value '" + val + "'");
    spec.params[key] = v;
  }
  return spec;
}

/// Builds a library symbol. riesz axes k, l are 1-based; ch_reduction l = 0
/// means the time frequency.
inline Symbol make_symbol(const SymbolSpec& spec) {
  auto get = [&](const std::string& key, double def) {
    auto it = spec.params.find(key);
    return it == spec.params.end() ? def : it->second;
  };
  auto get_index = [&](const std::string& key, double def) {
    const double v = get(key, def);
    if (v < 0 || v != std::floor(v)) throw std::invalid_argument("symbol parameter '" + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(v);
  };
  const auto& n = spec.name;
  if (n == "constant") return constant_symbol(get("c", 1.0), get_index("dims", 1));
  if (n == "riesz") {
    const auto k = get_index("k", 1), l = get_index("l", 1);
    if (k == 0 || l == 0) throw std::invalid_argument("riesz axes are 1-based");
    return riesz_second_order(get_index("dims", 3), k - 1, l - 1);
  }
  if (n == "heat_time_derivative") return heat_time_derivative(get_index("d", 1), get("a", 1.0));
  if (n == "heat_resolvent") return heat_resolvent(get_index("d", 1), get("a", 1.0));
  if (n == "ch_boundary_denominator") return ch_boundary_denominator(get_index("d", 1), get("a", 1.0));
  if (n == "ch_boundary_inverse") return ch_boundary_inverse(get_index("d", 1), get("a", 1.0));
  if (n == "ch_reduction") return ch_reduction_symbol(get_index("d", 1), get_index("l", 1), get("a", 1.0));
  if (n == "log_distance") return log_distance(std::vector<double>(get_index("dims", 2), get("w", 1.0)));
  std::string valid;
  for (const auto& s : symbol_names()) valid += (valid.empty() ? "" : ", ") + s;
  throw std::invalid_argument("unknown symbol '" + n + "'; valid symbols: " + valid);
}

inline Symbol make_symbol(const std::string& text) { return make_symbol(parse_symbol_spec(text)); }

}  // namespace holderlab
