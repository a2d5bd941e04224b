#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace holderlab {

/// Per-axis scaling exponents. Axes in the smooth group carry alpha in (0,1],
/// axes in the gained group carry beta > 0; gamma is the base Hoelder order.
struct AnisotropyProfile {
  double gamma = 0.5;
  std::vector<std::pair<std::size_t, double>> smooth_axes;
  std::vector<std::pair<std::size_t, double>> gained_axes;

  std::size_t dims() const { return smooth_axes.size() + gained_axes.size(); }

  /// Throws unless every axis in [0, dims) appears exactly once.
  void validate(std::optional<std::size_t> expected_dims = std::nullopt) const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("profile: gamma must lie in (0,1)");
    const std::size_t n = dims();
    if (n == 0) throw std::invalid_argument("profile: no axes");
    if (expected_dims && *expected_dims != n)
      throw std::invalid_argument("profile: covers " + std::to_string(n) + " axes but the grid has " +
                                  std::to_string(*expected_dims));
    std::vector<int> seen(n, 0);
    for (const auto& [axis, a] : smooth_axes) {
      if (axis >= n) throw std::invalid_argument("profile: axis " + std::to_string(axis) + " out of range");
      if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("profile: alpha must lie in (0,1]");
      ++seen[axis];
    }
    for (const auto& [axis, b] : gained_axes) {
      if (axis >= n) throw std::invalid_argument("profile: axis " + std::to_string(axis) + " out of range");
      if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("profile: beta must be positive");
      ++seen[axis];
    }
    for (std::size_t i = 0; i < n; ++i)
      if (seen[i] != 1) throw std::invalid_argument("profile: axis " + std::to_string(i) + " must appear exactly once");
  }

  double exponent(std::size_t axis) const {
    for (const auto& [ax, a] : smooth_axes)
      if (ax == axis) return a;
    for (const auto& [ax, b] : gained_axes)
      if (ax == axis) return b;
    throw std::invalid_argument("profile: axis " + std::to_string(axis) + " not listed");
  }

  bool is_gained(std::size_t axis) const {
    for (const auto& [ax, b] : gained_axes)
      if (ax == axis) return true;
    return false;
  }

  /// Scaling weight 1/exponent used by A_lambda.
  double weight(std::size_t axis) const { return 1.0 / exponent(axis); }

  std::vector<double> exponents() const {
    std::vector<double> e(dims());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = exponent(i);
    return e;
  }

  std::vector<double> weights() const {
    std::vector<double> w(dims());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = weight(i);
    return w;
  }

  /// Hoelder exponent gamma * alpha_i or gamma * beta_k on an axis.
  double target_exponent(std::size_t axis) const { return gamma * exponent(axis); }

  /// All axes smooth with the given alphas.
  static AnisotropyProfile smooth(double gamma, const std::vector<double>& alphas) {
    AnisotropyProfile p;
    p.gamma = gamma;
    for (std::size_t i = 0; i < alphas.size(); ++i) p.smooth_axes.emplace_back(i, alphas[i]);
    p.validate();
    return p;
  }

  /// Builds a profile from per-axis exponents; axes flagged in `gained` go to
  /// the gained group.
  static AnisotropyProfile from_exponents(double gamma, const std::vector<double>& exps,
                                          const std::vector<bool>& gained) {
    if (exps.size() != gained.size()) throw std::invalid_argument("profile: exponent and group lists differ in length");
    AnisotropyProfile p;
    p.gamma = gamma;
    for (std::size_t i = 0; i < exps.size(); ++i) {
      if (gained[i])
        p.gained_axes.emplace_back(i, exps[i]);
      else
        p.smooth_axes.emplace_back(i, exps[i]);
    }
    p.validate();
    return p;
  }
};

}  // namespace holderlab
