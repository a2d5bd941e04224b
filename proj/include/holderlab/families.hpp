#pragma once

// Seeded test-field families: power singularities |x_i - c|^e under a smooth
// compact cutoff, with optional jump factors on other axes, and band-limited
// random fields.

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include "field.hpp"
#include "profile.hpp"

namespace holderlab {

/// prod_i exp(1 - 1/(1 - (x_i/r_i)^2)) inside the box |x_i| < r_i, else 0.
inline double smooth_bump(std::span<const double> x, std::span<const double> radius) {
  double v = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = x[i] / radius[i];
    if (std::abs(t) >= 1.0) return 0.0;
    v *= std::exp(1.0 - 1.0 / (1.0 - t * t));
  }
  return v;
}

/// |x_axis - center|^exponent times a bump of relative radius 0.8.
inline SampledField power_bump_field(const Grid& g, std::size_t axis, double exponent, double center = 0.0) {
  if (axis >= g.dims()) throw std::invalid_argument("power_bump_field: axis out of range");
  std::vector<double> r(g.dims());
  for (std::size_t a = 0; a < g.dims(); ++a) r[a] = 0.8 * g.extent(a);
  return sample(
      [&](std::span<const double> x) {
        return std::pow(std::abs(x[axis] - center), exponent) * smooth_bump(x, r);
      },
      g);
}

struct PartialHolderFamily {
  std::size_t terms = 3;
  double jump_low = -0.5;  // value of the jump factor below its threshold
  bool jumps = true;       // rough factors on the gained axes
  double support = 0.8;    // cutoff radius relative to the box
  double spread = 0.35;    // singularity centres within this fraction of the box
};

/// Sum of terms a_k prod_{smooth i} |x_i - c_ki|^{gamma alpha_i} times jump
/// factors on the gained axes, under a smooth cutoff. Hoelder of the target
/// order on the smooth axes only. Singularities sit on nodes; jumps sit
/// between nodes.
inline SampledField partial_holder_field(const Grid& g, const AnisotropyProfile& profile, unsigned long long seed,
                                         const PartialHolderFamily& fam = {}) {
  profile.validate(g.dims());
  std::mt19937_64 rng(seed);
  if (!(fam.spread >= 0.0 && fam.spread < fam.support && fam.support <= 1.0))
    throw std::invalid_argument("partial_holder_field: need 0 <= spread < support <= 1");
  std::uniform_real_distribution<double> amp(0.5, 1.5), pos(-fam.spread, fam.spread);
  std::bernoulli_distribution sign;
  const std::size_t n = g.dims();
  struct Term {
    double a;
    std::vector<double> c;
  };
  std::vector<Term> terms;
  auto snap = [&](std::size_t axis, double rel, double shift) {
    const double h = g.spacing(axis);
    return (std::round(rel * g.extent(axis) / h) + shift) * h;
  };
  for (std::size_t k = 0; k < fam.terms; ++k) {
    Term t{(sign(rng) ? 1.0 : -1.0) * amp(rng), std::vector<double>(n)};
    for (std::size_t a = 0; a < n; ++a) t.c[a] = snap(a, pos(rng), profile.is_gained(a) ? 0.5 : 0.0);
    terms.push_back(std::move(t));
  }
  std::vector<double> r(n), e(n);
  for (std::size_t a = 0; a < n; ++a) {
    r[a] = fam.support * g.extent(a);
    e[a] = profile.target_exponent(a);
  }
  return sample(
      [&](std::span<const double> x) {
        const double b = smooth_bump(x, r);
        if (b == 0.0) return 0.0;
        double s = 0.0;
        for (const auto& t : terms) {
          double v = t.a;
          for (std::size_t a = 0; a < n; ++a) {
            if (profile.is_gained(a))
              v *= fam.jumps ? (x[a] > t.c[a] ? 1.0 : fam.jump_low) : 1.0;
            else
              v *= std::pow(std::abs(x[a] - t.c[a]), e[a]);
          }
          s += v;
        }
        return s * b;
      },
      g);
}

/// Real field with independent normal coefficients on |m_i| <= max_mode.
inline SampledField band_limited_field(const Grid& g, std::size_t max_mode, unsigned long long seed) {
  for (std::size_t a = 0; a < g.dims(); ++a)
    if (max_mode >= g.points(a) / 2) throw std::invalid_argument("band_limited_field: max_mode must be below n/2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<complex> spec(g.size());
  std::vector<std::size_t> idx(g.dims());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.unravel(i, idx);
    bool inside = true;
    for (std::size_t a = 0; a < g.dims(); ++a)
      inside = inside && static_cast<std::size_t>(std::abs(g.frequency_index(a, idx[a]))) <= max_mode;
    if (!inside) continue;
    const double re = nd(rng), im = nd(rng);
    spec[i] = complex(re, im) * g.box_volume();
  }
  return inverse_transform(SampledField(g, std::move(spec), Side::frequency)).real_part();
}

}  // namespace holderlab
