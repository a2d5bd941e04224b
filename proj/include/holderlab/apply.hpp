#pragma once

// The multiplier operator v = F^{-1}(m F u) on a periodic grid, and the gain
// experiment comparing partial input seminorms with all-axis output
// seminorms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"
#include "holder.hpp"
#include "parallel.hpp"
#include "profile.hpp"
#include "report.hpp"
#include "symbols.hpp"

namespace holderlab {

enum class DcPolicy { declared_value, vanishing_slice, ring_average };

inline const char* to_string(DcPolicy p) {
  switch (p) {
    case DcPolicy::declared_value: return "declared_value";
    case DcPolicy::vanishing_slice: return "vanishing_slice_zero";
    case DcPolicy::ring_average: return "first_ring_average";
  }
  return "?";
}

/// What the xi = 0 bin was multiplied by, and why.
struct DcChoice {
  DcPolicy policy = DcPolicy::declared_value;
  complex value = 0.0;

  json to_json() const {
    json j;
    j["policy"] = to_string(policy);
    j["re"] = value.real();
    j["im"] = value.imag();
    return j;
  }
};

/// DC multiplier: the declared limit (zero when the vanishing slice forces
/// it), otherwise the mean of m over the 3^N - 1 bins around the origin.
inline DcChoice dc_choice(const Symbol& m, const Grid& g) {
  if (m.value_at_origin) {
    const bool slice = !m.vanishing_axes.empty() && *m.value_at_origin == complex(0.0);
    return {slice ? DcPolicy::vanishing_slice : DcPolicy::declared_value, *m.value_at_origin};
  }
  const std::size_t n = g.dims();
  std::vector<int> off(n, -1);
  std::vector<double> xi(n);
  complex sum = 0.0;
  std::size_t count = 0;
  for (;;) {
    bool origin = true;
    for (std::size_t a = 0; a < n; ++a) {
      xi[a] = off[a] * g.frequency_spacing(a);
      origin = origin && off[a] == 0;
    }
    if (!origin) {
      sum += eval(m, std::span<const double>(xi));
      ++count;
    }
    std::size_t a = 0;
    while (a < n && ++off[a] > 1) off[a++] = -1;
    if (a == n) break;
  }
  return {DcPolicy::ring_average, sum / static_cast<double>(count)};
}

/// m evaluated on every frequency bin (FFT order), DC from dc_choice.
inline std::vector<complex> multiplier_table(const Symbol& m, const Grid& g, DcChoice* dc_out = nullptr) {
  if (m.dims != g.dims())
    throw std::invalid_argument("apply_multiplier: symbol " + m.label() + " has " + std::to_string(m.dims) +
                                " axes but the grid has " + std::to_string(g.dims()));
  const DcChoice dc = dc_choice(m, g);
  if (dc_out) *dc_out = dc;
  std::vector<complex> table(g.size());
  parallel_for(0, g.size(), [&](std::size_t i) {
    if (i == 0) {
      table[i] = dc.value;
      return;
    }
    double xi[max_dims];
    g.frequency_coordinates(i, std::span<double>(xi, g.dims()));
    table[i] = eval(m, std::span<const double>(xi, g.dims()));
  });
  return table;
}

/// v = F^{-1}(m F u).
inline SampledField apply_multiplier(const Symbol& m, const SampledField& u, DcChoice* dc_out = nullptr) {
  if (u.side() != Side::physical) throw std::invalid_argument("apply_multiplier: field must be on the physical side");
  const auto table = multiplier_table(m, u.grid(), dc_out);
  return apply_spectral(u, [&](std::size_t i, std::span<const double>) { return table[i]; });
}

struct GainAxis {
  std::size_t axis = 0;
  std::string group;  // "smooth" or "gained"
  double target_exponent = 0.0;
  int k = 1;
  std::optional<double> input_seminorm;  // smooth axes only
  std::optional<double> input_fit;       // every axis, for the improvement
  double output_seminorm = 0.0;
  std::optional<double> output_fit;
  double gain_ratio = 0.0;  // output seminorm / sum of input seminorms
  bool meets_target = false;
};

struct GainOptions {
  double fit_slack = 0.05;
  double h_min_cells = 4.0;    // ladder starts at this many spacings...
  double h_max_fraction = 0.125;  // ...and ends at this fraction of the half-width
  bool take_real_part = true;  // real input -> report Re v
};

struct GainReport {
  json symbol;
  json profile;
  DcChoice dc;
  std::vector<GainAxis> axes;
  double input_seminorm_sum = 0.0;
  double output_imag_max = 0.0;
  double fit_slack = 0.05;
  std::vector<std::pair<double, double>> ladders;  // per axis [h_min, h_max]

  bool all_meet_target() const {
    return std::all_of(axes.begin(), axes.end(), [](const GainAxis& a) { return a.meets_target; });
  }

  double max_gain_ratio() const {
    double r = 0.0;
    for (const auto& a : axes) r = std::max(r, a.gain_ratio);
    return r;
  }

  json to_json() const {
    json j;
    j["symbol"] = symbol;
    j["profile"] = profile;
    j["dc"] = dc.to_json();
    j["input_seminorm_sum"] = input_seminorm_sum;
    j["output_imag_max"] = output_imag_max;
    j["fit_slack"] = fit_slack;
    j["all_meet_target"] = all_meet_target();
    j["axes"] = json::array();
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const auto& a = axes[i];
      json e;
      e["axis"] = a.axis;
      e["group"] = a.group;
      e["target_exponent"] = a.target_exponent;
      e["k"] = a.k;
      e["input_seminorm"] = a.input_seminorm ? json(*a.input_seminorm) : json(nullptr);
      e["input_fit"] = a.input_fit ? json(*a.input_fit) : json(nullptr);
      e["output_seminorm"] = a.output_seminorm;
      e["output_fit"] = a.output_fit ? json(*a.output_fit) : json(nullptr);
      e["gain_ratio"] = a.gain_ratio;
      e["meets_target"] = a.meets_target;
      e["ladder"] = {ladders[i].first, ladders[i].second};
      j["axes"].push_back(e);
    }
    return j;
  }

  std::string to_csv() const {
    CsvTable t({"axis", "group", "target_exponent", "k", "input_seminorm", "input_fit", "output_seminorm", "output_fit",
                "gain_ratio", "meets_target", "dc_policy"});
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("flat"); };
    for (const auto& a : axes)
      t.add_row({std::to_string(a.axis), a.group, format_number(a.target_exponent), std::to_string(a.k),
                 a.input_seminorm ? format_number(*a.input_seminorm) : std::string(""), opt(a.input_fit),
                 format_number(a.output_seminorm), opt(a.output_fit), format_number(a.gain_ratio),
                 a.meets_target ? "true" : "false", to_string(dc.policy)});
    return t.str();
  }
};

inline json profile_json(const AnisotropyProfile& p) {
  json j;
  j["gamma"] = p.gamma;
  j["exponents"] = p.exponents();
  std::vector<std::size_t> gained;
  for (const auto& [a, b] : p.gained_axes) gained.push_back(a);
  std::sort(gained.begin(), gained.end());
  j["gained_axes"] = gained;
  return j;
}

/// Fit ladder [h_min, h_max] on one axis: h_min cells up to a fraction of
/// the extent, with h_min lowered (not below one spacing) until 4 rungs fit.
/// Coarse grids then raise h_max toward extent/2k.
inline std::pair<double, double> gain_ladder(const Grid& g, std::size_t axis, int k, const GainOptions& opt) {
  const double dx = g.spacing(axis);
  const double cap = g.extent(axis) / (2.0 * k);
  double h_max = std::min(opt.h_max_fraction * g.extent(axis), cap);
  double h_min = opt.h_min_cells * dx;
  while (h_min > dx * (1.0 + 1e-12) && step_ladder(g, axis, h_min, h_max).size() < 4) h_min = std::max(dx, h_min / 2);
  while (h_max < cap * (1.0 - 1e-12) && step_ladder(g, axis, h_min, h_max).size() < 4) h_max = std::min(cap, 2 * h_max);
  return {h_min, h_max};
}

/// Applies m and compares input seminorms on the smooth group with output
/// seminorms on every axis at the profile's target exponents.
inline GainReport gain_experiment(const Symbol& m, const AnisotropyProfile& profile, const SampledField& u,
                                  const GainOptions& opt = {}) {
  const Grid& g = u.grid();
  profile.validate(g.dims());
  if (m.dims != g.dims()) throw std::invalid_argument("gain_experiment: symbol and grid dimensions differ");
  GainReport r;
  r.symbol = m.describe();
  r.profile = profile_json(profile);
  r.fit_slack = opt.fit_slack;
  SampledField v = apply_multiplier(m, u, &r.dc);
  for (std::size_t i = 0; i < v.size(); ++i) r.output_imag_max = std::max(r.output_imag_max, std::abs(v[i].imag()));
  if (opt.take_real_part) v = v.real_part();

  for (std::size_t a = 0; a < g.dims(); ++a) {
    GainAxis e;
    e.axis = a;
    e.group = profile.is_gained(a) ? "gained" : "smooth";
    e.target_exponent = profile.target_exponent(a);
    e.k = static_cast<int>(std::floor(e.target_exponent)) + 1;
    r.ladders.push_back(gain_ladder(g, a, e.k, opt));
    const auto [h0, h1] = r.ladders.back();
    e.input_fit = fit_exponent(u, a, e.k, h0, h1);
    if (!profile.is_gained(a)) {
      e.input_seminorm = partial_seminorm(u, a, e.target_exponent, e.k);
      r.input_seminorm_sum += *e.input_seminorm;
    }
    e.output_seminorm = partial_seminorm(v, a, e.target_exponent, e.k);
    e.output_fit = fit_exponent(v, a, e.k, h0, h1);
    // A flat output trivially satisfies any Hoelder bound.
    e.meets_target = !e.output_fit || *e.output_fit >= e.target_exponent - opt.fit_slack;
    r.axes.push_back(e);
  }
  for (auto& e : r.axes) e.gain_ratio = r.input_seminorm_sum > 0.0 ? e.output_seminorm / r.input_seminorm_sum : 0.0;
  return r;
}

struct EnsembleSummary {
  std::vector<unsigned long long> seeds;
  std::vector<double> ratios;  // max gain ratio per member
  double median = 0.0;
  double max = 0.0;
  double bound_factor = 50.0;
  bool stable = false;
  std::vector<GainReport> members;

  json to_json() const {
    json j;
    j["seeds"] = seeds;
    j["ratios"] = ratios;
    j["median"] = median;
    j["max"] = max;
    j["bound_factor"] = bound_factor;
    j["stable"] = stable;
    return j;
  }

  std::string to_csv() const {
    CsvTable t({"seed", "max_gain_ratio"});
    for (std::size_t i = 0; i < seeds.size(); ++i) t.add_row({std::to_string(seeds[i]), format_number(ratios[i])});
    return t.str();
  }
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Gain experiment over members built by make_field(seed) with seed =
/// base_seed + i; stable when max <= bound_factor * median.
inline EnsembleSummary gain_ensemble(const Symbol& m, const AnisotropyProfile& profile,
                                     const std::function<SampledField(unsigned long long)>& make_field, std::size_t size,
                                     unsigned long long base_seed, const GainOptions& opt = {},
                                     double bound_factor = 50.0) {
  if (size == 0) throw std::invalid_argument("gain_ensemble: empty ensemble");
  EnsembleSummary s;
  s.bound_factor = bound_factor;
  s.members.resize(size);
  parallel_for(0, size, [&](std::size_t i) { s.members[i] = gain_experiment(m, profile, make_field(base_seed + i), opt); });
  for (std::size_t i = 0; i < size; ++i) {
    s.seeds.push_back(base_seed + i);
    s.ratios.push_back(s.members[i].max_gain_ratio());
  }
  s.median = median_of(s.ratios);
  s.max = *std::max_element(s.ratios.begin(), s.ratios.end());
  s.stable = std::isfinite(s.max) && s.max <= bound_factor * s.median;
  return s;
}

}  // namespace holderlab
