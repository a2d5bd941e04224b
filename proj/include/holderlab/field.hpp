#pragma once

// Uniform periodic grids over boxes [-L_i, L_i) and complex sampled fields
// with a continuous-Fourier-transform scaled DFT.
//
// Transform convention:
//   forward   u~(xi) = int e^{-i x xi} u(x) dx       (quadrature on the nodes)
//   inverse   u(x)   = (2 pi)^{-N} int e^{i x xi} u~(xi) dxi
// Physical nodes are x_k = -L + k h with h = 2L/n. Frequency nodes are
// xi_m = pi m / L for m in [-n/2, n/2), stored in FFT order (index j holds
// m = j for j < n/2 and m = j - n otherwise).

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fftw3.h>

namespace holderlab {

using complex = std::complex<double>;

inline constexpr std::size_t max_dims = 8;

enum class Side : std::uint8_t { physical = 0, frequency = 1 };

inline const char* to_string(Side s) { return s == Side::physical ? "physical" : "frequency"; }

class Grid {
 public:
  Grid(std::vector<double> extent, std::vector<std::size_t> points)
      : extent_(std::move(extent)), points_(std::move(points)) {
    if (extent_.empty() || extent_.size() != points_.size())
      throw std::invalid_argument("grid: extent and points must be non-empty and of equal length");
    if (extent_.size() > max_dims) throw std::invalid_argument("grid: too many axes");
    size_ = 1;
    for (std::size_t a = 0; a < extent_.size(); ++a) {
      if (!(extent_[a] > 0.0) || !std::isfinite(extent_[a]))
        throw std::invalid_argument("grid: extent must be positive and finite on axis " + std::to_string(a));
      if (points_[a] < 4 || points_[a] % 2 != 0)
        throw std::invalid_argument("grid: points per axis must be even and >= 4 on axis " + std::to_string(a));
      size_ *= points_[a];
    }
    strides_.assign(extent_.size(), 1);
    for (std::size_t a = extent_.size() - 1; a > 0; --a) strides_[a - 1] = strides_[a] * points_[a];
  }

  static Grid cube(std::size_t dims, double extent, std::size_t points) {
    return Grid(std::vector<double>(dims, extent), std::vector<std::size_t>(dims, points));
  }

  std::size_t dims() const { return extent_.size(); }
  std::size_t size() const { return size_; }
  double extent(std::size_t axis) const { return extent_.at(axis); }
  std::size_t points(std::size_t axis) const { return points_.at(axis); }
  double spacing(std::size_t axis) const { return 2.0 * extent_[axis] / static_cast<double>(points_[axis]); }
  double frequency_spacing(std::size_t axis) const { return std::numbers::pi / extent_[axis]; }
  std::size_t stride(std::size_t axis) const { return strides_[axis]; }
  const std::vector<double>& extents() const { return extent_; }
  const std::vector<std::size_t>& point_counts() const { return points_; }

  double node(std::size_t axis, std::size_t index) const {
    return -extent_[axis] + static_cast<double>(index) * spacing(axis);
  }

  /// Signed frequency index m in [-n/2, n/2) of FFT-ordered index j.
  long frequency_index(std::size_t axis, std::size_t j) const {
    const auto n = static_cast<long>(points_[axis]);
    const auto jj = static_cast<long>(j);
    return jj < n / 2 ? jj : jj - n;
  }

  double frequency(std::size_t axis, std::size_t j) const {
    return std::numbers::pi * static_cast<double>(frequency_index(axis, j)) / extent_[axis];
  }

  double cell_volume() const {
    double v = 1.0;
    for (std::size_t a = 0; a < dims(); ++a) v *= spacing(a);
    return v;
  }

  double frequency_cell_volume() const {
    double v = 1.0;
    for (std::size_t a = 0; a < dims(); ++a) v *= frequency_spacing(a);
    return v;
  }

  double box_volume() const {
    double v = 1.0;
    for (double L : extent_) v *= 2.0 * L;
    return v;
  }

  /// Row-major multi-index of a flat offset (last axis fastest).
  void unravel(std::size_t flat, std::span<std::size_t> index) const {
    for (std::size_t a = 0; a < dims(); ++a) {
      index[a] = flat / strides_[a];
      flat %= strides_[a];
    }
  }

  void node_coordinates(std::size_t flat, std::span<double> x) const {
    for (std::size_t a = 0; a < dims(); ++a) {
      const std::size_t i = flat / strides_[a];
      flat %= strides_[a];
      x[a] = node(a, i);
    }
  }

  void frequency_coordinates(std::size_t flat, std::span<double> xi) const {
    for (std::size_t a = 0; a < dims(); ++a) {
      const std::size_t j = flat / strides_[a];
      flat %= strides_[a];
      xi[a] = frequency(a, j);
    }
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::vector<double> extent_;
  std::vector<std::size_t> points_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

class SampledField {
 public:
  SampledField(Grid grid, std::vector<complex> values, Side side)
      : grid_(std::move(grid)), values_(std::move(values)), side_(side) {
    if (values_.size() != grid_.size())
      throw std::invalid_argument("field: value count " + std::to_string(values_.size()) +
                                  " does not match grid size " + std::to_string(grid_.size()));
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag()))
        throw std::domain_error("field: non-finite value at flat index " + std::to_string(i));
  }

  static SampledField zeros(const Grid& grid, Side side = Side::physical) {
    return SampledField(grid, std::vector<complex>(grid.size()), side);
  }

  const Grid& grid() const { return grid_; }
  Side side() const { return side_; }
  std::span<const complex> values() const { return values_; }
  const complex& operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// L2 norm with the quadrature measure of the field's side: h^N on the
  /// physical side and (dxi / 2 pi)^N on the frequency side, so Parseval
  /// reads l2_norm(u) == l2_norm(forward_transform(u)).
  double l2_norm() const {
    double s = 0.0;
    for (const auto& v : values_) s += std::norm(v);
    const double w = side_ == Side::physical
                         ? grid_.cell_volume()
                         : grid_.frequency_cell_volume() / std::pow(2.0 * std::numbers::pi, grid_.dims());
    return std::sqrt(s * w);
  }

  SampledField scaled(complex c) const {
    std::vector<complex> out(values_);
    for (auto& v : out) v *= c;
    return SampledField(grid_, std::move(out), side_);
  }

  SampledField real_part() const {
    std::vector<complex> out(values_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i].real();
    return SampledField(grid_, std::move(out), side_);
  }

  friend SampledField operator+(const SampledField& a, const SampledField& b) { return combine(a, b, 1.0); }
  friend SampledField operator-(const SampledField& a, const SampledField& b) { return combine(a, b, -1.0); }

 private:
  static SampledField combine(const SampledField& a, const SampledField& b, double sign) {
    if (!(a.grid_ == b.grid_) || a.side_ != b.side_)
      throw std::invalid_argument("field: operands live on different grids or sides");
    std::vector<complex> out(a.values_);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * b.values_[i];
    return SampledField(a.grid_, std::move(out), a.side_);
  }

  Grid grid_;
  std::vector<complex> values_;
  Side side_;
};

/// Samples f at every node. f receives the node coordinates and returns a
/// value convertible to std::complex<double>.
template <class F>
SampledField sample(F&& f, const Grid& grid) {
  std::vector<complex> values(grid.size());
  std::vector<double> x(grid.dims());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.node_coordinates(i, x);
    const complex v = f(std::span<const double>(x));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream os;
      os << "sample: non-finite value at node (";
      for (std::size_t a = 0; a < x.size(); ++a) os << (a ? ", " : "") << x[a];
      os << ")";
      throw std::domain_error(os.str());
    }
    values[i] = v;
  }
  return SampledField(grid, std::move(values), Side::physical);
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Unnormalized in-place DFT; sign = FFTW_FORWARD or FFTW_BACKWARD.
inline void fftw_inplace(const Grid& grid, std::vector<complex>& data, int sign) {
  std::vector<int> n(grid.dims());
  for (std::size_t a = 0; a < grid.dims(); ++a) n[a] = static_cast<int>(grid.points(a));
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, sign, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw std::runtime_error("fftw: plan creation failed");
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

/// (-1)^{sum of indices}: the phase e^{i pi m} from the box offset -L.
inline void apply_checkerboard(const Grid& grid, std::vector<complex>& data) {
  std::vector<std::size_t> idx(grid.dims());
  for (std::size_t i = 0; i < data.size(); ++i) {
    grid.unravel(i, idx);
    std::size_t s = 0;
    for (auto k : idx) s += k;
    if (s % 2 == 1) data[i] = -data[i];
  }
}

}  // namespace detail

inline SampledField forward_transform(const SampledField& u) {
  if (u.side() != Side::physical) throw std::invalid_argument("forward_transform: field is not on the physical side");
  const Grid& g = u.grid();
  std::vector<complex> data(u.values().begin(), u.values().end());
  detail::fftw_inplace(g, data, FFTW_FORWARD);
  detail::apply_checkerboard(g, data);
  const double scale = g.cell_volume();
  for (auto& v : data) v *= scale;
  return SampledField(g, std::move(data), Side::frequency);
}

inline SampledField inverse_transform(const SampledField& s) {
  if (s.side() != Side::frequency) throw std::invalid_argument("inverse_transform: field is not on the frequency side");
  const Grid& g = s.grid();
  std::vector<complex> data(s.values().begin(), s.values().end());
  detail::apply_checkerboard(g, data);
  detail::fftw_inplace(g, data, FFTW_BACKWARD);
  double scale = 1.0;
  for (std::size_t a = 0; a < g.dims(); ++a) scale /= 2.0 * g.extent(a);
  for (auto& v : data) v *= scale;
  return SampledField(g, std::move(data), Side::physical);
}

/// Multiplies the spectrum of a physical field by mult(flat_index, xi) and
/// returns to the physical side.
template <class Mult>
SampledField apply_spectral(const SampledField& u, Mult&& mult) {
  const SampledField spec = forward_transform(u);
  const Grid& g = u.grid();
  std::vector<complex> out(spec.values().begin(), spec.values().end());
  std::vector<double> xi(g.dims());
  for (std::size_t i = 0; i < out.size(); ++i) {
    g.frequency_coordinates(i, xi);
    out[i] *= mult(i, std::span<const double>(xi));
  }
  return inverse_transform(SampledField(g, std::move(out), Side::frequency));
}

/// Spectral partial derivative D^orders u. The Nyquist bin is dropped on
/// axes differentiated an odd number of times.
inline SampledField spectral_derivative(const SampledField& u, std::span<const int> orders) {
  const Grid& g = u.grid();
  if (orders.size() != g.dims()) throw std::invalid_argument("spectral_derivative: order vector length mismatch");
  bool any = false;
  for (int o : orders) {
    if (o < 0) throw std::invalid_argument("spectral_derivative: negative order");
    any = any || o > 0;
  }
  if (!any) return u;
  std::vector<std::size_t> idx(g.dims());
  return apply_spectral(u, [&](std::size_t flat, std::span<const double> xi) {
    g.unravel(flat, idx);
    complex f = 1.0;
    for (std::size_t a = 0; a < g.dims(); ++a) {
      if (orders[a] == 0) continue;
      if (orders[a] % 2 == 1 && idx[a] == g.points(a) / 2) return complex(0.0);
      f *= std::pow(complex(0.0, xi[a]), orders[a]);
    }
    return f;
  });
}

inline SampledField spectral_derivative(const SampledField& u, std::initializer_list<int> orders) {
  std::vector<int> o(orders);
  return spectral_derivative(u, std::span<const int>(o));
}

}  // namespace holderlab
