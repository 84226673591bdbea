#pragma once

// Periodic grids, fields and their discrete Fourier spectra (FFTW).
//
// A grid of n points per axis on a box of side L_i has nodes
// y_j = -L_i/2 + j L_i/n and wavenumbers p_k = 2 pi k / L_i with k taken in
// FFT order (k >= n/2 wraps to k - n). Values are stored row-major, axis 0
// slowest. The spectrum holds the unnormalized forward DFT; all symbols used
// by the solvers are radial, so the node offset only contributes a phase
// that cancels on the way back.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <fftw3.h>

#include "fracgreen/error.hpp"

namespace fracgreen {

using cplx = std::complex<double>;

struct Grid {
  int dim = 1;
  int n = 64;
  std::vector<double> length{2.0 * std::numbers::pi};

  void validate() const {
    if (dim < 1 || dim > 3) throw DomainError("grid: dim must be 1, 2 or 3");
    if (n < 8 || (n & (n - 1)) != 0)
      throw DomainError("grid: points per axis must be a power of two >= 8");
    if (static_cast<int>(length.size()) != dim)
      throw DomainError("grid: need one box length per axis");
    for (double l : length)
      if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("grid: box length must be positive");
  }

  static Grid cube(int dim, int n, double box) {
    Grid g{dim, n, std::vector<double>(static_cast<std::size_t>(dim), box)};
    g.validate();
    return g;
  }

  std::size_t size() const {
    std::size_t s = 1;
    for (int i = 0; i < dim; ++i) s *= static_cast<std::size_t>(n);
    return s;
  }
  double spacing(int axis) const { return length[axis] / n; }
  double cell_volume() const {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) v *= spacing(i);
    return v;
  }
  double coord(int axis, int j) const { return -0.5 * length[axis] + j * spacing(axis); }
  double wavenumber(int axis, int k) const {
    const int kk = (k < n / 2) ? k : k - n;
    return 2.0 * std::numbers::pi * kk / length[axis];
  }
  /// Per-axis indices of a flat row-major index.
  std::array<int, 3> unflatten(std::size_t flat) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int ax = dim - 1; ax >= 0; --ax) {
      idx[ax] = static_cast<int>(flat % static_cast<std::size_t>(n));
      flat /= static_cast<std::size_t>(n);
    }
    return idx;
  }
  std::array<double, 3> point(std::size_t flat) const {
    const auto idx = unflatten(flat);
    std::array<double, 3> y{0.0, 0.0, 0.0};
    for (int ax = 0; ax < dim; ++ax) y[ax] = coord(ax, idx[ax]);
    return y;
  }
  std::array<double, 3> frequency(std::size_t flat) const {
    const auto idx = unflatten(flat);
    std::array<double, 3> p{0.0, 0.0, 0.0};
    for (int ax = 0; ax < dim; ++ax) p[ax] = wavenumber(ax, idx[ax]);
    return p;
  }
  double frequency_norm(std::size_t flat) const {
    const auto p = frequency(flat);
    return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
  }
  bool is_nyquist(int axis, std::size_t flat) const { return unflatten(flat)[axis] == n / 2; }

  bool operator==(const Grid&) const = default;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

// One plan per (shape, direction), created once and executed on caller
// arrays through the new-array interface, which is thread safe.
inline void dft(const Grid& g, std::vector<cplx>& data, int sign) {
  static std::map<std::array<int, 3>, fftw_plan> plans;
  const std::array<int, 3> key{g.dim, g.n, sign};
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    auto it = plans.find(key);
    if (it == plans.end()) {
      std::array<int, 3> dims{g.n, g.n, g.n};
      std::vector<cplx> scratch(data.size());
      auto* sp = reinterpret_cast<fftw_complex*>(scratch.data());
      it = plans.emplace(key, fftw_plan_dft(g.dim, dims.data(), sp, sp, sign, FFTW_ESTIMATE | FFTW_UNALIGNED)).first;
    }
    plan = it->second;
  }
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace detail

/// Unnormalized forward DFT of real grid values.
inline std::vector<cplx> forward_transform(const Grid& g, std::span<const double> values) {
  if (values.size() != g.size()) throw DomainError("transform: value count does not match grid");
  std::vector<cplx> data(values.begin(), values.end());
  detail::dft(g, data, FFTW_FORWARD);
  return data;
}

/// Inverse of forward_transform, real part kept.
inline std::vector<double> inverse_transform(const Grid& g, std::vector<cplx> spectrum) {
  if (spectrum.size() != g.size()) throw DomainError("transform: mode count does not match grid");
  detail::dft(g, spectrum, FFTW_BACKWARD);
  std::vector<double> out(spectrum.size());
  const double scale = 1.0 / static_cast<double>(spectrum.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = spectrum[i].real() * scale;
  return out;
}

struct Field {
  Grid grid;
  double time = 0.0;
  std::vector<double> values;

  Field() = default;
  Field(Grid g, double t) : grid(std::move(g)), time(t), values(grid.size(), 0.0) {}
  Field(Grid g, double t, std::vector<double> v) : grid(std::move(g)), time(t), values(std::move(v)) {
    if (values.size() != grid.size()) throw DomainError("field: value count does not match grid");
  }

  template <class F>
  static Field sample(const Grid& g, double t, F&& f) {
    Field out(g, t);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      const auto y = g.point(i);
      out.values[i] = f(std::span<const double>(y.data(), static_cast<std::size_t>(g.dim)));
    }
    return out;
  }

  /// Forward spectrum, computed on demand from the values.
  std::vector<cplx> spectrum() const { return forward_transform(grid, values); }

  static Field from_spectrum(const Grid& g, double t, std::vector<cplx> spec) {
    return Field(g, t, inverse_transform(g, std::move(spec)));
  }

  double sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  /// Riemann sum of the values over the box (exact for trigonometric polynomials).
  double integral() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * grid.cell_volume();
  }
};

/// Spectral partial derivative along an axis (the Nyquist mode is dropped).
inline Field spectral_derivative(const Field& f, int axis) {
  auto spec = f.spectrum();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (f.grid.is_nyquist(axis, i))
      spec[i] = 0.0;
    else
      spec[i] *= cplx(0.0, f.grid.frequency(i)[axis]);
  }
  return Field::from_spectrum(f.grid, f.time, std::move(spec));
}

/// All spectral partial derivatives of f.
inline std::vector<Field> spectral_gradient(const Field& f) {
  std::vector<Field> g;
  g.reserve(static_cast<std::size_t>(f.grid.dim));
  for (int ax = 0; ax < f.grid.dim; ++ax) g.push_back(spectral_derivative(f, ax));
  return g;
}

/// sup |f| + sup |grad f| over the grid.
inline double c1_norm(const Field& f) {
  double gmax = 0.0;
  const auto g = spectral_gradient(f);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    double s = 0.0;
    for (const auto& c : g) s += c.values[i] * c.values[i];
    gmax = std::max(gmax, std::sqrt(s));
  }
  return f.sup_norm() + gmax;
}

/// a (-Delta)^{alpha/2} f, applied spectrally with symbol a |p|^alpha.
inline Field fractional_laplacian(const Field& f, double a, double alpha) {
  auto spec = f.spectrum();
  for (std::size_t i = 0; i < spec.size(); ++i)
    spec[i] *= a * std::pow(f.grid.frequency_norm(i), alpha);
  return Field::from_spectrum(f.grid, f.time, std::move(spec));
}

}  // namespace fracgreen
