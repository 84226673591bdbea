#pragma once

// Quadrature helpers shared by the density and kernel evaluators.
//
// Adaptive Gauss-Kronrod comes from Boost.Math; this header adds panel
// splitting at caller-supplied breakpoints and a piecewise Chebyshev
// interpolant used to tabulate smooth one-dimensional profiles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace fracgreen::quad {

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  double l1 = 0.0;  // integral of |f|, used to judge cancellation
};

inline constexpr unsigned kMaxDepth = 18;

/// Adaptive G10K21 on [a,b].
template <class F>
auto integrate(F&& f, double a, double b, double rel_tol = 1e-12, unsigned max_depth = kMaxDepth) {
  using T = decltype(f(a));
  QuadResult<T> r;
  if (a == b) return r;
  r.value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, max_depth,
                                                                          rel_tol, &r.error, &r.l1);
  return r;
}

/// Sum of adaptive integrals over consecutive panels [pts[i], pts[i+1]].
/// Breakpoints must be increasing; panels are visited left to right so the
/// reduction order is fixed. A non-adaptive first pass estimates the total
/// magnitude, and each panel's tolerance is relaxed in proportion so that
/// negligible panels are not refined to their own relative precision.
template <class F>
auto integrate_panels(F&& f, std::span<const double> pts, double rel_tol = 1e-12,
                      unsigned max_depth = kMaxDepth) {
  using T = decltype(f(pts.front()));
  QuadResult<T> total;
  std::vector<double> rough(pts.size(), 0.0);
  double l1 = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!(pts[i + 1] > pts[i])) continue;
    rough[i] = integrate(f, pts[i], pts[i + 1], rel_tol, 0).l1;
    l1 += rough[i];
  }
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!(pts[i + 1] > pts[i])) continue;
    double tol = rel_tol;
    if (rough[i] > 0.0) tol = std::min(0.1, std::max(rel_tol, rel_tol * l1 / rough[i]));
    const auto r = integrate(f, pts[i], pts[i + 1], tol, max_depth);
    total.value += r.value;
    total.error += r.error;
    total.l1 += r.l1;
  }
  return total;
}

/// n-point Gauss-Legendre rule on [-1,1] (nodes ascending).
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n) : nodes(n), weights(n) {
    for (int i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[n - 1 - i] = x;
      weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

/// Piecewise Chebyshev interpolant of a smooth function on [lo, hi], with
/// equal-width panels. Values are reproduced to roughly the accuracy of the
/// sampled function when the panel width resolves its features.
class ChebyshevTable {
 public:
  ChebyshevTable() = default;

  ChebyshevTable(const std::function<double(double)>& f, double lo, double hi, int panels,
                 int degree)
      : lo_(lo), hi_(hi), panels_(panels), degree_(degree) {
    width_ = (hi_ - lo_) / panels_;
    coeffs_.resize(static_cast<std::size_t>(panels_) * (degree_ + 1));
    std::vector<double> vals(degree_ + 1);
    const int n = degree_ + 1;
    for (int p = 0; p < panels_; ++p) {
      const double a = lo_ + p * width_;
      for (int j = 0; j < n; ++j) {
        const double x = std::cos(std::numbers::pi * (j + 0.5) / n);
        vals[j] = f(a + 0.5 * width_ * (x + 1.0));
      }
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += vals[j] * std::cos(std::numbers::pi * k * (j + 0.5) / n);
        coeffs_[p * n + k] = (k == 0 ? 1.0 : 2.0) * s / n;
      }
    }
  }

  bool contains(double x) const { return x >= lo_ && x <= hi_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  double operator()(double x) const {
    int p = static_cast<int>((x - lo_) / width_);
    p = std::clamp(p, 0, panels_ - 1);
    const double a = lo_ + p * width_;
    const double u = 2.0 * (x - a) / width_ - 1.0;
    const double* c = &coeffs_[static_cast<std::size_t>(p) * (degree_ + 1)];
    // Clenshaw
    double b1 = 0.0, b2 = 0.0;
    for (int k = degree_; k >= 1; --k) {
      const double b0 = 2.0 * u * b1 - b2 + c[k];
      b2 = b1;
      b1 = b0;
    }
    return u * b1 - b2 + c[0];
  }

  /// Derivative of the interpolant.
  double derivative(double x) const {
    int p = static_cast<int>((x - lo_) / width_);
    p = std::clamp(p, 0, panels_ - 1);
    const double a = lo_ + p * width_;
    const double u = 2.0 * (x - a) / width_ - 1.0;
    const double* c = &coeffs_[static_cast<std::size_t>(p) * (degree_ + 1)];
    // derivative coefficients of the Chebyshev series
    std::vector<double> d(degree_ + 2, 0.0);
    for (int k = degree_; k >= 1; --k) d[k - 1] = d[k + 1] + 2.0 * k * c[k];
    d[0] *= 0.5;
    double b1 = 0.0, b2 = 0.0;
    for (int k = degree_ - 1; k >= 1; --k) {
      const double b0 = 2.0 * u * b1 - b2 + d[k];
      b2 = b1;
      b1 = b0;
    }
    return (u * b1 - b2 + d[0]) * 2.0 / width_;
  }

 private:
  double lo_ = 0.0, hi_ = 1.0, width_ = 1.0;
  int panels_ = 1, degree_ = 0;
  std::vector<double> coeffs_;
};

}  // namespace fracgreen::quad
