#pragma once

// Symmetric alpha-stable densities g(y; alpha, sigma) in R^d,
//     g(y) = (2 pi)^{-d} \int exp{-i p.y - a sigma |p|^alpha} dp,
// and the one-sided (totally skewed) stable density w(x; beta, 1) with
// Laplace transform E exp(-s Z) = exp(-s^beta), which vanishes for x < 0.
//
// Scalar evaluators use non-oscillatory integral representations (Zolotarev
// form for g in d = 1, Kanter form for w) together with the small- and
// large-argument series; d >= 2 uses the radial Bessel transform and, in the
// far field, the Gaussian mixture g_d = int w(v; alpha/2) N_d(0, 2v) dv.
// SymmetricProfile and MixingDensity tabulate these once per parameter set
// for the kernel quadratures, which evaluate them millions of times.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fracgreen/error.hpp"
#include "fracgreen/quadrature.hpp"
#include "fracgreen/specfn.hpp"

namespace fracgreen::stable {

inline constexpr double kPi = std::numbers::pi;

struct SymStableParams {
  double alpha = 2.0;
  double sigma = 1.0;
  double a = 1.0;
  int dim = 1;

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 2.0))
      throw DomainError("stable: alpha must lie in (0,2], got " + std::to_string(alpha));
    if (!(sigma > 0.0)) throw DomainError("stable: sigma must be positive");
    if (!(a > 0.0)) throw DomainError("stable: a must be positive");
    if (dim < 1) throw DomainError("stable: dim must be >= 1");
  }
  /// Spatial scale (a sigma)^{1/alpha}.
  double scale() const { return std::pow(a * sigma, 1.0 / alpha); }
};

struct OneSidedParams {
  double beta = 0.5;

  void validate() const {
    if (!(beta > 0.0 && beta < 1.0))
      throw DomainError("stable: beta must lie in (0,1), got " + std::to_string(beta));
  }
};

enum class OracleKind { near_field, far_field_d1 };

struct AsymptoticOracle {
  OracleKind kind = OracleKind::far_field_d1;
  double leading_coefficient = 0.0;
  double exponent = 0.0;
};

/// A density value plus whether a small negative quadrature result was clamped.
struct DensityValue {
  double value = 0.0;
  bool clamped = false;
};

namespace detail {

struct SeriesResult {
  double value = 0.0;
  double deriv = 0.0;
  bool ok = false;
};

// Near-field series of the standard radial profile g_d(rho) (sigma = a = 1):
//   g_d(rho) = (2pi)^{-d} sum_k (-1)^k/(2k)! alpha^{-1} Gamma((2k+d)/alpha) c_k rho^{2k},
//   c_k = |S^{d-2}| B(k+1/2, (d-1)/2) = 2 pi^{(d-1)/2} Gamma(k+1/2) / Gamma(k+d/2).
// Convergent for alpha > 1. ok=false when cancellation would cost more than
// two digits.
inline SeriesResult near_series(double rho, double alpha, int d) {
  SeriesResult r;
  if (!(alpha > 1.0)) return r;
  const double dd = d;
  const double pref = std::pow(2.0 * kPi, -dd) * 2.0 * std::pow(kPi, (dd - 1.0) / 2.0) / alpha;
  const double lrho = rho > 0.0 ? std::log(rho) : -std::numeric_limits<double>::infinity();
  double sum = 0.0, dsum = 0.0, max_term = 0.0;
  int small = 0;
  for (int k = 0; k < 400; ++k) {
    const double lmag = std::lgamma((2.0 * k + dd) / alpha) + std::lgamma(k + 0.5) -
                        std::lgamma(k + dd / 2.0) - std::lgamma(2.0 * k + 1.0);
    double mag = (k == 0) ? std::exp(lmag) : (rho > 0.0 ? std::exp(lmag + 2.0 * k * lrho) : 0.0);
    const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    sum += sgn * mag;
    if (k > 0 && rho > 0.0) dsum += sgn * mag * 2.0 * k / rho;
    max_term = std::max(max_term, mag);
    if (mag <= 1e-17 * std::abs(sum)) {
      if (++small >= 3) {
        r.ok = max_term <= 100.0 * std::abs(sum);
        r.value = pref * sum;
        r.deriv = pref * dsum;
        return r;
      }
    } else {
      small = 0;
    }
  }
  return r;
}

// Large-argument series of the standard d = 1 profile,
//   g_1(x) ~ (1/pi) sum_{k>=1} (-1)^{k+1} Gamma(alpha k + 1)/k! sin(k pi alpha/2) x^{-alpha k - 1}.
// Asymptotic for alpha in (1,2), convergent for alpha < 1. Accepted only if
// the terms fall below 1e-16 relative before they start to grow.
inline SeriesResult far_series_d1(double x, double alpha) {
  SeriesResult r;
  if (!(x > 0.0) || alpha == 2.0) return r;
  const double lx = std::log(x);
  double sum = 0.0, dsum = 0.0, max_term = 0.0;
  double prev_env = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 600; ++k) {
    const double lenv = std::lgamma(alpha * k + 1.0) - std::lgamma(k + 1.0) - (alpha * k + 1.0) * lx;
    const double env = std::exp(lenv);
    if (env > prev_env && alpha > 1.0) return r;  // asymptotic series started diverging
    prev_env = env;
    const double s = std::sin(k * kPi * alpha / 2.0);
    const double term = ((k % 2 == 1) ? 1.0 : -1.0) * env * s / kPi;
    sum += term;
    dsum += term * (-(alpha * k + 1.0)) / x;
    max_term = std::max(max_term, std::abs(term));
    if (env / kPi <= 1e-16 * std::abs(sum) && k > 1) {
      r.ok = max_term <= 100.0 * std::abs(sum);
      r.value = sum;
      r.deriv = dsum;
      return r;
    }
  }
  return r;
}

// Find theta in (lo, hi) with f(theta) = target for monotone f (bisection in
// the argument). f is log of the scaled integrand exponent.
template <class F>
double bisect_level(F&& f, double lo, double hi, double target, bool increasing) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = f(mid);
    if ((v < target) == increasing)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

// Zolotarev integral for the standard symmetric profile in d = 1, x > 0,
// alpha in (0,2), alpha != 1:
//   g_1(x) = alpha x^{1/(alpha-1)} / (pi |alpha-1|) int_0^{pi/2} V e^{-c V} dtheta,
//   V(theta) = (cos theta / sin(alpha theta))^{alpha/(alpha-1)} cos((alpha-1) theta) / cos theta,
//   c = x^{alpha/(alpha-1)}.
// The derivative follows from differentiating under the integral sign.
inline SeriesResult zolotarev_d1(double x, double alpha, double rel_tol = 1e-12) {
  SeriesResult r;
  const double am1 = alpha - 1.0;
  const double e1 = alpha / am1;
  const double logc = e1 * std::log(x);
  auto log_v = [&](double th) {
    return e1 * (std::log(std::cos(th)) - std::log(std::sin(alpha * th))) +
           std::log(std::cos(am1 * th)) - std::log(std::cos(th));
  };
  const double lo = 0.0, hi = kPi / 2.0;
  const bool increasing = alpha < 1.0;  // V decreases in theta for alpha > 1
  auto level = [&](double lv) {
    return bisect_level([&](double th) { return logc + log_v(th); }, lo + 1e-300, hi - 1e-15, lv,
                        increasing);
  };
  std::vector<double> pts{lo};
  // integrand V e^{-cV} peaks at cV = 1 and is negligible beyond cV ~ 45
  std::vector<double> marks{level(std::log(45.0)), level(std::log(5.0)), level(0.0),
                            level(std::log(0.2))};
  if (increasing) std::reverse(marks.begin(), marks.end());
  for (double m : marks)
    if (m > pts.back() && m < hi) pts.push_back(m);
  pts.push_back(hi);
  auto integrand = [&](double th) {
    if (th <= 0.0 || th >= hi) return std::array<double, 2>{0.0, 0.0};
    const double lv = log_v(th);
    const double cv = std::exp(logc + lv);
    if (!std::isfinite(cv) || cv > 745.0) return std::array<double, 2>{0.0, 0.0};
    const double v = std::exp(lv);
    const double e = std::exp(-cv);
    return std::array<double, 2>{v * e, v * v * e};
  };
  const std::span<const double> sp(pts);
  const double i1 =
      quad::integrate_panels([&](double th) { return integrand(th)[0]; }, sp, rel_tol).value;
  const double i2 =
      quad::integrate_panels([&](double th) { return integrand(th)[1]; }, sp, rel_tol).value;
  const double k0 = alpha / (kPi * std::abs(am1));
  const double xp = std::pow(x, 1.0 / am1);
  r.value = k0 * xp * i1;
  // d/dx [x^{1/(a-1)} I1(c)] = x^{1/(a-1)-1}/(a-1) [I1 - alpha c I2]
  r.deriv = k0 * xp / x / am1 * (i1 - alpha * std::exp(logc) * i2);
  r.ok = std::isfinite(r.value);
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// One-sided density w(x; beta, 1)

namespace detail {

// log(sin(x)/x), accurate near 0.
inline double log_sinc(double x) {
  const double x2 = x * x;
  if (x2 < 1e-4) return -x2 / 6.0 - x2 * x2 / 180.0 - x2 * x2 * x2 / 2835.0;
  return std::log(std::sin(x) / x);
}

// Kanter representation, x > 0:
//   w(x) = beta / ((1-beta) pi) x^{-1/(1-beta)} int_0^pi A(phi) exp(-c A(phi)) dphi,
//   A(phi) = sin(beta phi)^{beta/(1-beta)} sin((1-beta) phi) / sin(phi)^{1/(1-beta)},
//   c = x^{-beta/(1-beta)}.
// A increases from A(0) = (1-beta) beta^{beta/(1-beta)}. The exponent is split
// as c A(0) plus the excess c (A - A(0)), computed from log(A/A(0)) so that it
// stays accurate when c A(0) is large. Returns log w.
inline double kanter_log_w(double x, double beta, double rel_tol = 1e-12) {
  const double b1 = 1.0 - beta;
  const double logc = -beta / b1 * std::log(x);
  auto log_ratio = [&](double phi) {  // log(A(phi)/A(0))
    return beta / b1 * log_sinc(beta * phi) + log_sinc(b1 * phi) - log_sinc(phi) / b1;
  };
  const double log_a0 = beta / b1 * std::log(beta) + std::log(b1);
  const double l0 = std::exp(logc + log_a0);  // c A(0)
  auto excess = [&](double phi) { return l0 * std::expm1(log_ratio(phi)); };
  const double hi = kPi;
  std::vector<double> pts{0.0};
  std::vector<double> levels{0.2, 1.0, 5.0, 1.0 - l0, 5.0 - l0};
  const double cut = std::max(l0, 1.0) + 45.0 - l0;
  levels.push_back(cut);
  for (double lv : levels)
    if (lv > 0.0 && lv <= cut) {
      const double m = bisect_level(excess, 0.0, hi * (1.0 - 1e-15), lv, true);
      if (m > 0.0 && m < hi) pts.push_back(m);
    }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (excess(pts.back()) < cut * (1.0 - 1e-9)) pts.push_back(hi);
  auto integrand = [&](double ph) {
    if (ph <= 0.0) return std::exp(log_a0);
    if (ph >= hi) return 0.0;
    const double lr = log_ratio(ph);
    const double ex = l0 * std::expm1(lr);
    if (ex > 745.0 || !std::isfinite(ex)) return 0.0;
    return std::exp(log_a0 + lr - ex);
  };
  // rounding in log(A/A(0)) is amplified by c A(0)/(1-beta); only matters
  // where w is already far below 1e-100
  const double tol = std::min(1e-3, std::max(rel_tol, 1e-15 * l0 / b1));
  const auto q = quad::integrate_panels(integrand, std::span<const double>(pts), tol, 12);
  if (!(q.value > 0.0)) return -std::numeric_limits<double>::infinity();
  return std::log(beta / (b1 * kPi)) - std::log(x) / b1 + std::log(q.value) - l0;
}

// Convergent large-x series
//   w(x) = (1/pi) sum_{k>=1} (-1)^{k+1} Gamma(beta k + 1)/k! sin(pi beta k) x^{-beta k - 1}.
inline SeriesResult w_far_series(double x, double beta) {
  SeriesResult r;
  const double lx = std::log(x);
  double sum = 0.0, max_term = 0.0;
  int small = 0;
  for (int k = 1; k < 2000; ++k) {
    const double env =
        std::exp(std::lgamma(beta * k + 1.0) - std::lgamma(k + 1.0) - (beta * k + 1.0) * lx);
    const double term = ((k % 2 == 1) ? 1.0 : -1.0) * env * std::sin(kPi * beta * k) / kPi;
    sum += term;
    max_term = std::max(max_term, std::abs(term));
    if (env / kPi <= 1e-17 * std::abs(sum)) {
      if (++small >= 3) {
        r.ok = max_term <= 100.0 * std::abs(sum) && sum > 0.0;
        r.value = sum;
        return r;
      }
    } else {
      small = 0;
    }
  }
  return r;
}

}  // namespace detail

/// One-sided density w(x; beta, 1); exactly 0 for x <= 0.
inline double w_onesided(const OneSidedParams& params, double x) {
  params.validate();
  if (!std::isfinite(x)) throw DomainError("w_onesided: x must be finite");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) {
    const auto s = detail::w_far_series(x, params.beta);
    if (s.ok) return s.value;
  }
  const double lw = detail::kanter_log_w(x, params.beta);
  return std::exp(lw);
}

/// Leading far-field law w(x) ~ C x^{-1-beta}, C = Gamma(1+beta) sin(pi beta)/pi.
inline AsymptoticOracle w_far_field_oracle(const OneSidedParams& params) {
  params.validate();
  const double b = params.beta;
  return {OracleKind::far_field_d1, std::tgamma(1.0 + b) * std::sin(kPi * b) / kPi, -1.0 - b};
}

// ---------------------------------------------------------------------------
// Mixing density of X = Z^{-beta}

/// Density m(x) of X = Z^{-beta}, Z ~ w(.; beta, 1):
///   m(x) = (1/beta) x^{-1-1/beta} w(x^{-1/beta}),   E e^{-lambda X} = E_{beta,1}(-lambda).
/// Entire in x with m(x) = sum_k (-x)^k / (k! Gamma(1 - beta(k+1))). Tabulated
/// once per beta; beyond upper() it is below 1e-300.
class MixingDensity {
 public:
  explicit MixingDensity(double beta) : beta_(beta) {
    OneSidedParams{beta}.validate();
    m0_ = specfn::rgamma(1.0 - beta_);
    x_series_ = 0.0;
    for (double x = 3.0; x > 0.01; x *= 0.9)
      if (series(x).ok) {
        x_series_ = x;
        break;
      }
    // upper end where log m < -700
    double x = std::max(x_series_, 0.5);
    while (log_direct(x) > -700.0 && x < 1e6) x *= 1.25;
    upper_ = x;
    const double lo = std::log(std::max(x_series_, 1e-3)) - 0.02;
    const double hi = std::log(upper_);
    const int panels = std::max(2, static_cast<int>(std::ceil((hi - lo) / 0.1)));
    log_table_ = quad::ChebyshevTable([&](double u) { return log_direct(std::exp(u)); }, lo, hi,
                                      panels, 16);
  }

  double beta() const { return beta_; }
  double at_zero() const { return m0_; }

  /// Point beyond which log m(x) stays below log_level (scanning down from upper()).
  double cut(double log_level) const {
    double x = upper_;
    while (x > x_series_ && std::log((*this)(x) + 1e-300) < log_level) x *= 0.98;
    return std::min(upper_, x / 0.98);
  }
  double series_radius() const { return x_series_; }
  double upper() const { return upper_; }

  double operator()(double x) const {
    if (x < 0.0) return 0.0;
    if (x <= x_series_) return series(x).value;
    if (x >= upper_) return 0.0;
    return std::exp(log_table_(std::log(x)));
  }

  /// Direct (untabulated) log m(x) via the Kanter form of w.
  double log_direct(double x) const {
    const double z = std::pow(x, -1.0 / beta_);
    return -std::log(beta_) + (-1.0 - 1.0 / beta_) * std::log(x) + detail::kanter_log_w(z, beta_);
  }

  detail::SeriesResult series(double x) const {
    detail::SeriesResult r;
    double sum = 0.0, max_term = 0.0, xk = 1.0, fact = 1.0;
    int small = 0;
    for (int k = 0; k < 500; ++k) {
      if (k > 0) {
        xk *= -x;
        fact *= k;
      }
      const double term = xk / fact * specfn::rgamma(1.0 - beta_ * (k + 1));
      sum += term;
      max_term = std::max(max_term, std::abs(term));
      if (std::abs(term) <= 1e-17 * std::abs(sum) && k > 2) {
        if (++small >= 3) break;
      } else {
        small = 0;
      }
      if (!std::isfinite(fact) || !std::isfinite(xk)) return r;
    }
    r.value = sum;
    r.ok = max_term <= 100.0 * std::abs(sum) && sum > 0.0;
    return r;
  }

 private:
  double beta_;
  double m0_ = 0.0;
  double x_series_ = 0.0;
  double upper_ = 0.0;
  quad::ChebyshevTable log_table_;
};

namespace detail {

template <class Key, class Value, class Make>
std::shared_ptr<const Value> cached(std::map<Key, std::shared_ptr<const Value>>& cache,
                                    std::mutex& mu, const Key& key, Make&& make) {
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  // build outside the lock; a racing builder produces an identical table
  auto built = std::make_shared<const Value>(make());
  std::lock_guard lock(mu);
  return cache.emplace(key, std::move(built)).first->second;
}

}  // namespace detail

/// Shared mixing-density table for beta, built on first use.
inline std::shared_ptr<const MixingDensity> mixing_density_for(double beta) {
  static std::map<double, std::shared_ptr<const MixingDensity>> cache;
  static std::mutex mu;
  return detail::cached(cache, mu, beta, [&] { return MixingDensity(beta); });
}

// ---------------------------------------------------------------------------
// Symmetric density g

namespace detail {

// Standard 1-d profile and derivative (sigma = a = 1), x >= 0.
inline SeriesResult standard_d1(double x, double alpha) {
  SeriesResult r;
  if (alpha == 2.0) {
    r.value = std::exp(-x * x / 4.0) / (2.0 * std::sqrt(kPi));
    r.deriv = -x / 2.0 * r.value;
    r.ok = true;
    return r;
  }
  if (alpha == 1.0) {
    r.value = 1.0 / (kPi * (1.0 + x * x));
    r.deriv = -2.0 * x / (kPi * (1.0 + x * x) * (1.0 + x * x));
    r.ok = true;
    return r;
  }
  if (x == 0.0) {
    r.value = std::tgamma(1.0 + 1.0 / alpha) / kPi;
    r.deriv = 0.0;
    r.ok = true;
    return r;
  }
  if (alpha > 1.0 && x <= 2.5) {
    r = near_series(x, alpha, 1);
    if (r.ok) return r;
  }
  if (x >= 1.0 || alpha < 1.0) {
    r = far_series_d1(x, alpha);
    if (r.ok) return r;
  }
  return zolotarev_d1(x, alpha);
}

// Radial Bessel transform for d >= 2 (standard scale):
//   g_d(rho) = (2pi)^{-d/2} rho^{1-d/2} int_0^inf J_nu(p rho) p^{d/2} e^{-p^alpha} dp,
//   nu = d/2 - 1.
inline double bessel_radial(double rho, double alpha, int d, double rel_tol = 1e-12) {
  const double nu = d / 2.0 - 1.0;
  // e^{-p^alpha} < 1e-18 beyond pmax
  const double pmax = std::pow(42.0, 1.0 / alpha);
  if (rho == 0.0) {
    // J_nu(p rho) rho^{-nu} -> (p/2)^nu / Gamma(nu+1)
    const double m = std::tgamma(d / alpha) / alpha;  // int p^{d-1} e^{-p^alpha}
    return std::pow(2.0 * kPi, -d / 2.0) * m / (std::pow(2.0, nu) * std::tgamma(nu + 1.0));
  }
  std::vector<double> pts{0.0};
  const double step = kPi / rho;
  for (double p = step; p < pmax; p += step) pts.push_back(p);
  pts.push_back(pmax);
  auto f = [&](double p) {
    return std::cyl_bessel_j(nu, p * rho) * std::pow(p, d / 2.0) * std::exp(-std::pow(p, alpha));
  };
  const auto q = quad::integrate_panels(f, std::span<const double>(pts), rel_tol);
  return std::pow(2.0 * kPi, -d / 2.0) * std::pow(rho, 1.0 - d / 2.0) * q.value;
}

// Gaussian mixture for alpha < 2, any d: with V one-sided (alpha/2)-stable,
//   g_d(rho) = int_0^inf w(v; alpha/2) (4 pi v)^{-d/2} exp(-rho^2/(4v)) dv.
// Positive integrand, so relative accuracy holds far into the tail.
inline SeriesResult gaussian_mixture(double rho, double alpha, int d, double rel_tol = 1e-12) {
  SeriesResult r;
  const double b = alpha / 2.0;
  const auto md = mixing_density_for(b);
  const double dd = d;
  // integrate in u = log v; w(v; b) = b v^{-1-b} m(v^{-b})
  auto integrand = [&](double u) {
    const double v = std::exp(u);
    const double wv = b * std::pow(v, -1.0 - b) * (*md)(std::pow(v, -b));
    const double base = v * wv * std::pow(4.0 * kPi * v, -dd / 2.0) * std::exp(-rho * rho / (4.0 * v));
    return std::array<double, 2>{base, base * (-rho / (2.0 * v))};
  };
  // w(v; alpha/2) is negligible for v below ~1e-3 (super-exponential decay)
  // and the mixture tail decays like v^{-(alpha+d)/2}.
  const double umid = std::log(std::max(rho * rho / 4.0, 0.05));
  const double ulo = std::min(std::log(1e-4), umid - 20.0);
  const double uhi = std::max(umid, 0.0) + 2.0 * 45.0 / (alpha + dd);
  std::vector<double> pts;
  for (double u = ulo; u < uhi; u += 2.0) pts.push_back(u);
  pts.push_back(uhi);
  const std::span<const double> sp(pts);
  double v0 = quad::integrate_panels([&](double u) { return integrand(u)[0]; }, sp, rel_tol).value;
  const double v1 =
      quad::integrate_panels([&](double u) { return integrand(u)[1]; }, sp, rel_tol).value;
  // analytic tail beyond uhi using w(v) ~ C v^{-1-alpha/2} and exp(.) ~ 1
  const double c = std::tgamma(1.0 + alpha / 2.0) * std::sin(kPi * alpha / 2.0) / kPi;
  const double vh = std::exp(uhi);
  const double ex = (alpha + dd) / 2.0;
  v0 += c * std::pow(4.0 * kPi, -dd / 2.0) * std::pow(vh, -ex) / ex;
  r.value = v0;
  r.deriv = v1;
  r.ok = true;
  return r;
}

// Leading far-field coefficient of the standard profile in d dimensions,
// g_d(rho) ~ C rho^{-d-alpha}.
inline double far_coefficient(double alpha, int d) {
  return alpha * std::pow(2.0, alpha - 1.0) * std::pow(kPi, -d / 2.0 - 1.0) *
         std::tgamma((d + alpha) / 2.0) * std::tgamma(alpha / 2.0) * std::sin(kPi * alpha / 2.0);
}

// Standard radial profile in dimension d, value and radial derivative.
inline SeriesResult standard_radial(double rho, double alpha, int d) {
  if (d == 1) return standard_d1(rho, alpha);
  SeriesResult r;
  if (alpha == 2.0) {
    r.value = std::pow(4.0 * kPi, -d / 2.0) * std::exp(-rho * rho / 4.0);
    r.deriv = -rho / 2.0 * r.value;
    r.ok = true;
    return r;
  }
  if (alpha > 1.0 && rho <= 2.5) {
    r = near_series(rho, alpha, d);
    if (r.ok) return r;
  }
  return gaussian_mixture(rho, alpha, d);
}

}  // namespace detail

/// Tabulated standard radial profile g_d(rho) and its derivative for one
/// (alpha, d). Immutable after construction; safe to share between threads.
class SymmetricProfile {
 public:
  SymmetricProfile(double alpha, int dim) : alpha_(alpha), dim_(dim) {
    if (!(alpha > 1.0 && alpha <= 2.0))
      throw DomainError("SymmetricProfile: alpha must lie in (1,2]");
    if (dim < 1) throw DomainError("SymmetricProfile: dim must be >= 1");
    if (alpha_ == 2.0) return;
    // largest radius where the near-field series is accepted
    rho_series_ = 0.0;
    for (double r = 2.5; r > 0.05; r *= 0.9)
      if (detail::near_series(r, alpha_, dim_).ok) {
        rho_series_ = r;
        break;
      }
    if (dim_ == 1) {
      rho_far_ = 1e300;
      for (double r = 1.0; r < 1e6; r *= 1.1)
        if (detail::far_series_d1(r, alpha_).ok) {
          rho_far_ = r;
          break;
        }
    } else {
      rho_far_ = 1e6;
      far_coeff_ = detail::far_coefficient(alpha_, dim_);
    }
    const double lo = std::log(std::max(rho_series_, 1e-3)) - 0.05;
    const double hi = std::log(rho_far_) + 0.05;
    const int panels = std::max(2, static_cast<int>(std::ceil((hi - lo) / 0.25)));
    // two tables so the derivative keeps full accuracy; both sample the same
    // nodes in the same order, so the second replays the first pass
    std::vector<detail::SeriesResult> samples;
    log_value_ = quad::ChebyshevTable(
        [&](double u) {
          samples.push_back(detail::standard_radial(std::exp(u), alpha_, dim_));
          return std::log(samples.back().value);
        },
        lo, hi, panels, 18);
    std::size_t next = 0;
    log_slope_ = quad::ChebyshevTable(
        [&](double u) {
          const auto& s = samples[next++];
          return s.deriv * std::exp(u) / s.value;  // d log g / d log rho
        },
        lo, hi, panels, 18);
  }

  double alpha() const { return alpha_; }
  int dim() const { return dim_; }

  double value(double rho) const { return eval(rho).value; }
  double derivative(double rho) const { return eval(rho).deriv; }

  detail::SeriesResult eval(double rho) const {
    detail::SeriesResult r;
    if (alpha_ == 2.0 || rho <= rho_series_) return detail::standard_radial(rho, alpha_, dim_);
    if (rho >= rho_far_) {
      if (dim_ == 1) return detail::far_series_d1(rho, alpha_);
      r.value = far_coeff_ * std::pow(rho, -dim_ - alpha_);
      r.deriv = -(dim_ + alpha_) * r.value / rho;
      r.ok = true;
      return r;
    }
    const double u = std::log(rho);
    r.value = std::exp(log_value_(u));
    r.deriv = r.value * log_slope_(u) / rho;
    r.ok = true;
    return r;
  }

 private:
  double alpha_;
  int dim_;
  double rho_series_ = 0.0;
  double rho_far_ = 0.0;
  double far_coeff_ = 0.0;
  quad::ChebyshevTable log_value_;
  quad::ChebyshevTable log_slope_;
};

/// Shared profile table for (alpha, dim), built on first use.
inline std::shared_ptr<const SymmetricProfile> profile_for(double alpha, int dim) {
  static std::map<std::pair<double, int>, std::shared_ptr<const SymmetricProfile>> cache;
  static std::mutex mu;
  return detail::cached(cache, mu, std::pair{alpha, dim},
                        [&] { return SymmetricProfile(alpha, dim); });
}

/// g(y; alpha, sigma) for y in R^d (y.size() == dim).
inline DensityValue g_sym(const SymStableParams& params, std::span<const double> y,
                          double tol = 1e-12) {
  params.validate();
  if (static_cast<int>(y.size()) != params.dim)
    throw DomainError("g_sym: point dimension does not match params.dim");
  double r2 = 0.0;
  for (double v : y) {
    if (!std::isfinite(v)) throw DomainError("g_sym: point must be finite");
    r2 += v * v;
  }
  const double s = params.scale();
  const double rho = std::sqrt(r2) / s;
  const int d = params.dim;
  double val = 0.0;
  if (d == 1 || params.alpha == 2.0) {
    val = detail::standard_radial(rho, params.alpha, d).value;
  } else if (params.alpha > 1.0 && rho <= 2.5 && detail::near_series(rho, params.alpha, d).ok) {
    val = detail::near_series(rho, params.alpha, d).value;
  } else if (rho <= 10.0) {
    val = detail::bessel_radial(rho, params.alpha, d);
  } else {
    val = detail::gaussian_mixture(rho, params.alpha, d).value;
  }
  DensityValue out{val * std::pow(s, -d), false};
  if (out.value < 0.0) {
    if (out.value < -tol)
      throw PrecisionError("g_sym: negative density beyond tolerance", out.value, -out.value);
    out.value = 0.0;
    out.clamped = true;
  }
  return out;
}

inline DensityValue g_sym(const SymStableParams& params, double y, double tol = 1e-12) {
  const double p[1] = {y};
  return g_sym(params, std::span<const double>(p, 1), tol);
}

/// Partial sum of the small-|y| expansion
///   g ~ |S^{d-2}| / (2 pi s)^d sum_{k<terms} (-1)^k/(2k)! a_k (|y|/s)^{2k},
///   a_k = alpha^{-1} Gamma((2k+d)/alpha) B(k+1/2, (d-1)/2),  s = (a sigma)^{1/alpha}.
/// For d = 1 the product |S^{d-2}| B(k+1/2, (d-1)/2) is taken at its limit 2
/// (the two-point sphere S^0). Valid band |y|/s <= 0.3.
inline double g_near_field_oracle(const SymStableParams& params, std::span<const double> y,
                                  int terms) {
  params.validate();
  if (terms < 1) throw DomainError("g_near_field_oracle: terms must be >= 1");
  double r2 = 0.0;
  for (double v : y) r2 += v * v;
  const double s = params.scale();
  const double rho = std::sqrt(r2) / s;
  if (rho > 0.3) throw DomainError("g_near_field_oracle: |y|/scale must be <= 0.3");
  const int d = params.dim;
  const double al = params.alpha;
  double sum = 0.0;
  for (int k = 0; k < terms; ++k) {
    double sphere_beta;
    if (d == 1) {
      sphere_beta = 2.0;
    } else {
      const double sphere = 2.0 * std::pow(kPi, (d - 1) / 2.0) / std::tgamma((d - 1) / 2.0);
      sphere_beta = sphere * specfn::beta_fn(k + 0.5, (d - 1) / 2.0);
    }
    const double ak = std::tgamma((2.0 * k + d) / al) / al;
    sum += ((k % 2 == 0) ? 1.0 : -1.0) / std::tgamma(2.0 * k + 1.0) * ak * sphere_beta *
           std::pow(rho, 2.0 * k);
  }
  return sum / std::pow(2.0 * kPi * s, d);
}

inline double g_near_field_oracle(const SymStableParams& params, double y, int terms) {
  const double p[1] = {y};
  return g_near_field_oracle(params, std::span<const double>(p, 1), terms);
}

/// One-term tail (1/pi) Gamma(1+alpha) sin(pi alpha/2) a sigma |y|^{-1-alpha}, d = 1,
/// valid for |y|/s >= 10.
inline double g_far_field_oracle_d1(const SymStableParams& params, double y) {
  params.validate();
  if (params.dim != 1) throw DomainError("g_far_field_oracle_d1: dim must be 1");
  if (params.alpha >= 2.0)
    throw DomainError("g_far_field_oracle_d1: alpha = 2 has no power tail");
  if (std::abs(y) / params.scale() < 10.0)
    throw DomainError("g_far_field_oracle_d1: |y|/scale must be >= 10");
  const double al = params.alpha;
  return std::tgamma(1.0 + al) * std::sin(kPi * al / 2.0) / kPi * params.a * params.sigma *
         std::pow(std::abs(y), -1.0 - al);
}

inline AsymptoticOracle g_far_field_d1(const SymStableParams& params) {
  params.validate();
  const double al = params.alpha;
  return {OracleKind::far_field_d1,
          std::tgamma(1.0 + al) * std::sin(kPi * al / 2.0) / kPi * params.a * params.sigma,
          -1.0 - al};
}

inline AsymptoticOracle g_near_field(const SymStableParams& params) {
  params.validate();
  const double s = params.scale();
  return {OracleKind::near_field, detail::standard_radial(0.0, params.alpha, params.dim).value *
                                      std::pow(s, -params.dim),
          0.0};
}

}  // namespace fracgreen::stable
