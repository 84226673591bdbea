#pragma once

// Green kernels of the fractional Cauchy problem
//     D_t^beta u = -a (-Delta)^{alpha/2} u + H,
// with Fourier symbols
//     S^(t,p) = E_{beta,1}(-a t^beta |p|^alpha),
//     G^(t,p) = t^{beta-1} E_{beta,beta}(-a t^beta |p|^alpha).
//
// Two independent routes:
//   fourier        radial Hankel transform of the symbol, with the tail past
//                  a cutoff summed from the large-argument expansions of
//                  E_{beta,gamma} and J_nu (contour-rotated tail integrals);
//   subordination  mixture of symmetric stable densities over the
//                  Mittag-Leffler law m(x) of X = Z^{-beta},
//                      S = int m(x) g(y; alpha, t^beta x) dx,
//                      G = beta t^{beta-1} int x m(x) g(y; alpha, t^beta x) dx.
// Everything is evaluated at the standard scale c = (a t^beta)^{1/alpha}
// and rescaled at the end; the t^{beta-1} factor of G is applied last.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "fracgreen/error.hpp"
#include "fracgreen/parallel.hpp"
#include "fracgreen/quadrature.hpp"
#include "fracgreen/specfn.hpp"
#include "fracgreen/stable.hpp"

namespace fracgreen::kernels {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;

enum class Which { S, G, gradS, gradG };
enum class Method { fourier, subordination, automatic };

inline const char* to_string(Which w) {
  switch (w) {
    case Which::S: return "S";
    case Which::G: return "G";
    case Which::gradS: return "gradS";
    case Which::gradG: return "gradG";
  }
  return "?";
}

inline const char* to_string(Method m) {
  switch (m) {
    case Method::fourier: return "fourier";
    case Method::subordination: return "subordination";
    case Method::automatic: return "auto";
  }
  return "?";
}

struct KernelParams {
  double beta = 0.5;
  double alpha = 1.5;
  double a = 1.0;
  int dim = 1;

  void validate() const {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0,1)");
    if (!(alpha > 1.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (1,2]");
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("a must be positive");
    if (dim < 1 || dim > 3) throw DomainError("dim must be 1, 2 or 3");
  }
  /// Spatial scale (a t^beta)^{1/alpha}.
  double scale(double t) const { return std::pow(a * std::pow(t, beta), 1.0 / alpha); }
};

struct KernelQuery {
  Which which = Which::S;
  double t = 1.0;
  std::vector<double> y{0.0};
  Method method = Method::automatic;
  double tolerance = 1e-10;

  void validate(int dim) const {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("t must be positive");
    if (!(tolerance > 0.0)) throw DomainError("tolerance must be positive");
    if (static_cast<int>(y.size()) != dim)
      throw DomainError("point dimension " + std::to_string(y.size()) + " does not match dim " +
                        std::to_string(dim));
  }
};

namespace detail {

inline double bessel_j(double nu, double z) {
  if (nu == -0.5) return std::sqrt(2.0 / (kPi * z)) * std::cos(z);
  if (nu == 0.5) return std::sqrt(2.0 / (kPi * z)) * std::sin(z);
  return std::cyl_bessel_j(nu, z);
}

// Hankel coefficients a_j(nu) = prod_{m=1}^{j} (4nu^2 - (2m-1)^2) / (j! 8^j), so that
//   J_nu(z) ~ sqrt(2/(pi z)) Re[ e^{i(z - nu pi/2 - pi/4)} sum_j i^j a_j z^{-j} ].
inline std::vector<double> hankel_coefficients(double nu, int count) {
  std::vector<double> a(count, 0.0);
  a[0] = 1.0;
  for (int j = 1; j < count; ++j) {
    const double m = 2.0 * j - 1.0;
    a[j] = a[j - 1] * (4.0 * nu * nu - m * m) / (8.0 * j);
  }
  return a;
}

// int_Q^inf e^{i q rho} q^{-s} dq, rotated onto q = Q + i v / rho.
inline cplx oscillatory_tail(double s, double q0, double rho) {
  const cplx i(0.0, 1.0);
  auto f = [&](double v) { return std::exp(-v) * std::pow(cplx(q0, v / rho), -s); };
  const auto r = quad::integrate(f, 0.0, 50.0, 1e-14, 10);
  return std::exp(i * q0 * rho) * (i / rho) * r.value;
}

// int_0^inf q^mu E_{beta,gamma}(-q^alpha) dq from the Mellin transform of the
// Mittag-Leffler function: (1/alpha) Gamma(s) Gamma(1-s) / Gamma(gamma - beta s),
// s = (mu+1)/alpha, continued to 1 <= s < 2 when 1/Gamma(gamma - beta) = 0.
inline double mellin_ml(double beta, double gamma, double alpha, double mu) {
  const double s = (mu + 1.0) / alpha;
  const double inf = std::numeric_limits<double>::infinity();
  if (s <= 0.0) return inf;
  const bool first_term_vanishes = std::abs(specfn::rgamma(gamma - beta)) == 0.0;
  if (s >= 1.0 && !first_term_vanishes) return inf;
  if (s >= 2.0) return inf;
  if (std::abs(s - 1.0) < 1e-9) return beta / alpha;  // Gamma(1-s)/Gamma(beta(1-s)) -> beta
  return kPi / std::sin(kPi * s) * specfn::rgamma(gamma - beta * s) / alpha;
}

// F = int_0^inf J_nu(q rho) q^mu E_{beta,gamma}(-q^alpha) dq for rho > 0.
inline double hankel_ml(double beta, double gamma, double alpha, double nu, double mu, double rho,
                        double tol) {
  constexpr double kAsymptoticArg = 60.0;  // E expansion used for q^alpha beyond this
  constexpr double kBesselArg = 40.0;      // J expansion used for q rho beyond this
  const double q0 = std::max(std::pow(kAsymptoticArg, 1.0 / alpha), kBesselArg / rho);
  const specfn::MLParams mp{beta, gamma};
  auto head = [&](double q) {
    if (q == 0.0) return 0.0;
    const double e = specfn::ml(mp, -std::pow(q, alpha), 0.01 * tol).value;
    return bessel_j(nu, q * rho) * std::pow(q, mu) * e;
  };
  std::vector<double> pts{0.0};
  for (double q = 0.125; q < std::min(q0, kPi / rho); q *= 2.0) pts.push_back(q);
  for (double q = kPi / rho; q < q0; q += kPi / rho) pts.push_back(q);
  std::sort(pts.begin(), pts.end());
  pts.push_back(q0);
  const double head_val = quad::integrate_panels(head, std::span<const double>(pts), tol).value;

  // tail: double expansion, J_nu by Hankel and E by its algebraic series
  const auto aj = hankel_coefficients(nu, 16);
  const cplx i(0.0, 1.0);
  cplx tail = 0.0;
  cplx ipow = 1.0;
  for (int j = 0; j < 16; ++j, ipow *= i) {
    const double jscale = std::abs(aj[j]) * std::pow(q0 * rho, -j);
    if (aj[j] == 0.0) {
      if (std::abs(nu) == 0.5) break;  // half-integer order: the expansion is exact
      continue;
    }
    if (j > 0 && jscale < 1e-17) break;
    cplx inner = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    int small = 0;
    for (int k = 1; k < 60; ++k) {
      const double ck = ((k % 2 == 1) ? 1.0 : -1.0) * specfn::rgamma(gamma - beta * k);
      const double env = std::abs(ck) * std::pow(q0, -alpha * k);
      if (ck == 0.0) continue;
      if (env > prev && k > 3) break;  // asymptotic series turning
      prev = env;
      const double s = j + alpha * k + 0.5 - mu;
      inner += ck * oscillatory_tail(s, q0, rho);
      if (env < 1e-17) {
        if (++small >= 2) break;
      } else {
        small = 0;
      }
    }
    tail += ipow * aj[j] * std::pow(rho, -j) * inner;
  }
  const cplx phase = std::exp(-i * (nu * kPi / 2.0 + kPi / 4.0));
  const double tail_val = std::sqrt(2.0 / (kPi * rho)) * (phase * tail).real();
  return head_val + tail_val;
}

// Standard-scale radial profile (c = 1, t^{beta-1} factor omitted) of S or G,
// or its radial derivative, by the Fourier route.
inline double fourier_standard(const KernelParams& p, bool is_g, bool deriv, double rho,
                               double tol) {
  const int d = p.dim;
  const double nu = d / 2.0 - 1.0;
  const double gamma = is_g ? p.beta : 1.0;
  const double pref = std::pow(2.0 * kPi, -d / 2.0);
  if (rho == 0.0) {
    if (deriv) return 0.0;
    // rho^{-nu} J_nu(q rho) -> (q/2)^nu / Gamma(nu+1)
    return pref * std::pow(2.0, -nu) / std::tgamma(nu + 1.0) *
           mellin_ml(p.beta, gamma, p.alpha, d - 1.0);
  }
  if (!deriv) return pref * std::pow(rho, -nu) * hankel_ml(p.beta, gamma, p.alpha, nu, nu + 1.0, rho, tol);
  // d/drho [rho^{-nu} J_nu(q rho)] = -q rho^{-nu} J_{nu+1}(q rho)
  return -pref * std::pow(rho, -nu) * hankel_ml(p.beta, gamma, p.alpha, nu + 1.0, nu + 2.0, rho, tol);
}

// Standard-scale profile by subordination:
//   S = int m(x) x^{-d/alpha} g_d(rho x^{-1/alpha}) dx,
//   G = beta int x m(x) x^{-d/alpha} g_d(rho x^{-1/alpha}) dx,
// derivatives with x^{-(d+1)/alpha} g_d'. Integrated in u = log x.
inline double subordination_standard(const KernelParams& p, bool is_g, bool deriv, double rho,
                                     double tol) {
  const int d = p.dim;
  const double al = p.alpha;
  const auto md = stable::mixing_density_for(p.beta);
  const auto prof = stable::profile_for(al, d);
  const double lead = is_g ? p.beta : 1.0;
  if (rho == 0.0) {
    if (deriv) return 0.0;
    // Mittag-Leffler moments E X^q = Gamma(1+q) / Gamma(1+beta q)
    const double q = (is_g ? 1.0 : 0.0) - d / al;
    if (q <= -1.0) return std::numeric_limits<double>::infinity();
    return lead * prof->value(0.0) * std::tgamma(1.0 + q) * specfn::rgamma(1.0 + p.beta * q);
  }
  const double power = (is_g ? 1.0 : 0.0) - (d + (deriv ? 1.0 : 0.0)) / al;
  auto integrand = [&](double u) {
    const double x = std::exp(u);
    const double mx = (*md)(x);
    if (mx == 0.0) return 0.0;
    const double arg = rho * std::exp(-u / al);
    const double gv = deriv ? prof->derivative(arg) : prof->value(arg);
    return x * mx * std::exp(power * u) * gv;
  };
  const double u_hi = std::log(md->cut(-60.0));
  const double u_rho = al * std::log(rho);
  // below u_rho the integrand decays like x^2 (stable tail), e^{-44} is negligible
  const double u_lo = std::min(u_rho, u_hi - 1.0) - 22.0;
  std::vector<double> pts{u_lo, u_hi};
  for (int k = -6; k <= 6; ++k) pts.push_back(u_rho + k);
  for (int k = 1; k <= 8; ++k) pts.push_back(u_hi - k);
  std::sort(pts.begin(), pts.end());
  std::vector<double> grid;
  for (double v : pts) {
    if (v < u_lo || v > u_hi) continue;
    if (!grid.empty()) {
      const double gap = v - grid.back();
      const int pieces = static_cast<int>(std::ceil(gap / 3.0));
      const double start = grid.back();
      for (int k = 1; k < pieces; ++k) grid.push_back(start + gap * k / pieces);
      if (gap <= 1e-12) continue;
    }
    grid.push_back(v);
  }
  const auto q = quad::integrate_panels(integrand, std::span<const double>(grid), tol);
  return lead * q.value;
}

inline Method resolve(const KernelParams& p, Method m) {
  if (m != Method::automatic) return m;
  // the mixing density sharpens toward a point mass as beta -> 1
  return p.beta <= 0.95 ? Method::subordination : Method::fourier;
}

inline double standard_profile(const KernelParams& p, bool is_g, bool deriv, double rho,
                               Method m, double tol) {
  return resolve(p, m) == Method::fourier ? fourier_standard(p, is_g, deriv, rho, tol)
                                          : subordination_standard(p, is_g, deriv, rho, tol);
}

inline double radius(std::span<const double> y) {
  double r2 = 0.0;
  for (double v : y) {
    if (!std::isfinite(v)) throw DomainError("point must be finite");
    r2 += v * v;
  }
  return std::sqrt(r2);
}

inline void check_args(const KernelParams& p, double t, std::span<const double> y, double tol) {
  p.validate();
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("t must be positive");
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  if (static_cast<int>(y.size()) != p.dim)
    throw DomainError("point dimension " + std::to_string(y.size()) + " does not match dim " +
                      std::to_string(p.dim));
}

// Radial kernel value (deriv=false) or radial derivative (deriv=true) at |y| = r.
inline double radial(const KernelParams& p, double t, double r, bool is_g, bool deriv, Method m,
                     double tol) {
  const double c = p.scale(t);
  const double v = standard_profile(p, is_g, deriv, r / c, m, tol);
  double out = v * std::pow(c, -p.dim - (deriv ? 1.0 : 0.0));
  if (is_g) out *= std::pow(t, p.beta - 1.0);
  return out;
}

}  // namespace detail

/// S_{beta,1}(t, y).
inline double eval_S(const KernelParams& p, double t, std::span<const double> y,
                     Method m = Method::automatic, double tol = 1e-10) {
  detail::check_args(p, t, y, tol);
  return detail::radial(p, t, detail::radius(y), false, false, m, tol);
}

inline double eval_S(const KernelParams& p, double t, double y, Method m = Method::automatic,
                     double tol = 1e-10) {
  const double pt[1] = {y};
  return eval_S(p, t, std::span<const double>(pt, 1), m, tol);
}

/// G_beta(t, y).
inline double eval_G(const KernelParams& p, double t, std::span<const double> y,
                     Method m = Method::automatic, double tol = 1e-10) {
  detail::check_args(p, t, y, tol);
  return detail::radial(p, t, detail::radius(y), true, false, m, tol);
}

inline double eval_G(const KernelParams& p, double t, double y, Method m = Method::automatic,
                     double tol = 1e-10) {
  const double pt[1] = {y};
  return eval_G(p, t, std::span<const double>(pt, 1), m, tol);
}

/// Spatial gradient of S (which = S or gradS) or G (which = G or gradG).
inline std::vector<double> eval_grad(const KernelParams& p, double t, std::span<const double> y,
                                     Which which, Method m = Method::automatic,
                                     double tol = 1e-10) {
  detail::check_args(p, t, y, tol);
  const bool is_g = which == Which::G || which == Which::gradG;
  const double r = detail::radius(y);
  std::vector<double> g(y.size(), 0.0);
  if (r == 0.0) return g;
  const double dr = detail::radial(p, t, r, is_g, true, m, tol);
  for (std::size_t i = 0; i < y.size(); ++i) g[i] = dr * y[i] / r;
  return g;
}

inline double eval_grad(const KernelParams& p, double t, double y, Which which,
                        Method m = Method::automatic, double tol = 1e-10) {
  const double pt[1] = {y};
  return eval_grad(p, t, std::span<const double>(pt, 1), which, m, tol)[0];
}

/// Dispatch on a query; returns one value for S/G and dim values for gradients.
inline std::vector<double> evaluate(const KernelParams& p, const KernelQuery& q) {
  q.validate(p.dim);
  switch (q.which) {
    case Which::S: return {eval_S(p, q.t, q.y, q.method, q.tolerance)};
    case Which::G: return {eval_G(p, q.t, q.y, q.method, q.tolerance)};
    default: return eval_grad(p, q.t, q.y, q.which, q.method, q.tolerance);
  }
}

/// int_{R^d} |K(t, y)| dy for d in {1, 2}, by quadrature over log|y| with the
/// |y|^{-d-alpha} law (one more power for gradients) closing the far tail.
/// Panels are evaluated by up to `jobs` workers and summed in a fixed order.
namespace detail {

// int |K| over R^d for the standard profile (c = 1, t^{beta-1} factor dropped).
inline double standard_l1(const KernelParams& p, Which which, double tol, int jobs) {
  const bool is_g = which == Which::G || which == Which::gradG;
  const bool deriv = which == Which::gradS || which == Which::gradG;
  const int d = p.dim;
  const double sphere = d == 1 ? 2.0 : 2.0 * kPi;
  const double kernel_tol = std::min(1e-10, 0.01 * tol);

  auto integrand = [&](double u) {
    const double rho = std::exp(u);
    const double k = detail::standard_profile(p, is_g, deriv, rho, Method::automatic, kernel_tol);
    return std::pow(rho, d) * std::abs(k);
  };
  // smallest power of rho in the integrand near 0 sets how far down to go
  double e_min = deriv ? p.alpha - 1.0 : (is_g ? static_cast<double>(d) : (d == 2 ? p.alpha : 1.0));
  e_min = std::max(e_min, 0.05);
  const double log_r = std::log(1e4);
  const double u_min = std::max(-700.0, -6.0 - 40.0 / e_min);
  std::vector<double> pts;
  for (double s = 1.0; -6.0 - s > u_min; s *= 2.0) pts.push_back(-6.0 - s);
  pts.push_back(u_min);
  for (double u = -6.0; u < log_r; u += 0.5) pts.push_back(u);
  pts.push_back(log_r);
  std::sort(pts.begin(), pts.end());

  const std::size_t panels = pts.size() - 1;
  std::vector<double> rough(panels, 0.0), exact(panels, 0.0);
  parallel_for(panels, jobs, [&](std::size_t i) {
    rough[i] = quad::integrate(integrand, pts[i], pts[i + 1], tol, 0).l1;
  });
  double total_rough = 0.0;
  for (double v : rough) total_rough += v;
  parallel_for(panels, jobs, [&](std::size_t i) {
    double ptol = tol;
    if (rough[i] > 0.0) ptol = std::min(0.1, std::max(tol, tol * total_rough / rough[i]));
    exact[i] = quad::integrate(integrand, pts[i], pts[i + 1], ptol, 12).value;
  });
  double sum = 0.0;
  for (double v : exact) sum += v;
  if (p.alpha < 2.0) {
    const double big = std::exp(log_r);
    const double decay = p.alpha + (deriv ? 1.0 : 0.0);
    const double k = std::abs(detail::standard_profile(p, is_g, deriv, big, Method::automatic, kernel_tol));
    sum += k * std::pow(big, d) / decay;  // int_R^inf rho^{d-1} C rho^{-d-decay}
  }
  return sphere * sum;
}

}  // namespace detail

/// int |K(t, y)| dy. The profile integral does not depend on t or a and is
/// computed once per (beta, alpha, dim, which, tol), then rescaled.
inline double l1_norm(const KernelParams& p, double t, Which which, double tol = 1e-9,
                      int jobs = 1) {
  p.validate();
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("t must be positive");
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  if (p.dim > 2) throw DomainError("l1_norm supports dim 1 and 2");
  using Key = std::tuple<double, double, int, int, double>;
  static std::map<Key, std::shared_ptr<const double>> cache;
  static std::mutex mu;
  const Key key{p.beta, p.alpha, p.dim, static_cast<int>(which), tol};
  const double base =
      *stable::detail::cached(cache, mu, key, [&] { return detail::standard_l1(p, which, tol, jobs); });
  double out = base;
  if (which == Which::gradS || which == Which::gradG) out /= p.scale(t);
  if (which == Which::G || which == Which::gradG) out *= std::pow(t, p.beta - 1.0);
  return out;
}

}  // namespace fracgreen::kernels
