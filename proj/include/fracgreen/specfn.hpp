#pragma once

// Scalar special functions: two-parameter Mittag-Leffler E_{beta,gamma},
// reciprocal Gamma, and the Beta function.
//
// E_{beta,gamma}(z) = sum_{k>=0} z^k / Gamma(beta k + gamma).
//
// Evaluation is hybrid: compensated Taylor summation inside |z| <= kTaylorRadius,
// numerical inversion of the Laplace transform
//     L[t^{gamma-1} E_{beta,gamma}(z t^beta)](s) = s^{beta-gamma} / (s^beta - z)
// on an optimal parabolic contour (plus residues of the poles left outside the
// contour) beyond it. On the far negative real axis the algebraic asymptotic
// series is used when it already meets the tolerance. For beta = 1 and
// integer gamma the function is elementary and is evaluated through exp()
// and the downward recurrence.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "fracgreen/error.hpp"

namespace fracgreen::specfn {

using cplx = std::complex<double>;

struct MLParams {
  double beta = 0.5;
  double gamma = 1.0;

  void validate() const {
    if (!(beta > 0.0 && beta <= 1.0))
      throw DomainError("Mittag-Leffler: beta must lie in (0,1], got " + std::to_string(beta));
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
      throw DomainError("Mittag-Leffler: gamma must be nonnegative and finite, got " +
                        std::to_string(gamma));
  }
};

template <class T>
struct EvalResult {
  T value{};
  double abs_error_estimate = 0.0;
  int terms_or_nodes_used = 1;
};

/// Radius of the Taylor branch; the contour branch takes over beyond it.
inline constexpr double kTaylorRadius = 1.0;

/// 1/Gamma(x). Exactly zero at the poles x = 0, -1, -2, ...; negative
/// non-integer arguments go through the reflection formula.
inline double rgamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) return 0.0;
  if (x >= 0.5) {
    if (x > 170.0) return std::exp(-std::lgamma(x));
    return 1.0 / std::tgamma(x);
  }
  // 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi
  const double s = std::sin(std::numbers::pi * x);
  if (1.0 - x > 170.0) {
    const double lg = std::lgamma(1.0 - x);
    return s / std::numbers::pi * std::exp(lg);
  }
  return s * std::tgamma(1.0 - x) / std::numbers::pi;
}

/// B(p,q) = Gamma(p) Gamma(q) / Gamma(p+q).
inline double beta_fn(double p, double q) {
  if (!(p > 0.0) || !(q > 0.0))
    throw DomainError("beta_fn: arguments must be positive, got (" + std::to_string(p) + ", " +
                      std::to_string(q) + ")");
  if (p + q < 170.0) return std::tgamma(p) * std::tgamma(q) / std::tgamma(p + q);
  return std::exp(std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q));
}

namespace detail {

// Neumaier-compensated accumulator for complex terms.
struct CompensatedSum {
  double re = 0.0, im = 0.0, cre = 0.0, cim = 0.0;

  static void add(double& s, double& c, double x) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  void add(cplx x) {
    add(re, cre, x.real());
    add(im, cim, x.imag());
  }
  cplx value() const { return {re + cre, im + cim}; }
};

inline EvalResult<cplx> ml_taylor(double beta, double gamma, cplx z, double tol) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  CompensatedSum sum;
  cplx zk = 1.0;
  double max_term = 0.0;
  int small_run = 0;
  int k = 0;
  double last = 0.0;
  for (; k < 20000; ++k) {
    const cplx term = zk * rgamma(beta * k + gamma);
    const double mag = std::abs(term);
    max_term = std::max(max_term, mag);
    sum.add(term);
    last = mag;
    // terms decrease monotonically once beta k + gamma is past the Gamma minimum
    if (beta * k + gamma > 2.0 && mag <= 0.25 * eps * std::max(1.0, std::abs(sum.value()))) {
      if (++small_run >= 2) break;
    } else {
      small_run = 0;
    }
    zk *= z;
    if (zk == cplx(0.0)) {
      ++k;
      break;
    }
  }
  EvalResult<cplx> r;
  r.value = sum.value();
  r.abs_error_estimate = 2.0 * last + 4.0 * eps * max_term;
  r.terms_or_nodes_used = k + 1;
  if (r.abs_error_estimate > tol * std::max(1.0, std::abs(r.value)))
    throw PrecisionError("Mittag-Leffler Taylor branch: precision not reached", r.value.real(),
                         r.abs_error_estimate);
  return r;
}

struct ContourParams {
  double mu = 0.0;
  double h = 0.0;
  double n = std::numeric_limits<double>::infinity();
};

constexpr double kLogEps = -36.043653389117154;  // log(DBL_EPSILON)

// Optimal parabola for a region bounded by two singularities.
inline ContourParams optimal_param_bounded(double phi_j, double phi_j1, double pj, double qj,
                                           double log_epsilon) {
  constexpr double t = 1.0;
  constexpr double fac = 1.01;
  const double f_max = std::exp(log_epsilon - kLogEps);
  const double sq_phi_j = std::sqrt(phi_j);
  const double threshold = 2.0 * std::sqrt((log_epsilon - kLogEps) / t);
  const double sq_phi_j1 = std::min(std::sqrt(phi_j1), threshold - sq_phi_j);

  double sq_bar_j = 0.0, sq_bar_j1 = 0.0, f_bar = 1.0;
  bool admissible = false;
  if (pj < 1.0e-14 && qj < 1.0e-14) {
    sq_bar_j = sq_phi_j;
    sq_bar_j1 = sq_phi_j1;
    admissible = true;
  } else if (pj < 1.0e-14) {
    sq_bar_j = sq_phi_j;
    const double f_min = sq_phi_j > 0.0 ? fac * std::pow(sq_phi_j / (sq_phi_j1 - sq_phi_j), qj)
                                        : fac;
    if (f_min < f_max) {
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fq = std::pow(f_bar, -1.0 / qj);
      sq_bar_j1 = (2.0 * sq_phi_j1 - fq * sq_phi_j) / (2.0 + fq);
      admissible = true;
    }
  } else if (qj < 1.0e-14) {
    sq_bar_j1 = sq_phi_j1;
    const double f_min = fac * std::pow(sq_phi_j1 / (sq_phi_j1 - sq_phi_j), pj);
    if (f_min < f_max) {
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fp = std::pow(f_bar, -1.0 / pj);
      sq_bar_j = (2.0 * sq_phi_j + fp * sq_phi_j1) / (2.0 - fp);
      admissible = true;
    }
  } else {
    double f_min =
        fac * (sq_phi_j + sq_phi_j1) / std::pow(sq_phi_j1 - sq_phi_j, std::max(pj, qj));
    if (f_min < f_max) {
      f_min = std::max(f_min, 1.5);
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fp = std::pow(f_bar, -1.0 / pj);
      const double fq = std::pow(f_bar, -1.0 / qj);
      const double w = -phi_j1 * t / log_epsilon;
      const double den = 2.0 + w - (1.0 + w) * fp + fq;
      sq_bar_j = ((2.0 + w + fq) * sq_phi_j + fp * sq_phi_j1) / den;
      sq_bar_j1 = (-(1.0 + w) * fq * sq_phi_j + (2.0 + w - (1.0 + w) * fp) * sq_phi_j1) / den;
      admissible = true;
    }
  }
  ContourParams c;
  if (!admissible) return c;
  const double le = log_epsilon - std::log(f_bar);
  const double w = -sq_bar_j1 * sq_bar_j1 * t / le;
  c.mu = std::pow(((1.0 + w) * sq_bar_j + sq_bar_j1) / (2.0 + w), 2);
  c.h = -2.0 * std::numbers::pi / le * (sq_bar_j1 - sq_bar_j) / ((1.0 + w) * sq_bar_j + sq_bar_j1);
  c.n = std::ceil(std::sqrt(1.0 - le / t / c.mu) / c.h);
  return c;
}

// Optimal parabola for the unbounded region right of the last singularity.
inline ContourParams optimal_param_unbounded(double phi_j, double pj, double log_epsilon) {
  constexpr double t = 1.0;
  const double sq_phi_j = std::sqrt(phi_j);
  double phibar = phi_j > 0.0 ? phi_j * 1.01 : 0.01;
  double sq_phibar = std::sqrt(phibar);
  constexpr double f_min = 1.0, f_max = 10.0, f_tar = 5.0;

  double n = 0.0, a = 0.0, sq_mu = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double phi_t = phibar * t;
    const double le_phi_t = log_epsilon / phi_t;
    n = std::ceil(phi_t / std::numbers::pi *
                  (1.0 - 3.0 * le_phi_t / 2.0 + std::sqrt(1.0 - 2.0 * le_phi_t)));
    a = std::numbers::pi * n / phi_t;
    sq_mu = sq_phibar * std::abs(4.0 - a) / std::abs(7.0 - std::sqrt(1.0 + 12.0 * a));
    const double fbar = std::pow((sq_phibar - sq_phi_j) / sq_mu, -pj);
    if (pj < 1.0e-14 || (f_min < fbar && fbar < f_max)) break;
    sq_phibar = std::pow(f_tar, -1.0 / pj) * sq_mu + sq_phi_j;
    phibar = sq_phibar * sq_phibar;
  }
  ContourParams c;
  c.mu = sq_mu * sq_mu;
  c.h = (-3.0 * a - 2.0 + 2.0 * std::sqrt(1.0 + 12.0 * a)) / (4.0 - a) / n;
  c.n = n;

  // keep round-off under control
  const double threshold = (log_epsilon - kLogEps) / t;
  if (c.mu > threshold) {
    const double q = std::abs(pj) < 1.0e-14 ? 0.0 : std::pow(f_tar, -1.0 / pj) * std::sqrt(c.mu);
    phibar = std::pow(q + sq_phi_j, 2);
    if (phibar < threshold) {
      const double w = std::sqrt(kLogEps / (kLogEps - log_epsilon));
      const double u = std::sqrt(-phibar * t / kLogEps);
      c.mu = threshold;
      c.n = std::ceil(w * log_epsilon / 2.0 / std::numbers::pi / (u * w - 1.0));
      c.h = std::sqrt(kLogEps / (kLogEps - log_epsilon)) / c.n;
    } else {
      c.n = std::numeric_limits<double>::infinity();
      c.h = 0.0;
    }
  }
  return c;
}

inline EvalResult<cplx> ml_contour(double beta, double gamma, cplx z, double tol) {
  constexpr double pi = std::numbers::pi;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double log_epsilon = std::log(tol);

  // singularities of s^{beta-gamma}/(s^beta - z) on the principal sheet
  const double theta = std::arg(z);
  const int kmin = static_cast<int>(std::ceil(-beta / 2.0 - theta / 2.0 / pi));
  const int kmax = static_cast<int>(std::floor(beta / 2.0 - theta / 2.0 / pi));
  struct Sing {
    cplx s;
    double phi;
  };
  std::vector<Sing> sing;
  const double rad = std::pow(std::abs(z), 1.0 / beta);
  for (int k = kmin; k <= kmax; ++k) {
    const cplx s = std::polar(rad, (theta + 2.0 * k * pi) / beta);
    const double phi = (s.real() + std::abs(s)) / 2.0;
    if (phi > 1.0e-15) sing.push_back({s, phi});
  }
  std::stable_sort(sing.begin(), sing.end(),
                   [](const Sing& a, const Sing& b) { return a.phi < b.phi; });

  std::vector<cplx> s_star{0.0};
  std::vector<double> phi{0.0};
  for (const auto& sg : sing) {
    s_star.push_back(sg.s);
    phi.push_back(sg.phi);
  }
  const std::size_t j1 = s_star.size();
  std::vector<double> p(j1, 1.0), q(j1, 1.0);
  p[0] = std::max(0.0, -2.0 * (beta - gamma + 1.0));
  q[j1 - 1] = std::numeric_limits<double>::infinity();
  phi.push_back(std::numeric_limits<double>::infinity());

  std::vector<std::size_t> admissible;
  std::vector<ContourParams> params;
  for (;;) {
    admissible.clear();
    for (std::size_t j = 0; j < j1; ++j)
      if (phi[j] < (log_epsilon - kLogEps) && phi[j] < phi[j + 1]) admissible.push_back(j);
    params.assign(j1, ContourParams{});
    double nmin = std::numeric_limits<double>::infinity();
    for (std::size_t j : admissible) {
      params[j] = (j + 1 < j1) ? optimal_param_bounded(phi[j], phi[j + 1], p[j], q[j], log_epsilon)
                               : optimal_param_unbounded(phi[j], p[j], log_epsilon);
      nmin = std::min(nmin, params[j].n);
    }
    if (nmin > 200.0 && log_epsilon < -2.0)
      log_epsilon += std::log(10.0);
    else
      break;
  }

  std::size_t region = 0;
  for (std::size_t j = 0; j < j1; ++j)
    if (params[j].n < params[region].n) region = j;
  const ContourParams& c = params[region];
  if (!std::isfinite(c.n))
    throw PrecisionError("Mittag-Leffler contour branch: no admissible contour", 0.0,
                         std::numeric_limits<double>::infinity());

  const int n = static_cast<int>(c.n);
  CompensatedSum sum;
  double abs_sum = 0.0;
  for (int k = -n; k <= n; ++k) {
    const double u = c.h * k;
    const cplx s = c.mu * std::pow(cplx(1.0, u), 2);
    const cplx ds = cplx(-2.0 * c.mu * u, 2.0 * c.mu);
    const cplx f = std::pow(s, beta - gamma) / (std::pow(s, beta) - z) * ds;
    const cplx term = std::exp(s) * f;
    abs_sum += std::abs(term);
    sum.add(term);
  }
  cplx value = sum.value() * c.h / (2.0 * pi * cplx(0.0, 1.0));
  for (std::size_t j = region + 1; j < j1; ++j)
    value += 1.0 / beta * std::pow(s_star[j], 1.0 - gamma) * std::exp(s_star[j]);

  EvalResult<cplx> r;
  r.value = value;
  r.abs_error_estimate =
      std::exp(log_epsilon) * std::max(1.0, std::abs(value)) + 4.0 * eps * abs_sum * c.h / (2 * pi);
  r.terms_or_nodes_used = 2 * n + 1;
  return r;
}

// beta = 1, integer gamma = m >= 1: E_{1,1} = exp, E_{1,m+1}(z) = (E_{1,m}(z) - 1/(m-1)!) / z.
inline EvalResult<cplx> ml_elementary(int m, cplx z) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  cplx e = std::exp(z);
  for (int j = 1; j < m; ++j) e = (e - rgamma(static_cast<double>(j))) / z;
  EvalResult<cplx> r;
  r.value = e;
  r.abs_error_estimate = 4.0 * eps * std::abs(e) * m;
  r.terms_or_nodes_used = 1;
  return r;
}

// Negative real axis, beta < 1: the expansion
//   E_{beta,gamma}(-x) ~ -sum_{k>=1} (-x)^{-k} / Gamma(gamma - beta k)
// is purely algebraic (no exponential terms reach arg z = pi), so optimal
// truncation errs by about the smallest term. ok=false when that term is
// still above the tolerance.
inline EvalResult<cplx> ml_negative_asymptotic(double beta, double gamma, double x, double tol, bool& ok) {
  double sum = 0.0, last = std::numeric_limits<double>::infinity();
  double power = 1.0;
  int k = 1;
  ok = false;
  for (; k <= 60; ++k) {
    power /= -x;
    const double term = -power * rgamma(gamma - beta * k);
    // |1/Gamma(a)| <= Gamma(1 - a) / pi for a < 1/2; the envelope ignores the
    // zeros of 1/Gamma so a vanishing term cannot stop the sum early
    const double a = gamma - beta * k;
    const double env = a >= 0.5 ? std::abs(rgamma(a)) : std::exp(std::lgamma(1.0 - a)) / std::numbers::pi;
    const double size = std::abs(power) * env;
    if (size > last) break;
    sum += term;
    last = size;
    if (size < 0.01 * tol * std::max(1.0, std::abs(sum))) {
      ok = true;
      break;
    }
  }
  EvalResult<cplx> r;
  r.value = sum;
  r.abs_error_estimate = last;
  r.terms_or_nodes_used = k;
  return r;
}

/// Beyond this |z| the negative-axis expansion is tried before the contour.
inline constexpr double kAsymptoticStart = 8.0;

}  // namespace detail

/// E_{beta,gamma}(z) for complex z. tol is absolute for |E| <= 1 and
/// relative otherwise; throws PrecisionError when it cannot be met.
inline EvalResult<cplx> ml(const MLParams& params, cplx z, double tol = 1e-12) {
  params.validate();
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError("Mittag-Leffler: argument must be finite");
  if (!(tol > 0.0)) throw DomainError("Mittag-Leffler: tolerance must be positive");
  const double beta = params.beta;
  const double gamma = params.gamma;
  if (z == cplx(0.0)) return {cplx(rgamma(gamma)), 0.0, 1};
  if (beta == 1.0 && gamma >= 1.0 && gamma == std::floor(gamma) && gamma <= 8.0 &&
      std::abs(z) > kTaylorRadius)
    return detail::ml_elementary(static_cast<int>(gamma), z);
  if (std::abs(z) <= kTaylorRadius) return detail::ml_taylor(beta, gamma, z, tol);
  if (beta < 1.0 && z.imag() == 0.0 && z.real() < -detail::kAsymptoticStart) {
    bool ok = false;
    auto r = detail::ml_negative_asymptotic(beta, gamma, -z.real(), tol, ok);
    if (ok) return r;
  }

  // aim one digit below the request; the trapezoid error model is not sharp
  auto r = detail::ml_contour(beta, gamma, z, 0.1 * tol);
  if (r.abs_error_estimate > 10.0 * tol * std::max(1.0, std::abs(r.value)))
    throw PrecisionError("Mittag-Leffler contour branch: precision not reached", r.value.real(),
                         r.abs_error_estimate);
  return r;
}

/// Real-argument overload; the imaginary part vanishes by conjugate symmetry.
inline EvalResult<double> ml(const MLParams& params, double x, double tol = 1e-12) {
  const auto r = ml(params, cplx(x, 0.0), tol);
  return {r.value.real(), r.abs_error_estimate, r.terms_or_nodes_used};
}

/// Shorthand returning only the value.
inline double ml_value(double beta, double gamma, double x, double tol = 1e-12) {
  return ml(MLParams{beta, gamma}, x, tol).value;
}
inline cplx ml_value(double beta, double gamma, cplx z, double tol = 1e-12) {
  return ml(MLParams{beta, gamma}, z, tol).value;
}

struct IdentitySides {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Both sides of
///   x^{beta-1} E_{beta,beta}(-lam x^beta) = -(1/lam) d/dx E_{beta,1}(-lam x^beta).
/// The right side is differentiated term by term: the differentiated series is
/// sum_{k>=1} z^k / Gamma(beta k) = E_{beta,0}(z), giving
///   rhs = x^{beta-1} E_{beta,0}(z) / z,  z = -lam x^beta,
/// so the two sides go through different Mittag-Leffler evaluations.
inline IdentitySides ml_e1_derivative_identity(double beta, double lam, double x,
                                               double tol = 1e-12) {
  if (!(beta > 0.0 && beta <= 1.0))
    throw DomainError("ml_e1_derivative_identity: beta must lie in (0,1]");
  if (!(lam > 0.0)) throw DomainError("ml_e1_derivative_identity: lam must be positive");
  if (!(x > 0.0)) throw DomainError("ml_e1_derivative_identity: x must be positive");
  const double z = -lam * std::pow(x, beta);
  const double xb = std::pow(x, beta - 1.0);
  IdentitySides s;
  s.lhs = xb * ml(MLParams{beta, beta}, z, tol).value;
  s.rhs = xb * ml(MLParams{beta, 0.0}, z, tol).value / z;
  return s;
}

}  // namespace fracgreen::specfn
