#pragma once

// Nonlinear mild equation
//     f(t) = S_{beta,1}(t) * f0 + int_0^t G_beta(t-s) * H(s, ., grad f(s, .)) ds
// solved by Picard iteration f_{n+1} = Psi(f_n). Psi reuses the linear
// solver's product integration: H is evaluated in physical space at every
// stored level, interpolated linearly in time and propagated per mode.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fracgreen/error.hpp"
#include "fracgreen/field.hpp"
#include "fracgreen/kernels.hpp"
#include "fracgreen/linsolve.hpp"

namespace fracgreen::hjb {

using kernels::KernelParams;
using linsolve::DuhamelPlan;

struct Hamiltonian {
  std::function<double(double, std::span<const double>, std::span<const double>)> eval;
  double lip_p = 0.0;          // |H(t,y,p) - H(t,y,q)| <= lip_p |p - q|
  double lip_y = 0.0;          // |H(t,y1,p) - H(t,y2,p)| <= lip_y |y1 - y2| (1 + |p|)
  double bound_at_zero = 0.0;  // |H(t,y,0)| <= bound_at_zero

  void validate() const {
    if (!eval) throw DomainError("hamiltonian: eval is empty");
    for (double c : {lip_p, lip_y, bound_at_zero})
      if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("hamiltonian: constants must be finite and >= 0");
  }

  static Hamiltonian zero() {
    return {[](double, std::span<const double>, std::span<const double>) { return 0.0; }, 0.0, 0.0, 0.0};
  }
  static Hamiltonian constant(double c) {
    return {[c](double, std::span<const double>, std::span<const double>) { return c; }, 0.0, 0.0, std::abs(c)};
  }
  /// H = b . p
  static Hamiltonian advection(std::vector<double> b) {
    double norm = 0.0;
    for (double v : b) norm += v * v;
    return {[b](double, std::span<const double>, std::span<const double> p) {
              double s = 0.0;
              for (std::size_t i = 0; i < p.size() && i < b.size(); ++i) s += b[i] * p[i];
              return s;
            },
            std::sqrt(norm), 0.0, 0.0};
  }
  /// H = L sin(p_1)
  static Hamiltonian sine(double lip) {
    return {[lip](double, std::span<const double>, std::span<const double> p) { return lip * std::sin(p[0]); },
            std::abs(lip), 0.0, 0.0};
  }
};

/// Random spot check of the declared constants; throws DomainError on a violation.
inline void spot_check(const Hamiltonian& h, int dim, int samples = 64, unsigned seed = 12345) {
  h.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 3.0);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::vector<double> y(dim), p(dim), q(dim), zero(dim, 0.0);
  for (int s = 0; s < samples; ++s) {
    const double t = ud(rng);
    double dist = 0.0;
    for (int i = 0; i < dim; ++i) {
      y[i] = nd(rng);
      p[i] = nd(rng);
      q[i] = nd(rng);
      dist += (p[i] - q[i]) * (p[i] - q[i]);
    }
    dist = std::sqrt(dist);
    const double hp = h.eval(t, y, p);
    const double hq = h.eval(t, y, q);
    const double slack = 1e-12 * (1.0 + std::abs(hp) + std::abs(hq));
    if (std::abs(hp - hq) > h.lip_p * dist + slack)
      throw DomainError("hamiltonian: declared Lipschitz constant in p is violated");
    if (std::abs(h.eval(t, y, zero)) > h.bound_at_zero * (1.0 + 1e-12) + 1e-300)
      throw DomainError("hamiltonian: declared bound at p = 0 is violated");
  }
}

/// n-th factor, n = 1..n_max, of
///   (beta - beta/alpha) L^n (K t^{beta - beta/alpha})^n / n^{n beta - n beta/alpha + 1},
/// K = 1 / (beta - beta/alpha).
inline std::vector<double> lemma_bound_sequence(double beta, double alpha, double lip, double t, int n_max) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0,1)");
  if (!(alpha > 1.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (1,2]");
  if (!(lip >= 0.0)) throw DomainError("Lipschitz constant must be >= 0");
  if (!(t > 0.0)) throw DomainError("time must be positive");
  const double e = beta - beta / alpha;
  const double k = 1.0 / e;
  std::vector<double> out;
  for (int n = 1; n <= n_max; ++n) {
    if (lip == 0.0) {
      out.push_back(0.0);
      continue;
    }
    // in logs, the power n^{n e} overflows long before the ratio does
    const double lg = std::log(e) + n * (std::log(lip) + std::log(k) + e * std::log(t)) -
                      (n * e + 1.0) * std::log(static_cast<double>(n));
    out.push_back(std::exp(lg));
  }
  return out;
}

struct PicardReport {
  double beta = 0.0;
  double alpha = 0.0;
  double lip = 0.0;
  int iterations = 0;  // number of Psi applications
  std::vector<double> diffs;   // diffs[n] = ||f_{n+1} - f_n||_{C1}, f_0 the starting trajectory
  std::vector<double> ratios;  // ratios[n] = diffs[n+1] / diffs[n]
  std::vector<double> lemma_bound;
  bool converged = false;

  nlohmann::json to_json() const {
    return {{"beta", beta},   {"alpha", alpha}, {"L", lip},
            {"iterations", iterations}, {"diffs", diffs}, {"ratios", ratios},
            {"lemma_bound", lemma_bound}, {"converged", converged}};
  }
};

class PicardError : public ConvergenceError {
 public:
  enum class Kind { not_converged, diverged, inconsistent };
  PicardError(const std::string& what, Kind kind, PicardReport report)
      : ConvergenceError(what), kind_(kind), report_(std::move(report)) {}
  Kind kind() const { return kind_; }
  const PicardReport& report() const { return report_; }

 private:
  Kind kind_;
  PicardReport report_;
};

struct HjbProblem {
  KernelParams params;
  Field f0;
  Hamiltonian hamiltonian;
  std::vector<double> time_grid;

  void validate() const {
    linsolve::LinearProblem{params, f0, {}, time_grid}.validate();
    hamiltonian.validate();
  }
};

using Trajectory = std::vector<Field>;

/// sup over levels of the C1 norm of a - b.
inline double c1_distance(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) throw DomainError("c1_distance: trajectories differ in length");
  double worst = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    Field d(a[n].grid, a[n].time);
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] = a[n].values[i] - b[n].values[i];
    worst = std::max(worst, c1_norm(d));
  }
  return worst;
}

inline double c1_sup(const Trajectory& f) {
  double worst = 0.0;
  for (const auto& x : f) worst = std::max(worst, c1_norm(x));
  return worst;
}

/// H(t_n, y, grad f_n(y)) on the grid.
inline Field hamiltonian_field(const Hamiltonian& h, const Field& f) {
  const auto grad = spectral_gradient(f);
  Field out(f.grid, f.time);
  std::vector<double> p(static_cast<std::size_t>(f.grid.dim));
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const auto y = f.grid.point(i);
    for (int ax = 0; ax < f.grid.dim; ++ax) {
      p[ax] = grad[ax].values[i];
      if (!std::isfinite(p[ax])) throw ConvergenceError("gradient is not finite; iteration diverged");
    }
    out.values[i] = h.eval(f.time, std::span<const double>(y.data(), p.size()), p);
  }
  return out;
}

/// Psi(f) on the plan's time grid.
inline Trajectory psi_apply(const DuhamelPlan& plan, const Hamiltonian& h, const Field& f0, const Trajectory& f,
                            int jobs = 1) {
  const auto& t = plan.times();
  if (f.size() != t.size()) throw DomainError("psi_apply: trajectory must have one field per time level");
  std::vector<std::vector<cplx>> h_hat(t.size());
  parallel_for(t.size(), jobs, [&](std::size_t n) { h_hat[n] = hamiltonian_field(h, f[n]).spectrum(); });
  auto spec = plan.apply(f0.spectrum(), h_hat, jobs);
  Trajectory out;
  out.reserve(t.size());
  for (std::size_t n = 0; n < t.size(); ++n) out.push_back(Field::from_spectrum(f0.grid, t[n], std::move(spec[n])));
  out.front().values = f0.values;
  return out;
}

inline Trajectory psi_apply(const HjbProblem& problem, const Trajectory& f, int jobs = 1) {
  problem.validate();
  const DuhamelPlan plan(problem.params, problem.f0.grid, problem.time_grid);
  return psi_apply(plan, problem.hamiltonian, problem.f0, f, jobs);
}

/// f0 held fixed at every level.
inline Trajectory constant_extension(const Field& f0, const std::vector<double>& times) {
  Trajectory out;
  for (double t : times) out.emplace_back(f0.grid, t, f0.values);
  return out;
}

struct PicardResult {
  Trajectory solution;
  PicardReport report;
};

/// Iterates Psi from `start` (the constant extension of f0 when empty) until
/// the C1 difference of consecutive iterates is <= tol_c1.
inline PicardResult picard_solve(const HjbProblem& problem, double tol_c1 = 1e-10, int max_iter = 60, int jobs = 1,
                                 Trajectory start = {}) {
  problem.validate();
  if (!(tol_c1 > 0.0)) throw DomainError("tolerance must be positive");
  if (max_iter < 1) throw DomainError("max_iter must be >= 1");
  const auto& p = problem.params;
  const DuhamelPlan plan(p, problem.f0.grid, problem.time_grid);

  PicardReport report;
  report.beta = p.beta;
  report.alpha = p.alpha;
  report.lip = problem.hamiltonian.lip_p;
  auto finish_bound = [&] {
    report.lemma_bound = lemma_bound_sequence(p.beta, p.alpha, report.lip, problem.time_grid.back(),
                                              std::max(report.iterations, 1));
  };

  Trajectory cur = start.empty() ? constant_extension(problem.f0, problem.time_grid) : std::move(start);
  if (cur.size() != problem.time_grid.size()) throw DomainError("starting trajectory has the wrong length");
  const double scale = std::max(1.0, c1_sup(cur));
  int rising = 0;
  while (report.iterations < max_iter) {
    Trajectory next;
    try {
      next = psi_apply(plan, problem.hamiltonian, problem.f0, cur, jobs);
    } catch (const ConvergenceError& e) {
      finish_bound();
      throw PicardError(e.what(), PicardError::Kind::diverged, report);
    }
    ++report.iterations;
    const double d = c1_distance(next, cur);
    report.diffs.push_back(d);
    if (report.diffs.size() >= 2) {
      const double prev = report.diffs[report.diffs.size() - 2];
      report.ratios.push_back(prev > 0.0 ? d / prev : 0.0);
    }
    cur = std::move(next);
    if (!std::isfinite(d) || c1_sup(cur) > 1e6 * scale) {
      finish_bound();
      throw PicardError("Picard iterates exceed 1e6 times the initial scale", PicardError::Kind::diverged, report);
    }
    if (d <= tol_c1) {
      report.converged = true;
      break;
    }
    if (!report.ratios.empty() && report.ratios.back() > 1.0) {
      const auto bound = lemma_bound_sequence(p.beta, p.alpha, report.lip, problem.time_grid.back(),
                                              static_cast<int>(report.ratios.size()));
      rising = bound.back() < 1.0 ? rising + 1 : 0;
    } else {
      rising = 0;
    }
    if (rising >= 3) {
      finish_bound();
      throw PicardError("iterate differences grow while the contraction bound is below 1",
                        PicardError::Kind::inconsistent, report);
    }
  }
  finish_bound();
  if (!report.converged)
    throw PicardError("Picard iteration did not reach tolerance in " + std::to_string(max_iter) + " iterations",
                      PicardError::Kind::not_converged, report);
  return {std::move(cur), std::move(report)};
}

}  // namespace fracgreen::hjb
