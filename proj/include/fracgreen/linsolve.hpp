#pragma once

// Spectral mild solver for
//     D_t^beta f = -a (-Delta)^{alpha/2} f + h,   f(0) = f0,
// on a periodic grid. Per Fourier mode with lambda = a |p|^alpha,
//     f^(t) = E_{beta,1}(-lambda t^beta) f0^
//           + int_0^t (t-s)^{beta-1} E_{beta,beta}(-lambda (t-s)^beta) h^(s) ds.
// The Duhamel integral uses product integration: h^ is interpolated linearly
// on each time panel and the singular moments are exact,
//     int_0^T tau^{beta-1} E_{beta,beta}(-lambda tau^beta) dtau = T^beta E_{beta,beta+1}(-lambda T^beta),
//     int_0^T tau^beta E_{beta,beta}(-lambda tau^beta) dtau
//         = T^{beta+1} [E_{beta,beta+1} - E_{beta,beta+2}](-lambda T^beta).

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracgreen/error.hpp"
#include "fracgreen/field.hpp"
#include "fracgreen/kernels.hpp"
#include "fracgreen/parallel.hpp"
#include "fracgreen/specfn.hpp"

namespace fracgreen::linsolve {

using kernels::KernelParams;

/// t_k = T k / N, k = 0..N.
inline std::vector<double> uniform_times(double horizon, int steps) {
  if (!(horizon > 0.0) || steps < 1) throw DomainError("time grid: need T > 0 and N >= 1");
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) t[k] = horizon * k / steps;
  return t;
}

/// t_k = T (k / N)^r, k = 0..N; r > 1 clusters nodes near t = 0.
inline std::vector<double> graded_times(double horizon, int steps, double grading) {
  if (!(horizon > 0.0) || steps < 1 || !(grading >= 1.0))
    throw DomainError("time grid: need T > 0, N >= 1 and grading >= 1");
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) t[k] = horizon * std::pow(static_cast<double>(k) / steps, grading);
  return t;
}

using Forcing = std::function<Field(double, const Grid&)>;

struct LinearProblem {
  KernelParams params;
  Field f0;
  Forcing forcing;  // empty means h = 0
  std::vector<double> time_grid;

  void validate() const {
    params.validate();
    f0.grid.validate();
    if (f0.grid.dim != params.dim) throw DomainError("initial field dimension does not match dim");
    if (f0.values.size() != f0.grid.size()) throw DomainError("initial field has wrong size");
    for (double v : f0.values)
      if (!std::isfinite(v)) throw DomainError("initial field must be finite");
    if (time_grid.size() < 2 || time_grid.front() != 0.0)
      throw DomainError("time grid must start at 0 and have at least two levels");
    for (std::size_t k = 1; k < time_grid.size(); ++k)
      if (!(time_grid[k] > time_grid[k - 1])) throw DomainError("time grid must be increasing");
  }
};

namespace detail {

// Modes grouped by their symbol value; all symbols are radial.
struct ModeGroups {
  std::vector<double> lambda;
  std::vector<std::vector<std::size_t>> modes;
};

inline ModeGroups group_modes(const Grid& g, double a, double alpha) {
  std::map<double, std::size_t> index;
  ModeGroups out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double pn = g.frequency_norm(i);
    auto [it, fresh] = index.try_emplace(pn, out.lambda.size());
    if (fresh) {
      out.lambda.push_back(a * std::pow(pn, alpha));
      out.modes.emplace_back();
    }
    out.modes[it->second].push_back(i);
  }
  return out;
}

inline double ml_real(double beta, double gamma, double x) {
  return specfn::ml(specfn::MLParams{beta, gamma}, x, 1e-14).value;
}

// Antiderivatives of the two product-integration moments at T >= 0.
struct Moments {
  double f0 = 0.0;  // T^beta E_{beta,beta+1}(-lambda T^beta)
  double f1 = 0.0;  // T^{beta+1} [E_{beta,beta+1} - E_{beta,beta+2}](-lambda T^beta)
};

inline Moments moments(double beta, double lambda, double big_t) {
  if (big_t <= 0.0) return {};
  const double tb = std::pow(big_t, beta);
  const double z = -lambda * tb;
  const double e1 = ml_real(beta, beta + 1.0, z);
  const double e2 = ml_real(beta, beta + 2.0, z);
  return {tb * e1, tb * big_t * (e1 - e2)};
}

inline bool is_uniform(const std::vector<double>& t) {
  const std::size_t m = t.size() - 1;
  const double dt = t.back() / static_cast<double>(m);
  for (std::size_t k = 0; k <= m; ++k)
    if (std::abs(t[k] - dt * static_cast<double>(k)) > 1e-13 * t.back()) return false;
  return true;
}

}  // namespace detail

/// f at time t with h = 0: each mode multiplied by E_{beta,1}(-lambda t^beta).
inline Field propagate_homogeneous(const LinearProblem& problem, double t) {
  problem.validate();
  if (t < 0.0) throw DomainError("time must be nonnegative");
  if (t == 0.0) return Field(problem.f0.grid, 0.0, problem.f0.values);
  const auto& p = problem.params;
  const auto groups = detail::group_modes(problem.f0.grid, p.a, p.alpha);
  auto spec = problem.f0.spectrum();
  const double tb = std::pow(t, p.beta);
  for (std::size_t gi = 0; gi < groups.lambda.size(); ++gi) {
    const double e = detail::ml_real(p.beta, 1.0, -groups.lambda[gi] * tb);
    for (std::size_t m : groups.modes[gi]) spec[m] *= e;
  }
  return Field::from_spectrum(problem.f0.grid, t, std::move(spec));
}

/// Per-mode propagation data for a fixed (params, grid, time grid). The
/// product-integration weights of a mode group are built the first time the
/// group sees nonzero forcing and reused afterwards, so repeated solves on the
/// same grids (Picard iterations) only pay for FFTs and weighted sums.
class DuhamelPlan {
 public:
  DuhamelPlan(const KernelParams& params, const Grid& grid, std::vector<double> times)
      : params_(params), grid_(grid), times_(std::move(times)) {
    params_.validate();
    grid_.validate();
    if (times_.size() < 2 || times_.front() != 0.0)
      throw DomainError("time grid must start at 0 and have at least two levels");
    for (std::size_t k = 1; k < times_.size(); ++k)
      if (!(times_[k] > times_[k - 1])) throw DomainError("time grid must be increasing");
    groups_ = detail::group_modes(grid_, params_.a, params_.alpha);
    uniform_ = detail::is_uniform(times_);
    slots_.resize(groups_.lambda.size());
    once_ = std::make_unique<std::once_flag[]>(groups_.lambda.size());
    locks_ = std::make_unique<std::mutex[]>(groups_.lambda.size());
  }

  const Grid& grid() const { return grid_; }
  const std::vector<double>& times() const { return times_; }
  const KernelParams& params() const { return params_; }

  /// Spectra at every level of
  ///   E_{beta,1}(-lambda t^beta) f0^ + product-integrated Duhamel term of h^.
  /// h_hat is empty (h = 0) or holds one spectrum per level.
  std::vector<std::vector<cplx>> apply(const std::vector<cplx>& f0_hat,
                                       const std::vector<std::vector<cplx>>& h_hat, int jobs = 1) const {
    const std::size_t levels = times_.size();
    if (!h_hat.empty() && h_hat.size() != levels)
      throw DomainError("forcing must have one spectrum per time level");
    double h_scale = 0.0;
    for (const auto& lvl : h_hat)
      for (const auto& v : lvl) h_scale = std::max(h_scale, std::abs(v));

    std::vector<std::vector<cplx>> out(levels, std::vector<cplx>(grid_.size()));
    parallel_for(groups_.lambda.size(), jobs, [&](std::size_t gi) {
      const auto& modes = groups_.modes[gi];
      // groups whose forcing sits at round-off level carry no Duhamel term
      bool forced = false;
      for (const auto& lvl : h_hat)
        for (std::size_t m : modes) forced = forced || std::abs(lvl[m]) > 1e-15 * h_scale;
      const Slot& slot = prepare(gi, forced);
      for (std::size_t n = 0; n < levels; ++n) {
        for (std::size_t m : modes) out[n][m] = slot.hom[n] * f0_hat[m];
        if (!forced || n == 0) continue;
        for (std::size_t k = 0; k < n; ++k) {
          const auto [w_left, w_right] = weights(slot, n, k);
          for (std::size_t m : modes) out[n][m] += w_left * h_hat[k][m] + w_right * h_hat[k + 1][m];
        }
      }
    });
    return out;
  }

 private:
  struct Slot {
    std::vector<double> hom;
    std::vector<detail::Moments> moments;  // by index difference (uniform) or packed triangle
    bool has_moments = false;
  };

  const Slot& prepare(std::size_t gi, bool need_moments) const {
    std::call_once(once_[gi], [&] {
      Slot& s = slots_[gi];
      s.hom.resize(times_.size());
      for (std::size_t n = 0; n < times_.size(); ++n)
        s.hom[n] = n == 0 ? 1.0
                          : detail::ml_real(params_.beta, 1.0,
                                            -groups_.lambda[gi] * std::pow(times_[n], params_.beta));
    });
    if (need_moments) {
      std::lock_guard lock(locks_[gi]);
      Slot& s = slots_[gi];
      if (!s.has_moments) {
        const double lam = groups_.lambda[gi];
        const std::size_t levels = times_.size();
        if (uniform_) {
          s.moments.resize(levels);
          for (std::size_t j = 0; j < levels; ++j) s.moments[j] = detail::moments(params_.beta, lam, times_[j]);
        } else {
          s.moments.resize(levels * (levels + 1) / 2);
          for (std::size_t n = 0; n < levels; ++n)
            for (std::size_t k = 0; k <= n; ++k)
              s.moments[n * (n + 1) / 2 + k] = detail::moments(params_.beta, lam, times_[n] - times_[k]);
        }
        s.has_moments = true;
      }
    }
    return slots_[gi];
  }

  // moments at T = t_n - t_k
  const detail::Moments& moment(const Slot& s, std::size_t n, std::size_t k) const {
    return uniform_ ? s.moments[n - k] : s.moments[n * (n + 1) / 2 + k];
  }

  std::pair<double, double> weights(const Slot& s, std::size_t n, std::size_t k) const {
    // panel [t_k, t_{k+1}] in tau = t_n - s covers [A, B]
    const double a_lo = times_[n] - times_[k + 1];
    const double b_hi = times_[n] - times_[k];
    const double dt = times_[k + 1] - times_[k];
    const double i0 = moment(s, n, k).f0 - moment(s, n, k + 1).f0;
    const double i1 = moment(s, n, k).f1 - moment(s, n, k + 1).f1;
    return {(i1 - a_lo * i0) / dt, (b_hi * i0 - i1) / dt};  // weights of h(t_k), h(t_{k+1})
  }

  KernelParams params_;
  Grid grid_;
  std::vector<double> times_;
  detail::ModeGroups groups_;
  bool uniform_ = false;
  mutable std::vector<Slot> slots_;
  std::unique_ptr<std::once_flag[]> once_;
  std::unique_ptr<std::mutex[]> locks_;  // one per group, guards its moment table
};

/// Mild solution at every level of the time grid.
inline std::vector<Field> solve_linear(const LinearProblem& problem, int jobs = 1) {
  problem.validate();
  const Grid& g = problem.f0.grid;
  const auto& t = problem.time_grid;
  const DuhamelPlan plan(problem.params, g, t);

  std::vector<std::vector<cplx>> h_hat;
  if (problem.forcing) {
    h_hat.reserve(t.size());
    for (double tk : t) {
      const Field h = problem.forcing(tk, g);
      if (!(h.grid == g)) throw DomainError("forcing returned a field on a different grid");
      h_hat.push_back(h.spectrum());
    }
  }
  auto spec = plan.apply(problem.f0.spectrum(), h_hat, jobs);

  std::vector<Field> out;
  out.reserve(t.size());
  for (std::size_t n = 0; n < t.size(); ++n) out.push_back(Field::from_spectrum(g, t[n], std::move(spec[n])));
  out.front().values = problem.f0.values;
  return out;
}

/// L1-scheme Caputo derivative of a trajectory at level n >= 1 (nonuniform grid form).
inline Field caputo_l1(const std::vector<Field>& f, std::size_t n, double beta) {
  if (n == 0 || n >= f.size()) throw DomainError("caputo_l1: level out of range");
  Field out(f[n].grid, f[n].time);
  const double tn = f[n].time;
  const double c = 1.0 / std::tgamma(2.0 - beta);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = (std::pow(tn - f[k].time, 1.0 - beta) - std::pow(tn - f[k + 1].time, 1.0 - beta)) /
                     (f[k + 1].time - f[k].time) * c;
    for (std::size_t i = 0; i < out.values.size(); ++i)
      out.values[i] += w * (f[k + 1].values[i] - f[k].values[i]);
  }
  return out;
}

/// sup over levels with t_n >= interior * t_max of
///   | D^beta f + a (-Delta)^{alpha/2} f - h |,
/// with the Caputo derivative by the L1 scheme and the operator applied
/// spectrally. forcing may be empty (h = 0) or hold one field per level.
inline double caputo_residual(const std::vector<Field>& fields, const KernelParams& params,
                              const std::vector<Field>& forcing = {}, double interior = 0.5) {
  params.validate();
  if (fields.size() < 4) throw DomainError("caputo_residual: need at least 4 time levels");
  if (!forcing.empty() && forcing.size() != fields.size())
    throw DomainError("caputo_residual: forcing must have one field per level");
  const double t_max = fields.back().time;
  double worst = 0.0;
  for (std::size_t n = 1; n < fields.size(); ++n) {
    if (fields[n].time < interior * t_max) continue;
    const Field d = caputo_l1(fields, n, params.beta);
    const Field lap = fractional_laplacian(fields[n], params.a, params.alpha);
    for (std::size_t i = 0; i < d.values.size(); ++i) {
      double r = d.values[i] + lap.values[i];
      if (!forcing.empty()) r -= forcing[n].values[i];
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

}  // namespace fracgreen::linsolve
