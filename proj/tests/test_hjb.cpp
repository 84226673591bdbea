#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fracgreen/hjb.hpp"
#include "fracgreen/linsolve.hpp"
#include "fracgreen/specfn.hpp"

namespace {

using namespace fracgreen;
using hjb::Hamiltonian;
using hjb::HjbProblem;
using hjb::PicardError;
constexpr double pi = std::numbers::pi;

Grid periodic(int n) { return Grid::cube(1, n, 2.0 * pi); }

Field smooth_initial(const Grid& g) {
  return Field::sample(g, 0.0, [](auto y) { return std::exp(std::cos(y[0])); });
}

double sup_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

TEST(LemmaBound, DocumentedValues) {
  // (beta - beta/alpha) L^n (K t^e)^n / n^{n e + 1}, e = beta - beta/alpha, K = 1/e
  const auto b = hjb::lemma_bound_sequence(0.5, 2.0, 1.0, 1.0, 3);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_NEAR(b[0], 1.0, 1e-15);
  EXPECT_NEAR(b[1], 0.25 * 16.0 / std::pow(2.0, 1.5), 1e-14);
  EXPECT_NEAR(b[2], 0.25 * 64.0 / std::pow(3.0, 1.75), 1e-14);
  // independent arithmetic at another point
  const double e = 0.7 - 0.7 / 1.4;
  const double want = e * std::pow(2.0, 4) * std::pow(std::pow(0.3, e) / e, 4) / std::pow(4.0, 4 * e + 1.0);
  EXPECT_NEAR(hjb::lemma_bound_sequence(0.7, 1.4, 2.0, 0.3, 4)[3] / want, 1.0, 1e-13);
}

TEST(LemmaBound, ZeroLipschitzAndSummability) {
  for (double v : hjb::lemma_bound_sequence(0.5, 1.5, 0.0, 2.0, 10)) EXPECT_EQ(v, 0.0);
  const auto b = hjb::lemma_bound_sequence(0.5, 2.0, 0.5, 0.5, 80);
  double prev = 1.0;
  for (int n : {10, 20, 40}) {
    const double q = b[2 * n - 1] / b[n - 1];
    EXPECT_LT(q, 1e-2 * prev) << n;
    prev = q;
  }
  for (double v : b) EXPECT_TRUE(std::isfinite(v));
  EXPECT_THROW(hjb::lemma_bound_sequence(0.5, 1.0, 1.0, 1.0, 3), DomainError);
  EXPECT_THROW(hjb::lemma_bound_sequence(1.0, 1.5, 1.0, 1.0, 3), DomainError);
  EXPECT_THROW(hjb::lemma_bound_sequence(0.5, 1.5, -1.0, 1.0, 3), DomainError);
}

TEST(Hamiltonians, SpotCheck) {
  EXPECT_NO_THROW(hjb::spot_check(Hamiltonian::sine(2.0), 1));
  EXPECT_NO_THROW(hjb::spot_check(Hamiltonian::advection({0.3, -0.4}), 2));
  EXPECT_NO_THROW(hjb::spot_check(Hamiltonian::constant(-1.5), 3));
  Hamiltonian understated = Hamiltonian::sine(2.0);
  understated.lip_p = 0.5;
  EXPECT_THROW(hjb::spot_check(understated, 1), DomainError);
  Hamiltonian bad_bound = Hamiltonian::constant(2.0);
  bad_bound.bound_at_zero = 1.0;
  EXPECT_THROW(hjb::spot_check(bad_bound, 1), DomainError);
  Hamiltonian negative = Hamiltonian::zero();
  negative.lip_p = -1.0;
  EXPECT_THROW(negative.validate(), DomainError);
}

TEST(Psi, ZeroHamiltonianGivesHomogeneousPropagation) {
  const Grid g = periodic(32);
  const Field f0 = smooth_initial(g);
  const HjbProblem pr{{0.5, 1.5, 1.0, 1}, f0, Hamiltonian::zero(), linsolve::uniform_times(1.0, 8)};
  hjb::Trajectory arbitrary;
  for (double t : pr.time_grid) arbitrary.push_back(Field::sample(g, t, [&](auto y) { return std::sin(3 * y[0]) * t; }));
  const auto out = hjb::psi_apply(pr, arbitrary);
  const linsolve::LinearProblem lin{pr.params, f0, {}, pr.time_grid};
  for (const auto& f : out) EXPECT_LE(sup_diff(f, linsolve::propagate_homogeneous(lin, f.time)), 1e-13);
}

TEST(Psi, ConstantHamiltonianIsLinearSolve) {
  const Grid g = periodic(32);
  const Field f0 = smooth_initial(g);
  const HjbProblem pr{{0.6, 1.8, 1.0, 1}, f0, Hamiltonian::constant(0.75), linsolve::uniform_times(1.0, 8)};
  const auto a = hjb::psi_apply(pr, hjb::constant_extension(f0, pr.time_grid));
  hjb::Trajectory other;
  for (double t : pr.time_grid) other.push_back(Field::sample(g, t, [&](auto y) { return std::cos(y[0] + t); }));
  const auto b = hjb::psi_apply(pr, other);
  const linsolve::Forcing c = [](double t, const Grid& gg) {
    return Field(gg, t, std::vector<double>(gg.size(), 0.75));
  };
  const auto lin = linsolve::solve_linear({pr.params, f0, c, pr.time_grid});
  for (std::size_t n = 0; n < lin.size(); ++n) {
    EXPECT_LE(sup_diff(a[n], lin[n]), 1e-13);
    EXPECT_LE(sup_diff(b[n], lin[n]), 1e-13);
  }
}

TEST(Picard, ZeroHamiltonianNeedsOneCorrection) {
  const Grid g = periodic(32);
  const HjbProblem pr{{0.5, 1.5, 1.0, 1}, smooth_initial(g), Hamiltonian::zero(), linsolve::uniform_times(1.0, 10)};
  const auto r = hjb::picard_solve(pr);
  EXPECT_TRUE(r.report.converged);
  EXPECT_EQ(r.report.iterations, 2);
  ASSERT_EQ(r.report.diffs.size(), 2u);
  EXPECT_GT(r.report.diffs[0], 0.0);
  EXPECT_EQ(r.report.diffs[1], 0.0);
}

// H = b p: per mode the fixed point is E_beta((-a|p|^alpha + i b p) t^beta) f0^(p).
TEST(Picard, AdvectionMatchesComplexMittagLeffler) {
  const double beta = 0.5, alpha = 1.5, a = 1.0, b = 0.7;
  const Grid g = periodic(32);
  const Field f0 = smooth_initial(g);
  const HjbProblem pr{{beta, alpha, a, 1}, f0, Hamiltonian::advection({b}),
                      linsolve::graded_times(1.0, 160, (2.0 - beta) / beta)};
  const auto r = hjb::picard_solve(pr, 1e-11, 80);
  EXPECT_TRUE(r.report.converged);
  const auto f0_hat = f0.spectrum();
  double err = 0.0;
  for (const auto& f : r.solution) {
    auto s = f0_hat;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double p = g.frequency(i)[0];
      // the Nyquist mode has no spectral derivative, so it only decays
      const cplx z = cplx(-a * std::pow(std::abs(p), alpha), g.is_nyquist(0, i) ? 0.0 : b * p) * std::pow(f.time, beta);
      s[i] *= specfn::ml(specfn::MLParams{beta, 1.0}, z, 1e-14).value;
    }
    err = std::max(err, sup_diff(Field::from_spectrum(g, f.time, s), f));
  }
  EXPECT_LE(err, 1e-5);
}

class SinePicard : public ::testing::Test {
 protected:
  static constexpr double tol = 1e-10;
  Grid g = periodic(32);
  HjbProblem problem(double lip, int steps = 40, int n = 32) const {
    const Grid gg = periodic(n);
    return {{0.5, 1.5, 1.0, 1}, smooth_initial(gg), Hamiltonian::sine(lip), linsolve::uniform_times(1.0, steps)};
  }
};

TEST_F(SinePicard, FixedPointAndReport) {
  const auto pr = problem(1.0);
  const auto r = hjb::picard_solve(pr, tol);
  EXPECT_TRUE(r.report.converged);
  EXPECT_LE(hjb::c1_distance(hjb::psi_apply(pr, r.solution), r.solution), 2.0 * tol);
  EXPECT_EQ(r.report.diffs.size(), static_cast<std::size_t>(r.report.iterations));
  EXPECT_EQ(r.report.ratios.size(), r.report.diffs.size() - 1);
  EXPECT_EQ(r.report.lemma_bound.size(), static_cast<std::size_t>(r.report.iterations));
  EXPECT_LE(r.report.diffs.back(), tol);
  const auto j = r.report.to_json();
  for (const char* key : {"beta", "alpha", "L", "iterations", "diffs", "ratios", "lemma_bound", "converged"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["L"], 1.0);
  EXPECT_EQ(j["converged"], true);
  EXPECT_EQ(j["iterations"], r.report.iterations);
}

TEST_F(SinePicard, UniquenessFromTwoStarts) {
  const auto pr = problem(1.0);
  const auto a = hjb::picard_solve(pr, tol);
  hjb::Trajectory start;
  const linsolve::LinearProblem lin{pr.params, pr.f0, {}, pr.time_grid};
  for (double t : pr.time_grid) start.push_back(linsolve::propagate_homogeneous(lin, t));
  const auto b = hjb::picard_solve(pr, tol, 60, 1, start);
  EXPECT_LE(hjb::c1_distance(a.solution, b.solution), 5.0 * tol);
}

TEST_F(SinePicard, ContractionShrinksWithHorizon) {
  const Field f0 = smooth_initial(periodic(64));
  double prev = 1e300;
  for (double horizon : {1.0, 0.5, 0.25}) {
    const HjbProblem pr{{0.5, 1.5, 1.0, 1}, f0, Hamiltonian::sine(2.0),
                        linsolve::graded_times(horizon, 40, 3.0)};
    const auto r = hjb::picard_solve(pr, 1e-9, 200);
    ASSERT_GE(r.report.ratios.size(), 1u);
    EXPECT_LE(r.report.ratios[0], prev) << horizon;
    prev = r.report.ratios[0];
  }
}

TEST_F(SinePicard, GradientBoundStableUnderRefinement) {
  double sup_grad[2], sup_lap[2];
  for (int i = 0; i < 2; ++i) {
    const auto r = hjb::picard_solve(problem(1.0, 20, 32 << i), tol);
    sup_grad[i] = sup_lap[i] = 0.0;
    for (const auto& f : r.solution) {
      const Field d = spectral_derivative(f, 0);
      sup_grad[i] = std::max(sup_grad[i], d.sup_norm());
      sup_lap[i] = std::max(sup_lap[i], spectral_derivative(d, 0).sup_norm());
    }
  }
  EXPECT_TRUE(std::isfinite(sup_grad[0]));
  EXPECT_LE(std::abs(sup_grad[1] / sup_grad[0] - 1.0), 0.02);
  EXPECT_LE(std::abs(sup_lap[1] / sup_lap[0] - 1.0), 0.02);
}

TEST_F(SinePicard, CaputoResidualShrinksUnderTimeRefinement) {
  std::vector<double> res;
  for (int steps : {20, 40, 80}) {
    const auto pr = problem(0.5, steps);
    const auto r = hjb::picard_solve(pr, 1e-12);
    std::vector<Field> h;
    for (const auto& f : r.solution) h.push_back(hjb::hamiltonian_field(pr.hamiltonian, f));
    res.push_back(linsolve::caputo_residual(r.solution, pr.params, h));
  }
  EXPECT_LT(res[1], res[0]);
  EXPECT_LT(res[2], res[1]);
  const double slope = std::log(res[0] / res[2]) / std::log(4.0);
  EXPECT_NEAR(slope, 2.0 - 0.5, 0.2);
}

TEST_F(SinePicard, NonConvergenceCarriesReport) {
  try {
    hjb::picard_solve(problem(1.0), tol, 2);
    FAIL() << "expected PicardError";
  } catch (const PicardError& e) {
    EXPECT_EQ(e.kind(), PicardError::Kind::not_converged);
    EXPECT_EQ(e.report().iterations, 2);
    EXPECT_FALSE(e.report().converged);
    EXPECT_EQ(e.report().diffs.size(), 2u);
  }
}

TEST(Picard, DivergenceIsReported) {
  const Grid g = periodic(32);
  // quadratic growth in p with a declared constant it does not honour
  Hamiltonian h{[](double, std::span<const double>, std::span<const double> p) { return 40.0 * p[0] * p[0]; },
                1.0, 0.0, 0.0};
  const HjbProblem pr{{0.5, 1.5, 1.0, 1}, smooth_initial(g), h, linsolve::uniform_times(2.0, 20)};
  try {
    hjb::picard_solve(pr, 1e-10, 200);
    FAIL() << "expected PicardError";
  } catch (const PicardError& e) {
    EXPECT_NE(e.kind(), PicardError::Kind::not_converged);
    EXPECT_FALSE(e.report().converged);
    EXPECT_FALSE(e.report().diffs.empty());
  }
}

TEST(Picard, InconsistentContractionIsFlagged) {
  const Grid g = periodic(32);
  // the iteration map is expansive for several steps while the declared
  // constant makes the bound tiny
  Hamiltonian h = Hamiltonian::sine(30.0);
  h.lip_p = 1e-3;
  const HjbProblem pr{{0.5, 1.5, 1.0, 1}, smooth_initial(g), h, linsolve::uniform_times(1.0, 20)};
  try {
    hjb::picard_solve(pr, 1e-12, 200);
    FAIL() << "expected PicardError";
  } catch (const PicardError& e) {
    EXPECT_EQ(e.kind(), PicardError::Kind::inconsistent);
  }
}

TEST(Picard, RejectsBadArguments) {
  const Grid g = periodic(16);
  const HjbProblem pr{{0.5, 1.5, 1.0, 1}, smooth_initial(g), Hamiltonian::zero(), linsolve::uniform_times(1.0, 4)};
  EXPECT_THROW(hjb::picard_solve(pr, 0.0), DomainError);
  EXPECT_THROW(hjb::picard_solve(pr, 1e-10, 0), DomainError);
  EXPECT_THROW(hjb::picard_solve(pr, 1e-10, 10, 1, hjb::Trajectory(2)), DomainError);
  HjbProblem empty = pr;
  empty.hamiltonian.eval = nullptr;
  EXPECT_THROW(hjb::picard_solve(empty), DomainError);
}

}  // namespace
