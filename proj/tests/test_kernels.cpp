#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fracgreen/kernels.hpp"
#include "fracgreen/stable.hpp"

namespace {

using namespace fracgreen;
using kernels::KernelParams;
using kernels::Method;
using kernels::Which;
constexpr double pi = std::numbers::pi;

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

double gaussian(double s, int d, double r2) { return std::pow(4.0 * pi * s, -0.5 * d) * std::exp(-r2 / (4.0 * s)); }

// int_R K(t, y) dy in d = 1 for a radial kernel, by exp-sinh on the half line.
template <class F>
double half_line_mass(F&& k) {
  boost::math::quadrature::exp_sinh<double> es;
  return 2.0 * es.integrate(k, 1e-12);
}

TEST(Kernels, MassIdentities) {
  for (double beta : {0.3, 0.5, 0.8})
    for (double t : {0.1, 1.0}) {
      const KernelParams p{beta, 1.5, 1.0, 1};
      const double ms = half_line_mass([&](double y) { return kernels::eval_S(p, t, y); });
      const double mg = half_line_mass([&](double y) { return kernels::eval_G(p, t, y); });
      EXPECT_LE(std::abs(ms - 1.0), 1e-6) << beta << " " << t;
      EXPECT_LE(rel(mg, std::pow(t, beta - 1.0) / std::tgamma(beta)), 1e-6) << beta << " " << t;
    }
}

// alpha = 2, beta = 1/2: the mixing density is exp(-x^2/4)/sqrt(pi), so
//   S = int m(x) g(y; 2, t^beta x) dx,  G = t^{beta-1} beta int x m(x) g(y; 2, t^beta x) dx
// with g the heat kernel, all in closed form under the integral.
TEST(Kernels, GaussianMixtureClosedForm) {
  const double beta = 0.5;
  boost::math::quadrature::exp_sinh<double> es;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ut(-2.0, 1.0), uy(0.0, 4.0);
  for (int d : {1, 2})
    for (int i = 0; i < 20; ++i) {
      const double t = std::pow(10.0, ut(rng));
      const double r = uy(rng) * std::pow(t, beta / 2.0);
      std::vector<double> y(static_cast<std::size_t>(d), 0.0);
      y[0] = r;
      auto m = [](double x) { return std::exp(-x * x / 4.0) / std::sqrt(pi); };
      const double tb = std::pow(t, beta);
      const double s_want = es.integrate([&](double x) { return m(x) * gaussian(tb * x, d, r * r); }, 1e-14);
      const double g_want = std::pow(t, beta - 1.0) * beta *
                            es.integrate([&](double x) { return x * m(x) * gaussian(tb * x, d, r * r); }, 1e-14);
      const KernelParams p{beta, 2.0, 1.0, d};
      EXPECT_LE(rel(kernels::eval_S(p, t, y, Method::subordination), s_want), 1e-8) << d << " " << t << " " << r;
      EXPECT_LE(rel(kernels::eval_G(p, t, y, Method::subordination), g_want), 1e-8) << d << " " << t << " " << r;
    }
}

// Unsubstituted subordination integrals over x, built from the stable module:
//   S = int (1/beta) x^{-1-1/beta} w(x^{-1/beta}) g(y; alpha, t^beta x) dx
//   G = t^{beta-1} int x^{-1/beta} w(x^{-1/beta}) g(y; alpha, t^beta x) dx
TEST(Kernels, SubordinationJacobian) {
  boost::math::quadrature::exp_sinh<double> es;
  for (double beta : {0.3, 0.5, 0.8})
    for (double y : {0.0, 0.7, 2.0}) {
      const double t = 0.6, alpha = 1.5;
      auto core = [&](double x) {
        if (!std::isfinite(std::pow(x, -1.0 / beta)) || x <= 0.0) return 0.0;
        const double w = stable::w_onesided({beta}, std::pow(x, -1.0 / beta));
        if (w == 0.0) return 0.0;
        return std::pow(x, -1.0 / beta) * w *
               stable::g_sym({alpha, std::pow(t, beta) * x, 1.0, 1}, y).value;
      };
      const double s_want = es.integrate([&](double x) { return core(x) / (beta * x); }, 1e-10);
      const double g_want = std::pow(t, beta - 1.0) * es.integrate(core, 1e-10);
      const KernelParams p{beta, alpha, 1.0, 1};
      EXPECT_LE(rel(kernels::eval_S(p, t, y, Method::subordination), s_want), 1e-7) << beta << " " << y;
      EXPECT_LE(rel(kernels::eval_G(p, t, y, Method::subordination), g_want), 1e-7) << beta << " " << y;
    }
}

TEST(Kernels, FourierAndSubordinationAgreeAtDocumentedPoint) {
  const KernelParams p{0.5, 1.5, 1.0, 1};
  for (double y : {0.0, 0.3, 1.0, 3.0}) {
    EXPECT_LE(rel(kernels::eval_S(p, 0.5, y, Method::fourier), kernels::eval_S(p, 0.5, y, Method::subordination)),
              1e-5);
    EXPECT_LE(rel(kernels::eval_G(p, 0.5, y, Method::fourier), kernels::eval_G(p, 0.5, y, Method::subordination)),
              1e-5);
  }
}

TEST(Kernels, MutualOracleGrid) {
  const double tol = 1e-10;
  for (double beta : {0.3, 0.5, 0.8})
    for (double alpha : {1.2, 1.5, 2.0})
      for (double t : {0.01, 0.1, 1.0, 10.0}) {
        const KernelParams p{beta, alpha, 1.0, 1};
        const double c = p.scale(t);
        for (double u : {0.0, 0.3, 1.0, 3.0}) {
          const double y = u * c;
          const double sf = kernels::eval_S(p, t, y, Method::fourier, tol);
          const double ss = kernels::eval_S(p, t, y, Method::subordination, tol);
          const double gf = kernels::eval_G(p, t, y, Method::fourier, tol);
          const double gs = kernels::eval_G(p, t, y, Method::subordination, tol);
          // tolerances are relative to the kernel's size at the origin
          const double s0 = kernels::eval_S(p, t, 0.0), g0 = kernels::eval_G(p, t, 0.0);
          EXPECT_LE(std::abs(sf - ss), 2e-9 * s0) << beta << " " << alpha << " " << t << " " << u;
          EXPECT_LE(std::abs(gf - gs), 2e-9 * g0) << beta << " " << alpha << " " << t << " " << u;
          if (u == 0.0) continue;
          for (Which w : {Which::gradS, Which::gradG}) {
            const double df = kernels::eval_grad(p, t, y, w, Method::fourier, tol);
            const double ds = kernels::eval_grad(p, t, y, w, Method::subordination, tol);
            const double scale = (w == Which::gradS ? s0 : g0) / c;
            EXPECT_LE(std::abs(df - ds), 2e-9 * scale)
                << kernels::to_string(w) << " " << beta << " " << alpha << " " << t << " " << u;
          }
        }
      }
}

TEST(Kernels, NearUnitOrderApproachesHeatKernel) {
  const KernelParams p{0.999, 2.0, 1.0, 1};
  for (double t : {0.5, 1.0}) {
    double sup_s = 0.0, sup_g = 0.0;
    for (int i = 0; i <= 40; ++i) {
      const double y = -4.0 + 0.2 * i;
      const double s = kernels::eval_S(p, t, y), g = kernels::eval_G(p, t, y);
      sup_s = std::max(sup_s, std::abs(s - gaussian(t, 1, y * y)));
      sup_g = std::max(sup_g, std::abs(g - s));
    }
    EXPECT_LE(sup_s, 1e-2) << t;
    EXPECT_LE(sup_g, 2e-2) << t;
  }
}

TEST(Kernels, GradientMatchesFiniteDifference) {
  const KernelParams p{0.5, 1.5, 1.0, 1};
  const double h = 1e-4, t = 0.25, y = 0.5;
  const double fd = (kernels::eval_S(p, t, y + h) - kernels::eval_S(p, t, y - h)) / (2.0 * h);
  EXPECT_LE(std::abs(kernels::eval_grad(p, t, y, Which::S) - fd), 1e-5);
  for (double beta : {0.3, 0.8})
    for (double alpha : {1.2, 2.0})
      for (double yy : {0.1, 0.9, 2.5}) {
        const KernelParams q{beta, alpha, 1.0, 1};
        const double fs = (kernels::eval_S(q, 1.0, yy + h) - kernels::eval_S(q, 1.0, yy - h)) / (2.0 * h);
        const double fg = (kernels::eval_G(q, 1.0, yy + h) - kernels::eval_G(q, 1.0, yy - h)) / (2.0 * h);
        EXPECT_LE(std::abs(kernels::eval_grad(q, 1.0, yy, Which::S) - fs), 1e-5);
        EXPECT_LE(std::abs(kernels::eval_grad(q, 1.0, yy, Which::gradG) - fg), 1e-5);
      }
  // d = 2: each component against a central difference in that coordinate
  const KernelParams p2{0.5, 1.5, 1.0, 2};
  const std::vector<double> y2{0.4, -0.7};
  const auto g = kernels::eval_grad(p2, 0.5, y2, Which::G);
  for (std::size_t i = 0; i < 2; ++i) {
    auto yp = y2, ym = y2;
    yp[i] += h;
    ym[i] -= h;
    const double fd2 = (kernels::eval_G(p2, 0.5, yp) - kernels::eval_G(p2, 0.5, ym)) / (2.0 * h);
    EXPECT_LE(std::abs(g[i] - fd2), 1e-5) << i;
  }
}

TEST(Kernels, GradientSymmetry) {
  const KernelParams p{0.5, 1.5, 1.0, 1};
  EXPECT_EQ(kernels::eval_grad(p, 1.0, 0.0, Which::S), 0.0);
  const std::vector<double> zero{0.0, 0.0};
  for (double v : kernels::eval_grad({0.5, 1.5, 1.0, 2}, 1.0, zero, Which::G)) EXPECT_EQ(v, 0.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int i = 0; i < 10; ++i) {
    const double y = u(rng);
    EXPECT_EQ(kernels::eval_grad(p, 1.0, -y, Which::S), -kernels::eval_grad(p, 1.0, y, Which::S));
    EXPECT_LT(kernels::eval_grad(p, 1.0, y, Which::S), 0.0);
  }
}

// The correction to the |y|^{-d-alpha} law decays like |y|^{-alpha} with a
// coefficient that grows with alpha, so for alpha > 1.5 the band is only
// reached a decade further out.
TEST(Kernels, FarFieldTailExponent) {
  for (int d : {1, 2})
    for (double alpha : {1.3, 1.5, 1.7, 1.9}) {
      const KernelParams p{0.5, alpha, 1.0, d};
      const double t = 0.5, c = std::pow(t, p.beta / alpha);
      auto at = [&](double r) {
        std::vector<double> y(static_cast<std::size_t>(d), 0.0);
        y[0] = r * c;
        return std::log(std::abs(kernels::eval_G(p, t, y)));
      };
      const double near = (at(100.0) - at(10.0)) / std::log(10.0);
      const double mid = (at(300.0) - at(30.0)) / std::log(10.0);
      const double far = (at(1000.0) - at(100.0)) / std::log(10.0);
      const bool band_reached = alpha <= 1.3 || (d == 1 && alpha <= 1.5);
      if (band_reached) EXPECT_NEAR(near, -(d + alpha), 0.1) << d << " " << alpha;
      EXPECT_NEAR(far, -(d + alpha), 0.01) << d << " " << alpha;
      EXPECT_LT(near, mid);
      EXPECT_LT(mid, far);
    }
}

// Both kernels are positive mixtures of radially decreasing densities, so
// their L1 norms equal their masses and |grad| integrates to 2 K(t, 0) in d = 1.
TEST(Kernels, L1Norms) {
  for (double beta : {0.3, 0.5, 0.8})
    for (double alpha : {1.2, 1.5, 2.0}) {
      const KernelParams p{beta, alpha, 1.0, 1};
      const double lg = kernels::l1_norm(p, 1.0, Which::G);
      EXPECT_GE(lg, (1.0 - 1e-9) / std::tgamma(beta));
      EXPECT_LE(rel(lg, 1.0 / std::tgamma(beta)), 1e-6) << beta << " " << alpha;
      EXPECT_LE(rel(kernels::l1_norm(p, 0.1, Which::G), std::pow(0.1, beta - 1.0) / std::tgamma(beta)), 1e-6);
    }
  for (auto [beta, alpha] : {std::pair{0.3, 1.2}, std::pair{0.5, 1.5}, std::pair{0.8, 1.8}}) {
    const KernelParams p{beta, alpha, 1.0, 1};
    EXPECT_LE(std::abs(kernels::l1_norm(p, 1.0, Which::S) - 1.0), 1e-6);
    for (double t : {0.1, 1.0}) {
      EXPECT_LE(rel(kernels::l1_norm(p, t, Which::gradS), 2.0 * kernels::eval_S(p, t, 0.0)), 1e-6);
      EXPECT_LE(rel(kernels::l1_norm(p, t, Which::gradG), 2.0 * kernels::eval_G(p, t, 0.0)), 1e-6);
    }
  }
  EXPECT_TRUE(std::isfinite(kernels::l1_norm({0.5, 2.0, 1.0, 1}, 1.0, Which::G)));
  EXPECT_GE(kernels::l1_norm({0.5, 1.5, 1.0, 1}, 0.1, Which::S), 1.0 - 1e-9);
  EXPECT_LE(kernels::l1_norm({0.5, 1.5, 1.0, 1}, 0.1, Which::S), 1.5);
}

// d = 2: same masses, and int |grad S| = 2 pi int_0^inf S(r) dr after
// integrating by parts. S(t, 0) is infinite here (alpha < d), so the radial
// integral runs in log r.
TEST(Kernels, L1NormsPlanar) {
  const KernelParams p2{0.5, 1.5, 1.0, 2};
  EXPECT_LE(std::abs(kernels::l1_norm(p2, 1.0, Which::S) - 1.0), 1e-6);
  EXPECT_LE(rel(kernels::l1_norm(p2, 1.0, Which::G), 1.0 / std::tgamma(0.5)), 1e-6);
  auto f = [&](double u) {
    const std::vector<double> y{std::exp(u), 0.0};
    return std::exp(u) * kernels::eval_S(p2, 1.0, y);
  };
  double radial = 0.0;
  for (double u = -40.0; u < 10.0; u += 1.0)
    radial += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, u, u + 1.0, 8, 1e-12);
  EXPECT_LE(rel(kernels::l1_norm(p2, 1.0, Which::gradS), 2.0 * pi * radial), 1e-6);
}

TEST(Kernels, L1ScalingAndDeterminism) {
  const KernelParams p{0.5, 1.5, 1.0, 1};
  const double base = kernels::l1_norm(p, 1.0, Which::gradG);
  EXPECT_LE(rel(kernels::l1_norm(p, 0.01, Which::gradG), base * std::pow(0.01, -0.5 - 0.5 / 1.5)), 1e-12);
  const double one = kernels::detail::standard_l1(p, Which::gradS, 1e-9, 1);
  const double four = kernels::detail::standard_l1(p, Which::gradS, 1e-9, 4);
  EXPECT_EQ(one, four);
}

TEST(Kernels, DiffusivityScaling) {
  // K(t, y; a) = a^{-d/alpha} K(t, a^{-1/alpha} y; 1)
  const KernelParams p1{0.5, 1.5, 1.0, 1}, p3{0.5, 1.5, 3.0, 1};
  for (double y : {0.0, 0.5, 2.0}) {
    const double ys = y * std::pow(3.0, -1.0 / 1.5), f = std::pow(3.0, -1.0 / 1.5);
    EXPECT_LE(rel(kernels::eval_S(p3, 0.7, y), f * kernels::eval_S(p1, 0.7, ys)), 1e-10);
    EXPECT_LE(rel(kernels::eval_G(p3, 0.7, y), f * kernels::eval_G(p1, 0.7, ys)), 1e-10);
  }
}

TEST(Kernels, QueryDispatch) {
  const KernelParams p{0.5, 1.5, 1.0, 2};
  kernels::KernelQuery q{Which::gradG, 0.5, {0.3, 0.4}, Method::automatic, 1e-10};
  const auto v = kernels::evaluate(p, q);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v, kernels::eval_grad(p, 0.5, q.y, Which::G));
  q.which = Which::S;
  EXPECT_EQ(kernels::evaluate(p, q).size(), 1u);
}

TEST(Kernels, RejectsBadInput) {
  const KernelParams p{0.5, 1.5, 1.0, 1};
  EXPECT_THROW(kernels::eval_S(p, 0.0, 0.5), DomainError);
  EXPECT_THROW(kernels::eval_G(p, -1.0, 0.5), DomainError);
  EXPECT_THROW(kernels::eval_S({1.0, 1.5, 1.0, 1}, 1.0, 0.5), DomainError);
  EXPECT_THROW(kernels::eval_S({0.5, 1.0, 1.0, 1}, 1.0, 0.5), DomainError);
  EXPECT_THROW(kernels::eval_S({0.5, 1.5, 0.0, 1}, 1.0, 0.5), DomainError);
  EXPECT_THROW(kernels::eval_S({0.5, 1.5, 1.0, 2}, 1.0, 0.5), DomainError);
  EXPECT_THROW(kernels::eval_S(p, 1.0, 0.5, Method::fourier, 0.0), DomainError);
  EXPECT_THROW(kernels::l1_norm({0.5, 1.5, 1.0, 3}, 1.0, Which::G), DomainError);
  EXPECT_THROW(kernels::l1_norm(p, 0.0, Which::G), DomainError);
  EXPECT_THROW(kernels::evaluate(p, {Which::S, 1.0, {0.0, 1.0}, Method::automatic, 1e-10}), DomainError);
}

}  // namespace
