#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fracgreen/specfn.hpp"
#include "fracgreen/stable.hpp"

namespace {

using namespace fracgreen;
using stable::OneSidedParams;
using stable::SymStableParams;
constexpr double pi = std::numbers::pi;

double gaussian(double a_sigma, int d, double r2) {
  return std::pow(4.0 * pi * a_sigma, -0.5 * d) * std::exp(-r2 / (4.0 * a_sigma));
}

// (1/pi) int_0^inf cos(p y) exp(-s p^alpha) dp by Ooura's double exponential rule.
double cosine_transform_oracle(double alpha, double s, double y) {
  auto f = [&](double p) { return std::exp(-s * std::pow(p, alpha)); };
  if (y == 0.0) {
    boost::math::quadrature::exp_sinh<double> es;
    return es.integrate(f, 1e-14) / pi;
  }
  static boost::math::quadrature::ooura_fourier_cos<double> oc(1e-14);
  return oc.integrate(f, std::abs(y)).first / pi;
}

double w(double beta, double x) { return stable::w_onesided(OneSidedParams{beta}, x); }

TEST(SymmetricDensity, GaussianClosedForm) {
  EXPECT_NEAR(stable::g_sym({2.0, 1.0, 1.0, 1}, 0.0).value, 0.28209479177387814, 1e-14);
  const std::vector<double> y11{1.0, 1.0};
  EXPECT_NEAR(stable::g_sym({2.0, 1.0, 1.0, 2}, y11).value, 0.25 / pi * std::exp(-0.5), 1e-14);
  EXPECT_NEAR(stable::g_sym({2.0, 1.0, 1.0, 2}, y11).value, 0.04827, 1e-5);
  for (int d : {1, 2, 3})
    for (double as : {0.3, 1.0, 2.5})
      for (double r : {0.0, 0.4, 1.3, 3.0, 7.0}) {
        std::vector<double> y(static_cast<std::size_t>(d), 0.0);
        y[0] = r;
        const double got = stable::g_sym({2.0, as, 1.0, d}, y).value;
        const double want = gaussian(as, d, r * r);
        EXPECT_LE(std::abs(got - want), 1e-10 * want + 1e-300) << d << " " << as << " " << r;
      }
}

TEST(SymmetricDensity, CauchyClosedForm) {
  EXPECT_NEAR(stable::g_sym({1.0, 1.0, 1.0, 1}, 0.0).value, 1.0 / pi, 1e-12);
  for (double s : {0.5, 1.0, 2.0})
    for (double y : {0.0, 0.3, 1.0, 4.0, 25.0, 300.0}) {
      const double want = s / (pi * (s * s + y * y));
      EXPECT_LE(std::abs(stable::g_sym({1.0, s, 1.0, 1}, y).value / want - 1.0), 1e-9) << s << " " << y;
    }
  // two-dimensional Cauchy (Poisson kernel): s / (2 pi (s^2 + r^2)^{3/2})
  for (double r : {0.0, 0.5, 2.0, 9.0, 40.0}) {
    const std::vector<double> y{r * 0.6, r * 0.8};
    const double want = 1.0 / (2.0 * pi * std::pow(1.0 + r * r, 1.5));
    EXPECT_LE(std::abs(stable::g_sym({1.0, 1.0, 1.0, 2}, y).value / want - 1.0), 1e-7) << r;
  }
}

TEST(SymmetricDensity, MatchesIndependentCosineTransform) {
  for (double alpha : {0.7, 1.2, 1.5, 1.8, 1.95})
    for (double y : {0.0, 0.2, 1.0, 2.5, 6.0, 15.0}) {
      const double want = cosine_transform_oracle(alpha, 1.0, y);
      const double got = stable::g_sym({alpha, 1.0, 1.0, 1}, y).value;
      EXPECT_LE(std::abs(got - want), 1e-10 * std::max(want, 1e-3)) << alpha << " " << y;
    }
}

TEST(SymmetricDensity, IsEvenAndNonnegative) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (double alpha : {0.5, 1.2, 1.7, 2.0})
    for (int i = 0; i < 25; ++i) {
      const double y = u(rng);
      const auto p = stable::g_sym({alpha, 1.0, 1.0, 1}, y);
      EXPECT_EQ(p.value, stable::g_sym({alpha, 1.0, 1.0, 1}, -y).value);
      EXPECT_GE(p.value, 0.0);
      if (i % 5) continue;
      const std::vector<double> y2{y, 0.3 * y}, y2m{-y, -0.3 * y};
      EXPECT_EQ(stable::g_sym({alpha, 1.0, 1.0, 2}, y2).value, stable::g_sym({alpha, 1.0, 1.0, 2}, y2m).value);
    }
}

TEST(SymmetricDensity, Normalization) {
  boost::math::quadrature::exp_sinh<double> es;
  for (double alpha : {1.2, 1.5, 2.0}) {
    auto g1 = [&](double r) { return stable::g_sym({alpha, 1.0, 1.0, 1}, r).value; };
    EXPECT_NEAR(2.0 * es.integrate(g1, 1e-12), 1.0, 1e-6) << alpha;
    auto g2 = [&](double r) {
      const std::vector<double> y{r, 0.0};
      return 2.0 * pi * r * stable::g_sym({alpha, 1.0, 1.0, 2}, y).value;
    };
    EXPECT_NEAR(es.integrate(g2, 1e-12), 1.0, 1e-6) << alpha;
  }
}

TEST(SymmetricDensity, Scaling) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uy(-8.0, 8.0), ls(-2.0, 2.0);
  for (double alpha : {1.3, 1.8})
    for (int d : {1, 2})
      for (int i = 0; i < 20; ++i) {
        const double sigma = std::exp(ls(rng));
        std::vector<double> y(static_cast<std::size_t>(d)), ys(y.size());
        for (std::size_t j = 0; j < y.size(); ++j) {
          y[j] = uy(rng);
          ys[j] = y[j] * std::pow(sigma, -1.0 / alpha);
        }
        const double lhs = stable::g_sym({alpha, sigma, 1.0, d}, y).value;
        const double rhs = std::pow(sigma, -d / alpha) * stable::g_sym({alpha, 1.0, 1.0, d}, ys).value;
        EXPECT_LE(std::abs(lhs / rhs - 1.0), 1e-8) << alpha << " " << d << " " << sigma;
      }
}

TEST(SymmetricDensity, NearFieldOracle) {
  const SymStableParams p2{2.0, 1.0, 1.0, 1};
  EXPECT_LE(std::abs(stable::g_near_field_oracle(p2, 0.0, 1) / stable::g_sym(p2, 0.0).value - 1.0), 1e-6);
  for (double sigma : {1.0, 3.0}) {
    const SymStableParams p{1.5, sigma, 1.0, 1};
    const double y = 0.05 * std::pow(sigma, 1.0 / 1.5);
    EXPECT_LE(std::abs(stable::g_near_field_oracle(p, y, 4) / stable::g_sym(p, y).value - 1.0), 1e-4);
  }
  const SymStableParams p3{1.2, 1.0, 1.0, 3};
  const std::vector<double> zero3{0.0, 0.0, 0.0};
  EXPECT_LE(std::abs(stable::g_near_field_oracle(p3, zero3, 1) / stable::g_sym(p3, zero3).value - 1.0), 1e-3);
  // at y = 0 in d = 1 the leading term is Gamma(1/alpha) / (pi alpha)
  EXPECT_NEAR(stable::g_near_field_oracle({1.5, 1.0, 1.0, 1}, 0.0, 1), std::tgamma(1.0 / 1.5) / (pi * 1.5),
              1e-15);
  EXPECT_THROW(stable::g_near_field_oracle(p2, 0.5, 3), DomainError);
}

// The one-term tail misses the next term of the expansion,
//   -(1/pi) Gamma(1+2 alpha) sin(pi alpha) / 2 |y|^{-1-2 alpha},
// so the relative gap must match that term.
double second_tail_ratio(double alpha, double y) {
  return -std::tgamma(1.0 + 2.0 * alpha) * std::sin(pi * alpha) / 2.0 /
         (std::tgamma(1.0 + alpha) * std::sin(pi * alpha / 2.0)) * std::pow(y, -alpha);
}

TEST(SymmetricDensity, FarFieldOracle) {
  const SymStableParams p15{1.5, 1.0, 1.0, 1}, p19{1.9, 1.0, 1.0, 1};
  for (auto [p, y] : {std::pair{p15, 20.0}, std::pair{p19, 50.0}, std::pair{p15, 200.0}}) {
    const double g = stable::g_sym(p, y).value;
    EXPECT_LE(std::abs(g / cosine_transform_oracle(p.alpha, 1.0, y) - 1.0), 1e-8);
    const double gap = g / stable::g_far_field_oracle_d1(p, y) - 1.0;
    EXPECT_NEAR(gap, second_tail_ratio(p.alpha, y), 0.1 * std::abs(second_tail_ratio(p.alpha, y)) + 1e-4)
        << p.alpha << " " << y;
  }
  EXPECT_LE(std::abs(stable::g_far_field_oracle_d1(p19, 50.0) / stable::g_sym(p19, 50.0).value - 1.0), 0.03);
  EXPECT_LE(std::abs(stable::g_far_field_oracle_d1(p15, 200.0) / stable::g_sym(p15, 200.0).value - 1.0), 0.03);
  EXPECT_THROW(stable::g_far_field_oracle_d1({2.0, 1.0, 1.0, 1}, 50.0), DomainError);
  EXPECT_THROW(stable::g_far_field_oracle_d1(p15, 3.0), DomainError);
  EXPECT_THROW(stable::g_far_field_oracle_d1({1.5, 1.0, 1.0, 2}, 30.0), DomainError);
  const auto o = stable::g_far_field_d1(p15);
  EXPECT_EQ(o.exponent, -2.5);
  EXPECT_GT(o.leading_coefficient, 0.0);
}

TEST(SymmetricDensity, RejectsBadParameters) {
  EXPECT_THROW(stable::g_sym({0.0, 1.0, 1.0, 1}, 0.0), DomainError);
  EXPECT_THROW(stable::g_sym({2.1, 1.0, 1.0, 1}, 0.0), DomainError);
  EXPECT_THROW(stable::g_sym({1.5, 0.0, 1.0, 1}, 0.0), DomainError);
  EXPECT_THROW(stable::g_sym({1.5, 1.0, -1.0, 1}, 0.0), DomainError);
  EXPECT_THROW(stable::g_sym({1.5, 1.0, 1.0, 0}, 0.0), DomainError);
  EXPECT_THROW(stable::g_sym({1.5, 1.0, 1.0, 2}, 0.0), DomainError);
  EXPECT_THROW(stable::g_sym({1.5, 1.0, 1.0, 1}, std::nan("")), DomainError);
}

TEST(OneSidedDensity, VanishesOnNegativeAxis) {
  EXPECT_EQ(w(0.7, -0.5), 0.0);
  EXPECT_EQ(w(0.3, -1e-9), 0.0);
  EXPECT_EQ(w(0.5, 0.0), 0.0);
}

// Pin the beta = 1/2 parameterization: fit log(x^{3/2} w) = log c - k/x by
// least squares and compare with the Levy form c = 1/(2 sqrt(pi)), k = 1/4.
TEST(OneSidedDensity, HalfOrderLevyForm) {
  double s1 = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < 60; ++i) {
    const double x = std::pow(10.0, -1.0 + 3.0 * i / 59.0);
    const double u = 1.0 / x, v = std::log(std::pow(x, 1.5) * w(0.5, x));
    s1 += 1;
    sx += u;
    sy += v;
    sxx += u * u;
    sxy += u * v;
  }
  const double slope = (s1 * sxy - sx * sy) / (s1 * sxx - sx * sx);
  const double c = std::exp((sy - slope * sx) / s1);
  EXPECT_NEAR(-slope, 0.25, 1e-9);
  EXPECT_NEAR(c, 0.5 / std::sqrt(pi), 1e-9);
  EXPECT_NEAR(w(0.5, 1.0), 0.5 / std::sqrt(pi) * std::exp(-0.25), 1e-13);
}

TEST(OneSidedDensity, Normalization) {
  boost::math::quadrature::exp_sinh<double> es;
  for (double beta : {0.3, 0.5, 0.8}) {
    const double split = 50.0;
    auto f = [&](double x) { return w(beta, x); };
    const double body = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, split, 20, 1e-13);
    const double tail = es.integrate([&](double u) { return w(beta, split + u); }, 1e-12);
    EXPECT_NEAR(body + tail, 1.0, 1e-6) << beta;
  }
}

TEST(OneSidedDensity, LaplaceTransformIsStretchedExponential) {
  for (double beta : {0.3, 0.5, 0.8})
    for (double lam : {0.5, 2.0}) {
      boost::math::quadrature::exp_sinh<double> es;
      const double body = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double x) { return std::exp(-lam * x) * w(beta, x); }, 0.0, 5.0, 12, 1e-11);
      const double tail = es.integrate([&](double u) { return std::exp(-lam * (5.0 + u)) * w(beta, 5.0 + u); }, 1e-12);
      EXPECT_NEAR(body + tail, std::exp(-std::pow(lam, beta)), 1e-8) << beta << " " << lam;
    }
}

// Independent asymptotic series
//   w(x) ~ (1/pi) sum_k (-1)^{k+1} Gamma(k beta + 1) / k! sin(pi k beta) x^{-k beta - 1}.
double w_asymptotic(double beta, double x, int terms) {
  double s = 0.0;
  for (int k = 1; k <= terms; ++k)
    s += ((k % 2) ? 1.0 : -1.0) * std::tgamma(k * beta + 1.0) / std::tgamma(k + 1.0) * std::sin(pi * k * beta) *
         std::pow(x, -k * beta - 1.0);
  return s / pi;
}

TEST(OneSidedDensity, FarTailLaw) {
  for (double beta : {0.3, 0.5, 0.8}) {
    const auto o = stable::w_far_field_oracle(OneSidedParams{beta});
    EXPECT_EQ(o.exponent, -1.0 - beta);
    EXPECT_NEAR(o.leading_coefficient, w_asymptotic(beta, 1.0, 1), 1e-15);
    double lo = 1e300, hi = 0.0, prev_gap = 1e300;
    for (double x : {50.0, 100.0, 200.0, 1e4, 1e6}) {
      const double v = std::pow(x, 1.0 + beta) * w(beta, x);
      EXPECT_GT(v, 0.0);
      if (x <= 200.0) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const double gap = std::abs(v / o.leading_coefficient - 1.0);
      EXPECT_LT(gap, prev_gap) << beta << " " << x;
      prev_gap = gap;
      EXPECT_LE(std::abs(w(beta, x) / w_asymptotic(beta, x, 30) - 1.0), 1e-10) << beta << " " << x;
    }
    // Variation over [50, 200] comes from the correction terms; the second
    // term vanishes at beta = 1/2 (sin(2 pi beta) = 0), not in general.
    double alo = 1e300, ahi = 0.0;
    for (double x : {50.0, 100.0, 200.0}) {
      const double v = std::pow(x, 1.0 + beta) * w_asymptotic(beta, x, 30);
      alo = std::min(alo, v);
      ahi = std::max(ahi, v);
    }
    const double predicted = ahi / alo - 1.0;
    if (beta == 0.5) EXPECT_LE(hi / lo - 1.0, 0.02);
    EXPECT_LE(hi / lo - 1.0, 1.2 * predicted + 1e-4) << beta;
    EXPECT_LE(prev_gap, 0.01) << beta;
  }
}

TEST(OneSidedDensity, UnimodalAndNonnegative) {
  for (double beta : {0.3, 0.5, 0.8}) {
    std::vector<double> v;
    for (int i = 0; i < 1000; ++i) v.push_back(w(beta, std::pow(10.0, -2.0 + 5.0 * i / 999.0)));
    std::size_t peak = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      EXPECT_GE(v[i], 0.0);
      if (v[i] > v[peak]) peak = i;
    }
    EXPECT_GT(peak, 0u);
    EXPECT_LT(peak, v.size() - 1);
    for (std::size_t i = 1; i <= peak; ++i) EXPECT_GE(v[i], v[i - 1]) << beta << " " << i;
    for (std::size_t i = peak + 1; i < v.size(); ++i) EXPECT_LE(v[i], v[i - 1]) << beta << " " << i;
  }
}

TEST(OneSidedDensity, FlatAtOrigin) {
  EXPECT_LT(w(0.5, 1e-3) / w(0.5, 1e-2), 1e-4);
  // decay faster than any power: the log drop per decade keeps growing
  for (double beta : {0.3, 0.5}) {
    double prev = 0.0;
    for (int k = 1; k <= 3; ++k) {
      const double drop = std::log(w(beta, std::pow(10.0, -k + 1)) / w(beta, std::pow(10.0, -k)));
      if (k > 1) EXPECT_GT(drop, prev) << beta << " " << k;
      prev = drop;
    }
  }
}

TEST(OneSidedDensity, RejectsBadParameters) {
  EXPECT_THROW(w(0.0, 1.0), DomainError);
  EXPECT_THROW(w(1.0, 1.0), DomainError);
  EXPECT_THROW(w(0.5, std::nan("")), DomainError);
}

TEST(MixingDensity, HalfOrderClosedForm) {
  const auto m = stable::mixing_density_for(0.5);
  for (double x : {0.0, 0.1, 0.7, 1.5, 3.0, 6.0, 12.0}) {
    const double want = std::exp(-x * x / 4.0) / std::sqrt(pi);
    EXPECT_LE(std::abs((*m)(x) - want), 1e-12 * std::max(want, 1e-200)) << x;
  }
  EXPECT_NEAR(m->at_zero(), 1.0 / std::sqrt(pi), 1e-15);
}

TEST(MixingDensity, LaplaceTransformIsMittagLeffler) {
  boost::math::quadrature::exp_sinh<double> es;
  for (double beta : {0.3, 0.5, 0.8}) {
    const auto m = stable::mixing_density_for(beta);
    EXPECT_NEAR(es.integrate([&](double x) { return (*m)(x); }, 1e-12), 1.0, 1e-9) << beta;
    for (double lam : {0.5, 3.0}) {
      const double lt = es.integrate([&](double x) { return std::exp(-lam * x) * (*m)(x); }, 1e-12);
      EXPECT_NEAR(lt, specfn::ml_value(beta, 1.0, -lam), 1e-9) << beta << " " << lam;
    }
  }
}

}  // namespace
