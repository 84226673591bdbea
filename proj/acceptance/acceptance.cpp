// Prints one PASS/FAIL line per acceptance criterion and exits non-zero if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fracgreen/hjb.hpp"
#include "fracgreen/kernels.hpp"
#include "fracgreen/linsolve.hpp"
#include "fracgreen/specfn.hpp"
#include "fracgreen/verify.hpp"

namespace {

namespace fs = std::filesystem;
using namespace fracgreen;
using kernels::KernelParams;
using kernels::Method;
constexpr double pi = std::numbers::pi;

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

double sup_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

int jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(std::min(n, 9u));
}

const std::vector<double> betas{0.3, 0.5, 0.8};
const std::vector<double> alphas{1.2, 1.5, 2.0};

Verdict mass_identities() {
  boost::math::quadrature::exp_sinh<double> es;
  double worst = 0.0;
  for (double beta : betas)
    for (double alpha : alphas)
      for (double t : {0.1, 1.0}) {
        const KernelParams p{beta, alpha, 1.0, 1};
        const double ms = 2.0 * es.integrate([&](double y) { return kernels::eval_S(p, t, y); }, 1e-12);
        const double mg = 2.0 * es.integrate([&](double y) { return kernels::eval_G(p, t, y); }, 1e-12);
        worst = std::max({worst, std::abs(ms - 1.0), rel(mg, std::pow(t, beta - 1.0) / std::tgamma(beta))});
      }
  return {worst <= 1e-6, fmt("worst relative mass error %.2e (limit 1e-6)", worst)};
}

// Reports from the default verification suite, computed once.
const std::vector<verify::SlopeReport>& suite() {
  static const std::vector<verify::SlopeReport> reports = [] {
    verify::SuiteConfig c;
    c.jobs = jobs();
    return verify::run_suite(c);
  }();
  return reports;
}

Verdict slope_reports(const std::vector<std::string>& ids, const std::vector<double>& alpha_filter = {}) {
  int n = 0;
  std::string bad;
  for (const auto& r : suite()) {
    if (std::find(ids.begin(), ids.end(), r.theorem_id) == ids.end()) continue;
    if (!alpha_filter.empty() &&
        std::find(alpha_filter.begin(), alpha_filter.end(), r.params.alpha) == alpha_filter.end())
      continue;
    ++n;
    if (!r.pass)
      bad += " " + r.file_stem() + fmt("(%.3f vs %.3f, r2 %.4f)", r.fitted_slope, r.predicted_slope, r.r_squared);
  }
  if (n == 0) return {false, "no reports"};
  return {bad.empty(), std::to_string(n) + " reports" + (bad.empty() ? " within tolerance" : ", failing:" + bad)};
}

double gaussian(double s, double r2) { return std::exp(-r2 / (4.0 * s)) / std::sqrt(4.0 * pi * s); }

// beta = 1/2, alpha = 2: the mixing density is exp(-x^2/4)/sqrt(pi).
Verdict gaussian_closed_form() {
  const double beta = 0.5;
  boost::math::quadrature::exp_sinh<double> es;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ut(-2.0, 1.0), uy(0.0, 4.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double t = std::pow(10.0, ut(rng));
    const double r = uy(rng) * std::pow(t, beta / 2.0);
    const double tb = std::pow(t, beta);
    auto m = [](double x) { return std::exp(-x * x / 4.0) / std::sqrt(pi); };
    const double s = es.integrate([&](double x) { return m(x) * gaussian(tb * x, r * r); }, 1e-14);
    const double g = std::pow(t, beta - 1.0) * beta *
                     es.integrate([&](double x) { return x * m(x) * gaussian(tb * x, r * r); }, 1e-14);
    const KernelParams p{beta, 2.0, 1.0, 1};
    worst = std::max({worst, rel(kernels::eval_S(p, t, r, Method::subordination), s),
                      rel(kernels::eval_G(p, t, r, Method::subordination), g)});
  }
  return {worst <= 1e-8, fmt("worst relative error %.2e over 20 points (limit 1e-8)", worst)};
}

Verdict mutual_oracle() {
  double worst = 0.0;
  for (double beta : betas)
    for (double alpha : alphas)
      for (double t : {0.01, 0.1, 1.0, 10.0}) {
        const KernelParams p{beta, alpha, 1.0, 1};
        for (double u : {0.0, 0.3, 1.0, 3.0}) {
          const double y = u * p.scale(t);
          worst = std::max({worst, rel(kernels::eval_S(p, t, y, Method::fourier), kernels::eval_S(p, t, y, Method::subordination)),
                            rel(kernels::eval_G(p, t, y, Method::fourier), kernels::eval_G(p, t, y, Method::subordination))});
        }
      }
  return {worst <= 1e-5, fmt("worst relative disagreement %.2e (limit 1e-5)", worst)};
}

double E(double beta, double gamma, double x) { return specfn::ml_value(beta, gamma, x); }

Field mode(const Grid& g, double t, double p, double amp) {
  return Field::sample(g, t, [&](auto y) { return amp * std::cos(p * y[0]); });
}

// f = E_beta(-l0 t^beta) cos(2y) + t^beta cos(y) / Gamma(beta + 1) at beta = 0.5, alpha = 1.5
double manufactured_error(int steps) {
  const double beta = 0.5, alpha = 1.5, l0 = std::pow(2.0, alpha), l1 = 1.0;
  const Grid g = Grid::cube(1, 32, 2.0 * pi);
  auto exact = [&](double t) {
    const double tb = std::pow(t, beta);
    return Field::sample(g, t, [&](auto y) {
      return E(beta, 1.0, -l0 * tb) * std::cos(2.0 * y[0]) + tb * std::cos(y[0]) / std::tgamma(beta + 1.0);
    });
  };
  const linsolve::Forcing h = [&](double t, const Grid& gg) {
    return Field::sample(gg, t, [&](auto y) {
      return (1.0 + l1 * std::pow(t, beta) / std::tgamma(beta + 1.0)) * std::cos(y[0]);
    });
  };
  const linsolve::LinearProblem pr{{beta, alpha, 1.0, 1}, exact(0.0), h, linsolve::graded_times(1.0, steps, 1.0 / beta)};
  double err = 0.0;
  for (const auto& f : linsolve::solve_linear(pr)) err = std::max(err, sup_diff(f, exact(f.time)));
  return err;
}

Verdict linear_solver() {
  const Grid g = Grid::cube(1, 32, 2.0 * pi);
  double single = 0.0;
  for (double beta : betas)
    for (double alpha : alphas) {
      const linsolve::LinearProblem pr{{beta, alpha, 1.3, 1}, mode(g, 0.0, 3.0, 1.0), {}, {0.0, 1.0}};
      for (double t : {0.01, 0.5, 2.0}) {
        const double decay = E(beta, 1.0, -1.3 * std::pow(3.0, alpha) * std::pow(t, beta));
        single = std::max(single, sup_diff(linsolve::propagate_homogeneous(pr, t), mode(g, t, 3.0, decay)));
      }
    }

  const double beta = 0.5, alpha = 1.5, c = 2.0;
  const linsolve::Forcing h = [&](double t, const Grid& gg) {
    return Field::sample(gg, t, [&](auto y) { return c * std::cos(3.0 * y[0]); });
  };
  const linsolve::LinearProblem pc{{beta, alpha, 1.0, 1}, Field(g, 0.0), h, linsolve::uniform_times(1.0, 20)};
  double constant = 0.0;
  for (const auto& f : linsolve::solve_linear(pc)) {
    const double tb = std::pow(f.time, beta);
    constant = std::max(constant, sup_diff(f, mode(g, f.time, 3.0, c * tb * E(beta, beta + 1.0, -std::pow(3.0, alpha) * tb))));
  }

  std::vector<double> steps{40, 80, 160, 320, 640}, errs;
  for (double n : steps) errs.push_back(manufactured_error(static_cast<int>(n)));
  std::vector<double> inv;
  for (double n : steps) inv.push_back(1.0 / n);
  const double order = verify::fit_loglog(inv, errs).slope;

  const bool pass = single <= 1e-12 && constant <= 1e-6 && errs.back() <= 1e-6 && order >= 1.0 + beta - 0.1;
  return {pass, fmt("single mode %.1e (1e-12), constant forcing %.1e (1e-6), ", single, constant) +
                    fmt("manufactured %.1e (1e-6), order %.3f (>= %.2f)", errs.back(), order, 1.0 + beta - 0.1)};
}

Verdict hjb_checks() {
  // advection H = b p: each mode is E_beta((-a|p|^alpha + i b p) t^beta) times its initial amplitude
  const double beta = 0.5, alpha = 1.5, b = 0.7;
  const Grid g = Grid::cube(1, 32, 2.0 * pi);
  const Field f0 = Field::sample(g, 0.0, [](auto y) { return std::exp(std::cos(y[0])); });
  const hjb::HjbProblem adv{{beta, alpha, 1.0, 1}, f0, hjb::Hamiltonian::advection({b}),
                            linsolve::graded_times(1.0, 160, (2.0 - beta) / beta)};
  const auto sol = hjb::picard_solve(adv, 1e-11, 80, jobs());
  const auto f0_hat = f0.spectrum();
  double adv_err = 0.0;
  for (const auto& f : sol.solution) {
    auto s = f0_hat;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double p = g.frequency(i)[0];
      const specfn::cplx z(-std::pow(std::abs(p), alpha) * std::pow(f.time, beta),
                           g.is_nyquist(0, i) ? 0.0 : b * p * std::pow(f.time, beta));
      s[i] *= specfn::ml(specfn::MLParams{beta, 1.0}, z, 1e-14).value;
    }
    adv_err = std::max(adv_err, sup_diff(Field::from_spectrum(g, f.time, s), f));
  }

  const hjb::HjbProblem zero{{beta, alpha, 1.0, 1}, f0, hjb::Hamiltonian::zero(), linsolve::uniform_times(1.0, 10)};
  const auto z = hjb::picard_solve(zero).report;
  const bool one_correction = z.converged && z.iterations == 2 && z.diffs[1] == 0.0;

  std::string rates;
  bool rates_ok = true;
  for (auto [bb, aa] : {std::pair{0.5, 2.0}, std::pair{0.7, 1.4}}) {
    verify::PicardRateConfig c;
    c.beta = bb;
    c.alpha = aa;
    c.jobs = jobs();
    const auto r = verify::picard_rate_experiment(c);
    rates_ok = rates_ok && r.pass;
    rates += fmt(" %.3f vs %.3f;", r.fitted_slope, r.predicted_slope);
  }

  std::vector<double> res, steps{20, 40, 80};
  for (double n : steps) {
    const hjb::HjbProblem pr{{0.5, 1.5, 1.0, 1}, f0, hjb::Hamiltonian::sine(0.5),
                             linsolve::uniform_times(1.0, static_cast<int>(n))};
    const auto r = hjb::picard_solve(pr, 1e-12, 60, jobs());
    std::vector<Field> h;
    for (const auto& f : r.solution) h.push_back(hjb::hamiltonian_field(pr.hamiltonian, f));
    res.push_back(linsolve::caputo_residual(r.solution, pr.params, h));
  }
  const double order = -verify::fit_loglog(steps, res).slope;
  const bool residual_ok = res[1] < res[0] && res[2] < res[1] && order >= 2.0 - 0.5 - 0.2;

  return {adv_err <= 1e-5 && one_correction && rates_ok && residual_ok,
          fmt("advection %.1e (1e-5), zero H corrections %.0f, ", adv_err, z.iterations - 1.0) +
              "lemma exponents" + rates + fmt(" residual order %.3f (>= 1.3)", order)};
}

Verdict specfn_invariants() {
  double identity = 0.0;
  for (double beta : {0.3, 0.5, 0.7})
    for (double lam : {0.5, 1.0, 4.0})
      for (double x : {0.1, 1.0, 10.0}) {
        const auto s = specfn::ml_e1_derivative_identity(beta, lam, x);
        identity = std::max(identity, std::abs(s.lhs - s.rhs));
      }
  double expo = 0.0;
  for (double re : {-20.0, -7.5, -1.0, 0.3, 2.0, 9.0})
    for (double im : {0.0, -3.0, 5.0, 12.0}) {
      const specfn::cplx zz(re, im);
      if (std::abs(zz) > 20.0) continue;
      expo = std::max(expo, std::abs(specfn::ml_value(1.0, 1.0, zz) - std::exp(zz)) / std::abs(std::exp(zz)));
    }
  double tail = 0.0;
  for (double beta : betas) {
    const double x = 1e4;
    tail = std::max(tail, std::abs(x * specfn::ml_value(beta, 1.0, -x) * std::tgamma(1.0 - beta) - 1.0));
  }
  return {identity <= 1e-10 && expo <= 1e-12 && tail <= 0.01,
          fmt("derivative identity %.1e (1e-10), unit order vs exp %.1e (1e-12), tail law %.2e (1e-2)", identity, expo,
              tail)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  const fs::path base = fs::temp_directory_path() / ("fg_accept_" + std::to_string(::getpid()));
  fs::create_directories(base);
  const fs::path cfg = base / "verify.ini";
  std::ofstream(cfg) << "[problem]\nbetas = 0.3, 0.8\nalphas = 1.2, 2\n[time]\nsamples = 9\n";
  std::string csv[2];
  int files = 0;
  for (int k = 0; k < 2; ++k) {
    const fs::path out = base / ("run" + std::to_string(k));
    const std::string cmd = "'" FRACGREEN_TOOL "' verify --config '" + cfg.string() + "' --out '" + out.string() +
                            "' --jobs " + std::to_string(k == 0 ? 1 : jobs()) + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      fs::remove_all(base);
      return {false, "verify run " + std::to_string(k) + " exited with " + std::to_string(WEXITSTATUS(status))};
    }
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(out))
      if (e.path().extension() == ".csv") names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    files = static_cast<int>(names.size());
    for (const auto& n : names) csv[k] += n + "\n" + slurp(out / n);
  }
  fs::remove_all(base);
  return {files > 0 && csv[0] == csv[1], std::to_string(files) + " CSVs per run, " +
                                             (csv[0] == csv[1] ? "byte-identical" : "different")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"mass identities", mass_identities},
      {"thm1 G L1 slope", [] { return slope_reports({"thm1_G_L1"}); }},
      {"thm2 gradG L1 slope", [] { return slope_reports({"thm2_gradG_L1"}, {1.2, 1.5}); }},
      {"thm3 alpha=2 time-integrated norms",
       [] { return slope_reports({"thm3_alpha2_G_time_integrated", "thm3_alpha2_gradG_time_integrated"}); }},
      {"thms 4-7 S-kernel laws", [] {
         return slope_reports({"thm4_S_convolution", "thm5_gradS_L1", "thm6_alpha2_S_convolution", "thm7_alpha2_gradS_L1"});
       }},
      {"alpha=2 closed form", gaussian_closed_form},
      {"mutual oracle", mutual_oracle},
      {"linear solver", linear_solver},
      {"hjb", hjb_checks},
      {"special functions", specfn_invariants},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !v.pass;
    std::printf("%s %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
