#pragma once

// Command dispatch for the fracgreen tool: builds problems from a RunConfig,
// runs them and writes artifacts. Exit status 0 on success, 1 on precision,
// convergence, verification or I/O failure, 2 on configuration errors.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "fracgreen/config.hpp"
#include "fracgreen/error.hpp"
#include "fracgreen/field.hpp"
#include "fracgreen/hjb.hpp"
#include "fracgreen/io.hpp"
#include "fracgreen/kernels.hpp"
#include "fracgreen/linsolve.hpp"
#include "fracgreen/verify.hpp"

namespace fracgreen::cli {

enum Exit : int { ok = 0, failure = 1, bad_config = 2 };

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"kernel", "solve-linear", "solve-hjb", "verify"};
  return c;
}

/// --jobs default: FRACGREEN_JOBS when set, else 1.
inline int default_jobs() {
  const char* env = std::getenv("FRACGREEN_JOBS");
  if (!env || !*env) return 1;
  int v = 0;
  if (!config::detail::parse_int(env, v) || v < 1)
    throw config::ConfigError({"FRACGREEN_JOBS must be a positive integer, got '" + std::string(env) + "'"});
  return v;
}

namespace detail {

inline kernels::KernelParams params(const config::RunConfig& c) { return {c.beta, c.alpha, c.a, c.dim}; }

inline kernels::Which which(const std::string& s) {
  if (s == "S") return kernels::Which::S;
  if (s == "G") return kernels::Which::G;
  if (s == "gradS") return kernels::Which::gradS;
  return kernels::Which::gradG;
}

inline kernels::Method method(const std::string& s) {
  if (s == "fourier") return kernels::Method::fourier;
  if (s == "subordination") return kernels::Method::subordination;
  return kernels::Method::automatic;
}

inline Grid grid(const config::RunConfig& c) { return Grid::cube(c.dim, c.points, c.box); }

inline Field initial_field(const config::RunConfig& c, const Grid& g) {
  const double k = 2.0 * std::numbers::pi / c.box;
  const double w = c.initial_width;
  if (c.initial == "cos") return Field::sample(g, 0.0, [&](auto y) { return std::cos(k * y[0]); });
  if (c.initial == "gaussian")
    return Field::sample(g, 0.0, [&](auto y) {
      double r2 = 0.0;
      for (double v : y) r2 += v * v;
      return std::exp(-0.5 * r2 / (w * w));
    });
  if (c.initial == "step")
    return Field::sample(g, 0.0, [&](auto y) { return std::tanh(std::sin(k * y[0]) / (k * w)); });
  return Field::sample(g, 0.0, [&](auto y) { return std::abs(y[0]); });
}

inline linsolve::Forcing forcing(const config::RunConfig& c) {
  if (c.forcing == "none") return {};
  const double v = c.forcing_value;
  if (c.forcing == "constant")
    return [v](double t, const Grid& g) { return Field(g, t, std::vector<double>(g.size(), v)); };
  const double k = 2.0 * std::numbers::pi / c.box;
  return [v, k](double t, const Grid& g) {
    return Field::sample(g, t, [&](auto y) { return v * std::cos(k * y[0]); });
  };
}

inline hjb::Hamiltonian hamiltonian(const config::RunConfig& c) {
  const double b = c.hamiltonian_coefficient;
  if (c.hamiltonian == "constant") return hjb::Hamiltonian::constant(b);
  if (c.hamiltonian == "advection") {
    std::vector<double> v(static_cast<std::size_t>(c.dim), 0.0);
    v[0] = b;
    return hjb::Hamiltonian::advection(v);
  }
  if (c.hamiltonian == "sine") return hjb::Hamiltonian::sine(b);
  return hjb::Hamiltonian::zero();
}

// Graded or uniform grid with the requested output times merged in.
inline std::vector<double> time_grid(const config::RunConfig& c) {
  auto t = c.grading == 1.0 ? linsolve::uniform_times(c.horizon, c.steps)
                            : linsolve::graded_times(c.horizon, c.steps, c.grading);
  for (double o : c.output_times) {
    bool present = false;
    for (double x : t) present = present || std::abs(x - o) <= 1e-12 * c.horizon;
    if (!present) t.push_back(o);
  }
  std::sort(t.begin(), t.end());
  return t;
}

inline std::vector<std::size_t> output_levels(const config::RunConfig& c, const std::vector<double>& t) {
  std::vector<double> wanted = c.output_times.empty() ? std::vector<double>{c.horizon} : c.output_times;
  std::vector<std::size_t> levels;
  for (double o : wanted) {
    std::size_t best = 0;
    for (std::size_t k = 0; k < t.size(); ++k)
      if (std::abs(t[k] - o) < std::abs(t[best] - o)) best = k;
    levels.push_back(best);
  }
  return levels;
}

inline void write_fields(const config::RunConfig& c, const std::string& stem, const std::vector<Field>& fields,
                         std::ostream& out) {
  const std::filesystem::path dir(c.dir);
  for (std::size_t k : output_levels(c, [&] {
         std::vector<double> t;
         for (const auto& f : fields) t.push_back(f.time);
         return t;
       }())) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_t%.6g", stem.c_str(), fields[k].time);
    if (c.format == "csv" || c.format == "both") {
      const auto p = dir / (std::string(name) + ".csv");
      io::write_atomic(p, io::field_to_csv(fields[k]));
      out << "wrote " << p.string() << "\n";
    }
    if (c.format == "binary" || c.format == "both") {
      const auto p = dir / (std::string(name) + ".bin");
      io::write_atomic(p, io::field_to_binary(fields[k]));
      out << "wrote " << p.string() << "\n";
    }
  }
}

inline int run_kernel(const config::RunConfig& c, std::ostream& out) {
  const kernels::KernelQuery q{which(c.which), c.t, c.y, method(c.method), c.tolerance};
  const auto v = kernels::evaluate(params(c), q);
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << io::format_double(v[i]);
  out << "\n";
  return ok;
}

inline int run_linear(const config::RunConfig& c, int jobs, std::ostream& out) {
  const Grid g = grid(c);
  const linsolve::LinearProblem problem{params(c), initial_field(c, g), forcing(c), time_grid(c)};
  const auto fields = linsolve::solve_linear(problem, jobs);
  write_fields(c, "linear", fields, out);
  return ok;
}

inline int run_hjb(const config::RunConfig& c, int jobs, std::ostream& out) {
  const Grid g = grid(c);
  const hjb::HjbProblem problem{params(c), initial_field(c, g), hamiltonian(c), time_grid(c)};
  const auto report_path = std::filesystem::path(c.dir) / "picard_report.json";
  try {
    const auto result = hjb::picard_solve(problem, c.picard_tol, c.max_iter, jobs);
    write_fields(c, "hjb", result.solution, out);
    io::write_atomic(report_path, result.report.to_json().dump(2) + "\n");
    out << "wrote " << report_path.string() << "\n";
    return ok;
  } catch (const hjb::PicardError& e) {
    io::write_atomic(report_path, e.report().to_json().dump(2) + "\n");
    out << "wrote " << report_path.string() << "\n";
    throw;
  }
}

inline int run_verify(const config::RunConfig& c, int jobs, std::ostream& out) {
  verify::SuiteConfig sc;
  sc.betas = c.betas;
  sc.alphas = c.alphas;
  sc.a = c.a;
  sc.t_min = c.t_min;
  sc.t_max = c.t_max;
  sc.samples = c.samples;
  sc.jobs = jobs;
  auto reports = verify::run_suite(sc);
  verify::PicardRateConfig pc;
  pc.a = c.a;
  pc.jobs = jobs;
  reports.push_back(verify::picard_rate_experiment(pc));
  for (const auto& p : verify::write_reports(c.dir, reports)) out << "wrote " << p.string() << "\n";
  int failed = 0;
  for (const auto& r : reports)
    if (r.status == "fail") {
      ++failed;
      out << "FAIL " << r.file_stem() << ": slope " << r.fitted_slope << " predicted " << r.predicted_slope
          << "\n";
    }
  return failed ? failure : ok;
}

}  // namespace detail

/// Runs one command; messages for the user go to `err`.
inline int run(const std::string& command, const config::RunConfig& c, int jobs, std::ostream& out,
               std::ostream& err) {
  try {
    if (jobs < 1) throw config::ConfigError({"jobs must be a positive integer"});
    if (command == "kernel") return detail::run_kernel(c, out);
    if (command == "solve-linear") return detail::run_linear(c, jobs, out);
    if (command == "solve-hjb") return detail::run_hjb(c, jobs, out);
    if (command == "verify") return detail::run_verify(c, jobs, out);
    err << "error: unknown command '" << command << "'\n";
    return bad_config;
  } catch (const config::ConfigError& e) {
    for (const auto& m : e.errors()) err << "config error: " << m << "\n";
    return bad_config;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return bad_config;
  } catch (const PrecisionError& e) {
    err << "precision error: " << e.what() << " (best value " << e.best_value() << ", error estimate "
        << e.error_estimate() << ")\n";
    return failure;
  } catch (const ConvergenceError& e) {
    err << "convergence error: " << e.what() << "\n";
    return failure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return failure;
  }
}

}  // namespace fracgreen::cli
