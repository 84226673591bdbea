#pragma once

// Run configuration: a small INI-style document with sections [problem],
// [grid], [time] and [output]. Lines are `key = value`; `#` and `;` start
// comments; lists are comma separated; strings may be double quoted.
// Every key has a default, so an empty document is a valid configuration.
// Parsing reports every problem it finds, not just the first.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fracgreen/error.hpp"

namespace fracgreen::config {

class ConfigError : public DomainError {
 public:
  explicit ConfigError(std::vector<std::string> errors)
      : DomainError(join(errors)), errors_(std::move(errors)) {}
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& e) {
    std::string out;
    for (const auto& s : e) out += (out.empty() ? "" : "; ") + s;
    return out;
  }
  std::vector<std::string> errors_;
};

struct RunConfig {
  // [problem]
  double beta = 0.5;
  double alpha = 1.5;
  double a = 1.0;
  int dim = 1;
  std::string initial = "cos";  // cos, gaussian, step, triangle
  double initial_width = 0.5;
  std::string forcing = "none";  // none, constant, cos
  double forcing_value = 0.0;
  std::string hamiltonian = "zero";  // zero, constant, advection, sine
  double hamiltonian_coefficient = 1.0;
  std::string which = "G";  // S, G, gradS, gradG
  double t = 1.0;
  std::vector<double> y{0.0};
  std::string method = "auto";  // auto, fourier, subordination
  double tolerance = 1e-10;
  std::vector<double> betas{0.3, 0.5, 0.8};
  std::vector<double> alphas{1.2, 1.5, 2.0};
  // [grid]
  int points = 64;
  double box = 2.0 * std::numbers::pi;
  // [time]
  double horizon = 1.0;
  int steps = 64;
  double grading = 1.0;
  std::vector<double> output_times{};  // empty: the horizon only
  double picard_tol = 1e-10;
  int max_iter = 60;
  double t_min = 0.01;
  double t_max = 1.0;
  int samples = 9;
  // [output]
  std::string dir = "fracgreen-out";
  std::string format = "csv";  // csv, binary, both

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

inline bool parse_number(const std::string& s, double& out) {
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end && !s.empty();
}

inline bool parse_int(const std::string& s, int& out) {
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end && !s.empty();
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

// Setter returns an error message, empty on success.
struct Entry {
  const char* section;
  const char* key;
  std::function<std::string(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

inline Entry number(const char* sec, const char* key, double RunConfig::*m) {
  return {sec, key,
          [m](RunConfig& c, const std::string& v) {
            return parse_number(v, c.*m) ? std::string() : "expected a number, got '" + v + "'";
          },
          [m](const RunConfig& c) { return fmt(c.*m); }};
}

inline Entry integer(const char* sec, const char* key, int RunConfig::*m) {
  return {sec, key,
          [m](RunConfig& c, const std::string& v) {
            return parse_int(v, c.*m) ? std::string() : "expected an integer, got '" + v + "'";
          },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

inline Entry text(const char* sec, const char* key, std::string RunConfig::*m) {
  return {sec, key,
          [m](RunConfig& c, const std::string& v) {
            c.*m = unquote(v);
            return std::string();
          },
          [m](const RunConfig& c) { return "\"" + c.*m + "\""; }};
}

inline Entry list(const char* sec, const char* key, std::vector<double> RunConfig::*m) {
  return {sec, key,
          [m](RunConfig& c, const std::string& v) {
            std::vector<double> out;
            const std::string body = unquote(v);
            std::size_t start = 0;
            while (start <= body.size() && !trim(body).empty()) {
              const auto comma = body.find(',', start);
              const std::string item = trim(body.substr(start, comma == std::string::npos ? std::string::npos
                                                                                           : comma - start));
              double x = 0.0;
              if (!parse_number(item, x)) return "expected a comma separated list of numbers, got '" + v + "'";
              out.push_back(x);
              if (comma == std::string::npos) break;
              start = comma + 1;
            }
            c.*m = std::move(out);
            return std::string();
          },
          [m](const RunConfig& c) { return fmt_list(c.*m); }};
}

inline const std::vector<Entry>& schema() {
  static const std::vector<Entry> entries = {
      number("problem", "beta", &RunConfig::beta),
      number("problem", "alpha", &RunConfig::alpha),
      number("problem", "a", &RunConfig::a),
      integer("problem", "dim", &RunConfig::dim),
      text("problem", "initial", &RunConfig::initial),
      number("problem", "initial_width", &RunConfig::initial_width),
      text("problem", "forcing", &RunConfig::forcing),
      number("problem", "forcing_value", &RunConfig::forcing_value),
      text("problem", "hamiltonian", &RunConfig::hamiltonian),
      number("problem", "hamiltonian_coefficient", &RunConfig::hamiltonian_coefficient),
      text("problem", "which", &RunConfig::which),
      number("problem", "t", &RunConfig::t),
      list("problem", "y", &RunConfig::y),
      text("problem", "method", &RunConfig::method),
      number("problem", "tolerance", &RunConfig::tolerance),
      list("problem", "betas", &RunConfig::betas),
      list("problem", "alphas", &RunConfig::alphas),
      integer("grid", "points", &RunConfig::points),
      number("grid", "box", &RunConfig::box),
      number("time", "horizon", &RunConfig::horizon),
      integer("time", "steps", &RunConfig::steps),
      number("time", "grading", &RunConfig::grading),
      list("time", "output_times", &RunConfig::output_times),
      number("time", "picard_tol", &RunConfig::picard_tol),
      integer("time", "max_iter", &RunConfig::max_iter),
      number("time", "t_min", &RunConfig::t_min),
      number("time", "t_max", &RunConfig::t_max),
      integer("time", "samples", &RunConfig::samples),
      text("output", "dir", &RunConfig::dir),
      text("output", "format", &RunConfig::format),
  };
  return entries;
}

inline bool in_range_beta(double b) { return b > 0.0 && b < 1.0; }
inline bool in_range_alpha(double a) { return a > 1.0 && a <= 2.0; }

inline void check(const RunConfig& c, std::vector<std::string>& err) {
  auto one_of = [&](const std::string& v, std::initializer_list<const char*> options, const char* name) {
    for (const char* o : options)
      if (v == o) return;
    std::string msg = std::string(name) + " must be one of";
    for (const char* o : options) msg += std::string(" ") + o;
    err.push_back(msg + ", got '" + v + "'");
  };
  if (!in_range_beta(c.beta)) err.push_back("beta must lie in (0,1)");
  if (!in_range_alpha(c.alpha)) err.push_back("alpha must lie in (1,2]");
  if (!(c.a > 0.0) || !std::isfinite(c.a)) err.push_back("a must be positive");
  if (c.dim < 1 || c.dim > 3) err.push_back("dim must be 1, 2 or 3");
  one_of(c.initial, {"cos", "gaussian", "step", "triangle"}, "initial");
  if (!(c.initial_width > 0.0)) err.push_back("initial_width must be positive");
  one_of(c.forcing, {"none", "constant", "cos"}, "forcing");
  if (!std::isfinite(c.forcing_value)) err.push_back("forcing_value must be finite");
  one_of(c.hamiltonian, {"zero", "constant", "advection", "sine"}, "hamiltonian");
  if (!std::isfinite(c.hamiltonian_coefficient)) err.push_back("hamiltonian_coefficient must be finite");
  one_of(c.which, {"S", "G", "gradS", "gradG"}, "which");
  if (!(c.t > 0.0) || !std::isfinite(c.t)) err.push_back("t must be positive");
  if (static_cast<int>(c.y.size()) != c.dim)
    err.push_back("y must have dim = " + std::to_string(c.dim) + " components");
  one_of(c.method, {"auto", "fourier", "subordination"}, "method");
  if (!(c.tolerance > 0.0)) err.push_back("tolerance must be positive");
  if (c.betas.empty()) err.push_back("betas must not be empty");
  for (double b : c.betas)
    if (!in_range_beta(b)) err.push_back("betas: beta must lie in (0,1)");
  if (c.alphas.empty()) err.push_back("alphas must not be empty");
  for (double al : c.alphas)
    if (!in_range_alpha(al)) err.push_back("alphas: alpha must lie in (1,2]");
  if (c.points < 8 || (c.points & (c.points - 1)) != 0) err.push_back("points must be a power of two >= 8");
  if (!(c.box > 0.0) || !std::isfinite(c.box)) err.push_back("box must be positive");
  if (!(c.horizon > 0.0) || !std::isfinite(c.horizon)) err.push_back("horizon must be positive");
  if (c.steps < 1) err.push_back("steps must be >= 1");
  if (!(c.grading >= 1.0)) err.push_back("grading must be >= 1");
  for (double t : c.output_times)
    if (!(t > 0.0 && t <= c.horizon)) err.push_back("output_times must lie in (0, horizon]");
  if (!(c.picard_tol > 0.0)) err.push_back("picard_tol must be positive");
  if (c.max_iter < 1) err.push_back("max_iter must be >= 1");
  if (!(c.t_min > 0.0 && c.t_max > c.t_min)) err.push_back("need 0 < t_min < t_max");
  if (c.samples < 3) err.push_back("samples must be >= 3");
  if (c.dir.empty()) err.push_back("dir must not be empty");
  one_of(c.format, {"csv", "binary", "both"}, "format");
}

}  // namespace detail

/// Parses `text`, then applies `overrides` given as "section.key=value".
/// Throws ConfigError listing every problem found.
inline RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {}) {
  RunConfig c;
  std::vector<std::string> err;
  std::map<std::string, const detail::Entry*> by_name;
  std::set<std::string> sections;
  for (const auto& e : detail::schema()) {
    by_name[std::string(e.section) + "." + e.key] = &e;
    sections.insert(e.section);
  }
  auto assign = [&](const std::string& name, const std::string& value, const std::string& where) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      err.push_back(where + "unknown key '" + name + "'");
      return;
    }
    if (auto msg = it->second->set(c, value); !msg.empty()) err.push_back(where + name + ": " + msg);
  };

  std::string section;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string line(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    // comments outside quotes
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (!quoted && (line[i] == '#' || line[i] == ';')) {
        line.resize(i);
        break;
      }
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        err.push_back(where + "malformed section header '" + line + "'");
        continue;
      }
      section = detail::trim(line.substr(1, line.size() - 2));
      if (!sections.count(section)) err.push_back(where + "unknown section '[" + section + "]'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      err.push_back(where + "expected 'key = value'");
      continue;
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (section.empty()) {
      err.push_back(where + "key '" + key + "' outside any section");
      continue;
    }
    const std::string name = section + "." + key;
    if (!seen.insert(name).second) err.push_back(where + "duplicate key '" + name + "'");
    assign(name, value, where);
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      err.push_back("override '" + o + "': expected section.key=value");
      continue;
    }
    assign(detail::trim(o.substr(0, eq)), detail::trim(o.substr(eq + 1)), "override: ");
  }
  detail::check(c, err);
  if (!err.empty()) throw ConfigError(std::move(err));
  return c;
}

/// Document that parses back to `c`.
inline std::string render(const RunConfig& c) {
  std::string out;
  std::string section;
  for (const auto& e : detail::schema()) {
    if (section != e.section) {
      section = e.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    out += std::string(e.key) + " = " + e.get(c) + "\n";
  }
  return out;
}

}  // namespace fracgreen::config
