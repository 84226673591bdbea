#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fracgreen/cli.hpp"
#include "fracgreen/config.hpp"

namespace {

std::string read_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fracgreen::config::ConfigError({"cannot read config file '" + path + "'"});
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace fracgreen;
  CLI::App app{"Green-kernel and mild-solution tools for fractional Cauchy problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  int jobs = 0;
  std::string which, y, out_dir, beta, alpha, t;
  app.add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", sets, "override, section.key=value (repeatable)");
  app.add_option("--jobs", jobs, "worker threads (default: FRACGREEN_JOBS or 1)");
  app.add_option("--beta", beta, "same as --set problem.beta=...");
  app.add_option("--alpha", alpha, "same as --set problem.alpha=...");
  app.add_option("--which", which, "same as --set problem.which=...");
  app.add_option("--t", t, "same as --set problem.t=...");
  app.add_option("--y", y, "same as --set problem.y=...");
  app.add_option("--out", out_dir, "same as --set output.dir=...");
  app.fallthrough();
  for (const auto& c : cli::commands()) app.add_subcommand(c, "run " + c)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::ok : cli::bad_config;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  std::vector<std::string> overrides;
  auto shortcut = [&](const std::string& v, const char* key) {
    if (!v.empty()) overrides.push_back(std::string(key) + "=" + v);
  };
  shortcut(beta, "problem.beta");
  shortcut(alpha, "problem.alpha");
  shortcut(which, "problem.which");
  shortcut(t, "problem.t");
  shortcut(y, "problem.y");
  shortcut(out_dir, "output.dir");
  overrides.insert(overrides.end(), sets.begin(), sets.end());

  config::RunConfig cfg;
  try {
    if (jobs == 0) jobs = cli::default_jobs();
    cfg = config::parse_config(config_path.empty() ? std::string() : read_config(config_path), overrides);
  } catch (const config::ConfigError& e) {
    for (const auto& m : e.errors()) std::cerr << "config error: " << m << "\n";
    return cli::bad_config;
  }
  return cli::run(command, cfg, jobs, std::cout, std::cerr);
}
