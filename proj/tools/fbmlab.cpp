// Command-line front end for the experiment harness. Every subcommand maps
// onto one experiment; flags override values from --config. Exit codes:
// 0 success, 1 validation/usage error, 2 contract failure under --assert.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fbmlab/harness.hpp"
#include "fbmlab/version.hpp"

namespace {

struct SubcommandState {
  std::string experiment;
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> defaults;
  std::vector<std::pair<std::string, std::string>> overrides;
  bool selected = false;
};

void add_common_options(CLI::App* cmd, SubcommandState& st) {
  cmd->add_option("--config", st.config_path, "flat key = value config file");
  auto wire = [cmd, &st](const std::string& flag, const std::string& key,
                         const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [&st, key](const std::string& v) { st.overrides.emplace_back(key, v); }, help);
  };
  wire("--seed", "seed", "base seed; replication i uses splitmix(seed, i)");
  wire("--paths", "n_paths", "Monte Carlo replications");
  wire("--hurst", "hurst", "Hurst index in (0,1)");
  wire("--steps", "n_steps", "grid steps on [0, t_max]");
  wire("--t-max", "t_max", "time horizon");
  wire("--t", "t", "evaluation time (default t_max)");
  wire("--eps-multiples", "eps_multiples", "comma list of epsilon multiples of the grid step");
  wire("--bandwidth", "bandwidth", "occupation-window half width (0 = default)");
  wire("--function", "function", "test function: named preset or JSON spec");
  wire("--curve", "curve", "level curve: constant value or JSON spec");
  wire("--levels", "levels", "comma list of levels for the local-time profile");
  wire("--samples", "samples", "tuples per inequality for the verification suite");
  wire("--out", "out", "output path prefix");
  wire("--workers", "workers", "worker threads (0 = hardware)");
  cmd->add_flag_function(
      "--assert",
      [&st](std::int64_t) { st.overrides.emplace_back("assert", "true"); },
      "exit 2 when a built-in contract check fails");
  cmd->callback([&st] { st.selected = true; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("fbmlab ") + fbmlab::kVersion +
               " - rough fractional Brownian motion laboratory"};
  app.require_subcommand(1);

  std::vector<std::unique_ptr<SubcommandState>> states;
  auto add = [&](const std::string& name, const std::string& experiment,
                 const std::string& help,
                 std::vector<std::pair<std::string, std::string>> defaults = {}) {
    auto st = std::make_unique<SubcommandState>();
    st->experiment = experiment;
    st->defaults = std::move(defaults);
    add_common_options(app.add_subcommand(name, help), *st);
    states.push_back(std::move(st));
  };

  add("simulate", "simulate", "sample paths and dump them as CSV", {{"n_paths", "1"}});
  add("qcov", "qcov_sweep", "quadratic covariation estimators over an epsilon sweep");
  add("localtime", "localtime_profile", "weighted local time level profile");
  add("verify-inequalities", "inequality_suite", "randomized covariance inequality ladder");
  add("norm", "norm_eval", "two-term Gaussian-weighted function norm");
  add("ito-check", "ito_check", "Ito identity in expectation", {{"function", "square"}});
  add("bouleau-yor", "bouleau_yor", "quadratic covariation vs local-time integral",
      {{"function", "indicator"}});
  add("occupation", "occupation", "occupation-time identity per path",
      {{"function", "square"}});
  add("curve", "curve_localtime", "local time along a moving level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const SubcommandState* st = nullptr;
  for (const auto& s : states)
    if (s->selected) st = s.get();
  if (!st) {
    std::cerr << "fbmlab: no subcommand selected\n";
    return 1;
  }

  try {
    fbmlab::ExperimentConfig cfg;
    if (!st->config_path.empty()) cfg = fbmlab::ExperimentConfig::from_file(st->config_path);
    for (const auto& [k, v] : st->defaults) cfg.apply_override(k, v);
    cfg.experiment = st->experiment;
    for (const auto& [k, v] : st->overrides) cfg.apply_override(k, v);

    const fbmlab::ResultSet rs = fbmlab::run(cfg);
    for (const auto& check : rs.summary["checks"])
      std::printf("[%s] %s (observed %.6g, allowed %.6g)\n",
                  check["pass"].get<bool>() ? "ok" : "FAIL",
                  check["name"].get<std::string>().c_str(), check["observed"].get<double>(),
                  check["allowed"].get<double>());
    for (const auto& f : rs.files) std::printf("wrote %s\n", f.c_str());
    if (cfg.assert_contracts && !rs.contracts_ok) return 2;
    return 0;
  } catch (const fbmlab::ConfigError& e) {
    std::cerr << "fbmlab: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "fbmlab: " << e.what() << "\n";
    return 1;
  }
}
