#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbmlab/function_space.hpp"
#include "fbmlab/hurst.hpp"

namespace fbmlab {

/// Configuration failed validation; every offending field is listed.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::vector<std::string> fields, const std::string& message)
      : std::runtime_error(message), fields_(std::move(fields)) {}
  const std::vector<std::string>& fields() const { return fields_; }

 private:
  std::vector<std::string> fields_;
};

/// Declarative description of one experiment. Loaded from a flat key=value
/// file; CLI flags override file values.
struct ExperimentConfig {
  std::string experiment;  // qcov_sweep | localtime_profile | inequality_suite | ito_check |
                           // bouleau_yor | occupation | norm_eval | curve_localtime | simulate
  double hurst = 0.3;
  double t_max = 1.0;
  std::size_t n_steps = 4096;
  std::vector<std::size_t> eps_multiples = {32, 16, 8, 4};
  double bandwidth = 0.0;  // 0 -> default 0.02 * t_max^H
  FunctionSpec function = FunctionSpec::identity();
  Curve curve = Curve::constant(0.0);
  std::vector<double> levels;  // localtime_profile; empty -> defaults
  std::size_t n_paths = 200;
  std::size_t samples = 100000;  // inequality_suite
  double t = 0.0;                // evaluation time; 0 -> t_max
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string out = "fbmlab_out";
  bool assert_contracts = false;

  double eval_time() const { return t > 0.0 ? t : t_max; }
  double resolved_bandwidth() const;

  /// Full resolved config. Execution-only details (worker count) are excluded
  /// unless requested so that data files stay byte-identical across worker
  /// counts.
  nlohmann::json to_json(bool include_execution = false) const;

  static ExperimentConfig from_file(const std::string& path);
  void apply_override(const std::string& key, const std::string& value);
  void validate() const;
};

struct ResultSet {
  nlohmann::json summary;
  std::vector<std::string> files;
  bool contracts_ok = true;
};

/// Executes the configured experiment: writes <out>.csv (and for some
/// experiments extra data files) plus a <out>.json summary. Deterministic for
/// a fixed seed regardless of worker count.
ResultSet run(const ExperimentConfig& config);

/// Exact expectation oracle E L(x,t) = 2 int_0^{t^H} phi(x/v) dv for the
/// weighted local time; equals sqrt(2/pi) t^H at x = 0.
double expected_weighted_local_time(double x, double t, HurstIndex h);

}  // namespace fbmlab
