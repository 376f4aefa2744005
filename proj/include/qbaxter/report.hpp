#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbaxter/verify.hpp"

namespace qbaxter {

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "ybe",         "reflection",  "fusion",      "row-fusion",      "split-trace",
      "tq",          "commutators", "crossing",    "polynomiality",   "n2-closed-forms",
      "closed-chain", "spectrum",   "bethe"};
  return names;
}

struct RunConfig {
  ChainParams params;
  std::uint64_t seed = 0;
  std::vector<std::string> suites;  // expanded, canonical order, no "all"
  int z_sample_count = 5;
  std::vector<cplx> z_samples;  // explicit points; overrides the count when nonempty
  std::string output_path = "qbaxter_report.json";
  std::string csv_path;
};

// Command-line values that take precedence over the file.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::vector<std::string> suites;
  std::optional<std::string> output_path;
  std::optional<double> tol;
  std::optional<int> cutoff;
};

// Parameters missing from the file are drawn from the generic sampler seeded
// with the run seed; the result is validated, including the convergence region.
RunConfig load_config(const nlohmann::json& j, const ConfigOverrides& ov = {});
RunConfig load_config_file(const std::string& path, const ConfigOverrides& ov = {});
nlohmann::json config_to_json(const RunConfig& cfg);

struct SpectrumRow {
  int sector = 0;
  int record_index = 0;
  cplx z, tv, q;
};

struct SuiteOutcome {
  std::string suite;
  std::vector<CheckResult> checks;
  std::vector<SpectrumRow> rows;
  std::string error;  // set when the suite aborted
  bool config_error = false;
};

struct RunResult {
  std::vector<SuiteOutcome> suites;
  int exit_code = 0;
  int theorem_failures = 0;
  int conjecture_failures = 0;
};

SuiteOutcome run_suite(const std::string& suite, const RunConfig& cfg);
// Suites run concurrently; outcomes come back in the order of cfg.suites.
RunResult run(const RunConfig& cfg);
int exit_code_for(const std::vector<SuiteOutcome>& outcomes);

nlohmann::json complex_to_json(cplx z);
cplx complex_from_json(const nlohmann::json& j);
nlohmann::json check_to_json(const CheckResult& c);
CheckResult check_from_json(const nlohmann::json& j);

// The timestamp is the only field that varies between identical runs.
nlohmann::json report_json(const RunResult& result, const RunConfig* cfg,
                           const std::string& timestamp);
void export_report(const RunResult& result, const RunConfig* cfg, const std::string& path);
std::vector<CheckResult> parse_report_checks(const nlohmann::json& report);

void write_spectrum_csv(const std::vector<SpectrumRow>& rows, const std::string& path);

}  // namespace qbaxter
