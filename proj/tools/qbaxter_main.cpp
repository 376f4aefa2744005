#include <cstdio>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "qbaxter/report.hpp"

namespace {

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("QBAXTER_SEED");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0') throw qbaxter::ConfigError("QBAXTER_SEED is not an integer: " + std::string(s));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qbaxter: open XXZ chain transfer matrices, Q-operator and Bethe roots"};
  std::string config_path;
  std::vector<std::string> suites;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_path;
  std::optional<double> tol;
  std::optional<int> cutoff;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--suite", suites, "suite to run (repeatable; overrides the config)");
  app.add_option("--seed", seed, "random seed (QBAXTER_SEED is used when absent)");
  app.add_option("--out", out_path, "report path");
  app.add_option("--tol", tol, "default check tolerance");
  app.add_option("--cutoff", cutoff, "Fock cutoff J");
  app.add_flag("--quiet", quiet, "suppress the per-check summary");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  qbaxter::RunConfig cfg;
  try {
    qbaxter::ConfigOverrides ov;
    ov.seed = seed ? seed : env_seed();
    ov.suites = suites;
    ov.output_path = out_path;
    ov.tol = tol;
    ov.cutoff = cutoff;
    cfg = qbaxter::load_config_file(config_path, ov);
  } catch (const std::exception& e) {
    std::cerr << "qbaxter: configuration error: " << e.what() << '\n';
    return 2;
  }

  const qbaxter::RunResult result = qbaxter::run(cfg);
  try {
    qbaxter::export_report(result, &cfg, cfg.output_path);
    if (!cfg.csv_path.empty()) {
      std::vector<qbaxter::SpectrumRow> rows;
      for (const auto& o : result.suites) rows.insert(rows.end(), o.rows.begin(), o.rows.end());
      qbaxter::write_spectrum_csv(rows, cfg.csv_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "qbaxter: " << e.what() << '\n';
    return 2;
  }

  if (!quiet) {
    for (const auto& o : result.suites) {
      for (const auto& c : o.checks)
        std::printf("%-4s %-10s %-44s residual=%.3e tol=%.1e\n", c.passed ? "ok" : "FAIL",
                    c.conjecture ? "conjecture" : "theorem", c.name.c_str(), c.residual, c.tolerance);
      if (!o.error.empty()) std::printf("ERROR %s: %s\n", o.suite.c_str(), o.error.c_str());
    }
    if (result.conjecture_failures > 0)
      std::printf("*** %d conjecture check(s) failed; theorem checks are unaffected ***\n",
                  result.conjecture_failures);
    std::printf("report: %s (exit %d)\n", cfg.output_path.c_str(), result.exit_code);
  }
  for (const auto& o : result.suites)
    if (o.config_error) std::cerr << "qbaxter: " << o.suite << ": " << o.error << '\n';
  return result.exit_code;
}
