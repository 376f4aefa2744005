#include "qbaxter/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <future>
#include <limits>
#include <set>

#include "qbaxter/bethe.hpp"

namespace qbaxter {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::set<std::string> kConfigKeys = {"params", "seed",        "suites",
                                           "z_samples", "output_path", "csv_path"};
const std::set<std::string> kParamKeys = {"q", "xi", "xitilde", "zeta", "t", "r", "n_sites",
                                          "cutoff", "tol", "series_tol", "exclusion_radius"};

cplx parse_complex(const json& j, const std::string& what) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError(what + ": expected a number or a two-element [re, im] array");
}

template <class T>
T parse_number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + ": expected a number");
  if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) throw ConfigError(what + ": expected an integer");
  }
  return j.get<T>();
}

std::vector<std::string> expand_suites(const std::vector<std::string>& requested) {
  std::set<std::string> want;
  for (const auto& s : requested) {
    if (s == "all") {
      want.insert(suite_names().begin(), suite_names().end());
      continue;
    }
    if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
      throw ConfigError("unknown suite '" + s + "'");
    want.insert(s);
  }
  std::vector<std::string> out;
  for (const auto& s : suite_names())
    if (want.count(s)) out.push_back(s);
  return out;
}

double max_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (cplx c : v) m = std::max(m, std::isfinite(std::abs(c)) ? std::abs(c) : kInf);
  return m;
}

struct Running {
  double v = 0.0;
  void add(double x) { v = std::isnan(x) ? kInf : std::max(v, x); }
};

VerifyOptions verify_options(const RunConfig& cfg) {
  VerifyOptions o;
  o.seed = cfg.seed;
  o.samples = cfg.z_sample_count;
  o.tol = cfg.params.tol;
  o.z_samples = cfg.z_samples;
  return o;
}

void append(std::vector<CheckResult>& dst, std::vector<CheckResult> src) {
  for (auto& c : src) dst.push_back(std::move(c));
}

std::vector<CheckResult> spectrum_suite(const RunConfig& cfg, std::vector<SpectrumRow>& rows) {
  const ChainParams& p = cfg.params;
  const std::string dg = params_digest(p, cfg.seed);
  SpectrumOptions so;
  so.seed = cfg.seed;
  so.tol = p.tol;
  const auto recs = joint_spectrum(p, so);

  Running eig, fit;
  for (std::size_t k = 0; k < recs.size(); ++k) {
    const auto& r = recs[k];
    eig.add(std::max(r.tv_residual, r.q_residual));
    fit.add(r.fit_error);
    for (std::size_t s = 0; s < r.nodes.size(); ++s)
      rows.push_back({r.sector, static_cast<int>(k), r.nodes[s], r.tv_samples[s], r.q_samples[s]});
  }
  const double expected = std::ldexp(1.0, p.n_sites);
  std::vector<CheckResult> out;
  out.push_back(make_check("spectrum/eigen-residual", eig.v, p.tol, false, dg,
                           "max over records of the T^V and Q eigen-equation residuals"));
  out.push_back(make_check("spectrum/fit-heldout", fit.v, p.tol, false, dg,
                           "degree-2N fit in z^2, deviation at held-out nodes"));
  out.push_back(make_check("spectrum/record-count", std::abs(double(recs.size()) - expected), 0.5,
                           false, dg, "one record per joint eigenvector, 2^N in total"));
  return out;
}

std::vector<CheckResult> bethe_suite(const RunConfig& cfg) {
  const ChainParams& p = cfg.params;
  const std::string dg = params_digest(p, cfg.seed);
  SpectrumOptions so;
  so.seed = cfg.seed;
  so.tol = p.tol;
  const auto recs = joint_spectrum(p, so);
  const cplx z_state{0.61, 0.44};
  const ComplexMatrix T = transfer_V(z_state, p);

  Running pairing, product, bf, tf, mism, bae, aba_ev, aba_st, newton;
  int failures = 0, degenerate = 0, states = 0;
  std::string failure_note;
  for (const auto& r : recs) {
    BetheRootSet b;
    try {
      b = factorize_q_eigenvalue(r, p);
    } catch (const PairingError& e) {
      ++failures;
      pairing.add(kInf);
      product.add(kInf);
      if (failure_note.empty()) failure_note = std::string("; sector ") + std::to_string(r.sector) + ": " + e.what();
      continue;
    }
    if (b.degenerate) ++degenerate;
    pairing.add(b.pairing_error);
    product.add(b.product_error);
    const auto rep = bethe_residual(b, p);
    bf.add(max_abs(rep.product_form));
    tf.add(max_abs(rep.tq_form));
    mism.add(rep.forms_mismatch);

    const auto y = b.roots();
    bae.add(max_abs(aba_bethe_residual(y, p)));
    for (int s = 0; s < 3 && s < static_cast<int>(r.nodes.size()); ++s) {
      const cplx lam = r.tv_samples[s];
      aba_ev.add(std::abs(aba_eigenvalue(r.nodes[s], y, p) - lam) / std::max(1.0, std::abs(lam)));
    }
    if (b.m_roots <= 2) {
      const ComplexVector v = aba_state(y, p);
      const double nv = v.norm();
      aba_st.add(nv > 0 ? (T * v - aba_eigenvalue(z_state, y, p) * v).norm() / nv : kInf);
      ++states;
    }
    if (b.m_roots > 0) {
      BetheRootSet pert = b;
      for (auto& Y : pert.y_squared) Y *= 1.0 + 1e-4;
      const auto nr = refine_bethe_newton(pert, p);
      double dev = 0.0;
      for (int i = 0; i < b.m_roots; ++i)
        dev = std::max(dev, std::abs(nr.roots.y_squared[i] - b.y_squared[i]) /
                                std::max(1.0, std::abs(b.y_squared[i])));
      newton.add(nr.converged ? std::max(nr.residual, dev) : kInf);
    }
  }
  const std::string counts = std::to_string(recs.size()) + " records, " + std::to_string(failures) +
                             " pairing failures, " + std::to_string(degenerate) + " degenerate";
  std::vector<CheckResult> out;
  out.push_back(make_check("bethe/pairing", pairing.v, 1e-6, false, dg, counts + failure_note));
  out.push_back(make_check("bethe/product", product.v, 1e-8, false, dg,
                           "|prod y^2 * q^(2M) - 1| over all 2M roots"));
  out.push_back(make_check("bethe/residual-product", bf.v, 1e-6, false, dg));
  out.push_back(make_check("bethe/residual-tq", tf.v, 1e-6, false, dg));
  out.push_back(make_check("bethe/forms-mismatch", mism.v, 1e-10, false, dg,
                           "product form against the TQ form with its exact prefactor"));
  out.push_back(make_check("bethe/aba-bethe-equations", bae.v, 1e-6, false, dg));
  out.push_back(make_check("bethe/aba-eigenvalue", aba_ev.v, 1e-6, false, dg,
                           "eigenvalue formula against T^V at 3 nodes per record"));
  out.push_back(make_check("bethe/aba-state", aba_st.v, 1e-5, false, dg,
                           std::to_string(states) + " states with M <= 2"));
  out.push_back(make_check("bethe/newton", newton.v, 1e-8, false, dg,
                           "refinement from a 1e-4 relative perturbation"));
  return out;
}

std::vector<CheckResult> closed_bethe_checks(const RunConfig& cfg) {
  const ChainParams& p = cfg.params;
  const std::string dg = params_digest(p, cfg.seed);
  SpectrumOptions so;
  so.seed = cfg.seed;
  so.tol = p.tol;
  const auto recs = closed_joint_spectrum(p, so);
  Running res, rec;
  for (const auto& r : recs) {
    const auto b = factorize_closed_q_eigenvalue(r, p);
    res.add(max_abs(b.residuals));
    rec.add(b.reconstruction_error);
  }
  std::vector<CheckResult> out;
  out.push_back(make_check("closed-chain/bethe-residual", res.v, 1e-6, false, dg,
                           std::to_string(recs.size()) + " records"));
  out.push_back(make_check("closed-chain/root-reconstruction", rec.v, p.tol, false, dg));
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json real_to_json(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double real_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  throw ConfigError("bad real value '" + s + "'");
}

}  // namespace

RunConfig load_config(const json& j, const ConfigOverrides& ov) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!kConfigKeys.count(it.key())) throw ConfigError("unknown config field '" + it.key() + "'");

  RunConfig cfg;
  if (j.contains("seed")) cfg.seed = parse_number<std::uint64_t>(j["seed"], "seed");
  if (ov.seed) cfg.seed = *ov.seed;

  const json P = j.value("params", json::object());
  if (!P.is_object()) throw ConfigError("params must be an object");
  for (auto it = P.begin(); it != P.end(); ++it)
    if (!kParamKeys.count(it.key())) throw ConfigError("unknown params field '" + it.key() + "'");

  int n = 2;
  if (P.contains("n_sites")) n = parse_number<int>(P["n_sites"], "params.n_sites");
  else if (P.contains("t") && P["t"].is_array()) n = static_cast<int>(P["t"].size());
  if (n < 0) throw ConfigError("params.n_sites must be nonnegative");

  std::mt19937_64 rng(cfg.seed);
  ChainParams& p = cfg.params;
  p = sample_generic_params(n, rng);
  if (P.contains("q")) p.q = parse_complex(P["q"], "params.q");
  if (P.contains("xi")) p.xi = parse_complex(P["xi"], "params.xi");
  if (P.contains("xitilde")) p.xitilde = parse_complex(P["xitilde"], "params.xitilde");
  if (P.contains("zeta")) p.zeta = parse_complex(P["zeta"], "params.zeta");
  if (P.contains("r")) p.r = parse_complex(P["r"], "params.r");
  if (P.contains("t")) {
    if (!P["t"].is_array()) throw ConfigError("params.t must be an array");
    p.t.clear();
    for (const auto& tn : P["t"]) p.t.push_back(parse_complex(tn, "params.t[]"));
  }
  if (P.contains("cutoff")) p.cutoff = parse_number<int>(P["cutoff"], "params.cutoff");
  if (P.contains("tol")) p.tol = parse_number<double>(P["tol"], "params.tol");
  if (P.contains("series_tol")) p.series_tol = parse_number<double>(P["series_tol"], "params.series_tol");
  if (P.contains("exclusion_radius"))
    p.exclusion_radius = parse_number<double>(P["exclusion_radius"], "params.exclusion_radius");
  if (ov.tol) p.tol = *ov.tol;
  if (ov.cutoff) p.cutoff = *ov.cutoff;

  p.validate();
  p.require_convergence_region();

  std::vector<std::string> requested;
  if (!ov.suites.empty()) {
    requested = ov.suites;
  } else if (j.contains("suites")) {
    if (!j["suites"].is_array()) throw ConfigError("suites must be an array of names");
    for (const auto& s : j["suites"]) {
      if (!s.is_string()) throw ConfigError("suite names must be strings");
      requested.push_back(s.get<std::string>());
    }
  } else {
    requested = {"all"};
  }
  cfg.suites = expand_suites(requested);

  if (j.contains("z_samples")) {
    const json& z = j["z_samples"];
    if (z.is_number_integer()) {
      cfg.z_sample_count = z.get<int>();
      if (cfg.z_sample_count < 1) throw ConfigError("z_samples count must be positive");
    } else if (z.is_array()) {
      for (const auto& e : z) cfg.z_samples.push_back(parse_complex(e, "z_samples[]"));
      if (cfg.z_samples.empty()) throw ConfigError("z_samples list must not be empty");
      cfg.z_sample_count = static_cast<int>(cfg.z_samples.size());
    } else {
      throw ConfigError("z_samples must be a count or a list of complex numbers");
    }
  }
  if (j.contains("output_path")) {
    if (!j["output_path"].is_string()) throw ConfigError("output_path must be a string");
    cfg.output_path = j["output_path"].get<std::string>();
  }
  if (ov.output_path) cfg.output_path = *ov.output_path;
  if (j.contains("csv_path")) {
    if (!j["csv_path"].is_string()) throw ConfigError("csv_path must be a string");
    cfg.csv_path = j["csv_path"].get<std::string>();
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path, const ConfigOverrides& ov) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config '" + path + "': " + e.what());
  }
  return load_config(j, ov);
}

json complex_to_json(cplx z) { return json::array({real_to_json(z.real()), real_to_json(z.imag())}); }

cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected [re, im]");
  return {real_from_json(j[0]), real_from_json(j[1])};
}

json config_to_json(const RunConfig& cfg) {
  const ChainParams& p = cfg.params;
  json t = json::array();
  for (cplx tn : p.t) t.push_back(complex_to_json(tn));
  json params = {{"q", complex_to_json(p.q)},
                 {"xi", complex_to_json(p.xi)},
                 {"xitilde", complex_to_json(p.xitilde)},
                 {"zeta", complex_to_json(p.zeta)},
                 {"t", t},
                 {"r", complex_to_json(p.r)},
                 {"n_sites", p.n_sites},
                 {"cutoff", p.cutoff},
                 {"tol", p.tol},
                 {"series_tol", p.series_tol},
                 {"exclusion_radius", p.exclusion_radius}};
  json out = {{"params", params}, {"seed", cfg.seed}, {"suites", cfg.suites},
              {"output_path", cfg.output_path}};
  if (cfg.z_samples.empty()) {
    out["z_samples"] = cfg.z_sample_count;
  } else {
    json zs = json::array();
    for (cplx z : cfg.z_samples) zs.push_back(complex_to_json(z));
    out["z_samples"] = zs;
  }
  if (!cfg.csv_path.empty()) out["csv_path"] = cfg.csv_path;
  return out;
}

SuiteOutcome run_suite(const std::string& suite, const RunConfig& cfg) {
  SuiteOutcome o;
  o.suite = suite;
  const ChainParams& p = cfg.params;
  const VerifyOptions vo = verify_options(cfg);
  try {
    if (suite == "ybe") o.checks = check_ybe(p, vo);
    else if (suite == "reflection") o.checks = check_reflection(p, vo);
    else if (suite == "fusion") o.checks = check_fusion(p, vo);
    else if (suite == "row-fusion") o.checks = check_row_fusion_and_monodromy(p, vo);
    else if (suite == "split-trace") o.checks = check_split_trace(p, vo);
    else if (suite == "tq") {
      o.checks = check_tq(p, vo);
      append(o.checks, check_truncation_stability(p, vo));
    } else if (suite == "commutators") o.checks = check_commutators(p, vo);
    else if (suite == "crossing") o.checks = check_crossing(p, vo);
    else if (suite == "polynomiality") {
      o.checks = check_polynomiality(p, vo);
      append(o.checks, check_golden(p, vo));
    } else if (suite == "n2-closed-forms") o.checks = check_n2_closed_forms(p, vo);
    else if (suite == "closed-chain") {
      o.checks = check_closed_chain(p, vo);
      append(o.checks, closed_bethe_checks(cfg));
    } else if (suite == "spectrum") o.checks = spectrum_suite(cfg, o.rows);
    else if (suite == "bethe") o.checks = bethe_suite(cfg);
    else throw ConfigError("unknown suite '" + suite + "'");
  } catch (const ParameterError& e) {
    o.error = e.what();
    o.config_error = true;
  } catch (const ConvergenceError& e) {
    o.error = e.what();
    o.config_error = true;
  } catch (const ConfigError& e) {
    o.error = e.what();
    o.config_error = true;
  } catch (const std::exception& e) {
    o.error = e.what();
  }
  return o;
}

int exit_code_for(const std::vector<SuiteOutcome>& outcomes) {
  bool theorem_fail = false;
  for (const auto& o : outcomes) {
    if (o.config_error) return 2;
    if (!o.error.empty()) theorem_fail = true;
    for (const auto& c : o.checks)
      if (!c.passed && !c.conjecture) theorem_fail = true;
  }
  return theorem_fail ? 1 : 0;
}

RunResult run(const RunConfig& cfg) {
  std::vector<std::future<SuiteOutcome>> jobs;
  for (const auto& s : cfg.suites)
    jobs.push_back(std::async(std::launch::async, [&cfg, s] { return run_suite(s, cfg); }));
  RunResult r;
  for (auto& f : jobs) r.suites.push_back(f.get());
  for (const auto& o : r.suites)
    for (const auto& c : o.checks) {
      if (c.passed) continue;
      (c.conjecture ? r.conjecture_failures : r.theorem_failures)++;
    }
  r.exit_code = exit_code_for(r.suites);
  return r;
}

json check_to_json(const CheckResult& c) {
  json values = json::array();
  for (const auto& [k, v] : c.values) values.push_back({{"name", k}, {"value", complex_to_json(v)}});
  return {{"name", c.name},
          {"residual", real_to_json(c.residual)},
          {"tolerance", real_to_json(c.tolerance)},
          {"passed", c.passed},
          {"kind", c.conjecture ? "conjecture" : "theorem"},
          {"params_digest", c.params_digest},
          {"notes", c.notes},
          {"values", values}};
}

CheckResult check_from_json(const json& j) {
  CheckResult c;
  c.name = j.at("name").get<std::string>();
  c.residual = real_from_json(j.at("residual"));
  c.tolerance = real_from_json(j.at("tolerance"));
  c.passed = j.at("passed").get<bool>();
  c.conjecture = j.at("kind").get<std::string>() == "conjecture";
  c.params_digest = j.at("params_digest").get<std::string>();
  c.notes = j.at("notes").get<std::string>();
  for (const auto& v : j.at("values"))
    c.values.emplace_back(v.at("name").get<std::string>(), complex_from_json(v.at("value")));
  return c;
}

json report_json(const RunResult& result, const RunConfig* cfg, const std::string& timestamp) {
  json checks = json::array();
  json errors = json::array();
  json suites = json::array();
  int total = 0;
  for (const auto& o : result.suites) {
    suites.push_back(o.suite);
    for (const auto& c : o.checks) {
      json cj = check_to_json(c);
      cj["suite"] = o.suite;
      checks.push_back(cj);
      ++total;
    }
    if (!o.error.empty())
      errors.push_back({{"suite", o.suite}, {"message", o.error}, {"config_error", o.config_error}});
  }
  json rep = {{"schema", 1},
              {"timestamp", timestamp},
              {"suites", suites},
              {"summary",
               {{"checks", total},
                {"theorem_failures", result.theorem_failures},
                {"conjecture_failures", result.conjecture_failures},
                {"conjecture_flag", result.conjecture_failures > 0
                                        ? "CONJECTURE CHECKS FAILED (theorem checks unaffected)"
                                        : ""},
                {"exit_code", result.exit_code}}},
              {"checks", checks},
              {"errors", errors}};
  if (cfg) {
    rep["seed"] = cfg->seed;
    rep["config"] = config_to_json(*cfg);
  }
  return rep;
}

void export_report(const RunResult& result, const RunConfig* cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write report '" + path + "'");
  out << report_json(result, cfg, utc_timestamp()).dump(2) << '\n';
  if (!out) throw Error("write failed for '" + path + "'");
}

std::vector<CheckResult> parse_report_checks(const json& report) {
  if (!report.is_object() || report.value("schema", 0) != 1) throw ConfigError("not a schema-1 report");
  std::vector<CheckResult> out;
  for (const auto& c : report.at("checks")) out.push_back(check_from_json(c));
  return out;
}

void write_spectrum_csv(const std::vector<SpectrumRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write table '" + path + "'");
  out << "sector,record_index,z_re,z_im,tv_re,tv_im,q_re,q_im\n";
  out.precision(17);
  for (const auto& r : rows)
    out << r.sector << ',' << r.record_index << ',' << r.z.real() << ',' << r.z.imag() << ','
        << r.tv.real() << ',' << r.tv.imag() << ',' << r.q.real() << ',' << r.q.imag() << '\n';
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace qbaxter
