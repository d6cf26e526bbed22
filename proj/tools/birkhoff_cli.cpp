// Command-line frontend: expansion, resonance scans, normal forms and wave
// simulations driven by one flat config file.  CSV bodies are byte-stable for
// a fixed config and seed; timestamps only ever land in the .meta.txt sidecar.

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "birkhoff/birkhoff.hpp"

namespace {

using namespace birkhoff;

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  for (const auto& kv : overrides) {
    if (kv.find('=') == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    text << '\n' << kv << '\n';
  }
  return parse_config_string(text.str());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output '" + path + "'");
  return out;
}

using MetaLines = std::vector<std::pair<std::string, std::string>>;

void write_meta(const std::string& out_path, const std::string& command, const RunConfig& config,
                const MetaLines& extra) {
  std::ofstream meta(out_path + ".meta.txt");
  if (!meta) throw ConfigError("cannot open sidecar '" + out_path + ".meta.txt'");
  meta << "command " << command << '\n';
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  meta << "generated " << stamp << '\n';
  for (const auto& [k, v] : extra) meta << k << ' ' << v << '\n';
  meta << "config_begin\n";
  serialize_config(meta, config);
  meta << "config_end\n";
}

double clamped_threshold(const RunConfig& config) {
  return std::min(std::max(config.derived_threshold(), 1.0), config.cutoff);
}

void run_expand(const RunConfig& config, const std::string& out_path) {
  const GradedPolynomial P =
      taylor_expand_nlw(config.nonlinearity(), config.model(), config.cutoff, config.order);
  auto out = open_out(out_path);
  write_polynomial(out, P);
  MetaLines extra;
  extra.emplace_back("terms", std::to_string(P.term_count()));
  write_meta(out_path, "expand", config, extra);
}

void run_resonance_scan(const RunConfig& config, const std::string& out_path) {
  const ResonanceCondition condition = parse_condition(config.condition);
  const FrequencyModel model = config.model();
  std::vector<DivisorScanResult> rows;
  for (double N : config.scan_thresholds)
    rows.push_back(min_divisor_scan(model, config.order, N, condition, config.high_bound));
  auto out = open_out(out_path);
  write_scan_csv(out, rows);
  MetaLines extra;
  bool fittable = rows.size() >= 3;
  for (const auto& row : rows) fittable = fittable && !row.empty_domain();
  if (fittable) {
    const AlphaGammaFit fit = fit_alpha_gamma(rows);
    extra.emplace_back("alpha", fmt17(fit.alpha));
    extra.emplace_back("gamma", fmt17(fit.gamma));
    extra.emplace_back("rms_residual", fmt17(fit.rms_residual));
    if (config.order % 3 == 0)
      extra.emplace_back("smoothness_threshold",
                         fmt17(smoothness_threshold(config.order / 3, config.dimension, fit.alpha)));
  } else {
    extra.emplace_back("fit", "skipped (needs >= 3 non-empty scan points)");
  }
  write_meta(out_path, "resonance-scan", config, extra);
}

void run_normal_form(const RunConfig& config, const std::string& out_path) {
  const GradedPolynomial P =
      taylor_expand_nlw(config.nonlinearity(), config.model(), config.cutoff, config.order);
  NormalFormOptions opts;
  opts.divisor_floor = config.divisor_floor;
  const double N = clamped_threshold(config);
  const NormalFormResult nf = birkhoff_normal_form(P, config.model(), N, config.order, opts);
  auto out = open_out(out_path);
  write_normal_form(out, nf);
  MetaLines extra;
  extra.emplace_back("threshold", fmt17(N));
  extra.emplace_back("min_divisor", fmt17(nf.min_divisor));
  write_meta(out_path, "normal-form", config, extra);
}

void run_verify_nf(const RunConfig& config, const std::string& nf_path,
                   const std::string& out_path) {
  std::ifstream in(nf_path);
  if (!in) throw ConfigError("cannot open normal form '" + nf_path + "'");
  const NormalFormResult nf = read_normal_form(in);
  const FrequencyModel model = config.model();
  if (nf.model.dim != model.dim || nf.model.mass != model.mass)
    throw ConfigError("verify-nf: config model differs from the normal form file");
  const GradedPolynomial P = taylor_expand_nlw(config.nonlinearity(), model, config.cutoff,
                                               nf.order_r);
  LieFlowOptions flow;
  flow.tol = config.flow_tol;
  const VerifyReport report =
      verify_normal_form(nf, P, make_lattice(model.dim, config.cutoff), config.verify_radii,
                         config.verify_samples, config.seed, flow);
  auto out = open_out(out_path);
  out << "radius,max_defect\n";
  for (std::size_t i = 0; i < report.radii.size(); ++i)
    out << fmt17(report.radii[i]) << ',' << fmt17(report.max_defect[i]) << '\n';
  MetaLines extra;
  extra.emplace_back("exponent", fmt17(report.exponent));
  write_meta(out_path, "verify-nf", config, extra);
  std::cout << "defect exponent " << fmt17(report.exponent) << '\n';
}

void run_simulate(const RunConfig& config, const std::string& out_path,
                  const std::string& state_out) {
  auto lattice = make_lattice(config.dimension, config.cutoff);
  auto out = open_out(out_path);
  DiagnosticsWriter writer(out, *lattice, clamped_threshold(config));
  const ExperimentResult result =
      run_experiment(config, [&](const DiagnosticsRow& row) { writer.write(row); });
  if (!state_out.empty()) {
    auto sout = open_out(state_out);
    write_state(sout, result.final_state);
  }
  MetaLines extra;
  extra.emplace_back("steps", std::to_string(result.steps));
  extra.emplace_back("dt", fmt17(result.dt));
  extra.emplace_back("horizon", fmt17(result.horizon));
  extra.emplace_back("threshold", fmt17(result.threshold));
  extra.emplace_back("initial_norm_s", fmt17(result.initial_norm_s));
  extra.emplace_back("initial_energy", fmt17(result.initial_energy));
  extra.emplace_back("final_energy", fmt17(result.final_energy));
  extra.emplace_back("max_drift", fmt17(result.max_drift));
  extra.emplace_back("max_drift_sum", fmt17(result.max_drift_sum));
  extra.emplace_back("final_drift", fmt17(result.final_drift));
  write_meta(out_path, "simulate", config, extra);
  std::cout << "steps " << result.steps << " max_drift " << fmt17(result.max_drift) << '\n';
}

void run_drift_study(const RunConfig& config, const std::string& out_path) {
  const DriftStudy study = drift_scaling_study(config);
  auto out = open_out(out_path);
  write_drift_csv(out, study);
  MetaLines extra;
  extra.emplace_back("slope", fmt17(study.slope));
  write_meta(out_path, "drift-study", config, extra);
  std::cout << "drift slope " << fmt17(study.slope) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Birkhoff normal form toolkit for truncated nonlinear waves"};
  app.require_subcommand(1);

  std::string config_path, out_path, nf_path, state_out;
  std::vector<std::string> overrides;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key = value run configuration")->required();
    sub->add_option("--set", overrides, "override a config key, e.g. --set order=4");
    sub->add_option("--out", out_path, "output file path")->required();
  };

  auto* sc_expand =
      app.add_subcommand("expand", "Taylor-expand the nonlinear Hamiltonian on the lattice");
  add_common(sc_expand);
  auto* sc_scan =
      app.add_subcommand("resonance-scan", "minimal small divisors over the threshold list");
  add_common(sc_scan);
  auto* sc_nf = app.add_subcommand("normal-form", "compute the normal form through the order");
  add_common(sc_nf);
  auto* sc_verify =
      app.add_subcommand("verify-nf", "measure the conjugacy defect of a stored normal form");
  add_common(sc_verify);
  sc_verify->add_option("--nf", nf_path, "normal form file to verify")->required();
  auto* sc_sim = app.add_subcommand("simulate", "integrate the truncated wave equation");
  add_common(sc_sim);
  sc_sim->add_option("--state-out", state_out, "also write the final state here");
  auto* sc_drift =
      app.add_subcommand("drift-study", "action drift versus epsilon with derived horizons");
  add_common(sc_drift);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunConfig config = load_config(config_path, overrides);
    if (sc_expand->parsed()) run_expand(config, out_path);
    else if (sc_scan->parsed()) run_resonance_scan(config, out_path);
    else if (sc_nf->parsed()) run_normal_form(config, out_path);
    else if (sc_verify->parsed()) run_verify_nf(config, nf_path, out_path);
    else if (sc_sim->parsed()) run_simulate(config, out_path, state_out);
    else if (sc_drift->parsed()) run_drift_study(config, out_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NearResonanceError& e) {
    std::cerr << "near-resonance: " << e.what() << '\n';
    return 3;
  } catch (const BlowupError& e) {
    std::cerr << "blow-up: " << e.what() << '\n';
    return 5;
  } catch (const IntegrationError& e) {
    std::cerr << "integration error: " << e.what() << '\n';
    return 4;
  } catch (const ConsistencyError& e) {
    std::cerr << "inconsistent data: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
