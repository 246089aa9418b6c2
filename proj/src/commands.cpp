#include "pseudomix/cli.hpp"

#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

namespace pseudomix::cli {

namespace {

constexpr Eigen::Index kSoftDimCap = 16;

void warn_if_large(BipartiteDims dims, std::ostream& err) {
  if (dims.d1 > kSoftDimCap || dims.d2 > kSoftDimCap) {
    err << "warning: factor dimensions " << dims.d1 << "x" << dims.d2
        << " exceed the soft cap of " << kSoftDimCap << "; dense kernels will be slow\n";
  }
}

HermitianState<double> load_density(const std::string& path) {
  io::StateFile s = io::read_state_file(path);
  return HermitianState<double>::density(s.dims, std::move(s.matrix));
}

void print_check(std::ostream& out, const Check& c) {
  out << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(26) << c.name
      << std::setprecision(6) << " measured=" << c.measured << " threshold=" << c.threshold
      << '\n';
}

}  // namespace

PipelineConfig DecomposeOptions::pipeline_config() const {
  PipelineConfig cfg;
  cfg.tol_residual = tol_residual;
  cfg.max_steps = max_steps;
  cfg.coalesce = coalesce;
  cfg.search.restarts = restarts;
  cfg.search.seed = seed;
  cfg.search.threads = threads;
  return cfg;
}

RunOutcome run_decomposition(const HermitianState<double>& rho, const PipelineConfig& cfg) {
  RunOutcome outcome;
  Decomposition<double> d;
  try {
    d = decompose(rho, cfg);
    outcome.code = d.converged ? kOk : kNotConverged;
    if (!d.converged) {
      outcome.message = "not converged after " + std::to_string(d.steps()) + " steps";
    }
  } catch (const decomposition_stall<double>& e) {
    d = e.partial();
    outcome.code = kStall;
    outcome.message = std::string("optimizer stall: ") + e.what();
  }
  if (cfg.coalesce) d = coalesce(d, cfg.weight_prune);
  if (d.terms.empty()) {
    outcome.report = io::make_report(d, nullptr, cfg);
  } else {
    const Pseudomixture<double> p = assemble(d, cfg.weight_prune);
    outcome.report = io::make_report(d, &p, cfg);
  }
  return outcome;
}

int cmd_decompose(const DecomposeOptions& opts, std::ostream& out, std::ostream& err) {
  HermitianState<double> rho;
  PipelineConfig cfg;
  try {
    cfg = opts.pipeline_config();
    cfg.validate();
    rho = load_density(opts.input);
  } catch (const invalid_input& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
  warn_if_large(rho.dims(), err);

  const RunOutcome outcome = run_decomposition(rho, cfg);
  try {
    io::write_json_file(opts.out, outcome.report);
  } catch (const invalid_input& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
  if (!outcome.message.empty()) err << outcome.message << '\n';
  const auto& r = outcome.report;
  out << "steps " << r.at("steps").get<int>() << ", residual_hs "
      << r.at("residual_hs").get<double>();
  if (!r.at("a").is_null()) {
    out << ", a " << r.at("a").get<double>() << ", b " << r.at("b").get<double>();
  }
  out << '\n';
  return outcome.code;
}

int cmd_validate(const std::string& input, std::ostream& out, std::ostream& err) {
  io::StateFile s;
  try {
    s = io::read_state_file(input);
  } catch (const invalid_input& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
  warn_if_large(s.dims, err);
  const auto violations = validate_density(s.matrix, tol::density);
  for (const auto& v : violations) out << "violation: " << v.describe() << '\n';
  if (hermitian_defect(s.matrix) <= tol::hermitian) {
    const auto ppt = ppt_check(HermitianState<double>(s.dims, s.matrix));
    out << "ppt: " << ppt.name() << " min_pt_eigenvalue=" << std::setprecision(12)
        << ppt.min_pt_eigenvalue << " decisive=" << (ppt.decisive ? "true" : "false") << '\n';
  }
  if (violations.empty()) {
    out << "valid density matrix " << s.dims.d1 << "x" << s.dims.d2 << '\n';
    return kOk;
  }
  return kInvalidInput;
}

int cmd_random(Eigen::Index d1, Eigen::Index d2, Eigen::Index rank, std::uint64_t seed,
               const std::string& out_path, std::ostream& out, std::ostream& err) {
  try {
    const BipartiteDims dims(d1, d2);
    warn_if_large(dims, err);
    const auto rho = random_density<double>(dims, rank, seed);
    io::write_state_file(out_path, {dims, rho.matrix()});
    out << "wrote " << d1 << "x" << d2 << " rank-" << rank << " state to " << out_path << '\n';
    return kOk;
  } catch (const invalid_input& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
}

int cmd_verify(const std::string& input, const std::string& report_path, std::ostream& out,
               std::ostream& err) {
  HermitianState<double> rho;
  io::Json report;
  Pseudomixture<double> p;
  PipelineConfig cfg;
  try {
    rho = load_density(input);
    report = io::read_json_file(report_path);
    p = io::pseudomixture_from_report(report);
    cfg = io::config_from_json(report.at("config"));
  } catch (const invalid_input& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const io::Json::exception& e) {
    err << "error: malformed report: " << e.what() << '\n';
    return kInvalidInput;
  }

  VerificationSummary summary;
  const std::string hash = io::content_hash(rho.dims(), rho.matrix());
  const bool hash_ok = report.at("input").value("hash", std::string()) == hash;
  summary.checks.push_back({"input_hash", hash_ok, 0.0, 0.0});
  if (!(p.dims == rho.dims())) {
    for (const auto& c : summary.checks) print_check(out, c);
    err << "report dimensions do not match the state\n";
    return kVerifyFailed;
  }

  for (auto& c : verify_report(rho, p).checks) summary.checks.push_back(std::move(c));

  try {
    const auto& stats = report.at("stats");
    if (!stats.empty()) {
      double sum = 0;
      for (const auto& s : stats) sum += s.at("tr_a2").get<double>();
      sum += stats.back().at("tr_h2_after").get<double>();
      const double gap = std::abs(sum - rho.matrix().squaredNorm());
      summary.checks.push_back({"telescoping", gap <= 1e-9, gap, 1e-9});
    }
    const auto ppt = ppt_check(rho);
    const bool ppt_ok = report.at("ppt").at("verdict").get<std::string>() == ppt.name() &&
                        report.at("ppt").at("min_pt_eigenvalue").get<double>() ==
                            ppt.min_pt_eigenvalue;
    summary.checks.push_back({"ppt_recomputed", ppt_ok, ppt.min_pt_eigenvalue, 0.0});
  } catch (const io::Json::exception& e) {
    err << "error: malformed report: " << e.what() << '\n';
    return kInvalidInput;
  }

  // Every number in the report must follow from the state and the config echo.
  const RunOutcome rerun = run_decomposition(rho, cfg);
  summary.checks.push_back({"rerun_matches", rerun.report == report, 0.0, 0.0});

  for (const auto& c : summary.checks) print_check(out, c);
  return summary.passed() ? kOk : kVerifyFailed;
}

int run(int argc, char** argv) {
  CLI::App app{"Pseudomixture decomposition of bipartite density matrices"};
  app.require_subcommand(1);

  DecomposeOptions dopts;
  auto* decompose_cmd = app.add_subcommand("decompose", "Decompose a state into product terms");
  decompose_cmd->add_option("--input", dopts.input, "State file")->required();
  decompose_cmd->add_option("--out", dopts.out, "Report file")->required();
  decompose_cmd->add_option("--tol-residual", dopts.tol_residual, "HS residual tolerance");
  decompose_cmd->add_option("--max-steps", dopts.max_steps, "Maximum extraction steps");
  decompose_cmd->add_option("--restarts", dopts.restarts, "Optimizer restarts per step");
  decompose_cmd->add_option("--seed", dopts.seed, "Random seed");
  decompose_cmd->add_option("--threads", dopts.threads, "Worker threads for restarts");
  decompose_cmd->add_flag("--coalesce", dopts.coalesce, "Merge coincident product terms");

  std::string validate_input;
  auto* validate_cmd = app.add_subcommand("validate", "Check a state file");
  validate_cmd->add_option("--input", validate_input, "State file")->required();

  Eigen::Index d1 = 2, d2 = 2, rank = 1;
  std::uint64_t seed = 0;
  std::string random_out;
  auto* random_cmd = app.add_subcommand("random", "Write a random density matrix");
  random_cmd->add_option("--d1", d1, "Dimension of factor 1")->required();
  random_cmd->add_option("--d2", d2, "Dimension of factor 2")->required();
  random_cmd->add_option("--rank", rank, "Rank")->required();
  random_cmd->add_option("--seed", seed, "Random seed");
  random_cmd->add_option("--out", random_out, "State file")->required();

  std::string verify_input, verify_report_path;
  auto* verify_cmd = app.add_subcommand("verify", "Recheck a report against its state");
  verify_cmd->add_option("--input", verify_input, "State file")->required();
  verify_cmd->add_option("--report", verify_report_path, "Report file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidInput;
  }

  if (*decompose_cmd) return cmd_decompose(dopts, std::cout, std::cerr);
  if (*validate_cmd) return cmd_validate(validate_input, std::cout, std::cerr);
  if (*random_cmd) return cmd_random(d1, d2, rank, seed, random_out, std::cout, std::cerr);
  if (*verify_cmd) return cmd_verify(verify_input, verify_report_path, std::cout, std::cerr);
  return kInvalidInput;
}

}  // namespace pseudomix::cli
