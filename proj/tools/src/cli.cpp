#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kvflow/compactness.hpp"
#include "kvflow/driver.hpp"
#include "kvflow/galerkin.hpp"
#include "kvflow/mms.hpp"
#include "kvflow/output.hpp"
#include "kvflow/verification.hpp"

namespace kvflow {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

int report(const RunSummary& sum, std::ostream& out, std::ostream& err) {
  for (const auto& [name, ok] : sum.invariants) out << (ok ? "PASS " : "FAIL ") << name << "\n";
  for (const auto& [name, value] : sum.metrics) out << "  " << name << " = " << fmt(value) << "\n";
  if (!sum.failure.empty()) err << "kvflow: " << sum.failure << "\n";
  out << sum.command << ": " << (sum.passed ? "passed" : "FAILED") << "\n";
  return sum.passed ? 0 : 1;
}

/// Fills the pass flag and wall clock of a suite summary and writes it.
int finish_suite(RunSummary& sum, const std::string& path, std::chrono::steady_clock::time_point start,
                 std::ostream& out, std::ostream& err) {
  sum.passed = !sum.invariants.empty();
  for (const auto& f : sum.invariants) sum.passed = sum.passed && f.second;
  sum.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!path.empty()) write_summary(sum, path);
  return report(sum, out, err);
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument(key + ": expected comma-separated integers, got '" + text + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument(key + ": must not be empty");
  return out;
}

void write_compactness_csv(const CompactnessReport& rep, const std::string& path) {
  std::string text = "n,phi,m_n,w_n,weighted_energy\n";
  char buf[256];
  for (const CompactnessRow& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%d,one,%.17g,%.17g,%.17g\n", r.n, r.m_one, r.w, r.weighted);
    text += buf;
    std::snprintf(buf, sizeof buf, "%d,bump,%.17g,%.17g,%.17g\n", r.n, r.m_bump, r.w, r.weighted);
    text += buf;
  }
  write_file_atomically(path, text);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kelvin-Voigt regularized flow solver with a turbulent kinetic energy model", "kvflow"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());

  std::string config_path;
  auto* run = app.add_subcommand("run", "Voigt flow from a config file");
  run->add_option("-c,--config", config_path, "Run configuration")->required();
  auto* nstke = app.add_subcommand("nstke", "Coupled flow and turbulent kinetic energy from a config file");
  nstke->add_option("-c,--config", config_path, "Run configuration")->required();

  std::string summary_path, csv_path;
  VerifyConfig vcfg;
  auto* verify = app.add_subcommand("verify", "Operator, projection, Korn and H^1/2 checks");
  verify->add_option("--coarse", vcfg.coarse, "Coarse resolution")->capture_default_str();
  verify->add_option("--fine", vcfg.fine, "Fine resolution")->capture_default_str();
  verify->add_option("--samples", vcfg.samples, "Random fields per inequality")->capture_default_str();
  verify->add_option("--seed", vcfg.seed, "Seed of the random fields")->capture_default_str();
  verify->add_option("--summary", summary_path, "Summary JSON path");

  std::string mms_case = "all", mms_resolutions = "16,32,64";
  auto* mms = app.add_subcommand("mms", "Manufactured-solution convergence orders");
  mms->add_option("--case", mms_case, "newtonian, voigt_van_driest or all")
      ->check(CLI::IsMember({"newtonian", "voigt_van_driest", "all"}))
      ->capture_default_str();
  mms->add_option("--resolutions", mms_resolutions, "Comma-separated cells per axis")->capture_default_str();
  mms->add_option("--summary", summary_path, "Summary JSON path");

  CompactnessPlan plan;
  std::string family = to_string(plan.family);
  auto* compact = app.add_subcommand("compactness", "Convergence under perturbed eddy viscosities");
  compact->add_option("--family", family, "identical, amplitude_decay, shrinking_support or oscillatory_decay")
      ->capture_default_str();
  compact->add_option("--cells", plan.cells, "Cells per axis")->capture_default_str();
  compact->add_option("--t-end", plan.t_end, "Final time")->capture_default_str();
  compact->add_option("--dt", plan.dt, "Time step")->capture_default_str();
  compact->add_option("--csv", csv_path, "Metrics CSV path");
  compact->add_option("--summary", summary_path, "Summary JSON path");

  GalerkinAgreementConfig gcfg;
  auto* galerkin = app.add_subcommand("galerkin", "Spectral Galerkin oracle against the grid solver");
  galerkin->add_option("--n", gcfg.n, "Galerkin modes")->capture_default_str();
  galerkin->add_option("--cells", gcfg.grid_cells, "Grid cells per axis")->capture_default_str();
  galerkin->add_option("--summary", summary_path, "Summary JSON path");

  ReduceNsvConfig rcfg;
  auto* reduce = app.add_subcommand("reduce-nsv", "Constant mixing length against the classical Voigt term");
  reduce->add_option("--cells", rcfg.cells, "Cells per axis")->capture_default_str();
  reduce->add_option("--steps", rcfg.steps, "Time steps")->capture_default_str();
  reduce->add_option("--summary", summary_path, "Summary JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "kvflow: " << e.what() << "\n";
    return 2;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    if (run->parsed()) return report(run_flow(load_config(config_path)).summary, out, err);
    if (nstke->parsed()) return report(run_nstke(load_config(config_path)).summary, out, err);

    RunSummary sum;
    if (verify->parsed()) {
      sum.command = "verify";
      const VerifyReport rep = verify_suite(vcfg);
      for (const VerifyItem& it : rep.items) {
        sum.flag(it.name, it.passed);
        sum.metric(it.name, it.value);
      }
      sum.metric("korn_coarse", rep.korn_coarse);
      sum.metric("korn_fine", rep.korn_fine);
      sum.metric("h_half_coarse", rep.h_half_coarse);
      sum.metric("h_half_fine", rep.h_half_fine);
    } else if (mms->parsed()) {
      sum.command = "mms";
      MmsOptions opts;
      opts.resolutions = parse_int_list("mms.resolutions", mms_resolutions);
      std::vector<MmsCase> cases;
      if (mms_case != "voigt_van_driest") cases.push_back(MmsCase::newtonian());
      if (mms_case != "newtonian") cases.push_back(MmsCase::voigt_van_driest());
      for (const MmsCase& c : cases) {
        const MmsReport rep = mms_convergence(c, opts);
        sum.flag("mms_" + c.name, rep.passed);
        sum.metric(c.name + ".min_spatial_order", rep.min_spatial_order);
        sum.metric(c.name + ".min_temporal_order", rep.min_temporal_order);
        for (std::size_t i = 0; i < rep.resolutions.size(); ++i)
          sum.metric(c.name + ".error_" + std::to_string(rep.resolutions[i]), rep.spatial_errors[i]);
      }
    } else if (compact->parsed()) {
      sum.command = "compactness";
      plan.family = perturbation_family_from_string(family);
      const CompactnessReport rep = run_compactness(plan);
      if (!csv_path.empty()) write_compactness_csv(rep, csv_path);
      sum.flag("compactness_monotone", rep.monotone);
      sum.flag("compactness_ratio", rep.ratio_ok);
      sum.metric("ratio_m_one", rep.ratio_m_one);
      sum.metric("ratio_m_bump", rep.ratio_m_bump);
      sum.metric("ratio_w", rep.ratio_w);
      sum.metric("bound", rep.bound);
      sum.metric("weighted_limit", rep.weighted_limit);
    } else if (galerkin->parsed()) {
      sum.command = "galerkin";
      const GalerkinAgreementReport rep = galerkin_agreement(gcfg);
      sum.flag("galerkin_spd", rep.spd_ok);
      sum.flag("galerkin_agreement", rep.agree);
      sum.metric("max_gap", rep.max_gap);
      sum.metric("max_gap_over_bound", rep.max_ratio);
      sum.metric("skew_defect", rep.skew_defect);
      sum.metric("galerkin_residual", rep.galerkin_residual);
      sum.metric("grid_residual", rep.grid_residual);
    } else if (reduce->parsed()) {
      sum.command = "reduce-nsv";
      const ReduceNsvReport rep = reduce_nsv_check(rcfg);
      sum.flag("reduce_nsv", rep.passed);
      sum.metric("max_diff", rep.max_diff);
      sum.metric("final_energy", rep.final_energy);
    }
    return finish_suite(sum, summary_path, start, out, err);
  } catch (const std::invalid_argument& e) {
    err << "kvflow: invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "kvflow: FAILED " << invariant_of(e) << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace kvflow
