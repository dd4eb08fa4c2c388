// Command-line front end: register two clouds, synthesize clouds, run experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "einit/einit.hpp"
#include "einit/harness.hpp"
#include "einit/icp.hpp"
#include "einit/io.hpp"
#include "einit/perturb.hpp"
#include "einit/shapes.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

int exit_code(einit::ErrorKind kind) {
  switch (kind) {
    case einit::ErrorKind::DegenerateCloud:
    case einit::ErrorKind::NumericalFailure:
    case einit::ErrorKind::DegenerateCorrespondence: return kExitNumerical;
    default: return kExitUsage;
  }
}

json matrix_json(const einit::Matrix& m) {
  json rows = json::array();
  for (einit::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (einit::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const einit::Vector& v) {
  json out = json::array();
  for (einit::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json motion_json(const einit::RigidMotion& m) {
  return {{"rotation", matrix_json(m.rotation)}, {"translation", vector_json(m.translation)}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) einit::fail(einit::ErrorKind::IoError, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) einit::fail(einit::ErrorKind::IoError, "write failed for '" + path.string() + "'");
}

struct RegisterArgs {
  std::string source;
  std::string target;
  std::string group = "ref";
  bool no_init = false;
  bool allow_reflections = true;
  int max_iterations = einit::IcpParams{}.max_iterations;
  std::string out;
};

int run_register(const RegisterArgs& a) {
  std::vector<std::string> warnings;
  const einit::PointCloud source = einit::io::load_cloud(a.source, &warnings);
  const einit::PointCloud target = einit::io::load_cloud(a.target, &warnings);
  if (source.dim() != target.dim()) einit::fail(einit::ErrorKind::InvalidInput, "source and target dimensions differ");

  einit::IcpParams icp;
  icp.allow_reflections = a.allow_reflections;
  icp.max_iterations = a.max_iterations;
  einit::EInitParams init;
  init.group = einit::parse_group(a.group);

  einit::RegistrationResult r =
      a.no_init ? einit::register_without_init(source, target, einit::RigidMotion::identity(source.dim()), icp)
                : einit::register_clouds(source, target, init, icp);

  json out{{"schema_version", einit::harness::kSchemaVersion},
           {"software_version", einit::harness::kSoftwareVersion},
           {"source", a.source},
           {"target", a.target},
           {"dimension", source.dim()},
           {"group", a.no_init ? json(nullptr) : json(a.group)},
           {"allow_reflections", a.allow_reflections},
           {"motion", motion_json(r.final_motion)},
           {"initial_motion", motion_json(r.init_motion)},
           {"correspondences", r.refine.correspondences.assignment},
           {"cost_trace", r.refine.cost_trace},
           {"iterations", r.refine.iterations},
           {"converged", r.refine.converged},
           {"ambiguous_estimate", r.refine.ambiguous_estimate}};
  if (!a.no_init) {
    json scores = json::array();
    for (const einit::CandidateScore& c : r.init.candidate_scores) scores.push_back(c.score);
    const einit::SpectrumReport s = einit::spectrum_report(source, target);
    out["einit"] = {{"chosen_index", r.init.chosen_index},
                    {"chosen_element", matrix_json(r.init.chosen_element)},
                    {"candidate_scores", scores},
                    {"source_eigenvalues", vector_json(s.source_eigenvalues)},
                    {"target_eigenvalues", vector_json(s.target_eigenvalues)},
                    {"source_gap", r.init.source_gap},
                    {"target_gap", r.init.target_gap},
                    {"eigenvalue_discrepancy", s.eigenvalue_discrepancy}};
    warnings.insert(warnings.end(), r.init.warnings.begin(), r.init.warnings.end());
  }
  out["warnings"] = warnings;
  for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';

  write_json(a.out, out);
  std::printf("final cost %.6g after %d iterations\n", r.refine.cost_trace.back(), r.refine.iterations);
  return kExitOk;
}

struct SynthArgs {
  long n = 1000;
  long d = 3;
  double half_width = 20.0;
  std::uint64_t seed = 1;
  std::string shape;
  std::string out;
};

int run_synth(const SynthArgs& a) {
  einit::PointCloud cloud = [&] {
    if (!a.shape.empty()) return einit::shapes::by_name(a.shape, a.n);
    einit::Rng rng(a.seed);
    return einit::random_cloud(a.n, a.d, a.half_width, rng);
  }();
  einit::io::save_cloud(a.out, cloud);
  return kExitOk;
}

struct ExperimentArgs {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

int run_experiment(const ExperimentArgs& a) {
  einit::harness::ExperimentConfig cfg = einit::harness::load_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.threads) cfg.threads = *a.threads;
  const einit::harness::ExperimentReport report = einit::harness::run_experiment(cfg);
  for (const fs::path& p : einit::harness::save_report(report, a.out_dir)) std::printf("wrote %s\n", p.string().c_str());
  for (const einit::harness::BatchReport& arm : report.arms) {
    for (const einit::harness::CellReport& cell : arm.cells) {
      std::printf("%-9s %-10s mult=%-6g add=%-6g alpha=%-5g tau=%.3f\n", arm.arm.c_str(), cell.params.cloud.c_str(),
                  cell.params.sigma_mult, cell.params.sigma_add, cell.params.alpha, cell.tau());
    }
  }
  return kExitOk;
}

void add_experiment_options(CLI::App* cmd, ExperimentArgs& a) {
  cmd->add_option("--config", a.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out-dir", a.out_dir, "Directory for reports")->required();
  cmd->add_option("--seed", a.seed, "Override the config seed");
  cmd->add_option("--threads", a.threads, "Worker threads (0 = all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point cloud registration with eigendecomposition initialization"};
  app.require_subcommand(1);

  RegisterArgs reg;
  CLI::App* reg_cmd = app.add_subcommand("register", "Register a source cloud onto a target cloud");
  reg_cmd->add_option("--source", reg.source, "Source cloud (.xyz, .csv, .ply)")->required();
  reg_cmd->add_option("--target", reg.target, "Target cloud")->required();
  reg_cmd->add_option("--group", reg.group, "Candidate group")->check(CLI::IsMember({"ref", "bd"}));
  reg_cmd->add_flag("--no-init", reg.no_init, "Start ICP from the identity");
  reg_cmd->add_option("--allow-reflections", reg.allow_reflections, "Search O(d) rather than SO(d)");
  reg_cmd->add_option("--max-iterations", reg.max_iterations, "ICP iteration cap");
  reg_cmd->add_option("--out", reg.out, "Result JSON")->required();

  SynthArgs syn;
  CLI::App* syn_cmd = app.add_subcommand("synth", "Write a synthetic cloud");
  syn_cmd->add_option("--n", syn.n, "Number of points")->check(CLI::PositiveNumber);
  syn_cmd->add_option("--d", syn.d, "Dimension")->check(CLI::PositiveNumber);
  syn_cmd->add_option("--half-width", syn.half_width, "Coordinates are uniform in [-w, w]");
  syn_cmd->add_option("--seed", syn.seed, "Generator seed");
  syn_cmd->add_option("--shape", syn.shape, "Bundled shape instead of a uniform cube")
      ->check(CLI::IsMember({"teapot", "bunny", "cow"}));
  syn_cmd->add_option("--out", syn.out, "Output cloud (.xyz, .csv, .ply)")->required();

  ExperimentArgs exp;
  CLI::App* exp_cmd = app.add_subcommand("experiment", "Run a Monte Carlo experiment from a config");
  add_experiment_options(exp_cmd, exp);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Alias of experiment");
  add_experiment_options(sweep_cmd, exp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*reg_cmd) return run_register(reg);
    if (*syn_cmd) return run_synth(syn);
    return run_experiment(exp);
  } catch (const einit::Error& e) {
    std::cerr << "error (" << einit::to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
