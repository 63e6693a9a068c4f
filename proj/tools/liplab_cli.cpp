// Command-line front end: sample | graph | solve | groundstate | converge |
// geodesic | validate-kernel, driven by a flat key=value config file.
//
// Exit codes: 0 success, 2 config error, 3 all cells disconnected,
// 4 solver non-convergence in any cell.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "liplab/io.hpp"
#include "liplab/lab.hpp"

using namespace liplab;

namespace {

std::filesystem::path out_path(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir.empty() ? "." : dir);
  return std::filesystem::path(dir.empty() ? "." : dir) / name;
}

// The single-cell subcommands operate on the first configured cell.
struct SingleCell {
  PointCloud cloud;
  double r = 0;
  double s = 0;
};

SingleCell first_cell(const ExperimentConfig& cfg) {
  SingleCell c;
  if (cfg.sampling == SamplingKind::Grid) {
    c.cloud = sample_grid(cfg.domain, cfg.spacings.at(0));
  } else if (cfg.sampling == SamplingKind::Uniform) {
    c.cloud = sample_uniform(cfg.domain, static_cast<int>(cfg.sizes.at(0)),
                             cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  } else if (cfg.sampling == SamplingKind::Halton) {
    c.cloud = sample_halton(cfg.domain, static_cast<int>(cfg.sizes.at(0)),
                            cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  } else {
    c.cloud = read_cloud_csv(cfg.cloud_file);
  }
  const int d = cfg.domain.dim();
  const double native_h =
      cfg.sampling == SamplingKind::Grid
          ? cfg.spacings.at(0)
          : std::pow(cfg.domain.volume_bbox() / static_cast<double>(c.cloud.size()), 1.0 / d);
  const double probe = cfg.fill_probe > 0 ? cfg.fill_probe
                       : cfg.sampling == SamplingKind::Grid ? native_h / 2
                                                            : native_h / 4;
  c.r = fill_distance(cfg.domain, c.cloud, probe);
  c.s = scaling_schedule(cfg.schedule, cfg.schedule_k, cfg.schedule_alpha, c.r);
  return c;
}

int run_solver_command(const ExperimentConfig& cfg, bool ground) {
  ExperimentConfig local = cfg;
  local.solver = ground ? SolverKind::GroundState
                        : (local.solver == SolverKind::McShaneLower ||
                                   local.solver == SolverKind::McShaneUpper
                               ? local.solver
                               : SolverKind::InfinityHarmonic);
  // a single-cell converge run produces the report and the solution dump
  ExperimentConfig one = local;
  if (one.sampling == SamplingKind::Grid) one.spacings.resize(1);
  else if (one.sampling != SamplingKind::Explicit) one.sizes.resize(1);
  if (one.out_dir.empty()) one.out_dir = ".";
  const ConvergenceReport report = run_experiment(one, 1);
  const auto& row = report.rows.at(0);
  nlohmann::json j;
  j["status"] = row.status;
  j[ground ? "eigenvalue" : "objective"] = row.value;
  j["iterations"] = row.iterations;
  j["residual"] = row.residual;
  j["solution_path"] = "solution_" + std::to_string(row.n) + ".csv";
  {
    std::ofstream f(out_path(one.out_dir, "report.json"));
    f << j.dump(2) << "\n";
  }
  report.write_csv(out_path(one.out_dir, "report.csv").string());
  std::cout << report.csv_string();
  return report.exit_code();
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-based Lipschitz learning laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  app.add_option("--config", config_path, "flat key=value config file")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed", seed, "seed override")->each([&](const std::string&) { seed_set = true; });
  app.add_option("--threads", threads, "worker threads for converge");

  auto* cmd_sample = app.add_subcommand("sample", "sample a point cloud, write cloud.csv");
  auto* cmd_graph = app.add_subcommand("graph", "build the geometric graph, dump csv + header");
  auto* cmd_solve = app.add_subcommand("solve", "run the configured solver on the first cell");
  auto* cmd_ground = app.add_subcommand("groundstate", "ground state on the first cell");
  auto* cmd_converge = app.add_subcommand("converge", "full convergence sweep");
  auto* cmd_geodesic = app.add_subcommand("geodesic", "geodesic distance field, write field.csv");
  auto* cmd_validate = app.add_subcommand("validate-kernel", "check kernel assumptions");

  std::string sources_arg = "0,0";
  double mesh_h = 0.01;
  cmd_geodesic->add_option("--sources", sources_arg, "semicolon-separated source points");
  cmd_geodesic->add_option("--mesh", mesh_h, "lattice spacing");
  int grid_n = 1000;
  cmd_validate->add_option("--grid", grid_n, "validation grid size");

  CLI11_PARSE(app, argc, argv);

  ExperimentConfig cfg;
  try {
    cfg = parse_config_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_set) cfg.seed = seed;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (cmd_sample->parsed()) {
      const SingleCell c = first_cell(cfg);
      write_cloud_csv(out_path(cfg.out_dir, "cloud.csv").string(), c.cloud);
      std::cout << "n=" << c.cloud.size() << " r=" << format_double(c.r)
                << " s=" << format_double(c.s) << "\n";
      return 0;
    }
    if (cmd_graph->parsed()) {
      const SingleCell c = first_cell(cfg);
      const GeometricGraph g = build_graph(c.cloud, cfg.kernel, c.s);
      write_graph_csv(out_path(cfg.out_dir, "graph.csv").string(), g);
      write_graph_header_json(out_path(cfg.out_dir, "graph_header.json").string(), g);
      std::cout << "n=" << g.vertex_count() << " edges=" << g.edges().size()
                << " s=" << format_double(c.s) << "\n";
      return 0;
    }
    if (cmd_solve->parsed()) return run_solver_command(cfg, false);
    if (cmd_ground->parsed()) return run_solver_command(cfg, true);
    if (cmd_converge->parsed()) {
      const ConvergenceReport report = run_experiment(cfg, std::max(1, threads));
      const std::string dir = cfg.out_dir.empty() ? "." : cfg.out_dir;
      report.write_json(out_path(dir, "report.json").string());
      report.write_csv(out_path(dir, "report.csv").string());
      std::cout << report.csv_string();
      return report.exit_code();
    }
    if (cmd_geodesic->parsed()) {
      std::vector<double> sources;
      std::stringstream ss(sources_arg);
      std::string pt;
      while (std::getline(ss, pt, ';')) {
        std::stringstream ps(pt);
        std::string cell;
        while (std::getline(ps, cell, ',')) sources.push_back(std::stod(cell));
      }
      const GeodesicField field = geodesic_distance_field(cfg.domain, sources, mesh_h);
      write_field_csv(out_path(cfg.out_dir, "field.csv").string(), field);
      std::cout << "nodes=" << field.mesh->size() << " unreached=" << field.unreached
                << " overestimation_bound=" << format_double(field.mesh->overestimation_bound)
                << "\n";
      return 0;
    }
    if (cmd_validate->parsed()) {
      const KernelValidationReport rep = validate_kernel(cfg.kernel, grid_n);
      std::cout << "K1 positive and continuous at 0: " << (rep.k1_positive_continuous_at_zero ? "pass" : "FAIL")
                << "\nK2 non-increasing: " << (rep.k2_non_increasing ? "pass" : "FAIL")
                << "\nK3 compact support: " << (rep.k3_compact_support ? "pass" : "FAIL") << "\n";
      if (!rep.detail.empty()) std::cout << rep.detail << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
