#pragma once

// Experiment configuration, scaling schedules, convergence sweeps, and
// machine-readable reports.

#include <optional>
#include <string>
#include <vector>

#include "liplab/continuum.hpp"
#include "liplab/geometry.hpp"
#include "liplab/graph.hpp"
#include "liplab/kernels.hpp"
#include "liplab/solvers.hpp"

namespace liplab {

inline constexpr const char* kVersion = "liplab 0.1.0";

enum class ScheduleKind { Power, Log, Proportional };
enum class SamplingKind { Grid, Uniform, Halton, Explicit };
enum class ConstraintKind { Boundary, TwoPoints, ExplicitFile };
enum class SolverKind { Restriction, InfinityHarmonic, McShaneLower, McShaneUpper, GroundState };
enum class TargetKind { SigmaGrad, SigmaLip, GroundStateField, Explicit, None };
enum class LabelsMode { Reference, Values, Zero };

std::string to_string(ScheduleKind k);
std::string to_string(SolverKind k);

// power: s = K r^alpha, alpha in (0,1); log: s = K r ln(e + 1/r);
// proportional: s = K r (negative control; violates r/s -> 0).
double scaling_schedule(ScheduleKind kind, double K, double alpha, double r);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  Domain domain = Domain::unit_box(2);
  SamplingKind sampling = SamplingKind::Grid;
  std::vector<double> spacings;
  std::vector<long> sizes;
  std::string cloud_file;
  uint64_t seed = 1;

  Kernel kernel = Kernel::indicator();

  ScheduleKind schedule = ScheduleKind::Power;
  double schedule_k = 1.5;
  double schedule_alpha = 0.75;

  ConstraintKind constraint = ConstraintKind::Boundary;
  std::vector<double> constraint_points;
  std::vector<double> constraint_values;
  std::string constraint_indices_file, constraint_samples_file;
  LabelsMode labels_mode = LabelsMode::Reference;
  double boundary_spacing = 0; // 0 -> min(r/2, s/4)

  SolverKind solver = SolverKind::Restriction;
  double p = 2.0;
  NormKind norm = NormKind::Empirical;
  double solver_tol = 1e-6;
  int max_sweeps = 200000;
  bool certify = true;

  std::optional<ReferenceFunction> reference;
  TargetKind target = TargetKind::None;
  double target_value = 0;

  double constraint_tol = 0;
  double fill_probe = 0; // 0 -> h/2 for grids, spacing estimate/4 otherwise
  double sup_probe = 0;  // 0 -> h/2 for grids, spacing estimate/2 otherwise
  std::string out_dir;

  std::vector<std::pair<std::string, std::string>> raw; // config echo
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

struct ReportRow {
  long n = 0;
  double r = 0, s = 0, r_over_s = 0;
  double value = 0;
  double sigma_eta = 0;
  double target = 0;
  double abs_err = 0;
  double sup_err = 0;
  std::string status;
  double wall_ms = 0;
  double lstar = 0;        // JSON only; certificate for solver rows
  bool has_lstar = false;
  int iterations = 0;      // JSON only; iterative solver stats
  double residual = 0;
  bool has_solver_stats = false;
};

struct AuditRow {
  long n = 0;
  double d_hausdorff = 0;
  double r = 0;
  double s = 0;
  double ratio = 0; // d_H / s
};

struct ConvergenceReport {
  std::vector<ReportRow> rows;
  std::vector<AuditRow> audit;
  std::vector<std::pair<std::string, std::string>> config_echo;
  uint64_t seed = 0;

  // 0 ok, 3 all cells disconnected, 4 solver non-convergence in some cell
  int exit_code() const;
  void write_csv(const std::string& path) const;
  void write_json(const std::string& path) const;
  std::string csv_string() const;
};

// Vertex values of the reference, overwritten by the labels on O_n.
GraphFunction restrict_with_labels(const GeometricGraph& graph,
                                   const ReferenceFunction& ref,
                                   const LabelSet& labels);

ConvergenceReport run_experiment(const ExperimentConfig& config, int threads = 1);

std::vector<AuditRow> hausdorff_audit(const ExperimentConfig& config);

} // namespace liplab
