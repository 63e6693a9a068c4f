#include "liplab/lab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "liplab/io.hpp"

namespace liplab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::Power: return "power";
    case ScheduleKind::Log: return "log";
    case ScheduleKind::Proportional: return "proportional";
  }
  return "?";
}

std::string to_string(SolverKind k) {
  switch (k) {
    case SolverKind::Restriction: return "restriction";
    case SolverKind::InfinityHarmonic: return "infinity-harmonic";
    case SolverKind::McShaneLower: return "mcshane-lower";
    case SolverKind::McShaneUpper: return "mcshane-upper";
    case SolverKind::GroundState: return "ground-state";
  }
  return "?";
}

double scaling_schedule(ScheduleKind kind, double K, double alpha, double r) {
  if (!(K > 0)) throw std::invalid_argument("schedule: K must be positive");
  if (!(r > 0)) throw std::invalid_argument("schedule: r must be positive");
  switch (kind) {
    case ScheduleKind::Power:
      if (!(alpha > 0 && alpha < 1))
        throw std::invalid_argument("schedule: power needs alpha in (0,1)");
      return K * std::pow(r, alpha);
    case ScheduleKind::Log:
      return K * r * std::log(std::exp(1.0) + 1.0 / r);
    case ScheduleKind::Proportional:
      return K * r;
  }
  return 0;
}

// --- Config parsing -----------------------------------------------------------

namespace {

std::vector<double> parse_list(const std::string& s, char sep = ',') {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, sep)) {
    if (cell.empty()) continue;
    out.push_back(std::stod(cell));
  }
  return out;
}

std::vector<double> parse_points(const std::string& s) {
  // "x,y;x,y;..."
  std::vector<double> out;
  std::stringstream ss(s);
  std::string pt;
  while (std::getline(ss, pt, ';')) {
    const auto coords = parse_list(pt);
    out.insert(out.end(), coords.begin(), coords.end());
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::vector<std::pair<std::string, std::string>> raw;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config: expected key = value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    kv[key] = val;
    raw.push_back({key, val});
  }

  auto get = [&](const std::string& key, const std::string& dflt) {
    auto it = kv.find(key);
    return it == kv.end() ? dflt : it->second;
  };

  ExperimentConfig cfg;
  cfg.raw = std::move(raw);
  try {
    // domain
    const std::string dk = get("domain.kind", "unit-box");
    if (dk == "unit-box") {
      cfg.domain = Domain::unit_box(std::stoi(get("domain.dim", "2")));
    } else if (dk == "scaled-box") {
      cfg.domain = Domain::box(parse_list(get("domain.lo", "0,0")),
                               parse_list(get("domain.hi", "1,1")));
    } else if (dk == "l-shape") {
      cfg.domain = Domain::l_shape();
    } else if (dk == "polygon") {
      cfg.domain = Domain::polygon(parse_points(get("domain.vertices", "")));
    } else {
      throw ConfigError("config: unknown domain.kind '" + dk + "'");
    }

    // sampling
    const std::string sk = get("sampling.kind", "grid");
    if (sk == "grid") cfg.sampling = SamplingKind::Grid;
    else if (sk == "uniform") cfg.sampling = SamplingKind::Uniform;
    else if (sk == "halton") cfg.sampling = SamplingKind::Halton;
    else if (sk == "explicit") cfg.sampling = SamplingKind::Explicit;
    else throw ConfigError("config: unknown sampling.kind '" + sk + "'");
    cfg.spacings = parse_list(get("sampling.spacings", ""));
    for (const double v : parse_list(get("sampling.sizes", "")))
      cfg.sizes.push_back(static_cast<long>(v));
    cfg.cloud_file = get("sampling.file", "");
    cfg.seed = std::stoull(get("sampling.seed", "1"));
    if (cfg.sampling == SamplingKind::Grid) {
      if (cfg.spacings.empty()) throw ConfigError("config: grid sampling needs sampling.spacings");
      for (std::size_t i = 1; i < cfg.spacings.size(); ++i)
        if (!(cfg.spacings[i] < cfg.spacings[i - 1]))
          throw ConfigError("config: spacings must be strictly decreasing");
    } else if (cfg.sampling == SamplingKind::Uniform || cfg.sampling == SamplingKind::Halton) {
      if (cfg.sizes.empty()) throw ConfigError("config: sampling needs sampling.sizes");
      for (std::size_t i = 1; i < cfg.sizes.size(); ++i)
        if (!(cfg.sizes[i] > cfg.sizes[i - 1]))
          throw ConfigError("config: sizes must be strictly increasing");
    } else if (cfg.cloud_file.empty()) {
      throw ConfigError("config: explicit sampling needs sampling.file");
    }

    // kernel
    const std::string kk = get("kernel.kind", "indicator");
    if (kk == "indicator") cfg.kernel = Kernel::indicator();
    else if (kk == "tent") cfg.kernel = Kernel::tent();
    else if (kk == "truncated-exponential") cfg.kernel = Kernel::truncated_exponential();
    else if (kk == "custom-table")
      cfg.kernel = Kernel::custom_table(read_kernel_table_csv(get("kernel.file", "")));
    else throw ConfigError("config: unknown kernel.kind '" + kk + "'");

    // schedule
    const std::string sch = get("schedule.kind", "power");
    if (sch == "power") cfg.schedule = ScheduleKind::Power;
    else if (sch == "log") cfg.schedule = ScheduleKind::Log;
    else if (sch == "proportional") cfg.schedule = ScheduleKind::Proportional;
    else throw ConfigError("config: unknown schedule.kind '" + sch + "'");
    cfg.schedule_k = std::stod(get("schedule.k", "1.5"));
    cfg.schedule_alpha = std::stod(get("schedule.alpha", "0.75"));

    // constraint
    const std::string ck = get("constraint.kind", "boundary");
    if (ck == "boundary") cfg.constraint = ConstraintKind::Boundary;
    else if (ck == "two-points") cfg.constraint = ConstraintKind::TwoPoints;
    else if (ck == "explicit-file") cfg.constraint = ConstraintKind::ExplicitFile;
    else throw ConfigError("config: unknown constraint.kind '" + ck + "'");
    cfg.constraint_points = parse_points(get("constraint.points", ""));
    cfg.constraint_values = parse_list(get("constraint.values", ""));
    cfg.constraint_indices_file = get("constraint.indices_file", "");
    cfg.constraint_samples_file = get("constraint.samples_file", "");
    cfg.boundary_spacing = std::stod(get("constraint.boundary_spacing", "0"));
    const std::string lm = get("constraint.labels",
                               cfg.constraint == ConstraintKind::TwoPoints ? "values" : "reference");
    if (lm == "reference") cfg.labels_mode = LabelsMode::Reference;
    else if (lm == "values") cfg.labels_mode = LabelsMode::Values;
    else if (lm == "zero") cfg.labels_mode = LabelsMode::Zero;
    else throw ConfigError("config: unknown constraint.labels '" + lm + "'");

    // solver
    const std::string sv = get("solver.kind", "restriction");
    if (sv == "restriction") cfg.solver = SolverKind::Restriction;
    else if (sv == "infinity-harmonic") cfg.solver = SolverKind::InfinityHarmonic;
    else if (sv == "mcshane-lower") cfg.solver = SolverKind::McShaneLower;
    else if (sv == "mcshane-upper") cfg.solver = SolverKind::McShaneUpper;
    else if (sv == "ground-state") cfg.solver = SolverKind::GroundState;
    else throw ConfigError("config: unknown solver.kind '" + sv + "'");
    cfg.p = std::stod(get("solver.p", "2"));
    const std::string nk = get("solver.norm", "empirical");
    if (nk == "empirical") cfg.norm = NormKind::Empirical;
    else if (nk == "voronoi") cfg.norm = NormKind::VoronoiWeighted;
    else throw ConfigError("config: unknown solver.norm '" + nk + "'");
    cfg.solver_tol = std::stod(get("solver.tol", "1e-6"));
    cfg.max_sweeps = std::stoi(get("solver.max_sweeps", "200000"));
    cfg.certify = get("solver.certify", "1") != "0";
    if (cfg.solver == SolverKind::GroundState) cfg.labels_mode = LabelsMode::Zero;

    // reference
    const std::string rk = get("reference.kind", "none");
    if (rk == "linear")
      cfg.reference = ReferenceFunction::linear(parse_list(get("reference.a", "1")));
    else if (rk == "lshape-power")
      cfg.reference = ReferenceFunction::lshape_power(std::stod(get("reference.p", "1")));
    else if (rk == "distance-to-boundary")
      cfg.reference = ReferenceFunction::distance_to_boundary(cfg.domain);
    else if (rk != "none")
      throw ConfigError("config: unknown reference.kind '" + rk + "'");

    // target
    const std::string tk = get("target.kind", "none");
    if (tk == "sigma-grad") cfg.target = TargetKind::SigmaGrad;
    else if (tk == "sigma-lip") cfg.target = TargetKind::SigmaLip;
    else if (tk == "ground-state-field") cfg.target = TargetKind::GroundStateField;
    else if (tk == "explicit") cfg.target = TargetKind::Explicit;
    else if (tk == "none") cfg.target = TargetKind::None;
    else throw ConfigError("config: unknown target.kind '" + tk + "'");
    cfg.target_value = std::stod(get("target.value", "0"));

    cfg.constraint_tol = std::stod(get("tolerances.constraint", "0"));
    cfg.fill_probe = std::stod(get("probes.fill", "0"));
    cfg.sup_probe = std::stod(get("probes.sup", "0"));
    cfg.out_dir = get("output.dir", "");

  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

// --- Experiment runner ---------------------------------------------------------

GraphFunction restrict_with_labels(const GeometricGraph& graph,
                                   const ReferenceFunction& ref,
                                   const LabelSet& labels) {
  const std::size_t n = graph.vertex_count();
  GraphFunction u(n);
  for (std::size_t v = 0; v < n; ++v) u[v] = ref(graph.cloud().point(v));
  for (std::size_t k = 0; k < labels.geometry.discrete_indices.size(); ++k)
    u[labels.geometry.discrete_indices[k]] = labels.values[k];
  return u;
}

namespace {

struct Cell {
  std::size_t index = 0;
  double spacing = 0; // grid
  long size = 0;      // uniform/halton
};

std::vector<Cell> cells_of(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  if (cfg.sampling == SamplingKind::Grid) {
    for (std::size_t i = 0; i < cfg.spacings.size(); ++i)
      cells.push_back({i, cfg.spacings[i], 0});
  } else if (cfg.sampling == SamplingKind::Explicit) {
    cells.push_back({0, 0, 0});
  } else {
    for (std::size_t i = 0; i < cfg.sizes.size(); ++i)
      cells.push_back({i, 0, cfg.sizes[i]});
  }
  return cells;
}

PointCloud make_cloud(const ExperimentConfig& cfg, const Cell& cell) {
  const uint64_t cell_seed = cfg.seed ^ (0x9e3779b97f4a7c15ULL * (cell.index + 1));
  switch (cfg.sampling) {
    case SamplingKind::Grid: return sample_grid(cfg.domain, cell.spacing);
    case SamplingKind::Uniform:
      return sample_uniform(cfg.domain, static_cast<int>(cell.size), cell_seed);
    case SamplingKind::Halton:
      return sample_halton(cfg.domain, static_cast<int>(cell.size), cell_seed);
    case SamplingKind::Explicit: return read_cloud_csv(cfg.cloud_file);
  }
  throw std::logic_error("unreachable");
}

struct RealizedConstraint {
  ConstraintGeometry geometry;
  std::vector<double> values;
};

RealizedConstraint realize_constraint(const ExperimentConfig& cfg,
                                      const PointCloud& cloud, double r, double s) {
  const int d = cfg.domain.dim();
  std::vector<double> samples;
  std::vector<uint32_t> indices;
  switch (cfg.constraint) {
    case ConstraintKind::Boundary: {
      double spacing = cfg.boundary_spacing;
      if (!(spacing > 0)) spacing = std::min(r / 2.0, s / 4.0);
      samples = sample_boundary(cfg.domain, spacing);
      GridIndex index(cloud, std::max(r, 1e-12));
      std::vector<char> mark(cloud.size(), 0);
      std::vector<uint32_t> hits;
      for (std::size_t i = 0; i + d <= samples.size(); i += d) {
        index.within(std::span<const double>(samples.data() + i, d), r, hits);
        for (const uint32_t v : hits) mark[v] = 1;
      }
      for (uint32_t v = 0; v < cloud.size(); ++v)
        if (mark[v]) indices.push_back(v);
      if (indices.empty()) {
        // no vertex within r of the boundary: fall back to projections
        const auto proj = closest_point_projection(cloud, samples);
        std::vector<char> seen(cloud.size(), 0);
        for (const uint32_t v : proj)
          if (!seen[v]) {
            seen[v] = 1;
            indices.push_back(v);
          }
        std::sort(indices.begin(), indices.end());
      }
      break;
    }
    case ConstraintKind::TwoPoints: {
      samples = cfg.constraint_points;
      if (samples.empty() || samples.size() % d != 0)
        throw ConfigError("config: constraint.points required for two-points");
      const auto proj = closest_point_projection(cloud, samples);
      std::vector<uint32_t> uniq;
      for (const uint32_t v : proj)
        if (std::find(uniq.begin(), uniq.end(), v) == uniq.end()) uniq.push_back(v);
      indices = std::move(uniq);
      break;
    }
    case ConstraintKind::ExplicitFile: {
      indices = read_indices_csv(cfg.constraint_indices_file);
      if (!cfg.constraint_samples_file.empty())
        samples = read_cloud_csv(cfg.constraint_samples_file).coords();
      break;
    }
  }

  RealizedConstraint out;
  out.geometry = ConstraintGeometry(d, std::move(samples), std::move(indices));
  const auto& idx = out.geometry.discrete_indices;
  out.values.resize(idx.size());
  switch (cfg.labels_mode) {
    case LabelsMode::Zero:
      std::fill(out.values.begin(), out.values.end(), 0.0);
      break;
    case LabelsMode::Reference: {
      if (!cfg.reference) throw ConfigError("config: labels=reference needs a reference");
      for (std::size_t k = 0; k < idx.size(); ++k)
        out.values[k] = (*cfg.reference)(cloud.point(idx[k]));
      break;
    }
    case LabelsMode::Values: {
      if (cfg.constraint == ConstraintKind::TwoPoints) {
        // constraint_values are per configured point; map through projection order
        const std::size_t npts = cfg.constraint_points.size() / d;
        if (cfg.constraint_values.size() != npts)
          throw ConfigError("config: constraint.values must match constraint.points");
        const auto proj = closest_point_projection(cloud, cfg.constraint_points);
        std::map<uint32_t, double> by_vertex;
        for (std::size_t k = 0; k < proj.size(); ++k) by_vertex[proj[k]] = cfg.constraint_values[k];
        for (std::size_t k = 0; k < idx.size(); ++k) out.values[k] = by_vertex.at(idx[k]);
      } else {
        if (cfg.constraint_values.size() != idx.size())
          throw ConfigError("config: constraint.values must match the constraint indices");
        out.values = cfg.constraint_values;
      }
      break;
    }
  }
  return out;
}

std::vector<double> probe_lattice(const Domain& domain, double spacing) {
  const int d = domain.dim();
  std::vector<int64_t> counts(d);
  for (int k = 0; k < d; ++k)
    counts[k] = static_cast<int64_t>(
                    std::floor((domain.hi()[k] - domain.lo()[k]) / spacing + 1e-9)) + 1;
  std::vector<double> pts;
  std::vector<int64_t> idx(d, 0);
  std::vector<double> p(d);
  while (true) {
    for (int k = 0; k < d; ++k) p[k] = domain.lo()[k] + idx[k] * spacing;
    if (domain.closure_inside(p)) pts.insert(pts.end(), p.begin(), p.end());
    int axis = d - 1;
    while (axis >= 0 && ++idx[axis] == counts[axis]) idx[axis--] = 0;
    if (axis < 0) break;
  }
  return pts;
}

ReportRow run_cell(const ExperimentConfig& cfg, const Cell& cell) {
  const auto t0 = std::chrono::steady_clock::now();
  ReportRow row;
  row.sigma_eta = cfg.kernel.sigma();

  const PointCloud cloud = make_cloud(cfg, cell);
  row.n = static_cast<long>(cloud.size());
  const int d = cfg.domain.dim();
  const double native_h =
      cfg.sampling == SamplingKind::Grid
          ? cell.spacing
          : std::pow(cfg.domain.volume_bbox() / static_cast<double>(cloud.size()), 1.0 / d);

  const double fill_probe = cfg.fill_probe > 0
                                ? cfg.fill_probe
                                : (cfg.sampling == SamplingKind::Grid ? native_h / 2 : native_h / 4);
  row.r = fill_distance(cfg.domain, cloud, fill_probe);
  row.s = scaling_schedule(cfg.schedule, cfg.schedule_k, cfg.schedule_alpha, row.r);
  row.r_over_s = row.r / row.s;
  if (row.r_over_s >= 1.0)
    std::cerr << "warning: r/s = " << row.r_over_s << " >= 1 at n = " << row.n
              << "; graph is likely disconnected\n";

  const GeometricGraph graph = build_graph(cloud, cfg.kernel, row.s);
  RealizedConstraint rc = realize_constraint(cfg, cloud, row.r, row.s);
  const LabelSet labels(std::move(rc.geometry), std::move(rc.values));
  const auto conn = connectivity(graph, labels.geometry.discrete_indices);

  GraphFunction u;
  bool have_solution = false;
  switch (cfg.solver) {
    case SolverKind::Restriction: {
      if (!cfg.reference) throw ConfigError("config: restriction mode needs a reference");
      u = restrict_with_labels(graph, *cfg.reference, labels);
      have_solution = true;
      row.value = discrete_functional(graph, u);
      row.status = conn.all_reachable() ? "evaluated" : "disconnected";
      break;
    }
    case SolverKind::InfinityHarmonic: {
      const SolveReport rep =
          infinity_harmonic(graph, labels, cfg.solver_tol, cfg.max_sweeps);
      row.status = to_string(rep.status);
      row.iterations = rep.iterations;
      row.residual = rep.residual;
      row.has_solver_stats = true;
      if (rep.status == SolveStatus::Disconnected) {
        // the degenerate regime: the restriction of the labels carries no energy
        row.value = 0;
      } else {
        u = rep.solution;
        have_solution = true;
        row.value = rep.objective;
        if (cfg.certify) {
          row.lstar = optimal_lipschitz_constant(graph, labels);
          row.has_lstar = true;
        }
      }
      break;
    }
    case SolverKind::McShaneLower:
    case SolverKind::McShaneUpper: {
      if (!conn.all_reachable()) {
        row.status = "disconnected";
        row.value = 0;
        break;
      }
      u = mcshane_extension(graph, labels,
                            cfg.solver == SolverKind::McShaneLower ? McShaneSide::Lower
                                                                   : McShaneSide::Upper);
      have_solution = true;
      row.value = constrained_functional(graph, u, labels, 1e-9);
      row.lstar = optimal_lipschitz_constant(graph, labels);
      row.has_lstar = true;
      row.status = "evaluated";
      break;
    }
    case SolverKind::GroundState: {
      if (!conn.all_reachable()) {
        row.status = "disconnected";
        row.value = 0;
        break;
      }
      const GroundStateReport rep =
          ground_state(graph, labels, cfg.p, cfg.norm,
                       cfg.norm == NormKind::VoronoiWeighted ? &cfg.domain : nullptr,
                       cfg.norm == NormKind::VoronoiWeighted ? native_h / 2 : 0);
      u = rep.state;
      have_solution = true;
      row.value = rep.eigenvalue;
      row.status = "evaluated";
      break;
    }
  }

  // sup-error of the piecewise-constant extension against the reference
  row.sup_err = kNaN;
  const double sup_probe = cfg.sup_probe > 0
                               ? cfg.sup_probe
                               : (cfg.sampling == SamplingKind::Grid ? native_h / 2 : native_h / 2);
  if (cfg.reference && have_solution) {
    const auto probes = probe_lattice(cfg.domain, sup_probe);
    const auto ext = evaluate_extension(graph, u, probes);
    const std::size_t m = ext.size();
    std::vector<double> refv(m);
    for (std::size_t q = 0; q < m; ++q)
      refv[q] = (*cfg.reference)(std::span<const double>(probes.data() + q * d, d));
    if (cfg.solver == SolverKind::GroundState) {
      // compare normalized shapes
      double acc = 0;
      for (const double v : refv) acc += std::pow(std::abs(v), cfg.p);
      const double ref_norm = std::pow(acc / static_cast<double>(m), 1.0 / cfg.p);
      if (ref_norm > 0)
        for (double& v : refv) v /= ref_norm;
    }
    double worst = 0;
    for (std::size_t q = 0; q < m; ++q) worst = std::max(worst, std::abs(ext[q] - refv[q]));
    row.sup_err = worst;
  }

  // target value
  row.target = kNaN;
  switch (cfg.target) {
    case TargetKind::SigmaGrad:
      if (cfg.reference)
        row.target = row.sigma_eta * continuum_functional(*cfg.reference, cfg.domain, sup_probe);
      break;
    case TargetKind::SigmaLip:
      if (cfg.reference)
        row.target = row.sigma_eta * lipschitz_constant(*cfg.reference, cfg.domain, 4096, cfg.seed);
      break;
    case TargetKind::GroundStateField: {
      const GeodesicField field =
          distance_to_constraint(cfg.domain, labels.geometry, sup_probe);
      double acc = 0;
      std::size_t m = 0;
      for (const double v : field.values) {
        if (std::isfinite(v)) {
          acc += std::pow(v, cfg.p);
          ++m;
        }
      }
      const double norm = m ? std::pow(acc / static_cast<double>(m), 1.0 / cfg.p) : 0;
      if (norm > 0) row.target = row.sigma_eta / norm;
      break;
    }
    case TargetKind::Explicit:
      row.target = cfg.target_value;
      break;
    case TargetKind::None:
      break;
  }
  row.abs_err = std::isnan(row.target) ? kNaN : std::abs(row.value - row.target);

  if (!cfg.out_dir.empty() && have_solution) {
    std::filesystem::create_directories(cfg.out_dir);
    write_function_csv(cfg.out_dir + "/solution_" + std::to_string(row.n) + ".csv", u);
  }

  row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return row;
}

AuditRow audit_cell(const ExperimentConfig& cfg, const Cell& cell) {
  const PointCloud cloud = make_cloud(cfg, cell);
  const int d = cfg.domain.dim();
  const double native_h =
      cfg.sampling == SamplingKind::Grid
          ? cell.spacing
          : std::pow(cfg.domain.volume_bbox() / static_cast<double>(cloud.size()), 1.0 / d);
  const double fill_probe = cfg.fill_probe > 0
                                ? cfg.fill_probe
                                : (cfg.sampling == SamplingKind::Grid ? native_h / 2 : native_h / 4);
  const double r = fill_distance(cfg.domain, cloud, fill_probe);
  const double s = scaling_schedule(cfg.schedule, cfg.schedule_k, cfg.schedule_alpha, r);
  const RealizedConstraint rc = realize_constraint(cfg, cloud, r, s);
  if (rc.geometry.continuum_samples.empty())
    throw ConfigError("audit: constraint must carry continuum samples");
  std::vector<double> positions;
  for (const uint32_t v : rc.geometry.discrete_indices) {
    const auto p = cloud.point(v);
    positions.insert(positions.end(), p.begin(), p.end());
  }
  AuditRow a;
  a.n = static_cast<long>(cloud.size());
  a.r = r;
  a.s = s;
  a.d_hausdorff = hausdorff_distance(positions, rc.geometry.continuum_samples, d);
  a.ratio = a.d_hausdorff / s;
  return a;
}

} // namespace

int ConvergenceReport::exit_code() const {
  bool all_disconnected = !rows.empty();
  for (const auto& row : rows) all_disconnected &= row.status == "disconnected";
  if (all_disconnected) return 3;
  for (const auto& row : rows)
    if (row.status == "max-iterations") return 4;
  return 0;
}

std::string ConvergenceReport::csv_string() const {
  std::string out = "n,r,s,r_over_s,value,sigma_eta,target,abs_err,sup_err,status,wall_ms\n";
  for (const auto& row : rows) {
    out += std::to_string(row.n) + "," + format_double(row.r) + "," + format_double(row.s) +
           "," + format_double(row.r_over_s) + "," + format_double(row.value) + "," +
           format_double(row.sigma_eta) + "," + format_double(row.target) + "," +
           format_double(row.abs_err) + "," + format_double(row.sup_err) + "," + row.status +
           "," + format_double(row.wall_ms) + "\n";
  }
  return out;
}

void ConvergenceReport::write_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << csv_string();
}

void ConvergenceReport::write_json(const std::string& path) const {
  nlohmann::json j;
  j["metadata"]["version"] = kVersion;
  j["metadata"]["seed"] = seed;
  for (const auto& [k, v] : config_echo) j["metadata"]["config"][k] = v;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json jr;
    jr["n"] = row.n;
    jr["r"] = row.r;
    jr["s"] = row.s;
    jr["r_over_s"] = row.r_over_s;
    jr["value"] = row.value;
    jr["sigma_eta"] = row.sigma_eta;
    jr["target"] = row.target;
    jr["abs_err"] = row.abs_err;
    jr["sup_err"] = row.sup_err;
    jr["status"] = row.status;
    jr["wall_ms"] = row.wall_ms;
    if (row.has_lstar) jr["lstar"] = row.lstar;
    if (row.has_solver_stats) {
      jr["iterations"] = row.iterations;
      jr["residual"] = row.residual;
    }
    j["rows"].push_back(jr);
  }
  if (!audit.empty()) {
    j["audit"] = nlohmann::json::array();
    for (const auto& a : audit) {
      nlohmann::json ja;
      ja["n"] = a.n;
      ja["d_hausdorff"] = a.d_hausdorff;
      ja["r"] = a.r;
      ja["s"] = a.s;
      ja["ratio"] = a.ratio;
      j["audit"].push_back(ja);
    }
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << j.dump(2) << "\n";
}

ConvergenceReport run_experiment(const ExperimentConfig& cfg, int threads) {
  const auto cells = cells_of(cfg);
  if (cells.empty()) throw ConfigError("config: no cells configured");
  ConvergenceReport report;
  report.rows.resize(cells.size());
  report.config_echo = cfg.raw;
  report.seed = cfg.seed;

  if (threads <= 1 || cells.size() == 1) {
    for (const auto& cell : cells) report.rows[cell.index] = run_cell(cfg, cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const int nworkers = std::min<int>(threads, static_cast<int>(cells.size()));
    for (int w = 0; w < nworkers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          try {
            report.rows[i] = run_cell(cfg, cells[i]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  // rows are already ordered by cell (sizes strictly increasing)
  const bool has_samples = cfg.constraint != ConstraintKind::ExplicitFile ||
                           !cfg.constraint_samples_file.empty();
  if (has_samples) {
    try {
      for (const auto& cell : cells) report.audit.push_back(audit_cell(cfg, cell));
    } catch (const std::exception&) {
      report.audit.clear(); // audit is best-effort in the combined runner
    }
  }
  return report;
}

std::vector<AuditRow> hausdorff_audit(const ExperimentConfig& cfg) {
  std::vector<AuditRow> rows;
  for (const auto& cell : cells_of(cfg)) rows.push_back(audit_cell(cfg, cell));
  return rows;
}

} // namespace liplab
