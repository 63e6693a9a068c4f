#include "liplab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace liplab {

std::string format_double(double v) {
  char buf[64];
  // %.17g round-trips every double
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw std::runtime_error("csv: bad number '" + s + "'");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  return f;
}

} // namespace

void write_cloud_csv(const std::string& path, const PointCloud& cloud) {
  auto f = open_out(path);
  for (int k = 0; k < cloud.dim(); ++k) f << (k ? "," : "") << "x" << k;
  f << "\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    for (int k = 0; k < cloud.dim(); ++k) f << (k ? "," : "") << format_double(p[k]);
    f << "\n";
  }
}

PointCloud read_cloud_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("cloud csv: empty file");
  const int dim = static_cast<int>(split(line, ',').size());
  std::vector<double> coords;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (static_cast<int>(cells.size()) != dim)
      throw std::runtime_error("cloud csv: ragged row");
    for (const auto& c : cells) coords.push_back(parse_double(c));
  }
  return PointCloud(dim, std::move(coords), Provenance::Explicit);
}

void write_graph_csv(const std::string& path, const GeometricGraph& graph) {
  auto f = open_out(path);
  f << "i,j,dist,omega,cost\n";
  for (const auto& e : graph.edges())
    f << e.i << "," << e.j << "," << format_double(e.dist) << ","
      << format_double(e.omega) << "," << format_double(e.cost) << "\n";
}

void write_graph_header_json(const std::string& path, const GeometricGraph& graph) {
  nlohmann::json j;
  j["n"] = graph.vertex_count();
  j["scale"] = graph.scale();
  j["kernel_kind"] = to_string(graph.kernel().kind());
  j["radius"] = graph.kernel().radius();
  auto f = open_out(path);
  f << j.dump(2) << "\n";
}

void write_function_csv(const std::string& path, const GraphFunction& u) {
  auto f = open_out(path);
  f << "index,value\n";
  for (std::size_t i = 0; i < u.size(); ++i)
    f << i << "," << format_double(u[i]) << "\n";
}

GraphFunction read_function_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  std::getline(f, line); // header
  GraphFunction u;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 2) throw std::runtime_error("function csv: ragged row");
    const std::size_t i = static_cast<std::size_t>(std::stoull(cells[0]));
    if (i != u.size()) throw std::runtime_error("function csv: indices must be 0..n-1");
    u.push_back(parse_double(cells[1]));
  }
  return u;
}

void write_field_csv(const std::string& path, const GeodesicField& field) {
  auto f = open_out(path);
  const int d = field.mesh->dim;
  for (int k = 0; k < d; ++k) f << "x" << k << ",";
  f << "value\n";
  for (std::size_t i = 0; i < field.mesh->size(); ++i) {
    const auto p = field.mesh->point(i);
    for (int k = 0; k < d; ++k) f << format_double(p[k]) << ",";
    f << format_double(field.values[i]) << "\n";
  }
}

void write_indices_csv(const std::string& path, const std::vector<uint32_t>& idx) {
  auto f = open_out(path);
  f << "index\n";
  for (const uint32_t i : idx) f << i << "\n";
}

std::vector<uint32_t> read_indices_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  std::getline(f, line); // header
  std::vector<uint32_t> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    out.push_back(static_cast<uint32_t>(std::stoul(line)));
  }
  return out;
}

std::vector<std::pair<double, double>> read_kernel_table_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  std::getline(f, line); // header t,eta
  std::vector<std::pair<double, double>> table;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 2) throw std::runtime_error("kernel csv: ragged row");
    table.push_back({parse_double(cells[0]), parse_double(cells[1])});
  }
  return table;
}

} // namespace liplab
