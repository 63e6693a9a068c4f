#pragma once

#include <string>
#include <vector>

#include "liplab/geometry.hpp"
#include "liplab/graph.hpp"

namespace liplab {

// Point cloud CSV: header x0,...,x{d-1}, one point per row, round-trip exact.
void write_cloud_csv(const std::string& path, const PointCloud& cloud);
PointCloud read_cloud_csv(const std::string& path);

// Graph dump: i,j,dist,omega,cost with i<j.
void write_graph_csv(const std::string& path, const GeometricGraph& graph);
void write_graph_header_json(const std::string& path, const GeometricGraph& graph);

// Graph function CSV: index,value.
void write_function_csv(const std::string& path, const GraphFunction& u);
GraphFunction read_function_csv(const std::string& path);

// Field dump: x0,...,x{d-1},value.
void write_field_csv(const std::string& path, const GeodesicField& field);

// Constraint files: `index` rows, and a plain point CSV for continuum samples.
void write_indices_csv(const std::string& path, const std::vector<uint32_t>& idx);
std::vector<uint32_t> read_indices_csv(const std::string& path);

// Kernel table CSV: t,eta with strictly increasing t starting at 0.
std::vector<std::pair<double, double>> read_kernel_table_csv(const std::string& path);

std::string format_double(double v); // shortest exact round-trip form

} // namespace liplab
