#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "trajmap/types.hpp"

namespace trajmap {

enum class ExportFormat { Dot, GraphML, Json };

ExportFormat parse_export_format(std::string_view text);  // UnknownFormat

struct StyleOptions {
  /// Nodes with degree below this are removed before export (0 keeps all).
  int degree_filter = 0;
  double size_base = 0.25;
  double size_per_degree = 0.05;
  double size_max = 2.5;
};

/// Emits the map with style attributes: node shape and color by type class
/// (administrative areas are brown circles, cities and villages blue
/// squares, camps, ghettos and natural places green triangles, facilities
/// yellow diamonds), node size growing with degree, and the optional
/// trajectory overlaid as red edges darkening with progression. Visits to
/// nodes missing from the (filtered) map are dropped with a warning.
std::string export_visualization(const LocationGraph& map, const Trajectory* trajectory,
                                 ExportFormat format, const StyleOptions& style,
                                 std::vector<std::string>* warnings = nullptr);

}  // namespace trajmap
