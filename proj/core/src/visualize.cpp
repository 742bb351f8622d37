#include "trajmap/visualize.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "trajmap/errors.hpp"

namespace trajmap {

namespace {

struct NodeStyle {
  const char* shape;
  const char* color;
};

NodeStyle style_of(LocationKind kind) {
  switch (kind) {
    case LocationKind::Continent:
    case LocationKind::Country:
    case LocationKind::County:
    case LocationKind::Region:
      return {"circle", "#8b5a2b"};  // brown
    case LocationKind::City:
    case LocationKind::Village:
      return {"square", "#4472c4"};  // blue
    case LocationKind::Ghetto:
    case LocationKind::ArmyCamp:
    case LocationKind::ConcentrationCamp:
    case LocationKind::DeathCamp:
    case LocationKind::Natural:
      return {"triangle", "#3a915f"};  // green
    case LocationKind::Facility:
      return {"diamond", "#d4b13f"};  // yellow
    case LocationKind::Unknown:
      return {"circle", "#9a9a9a"};
  }
  return {"circle", "#9a9a9a"};
}

/// Shades of red darkening with progression: t=0 light, t=1 dark.
std::string ramp_color(double t) {
  const int r = static_cast<int>(242 + t * (92 - 242));
  const int g = static_cast<int>(160 + t * (0 - 160));
  const int b = static_cast<int>(160 + t * (0 - 160));
  char out[8];
  std::snprintf(out, sizeof(out), "#%02x%02x%02x", r, g, b);
  return out;
}

std::string dot_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size() + 2);
  for (char c : text) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
    }
    out.push_back(c);
  }
  return out;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

struct Prepared {
  LocationGraph map;                 // degree-filtered, degrees fresh
  std::vector<Visit> visits;         // surviving trajectory visits, in order
  std::vector<std::optional<std::string>> transports;
};

Prepared prepare(const LocationGraph& map, const Trajectory* trajectory,
                 const StyleOptions& style, std::vector<std::string>* warnings) {
  Prepared out;
  out.map.nodes = map.nodes;
  out.map.edges = map.edges;
  out.map.recompute_degrees();

  if (style.degree_filter > 0) {
    LocationGraph filtered;
    for (const auto& [name, node] : out.map.nodes) {
      if (node.degree >= style.degree_filter) {
        filtered.nodes.emplace(name, node);
      }
    }
    for (const GraphEdge& edge : out.map.edges) {
      if (filtered.has_node(edge.source) && filtered.has_node(edge.target)) {
        filtered.edges.push_back(edge);
      }
    }
    out.map = std::move(filtered);
  }

  if (trajectory != nullptr) {
    for (std::size_t i = 0; i < trajectory->visits.size(); ++i) {
      const Visit& visit = trajectory->visits[i];
      if (!out.map.has_node(visit.location)) {
        if (warnings != nullptr) {
          warnings->push_back("trajectory visit '" + visit.location +
                              "' is not on the exported map; dropped");
        }
        continue;
      }
      if (!out.visits.empty()) {
        // The transport label survives only for originally-adjacent pairs.
        std::optional<std::string> label;
        if (!out.visits.empty() && i > 0 && i - 1 < trajectory->transports.size() &&
            out.visits.back() == trajectory->visits[i - 1]) {
          label = trajectory->transports[i - 1];
        }
        out.transports.push_back(label);
      }
      out.visits.push_back(visit);
    }
  }
  return out;
}

double node_size(const StyleOptions& style, int degree) {
  return std::min(style.size_max, style.size_base + style.size_per_degree * degree);
}

std::string to_dot(const Prepared& prepared, const StyleOptions& style) {
  std::ostringstream out;
  out << "digraph location_map {\n";
  if (!prepared.map.nodes.empty()) {
    out << "  node [style=filled, fontsize=10];\n";
  }
  char buffer[64];
  for (const auto& [name, node] : prepared.map.nodes) {
    const NodeStyle ns = style_of(node.type.kind);
    std::snprintf(buffer, sizeof(buffer), "%.2f", node_size(style, node.degree));
    out << "  \"" << dot_escape(name) << "\" [shape=" << ns.shape << ", fillcolor=\"" << ns.color
        << "\", width=" << buffer << ", height=" << buffer << ", fixedsize=true];\n";
  }
  for (const GraphEdge& edge : prepared.map.sorted_edges()) {
    out << "  \"" << dot_escape(edge.source) << "\" -> \"" << dot_escape(edge.target) << "\"";
    if (edge.relation == RelationKind::Proximity) {
      out << " [style=dashed, color=\"#888888\"]";
    } else {
      out << " [color=\"#888888\"]";
    }
    out << ";\n";
  }
  const std::size_t steps = prepared.visits.empty() ? 0 : prepared.visits.size() - 1;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = steps <= 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
    out << "  \"" << dot_escape(prepared.visits[i].location) << "\" -> \""
        << dot_escape(prepared.visits[i + 1].location) << "\" [color=\"" << ramp_color(t)
        << "\", penwidth=2.0, constraint=false";
    if (i < prepared.transports.size() && prepared.transports[i].has_value()) {
      out << ", label=\"" << dot_escape(*prepared.transports[i]) << "\"";
    }
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::string to_graphml(const Prepared& prepared, const StyleOptions& style) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"type\" for=\"node\" attr.name=\"type\" attr.type=\"string\"/>\n"
      << "  <key id=\"shape\" for=\"node\" attr.name=\"shape\" attr.type=\"string\"/>\n"
      << "  <key id=\"color\" for=\"node\" attr.name=\"color\" attr.type=\"string\"/>\n"
      << "  <key id=\"size\" for=\"node\" attr.name=\"size\" attr.type=\"double\"/>\n"
      << "  <key id=\"relation\" for=\"edge\" attr.name=\"relation\" attr.type=\"string\"/>\n"
      << "  <key id=\"order\" for=\"edge\" attr.name=\"order\" attr.type=\"int\"/>\n"
      << "  <key id=\"edgecolor\" for=\"edge\" attr.name=\"edgecolor\" attr.type=\"string\"/>\n"
      << "  <key id=\"transport\" for=\"edge\" attr.name=\"transport\" attr.type=\"string\"/>\n"
      << "  <graph id=\"map\" edgedefault=\"directed\">\n";
  char buffer[64];
  for (const auto& [name, node] : prepared.map.nodes) {
    const NodeStyle ns = style_of(node.type.kind);
    std::snprintf(buffer, sizeof(buffer), "%.2f", node_size(style, node.degree));
    out << "    <node id=\"" << xml_escape(name) << "\">\n"
        << "      <data key=\"type\">" << xml_escape(node.type.to_string()) << "</data>\n"
        << "      <data key=\"shape\">" << ns.shape << "</data>\n"
        << "      <data key=\"color\">" << ns.color << "</data>\n"
        << "      <data key=\"size\">" << buffer << "</data>\n"
        << "    </node>\n";
  }
  for (const GraphEdge& edge : prepared.map.sorted_edges()) {
    out << "    <edge source=\"" << xml_escape(edge.source) << "\" target=\""
        << xml_escape(edge.target) << "\">\n"
        << "      <data key=\"relation\">" << relation_name(edge.relation) << "</data>\n"
        << "    </edge>\n";
  }
  const std::size_t steps = prepared.visits.empty() ? 0 : prepared.visits.size() - 1;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = steps <= 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
    out << "    <edge source=\"" << xml_escape(prepared.visits[i].location) << "\" target=\""
        << xml_escape(prepared.visits[i + 1].location) << "\">\n"
        << "      <data key=\"order\">" << i << "</data>\n"
        << "      <data key=\"edgecolor\">" << ramp_color(t) << "</data>\n";
    if (i < prepared.transports.size() && prepared.transports[i].has_value()) {
      out << "      <data key=\"transport\">" << xml_escape(*prepared.transports[i])
          << "</data>\n";
    }
    out << "    </edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
  return out.str();
}

std::string to_styled_json(const Prepared& prepared, const StyleOptions& style) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& [name, node] : prepared.map.nodes) {
    const NodeStyle ns = style_of(node.type.kind);
    nodes.push_back({{"name", name},
                     {"type", node.type.to_string()},
                     {"shape", ns.shape},
                     {"color", ns.color},
                     {"size", node_size(style, node.degree)},
                     {"degree", node.degree}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const GraphEdge& edge : prepared.map.sorted_edges()) {
    edges.push_back({{"source", edge.source},
                     {"target", edge.target},
                     {"relation", relation_name(edge.relation)}});
  }
  nlohmann::json trajectory = nlohmann::json::array();
  const std::size_t steps = prepared.visits.empty() ? 0 : prepared.visits.size() - 1;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = steps <= 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
    nlohmann::json step = {{"from", prepared.visits[i].location},
                           {"to", prepared.visits[i + 1].location},
                           {"order", i},
                           {"color", ramp_color(t)}};
    if (i < prepared.transports.size() && prepared.transports[i].has_value()) {
      step["transport"] = *prepared.transports[i];
    } else {
      step["transport"] = nullptr;
    }
    trajectory.push_back(std::move(step));
  }
  return nlohmann::json{{"nodes", nodes}, {"edges", edges}, {"trajectory", trajectory}}.dump(2) +
         "\n";
}

}  // namespace

ExportFormat parse_export_format(std::string_view text) {
  std::string key;
  for (char c : text) {
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (key == "dot") {
    return ExportFormat::Dot;
  }
  if (key == "graphml") {
    return ExportFormat::GraphML;
  }
  if (key == "json") {
    return ExportFormat::Json;
  }
  throw UnknownFormat("unknown export format '" + std::string(text) + "'");
}

std::string export_visualization(const LocationGraph& map, const Trajectory* trajectory,
                                 ExportFormat format, const StyleOptions& style,
                                 std::vector<std::string>* warnings) {
  const Prepared prepared = prepare(map, trajectory, style, warnings);
  switch (format) {
    case ExportFormat::Dot:
      return to_dot(prepared, style);
    case ExportFormat::GraphML:
      return to_graphml(prepared, style);
    case ExportFormat::Json:
      return to_styled_json(prepared, style);
  }
  throw UnknownFormat("unhandled export format");
}

}  // namespace trajmap
