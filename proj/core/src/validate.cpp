#include "trajmap/validate.hpp"

#include <map>
#include <sstream>

#include "trajmap/errors.hpp"

namespace trajmap {

namespace {

std::string edge_label(const GraphEdge& e) {
  std::ostringstream out;
  out << "'" << e.source << "' -> '" << e.target << "' (" << relation_name(e.relation) << ")";
  return out.str();
}

}  // namespace

std::vector<std::string> validate_graph(const LocationGraph& graph) {
  std::vector<std::string> violations;

  for (const auto& [name, node] : graph.nodes) {
    if (name.empty()) {
      violations.push_back("node with empty name");
    }
    if (node.canonical_name != name) {
      violations.push_back("node '" + name + "' stored under a different key than its canonical name");
    }
    if (node.aliases.count(node.canonical_name) > 0) {
      violations.push_back("node '" + name + "' lists its canonical name among its aliases");
    }
    if (node.degree < 0) {
      violations.push_back("node '" + name + "' has negative degree");
    }
  }

  std::map<GraphEdge, int> seen;
  for (const auto& edge : graph.edges) {
    if (edge.source == edge.target) {
      violations.push_back("self-loop: " + edge_label(edge));
    }
    if (!graph.has_node(edge.source)) {
      violations.push_back("dangling edge " + edge_label(edge) + ": missing node '" + edge.source + "'");
    }
    if (!graph.has_node(edge.target)) {
      violations.push_back("dangling edge " + edge_label(edge) + ": missing node '" + edge.target + "'");
    }
    if (++seen[edge] == 2) {
      violations.push_back("duplicate edge: " + edge_label(edge));
    }
  }

  return violations;
}

std::vector<std::string> validate_trajectory(const Trajectory& traj,
                                             const Document& doc,
                                             const std::set<std::string>& map_nodes) {
  if (traj.doc_id != doc.doc_id) {
    throw PreconditionError("validate_trajectory: trajectory '" + traj.doc_id +
                            "' checked against document '" + doc.doc_id + "'");
  }

  std::vector<std::string> violations;
  const int last_segment = static_cast<int>(doc.segments.size());

  const std::size_t expected_labels =
      traj.visits.empty() ? 0 : traj.visits.size() - 1;
  if (traj.transports.size() != expected_labels) {
    std::ostringstream out;
    out << "transport label count " << traj.transports.size() << " does not match "
        << traj.visits.size() << " visits";
    violations.push_back(out.str());
  }

  for (std::size_t i = 0; i < traj.visits.size(); ++i) {
    const Visit& visit = traj.visits[i];
    std::ostringstream where;
    where << "visit " << (i + 1) << " ('" << visit.location << "')";

    if (visit.span.start > visit.span.end) {
      std::ostringstream out;
      out << where.str() << ": span [" << visit.span.start << ", " << visit.span.end
          << "] has start > end";
      violations.push_back(out.str());
    }
    if (visit.span.start < 1 || visit.span.end > last_segment) {
      std::ostringstream out;
      out << where.str() << ": span [" << visit.span.start << ", " << visit.span.end
          << "] outside segments 1.." << last_segment;
      violations.push_back(out.str());
    }
    if (i > 0) {
      if (traj.visits[i - 1].location == visit.location) {
        violations.push_back(where.str() + ": repeats the adjacent previous location");
      }
      if (visit.span.start < traj.visits[i - 1].span.start) {
        std::ostringstream out;
        out << where.str() << ": starts at " << visit.span.start << ", before visit "
            << i << " (starts at " << traj.visits[i - 1].span.start << ")";
        violations.push_back(out.str());
      }
    }
    if (map_nodes.count(visit.location) == 0) {
      violations.push_back(where.str() + ": location not on the map");
    }
  }

  return violations;
}

}  // namespace trajmap
