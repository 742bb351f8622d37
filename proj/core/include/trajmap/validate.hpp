#pragma once

#include <set>
#include <string>
#include <vector>

#include "trajmap/types.hpp"

namespace trajmap {

/// Structural checks on a location graph. Returns one human-readable entry
/// per violation, naming the offending node or edge; empty means the graph
/// holds every invariant. Pure: identical inputs give identical lists.
std::vector<std::string> validate_graph(const LocationGraph& graph);

/// Checks a trajectory against its document and a set of map node names:
/// adjacent visits must differ, spans must be ordered and inside the
/// document, and every visit location must be on the map.
/// Throws PreconditionError when traj.doc_id != doc.doc_id.
std::vector<std::string> validate_trajectory(const Trajectory& traj,
                                             const Document& doc,
                                             const std::set<std::string>& map_nodes);

}  // namespace trajmap
