#pragma once

#include <string>
#include <vector>

#include "trajmap/alias.hpp"
#include "trajmap/types.hpp"

namespace trajmap {

/// Renames every node to its canonical form. Nodes falling onto the same
/// name merge: alias sets union (all surface forms are kept as aliases),
/// type conflicts resolve to the lower rank (the more general type) with a
/// note, ties keep the first-seen type. Edges are rewritten, then
/// self-loops and duplicates are dropped. Degrees are recomputed.
LocationGraph apply_aliases(const LocationGraph& graph, const AliasDictionary& dict,
                            std::vector<std::string>* notes = nullptr);

/// Canonicalizes each graph and unions them in order, merging same-name
/// nodes under the apply_aliases rules (first-seen = earlier document).
LocationGraph merge_graphs(const std::vector<LocationGraph>& graphs, const AliasDictionary& dict,
                           std::vector<std::string>* notes = nullptr);

/// Edge sparsification: an inclusion edge is dropped when its endpoints
/// share a kind, or when it runs from a more general to a more specific
/// rank. Proximity edges are exempt by default; drop_same_kind_proximity
/// extends the same-kind rule to them. Nodes are never removed.
LocationGraph sparsify(const LocationGraph& map, bool drop_same_kind_proximity = false);

/// Renames trajectory locations through the dictionary, collapses adjacent
/// duplicates the renaming creates, and flags locations still absent from
/// the map (kept, not dropped).
Trajectory trajectory_to_map(const Trajectory& traj, const LocationGraph& map,
                             const AliasDictionary& dict,
                             std::vector<std::string>* notes = nullptr);

}  // namespace trajmap
