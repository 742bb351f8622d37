#include "trajmap/map_builder.hpp"

#include <algorithm>

namespace trajmap {

namespace {

void note(std::vector<std::string>* notes, const std::string& text) {
  if (notes != nullptr) {
    notes->push_back(text);
  }
}

/// Merge an incoming node into the accumulator under one canonical name.
void merge_node(LocationGraph& out, const std::string& canon, const LocationNode& incoming,
                const std::string& surface, std::vector<std::string>* notes) {
  auto it = out.nodes.find(canon);
  if (it == out.nodes.end()) {
    LocationNode node;
    node.canonical_name = canon;
    node.type = incoming.type;
    node.aliases = incoming.aliases;
    if (surface != canon) {
      node.aliases.insert(surface);
    }
    node.aliases.erase(canon);
    out.nodes.emplace(canon, std::move(node));
    return;
  }

  LocationNode& existing = it->second;
  for (const std::string& alias : incoming.aliases) {
    if (alias != canon) {
      existing.aliases.insert(alias);
    }
  }
  if (surface != canon) {
    existing.aliases.insert(surface);
  }
  if (incoming.type.kind != existing.type.kind) {
    // Lower rank (more general) wins; equal ranks keep the first-seen type.
    if (rank_of(incoming.type.kind) < rank_of(existing.type.kind)) {
      note(notes, "node '" + canon + "': type " + existing.type.to_string() + " replaced by " +
                      incoming.type.to_string());
      existing.type = incoming.type;
    } else {
      note(notes, "node '" + canon + "': type " + incoming.type.to_string() + " merged into " +
                      existing.type.to_string());
    }
  }
}

}  // namespace

LocationGraph apply_aliases(const LocationGraph& graph, const AliasDictionary& dict,
                            std::vector<std::string>* notes) {
  LocationGraph out;
  for (const auto& [name, node] : graph.nodes) {
    merge_node(out, dict.canonical_of(name), node, name, notes);
  }
  for (const GraphEdge& edge : graph.edges) {
    GraphEdge rewritten{dict.canonical_of(edge.source), dict.canonical_of(edge.target),
                        edge.relation};
    if (rewritten.source == rewritten.target) {
      continue;
    }
    if (!out.has_node(rewritten.source) || !out.has_node(rewritten.target)) {
      note(notes, "edge '" + rewritten.source + "' -> '" + rewritten.target +
                      "' references a missing node; dropped");
      continue;
    }
    if (!out.has_edge(rewritten)) {
      out.edges.push_back(std::move(rewritten));
    }
  }
  std::sort(out.edges.begin(), out.edges.end());
  out.recompute_degrees();
  return out;
}

LocationGraph merge_graphs(const std::vector<LocationGraph>& graphs, const AliasDictionary& dict,
                           std::vector<std::string>* notes) {
  LocationGraph out;
  for (const LocationGraph& graph : graphs) {
    const LocationGraph canonical = apply_aliases(graph, dict, notes);
    for (const auto& [name, node] : canonical.nodes) {
      merge_node(out, name, node, name, notes);
    }
    for (const GraphEdge& edge : canonical.edges) {
      if (!out.has_edge(edge)) {
        out.edges.push_back(edge);
      }
    }
  }
  std::sort(out.edges.begin(), out.edges.end());
  out.recompute_degrees();
  return out;
}

LocationGraph sparsify(const LocationGraph& map, bool drop_same_kind_proximity) {
  LocationGraph out;
  out.nodes = map.nodes;
  for (const GraphEdge& edge : map.edges) {
    const auto source = map.nodes.find(edge.source);
    const auto target = map.nodes.find(edge.target);
    if (source != map.nodes.end() && target != map.nodes.end()) {
      const LocationKind a = source->second.type.kind;
      const LocationKind b = target->second.type.kind;
      if (edge.relation == RelationKind::Inclusion) {
        if (a == b) {
          continue;  // same-type inclusion, e.g. country in country
        }
        if (rank_of(a) < rank_of(b)) {
          continue;  // runs against the hierarchy, e.g. country into city
        }
      } else if (drop_same_kind_proximity && a == b) {
        continue;
      }
    }
    out.edges.push_back(edge);
  }
  std::sort(out.edges.begin(), out.edges.end());
  out.recompute_degrees();
  return out;
}

Trajectory trajectory_to_map(const Trajectory& traj, const LocationGraph& map,
                             const AliasDictionary& dict, std::vector<std::string>* notes) {
  Trajectory renamed = traj;
  for (Visit& visit : renamed.visits) {
    visit.location = dict.canonical_of(visit.location);
  }
  Trajectory out = collapse_adjacent_visits(renamed);
  for (const Visit& visit : out.visits) {
    if (!map.has_node(visit.location)) {
      note(notes, "'" + out.doc_id + "': location '" + visit.location + "' not on the map");
    }
  }
  return out;
}

}  // namespace trajmap
