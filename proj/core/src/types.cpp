#include "trajmap/types.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace trajmap {

int rank_of(LocationKind kind) {
  switch (kind) {
    case LocationKind::Continent:
      return 0;
    case LocationKind::Country:
      return 1;
    case LocationKind::County:
    case LocationKind::Region:
      return 2;
    case LocationKind::City:
    case LocationKind::Village:
      return 3;
    case LocationKind::Ghetto:
    case LocationKind::ArmyCamp:
    case LocationKind::ConcentrationCamp:
    case LocationKind::DeathCamp:
    case LocationKind::Natural:
    case LocationKind::Facility:
      return 4;
    case LocationKind::Unknown:
      return 5;
  }
  return 5;
}

const char* kind_name(LocationKind kind) {
  switch (kind) {
    case LocationKind::Continent:
      return "Continent";
    case LocationKind::Country:
      return "Country";
    case LocationKind::County:
      return "County";
    case LocationKind::Region:
      return "Region";
    case LocationKind::City:
      return "City";
    case LocationKind::Village:
      return "Village";
    case LocationKind::Ghetto:
      return "Ghetto";
    case LocationKind::ArmyCamp:
      return "Army Camp";
    case LocationKind::ConcentrationCamp:
      return "Concentration Camp";
    case LocationKind::DeathCamp:
      return "Death Camp";
    case LocationKind::Natural:
      return "Natural";
    case LocationKind::Facility:
      return "Facility";
    case LocationKind::Unknown:
      return "Unknown";
  }
  return "Unknown";
}

namespace {

// Letters only, lowercased: "Concentration Camp" -> "concentrationcamp".
std::string squeeze(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

}  // namespace

std::optional<LocationKind> parse_kind(std::string_view text) {
  static const std::array<std::pair<const char*, LocationKind>, 13> kTable = {{
      {"continent", LocationKind::Continent},
      {"country", LocationKind::Country},
      {"county", LocationKind::County},
      {"region", LocationKind::Region},
      {"city", LocationKind::City},
      {"village", LocationKind::Village},
      {"ghetto", LocationKind::Ghetto},
      {"armycamp", LocationKind::ArmyCamp},
      {"concentrationcamp", LocationKind::ConcentrationCamp},
      {"deathcamp", LocationKind::DeathCamp},
      {"natural", LocationKind::Natural},
      {"facility", LocationKind::Facility},
      {"unknown", LocationKind::Unknown},
  }};
  const std::string key = squeeze(text);
  for (const auto& [name, kind] : kTable) {
    if (key == name) {
      return kind;
    }
  }
  return std::nullopt;
}

LocationType LocationType::from_string(std::string_view text) {
  if (auto kind = parse_kind(text)) {
    if (*kind != LocationKind::Unknown) {
      return {*kind, ""};
    }
  }
  return {LocationKind::Unknown, std::string(text)};
}

std::string LocationType::to_string() const {
  if (kind == LocationKind::Unknown && !raw.empty()) {
    return raw;
  }
  return kind_name(kind);
}

const char* relation_name(RelationKind kind) {
  return kind == RelationKind::Inclusion ? "inclusion" : "proximity";
}

std::optional<RelationKind> parse_relation(std::string_view text) {
  const std::string key = squeeze(text);
  if (key == "inclusion") {
    return RelationKind::Inclusion;
  }
  if (key == "proximity") {
    return RelationKind::Proximity;
  }
  return std::nullopt;
}

bool LocationGraph::has_node(const std::string& name) const {
  return nodes.find(name) != nodes.end();
}

LocationNode& LocationGraph::upsert_node(LocationNode node) {
  auto [it, inserted] = nodes.try_emplace(node.canonical_name, std::move(node));
  return it->second;
}

bool LocationGraph::has_edge(const GraphEdge& edge) const {
  return std::find(edges.begin(), edges.end(), edge) != edges.end();
}

bool LocationGraph::add_edge(GraphEdge edge) {
  if (edge.source == edge.target || has_edge(edge)) {
    return false;
  }
  edges.push_back(std::move(edge));
  return true;
}

std::vector<GraphEdge> LocationGraph::sorted_edges() const {
  std::vector<GraphEdge> out = edges;
  std::sort(out.begin(), out.end());
  return out;
}

void LocationGraph::recompute_degrees() {
  for (auto& [name, node] : nodes) {
    node.degree = 0;
  }
  for (const auto& edge : edges) {
    if (auto it = nodes.find(edge.source); it != nodes.end()) {
      ++it->second.degree;
    }
    if (auto it = nodes.find(edge.target); it != nodes.end()) {
      ++it->second.degree;
    }
  }
}

bool operator==(const LocationGraph& a, const LocationGraph& b) {
  return a.nodes == b.nodes && a.sorted_edges() == b.sorted_edges();
}

Trajectory collapse_adjacent_visits(const Trajectory& traj, int* collapsed) {
  Trajectory out;
  out.doc_id = traj.doc_id;
  int removed = 0;
  for (std::size_t i = 0; i < traj.visits.size(); ++i) {
    const Visit& visit = traj.visits[i];
    if (!out.visits.empty() && out.visits.back().location == visit.location) {
      // Run of the same location: widen the span; the transport label
      // interior to the run is dropped with the merged visit.
      SegmentSpan& span = out.visits.back().span;
      span.start = std::min(span.start, visit.span.start);
      span.end = std::max(span.end, visit.span.end);
      ++removed;
      continue;
    }
    if (!out.visits.empty()) {
      std::optional<std::string> label;
      if (i > 0 && i - 1 < traj.transports.size()) {
        label = traj.transports[i - 1];
      }
      out.transports.push_back(std::move(label));
    }
    out.visits.push_back(visit);
  }
  if (collapsed != nullptr) {
    *collapsed = removed;
  }
  return out;
}

std::vector<std::string> location_sequence(const Trajectory& traj) {
  std::vector<std::string> out;
  out.reserve(traj.visits.size());
  for (const Visit& visit : traj.visits) {
    out.push_back(visit.location);
  }
  return out;
}

}  // namespace trajmap
