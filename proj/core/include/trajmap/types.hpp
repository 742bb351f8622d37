#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace trajmap {

/// Location categories seen across both corpus domains. A type string a
/// model emits outside this list becomes Unknown, with the original string
/// preserved on the node so nothing is lost on round-trip.
enum class LocationKind {
  Continent,
  Country,
  County,
  Region,
  City,
  Village,
  Ghetto,
  ArmyCamp,
  ConcentrationCamp,
  DeathCamp,
  Natural,
  Facility,
  Unknown,
};

/// Hierarchy level, 0 = most general. Unknown sorts below every ranked type.
int rank_of(LocationKind kind);

const char* kind_name(LocationKind kind);

/// Parses a type string case-insensitively, ignoring spacing
/// ("Concentration Camp" == "concentration camp" == "ConcentrationCamp").
/// Returns nullopt for strings outside the enumeration.
std::optional<LocationKind> parse_kind(std::string_view text);

struct LocationType {
  LocationKind kind = LocationKind::Unknown;
  std::string raw;  // original gateway string, only meaningful for Unknown

  static LocationType from_string(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const LocationType&, const LocationType&) = default;
};

enum class RelationKind { Inclusion, Proximity };

const char* relation_name(RelationKind kind);
std::optional<RelationKind> parse_relation(std::string_view text);

struct GraphEdge {
  std::string source;
  std::string target;
  RelationKind relation = RelationKind::Inclusion;

  auto operator<=>(const GraphEdge&) const = default;
};

struct LocationNode {
  std::string canonical_name;
  LocationType type;
  std::set<std::string> aliases;
  int degree = 0;  // filled once graphs are merged

  friend bool operator==(const LocationNode&, const LocationNode&) = default;
};

/// Directed graph of locations. Containers are deliberately permissive:
/// validate_graph() reports invariant violations as data instead of the
/// type rejecting them, so model output can be inspected before cleanup.
struct LocationGraph {
  std::map<std::string, LocationNode> nodes;
  std::vector<GraphEdge> edges;

  bool has_node(const std::string& name) const;
  /// Inserts the node if absent; returns the stored node either way.
  LocationNode& upsert_node(LocationNode node);
  bool has_edge(const GraphEdge& edge) const;
  /// Checked insert: drops self-loops and exact duplicates. Returns true
  /// when the edge was appended.
  bool add_edge(GraphEdge edge);

  std::vector<GraphEdge> sorted_edges() const;
  /// Undirected incident-edge count per node.
  void recompute_degrees();

  friend bool operator==(const LocationGraph& a, const LocationGraph& b);
};

struct Document {
  std::string doc_id;
  std::vector<std::string> segments;  // 1-indexed everywhere in schemas
};

struct SegmentSpan {
  int start = 0;
  int end = 0;

  auto operator<=>(const SegmentSpan&) const = default;
};

struct Visit {
  std::string location;
  SegmentSpan span;

  friend bool operator==(const Visit&, const Visit&) = default;
};

struct Trajectory {
  std::string doc_id;
  std::vector<Visit> visits;
  /// One entry per adjacent visit pair; nullopt = transport not stated.
  std::vector<std::optional<std::string>> transports;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Merges runs of adjacent visits to the same location into one visit
/// spanning their union. Transport labels interior to a run are dropped.
/// If collapsed is given it receives the number of removed visits.
Trajectory collapse_adjacent_visits(const Trajectory& traj, int* collapsed = nullptr);

std::vector<std::string> location_sequence(const Trajectory& traj);

}  // namespace trajmap
