#include "trajmap/refmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "trajmap/errors.hpp"

namespace trajmap {

namespace {

constexpr double kEarthRadiusKm = 6371.0;
constexpr double kPi = 3.14159265358979323846;

double to_radians(double degrees) { return degrees * kPi / 180.0; }

/// Uniform draw in [0, n) by rejection; stable across platforms, unlike
/// std::uniform_int_distribution.
std::size_t bounded_draw(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t value = rng();
  while (value >= limit) {
    value = rng();
  }
  return static_cast<std::size_t>(value % n);
}

struct Levels {
  std::vector<GisRecord> countries;
  std::vector<GisRecord> counties;
  std::vector<GisRecord> cities;
  std::vector<GisRecord> children;  // Natural + Facility
};

/// Deduplicates by name (first record wins) and buckets by level, each
/// bucket sorted by name for deterministic iteration.
Levels split_levels(const std::vector<GisRecord>& records) {
  Levels out;
  std::map<std::string, const GisRecord*> seen;
  for (const GisRecord& record : records) {
    seen.try_emplace(record.name, &record);
  }
  for (const auto& [name, record] : seen) {
    switch (record->level) {
      case LocationKind::Country:
        out.countries.push_back(*record);
        break;
      case LocationKind::County:
        out.counties.push_back(*record);
        break;
      case LocationKind::City:
        out.cities.push_back(*record);
        break;
      default:
        out.children.push_back(*record);
        break;
    }
  }
  return out;
}

const GisRecord& nearest(const GisRecord& child, const std::vector<GisRecord>& parents) {
  const GisRecord* best = &parents.front();
  double best_distance = haversine_km(child.lat, child.lon, best->lat, best->lon);
  for (const GisRecord& candidate : parents) {
    const double d = haversine_km(child.lat, child.lon, candidate.lat, candidate.lon);
    // Ties break lexicographically; parents are sorted by name, so keeping
    // the first strictly-smaller distance does exactly that.
    if (d < best_distance) {
      best = &candidate;
      best_distance = d;
    }
  }
  return *best;
}

void add_gis_nodes(LocationGraph& graph, const Levels& levels) {
  auto add = [&graph](const std::vector<GisRecord>& records) {
    for (const GisRecord& record : records) {
      LocationNode node;
      node.canonical_name = record.name;
      node.type = LocationType{record.level, ""};
      graph.upsert_node(std::move(node));
    }
  };
  add(levels.countries);
  add(levels.counties);
  add(levels.cities);
  add(levels.children);
}

void require_parents(const Levels& levels) {
  if (!levels.children.empty() && levels.cities.empty()) {
    throw MissingParentLevel("natural/facility records given but no City level present");
  }
  if (!levels.cities.empty() && levels.counties.empty()) {
    throw MissingParentLevel("city records given but no County level present");
  }
}

}  // namespace

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  const double phi1 = to_radians(lat1);
  const double phi2 = to_radians(lat2);
  const double dphi = to_radians(lat2 - lat1);
  const double dlambda = to_radians(lon2 - lon1);
  const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) * std::sin(dlambda / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

std::vector<GisRecord> gis_from_csv(const std::string& text) {
  std::istringstream stream(text);
  std::string line;
  if (!std::getline(stream, line)) {
    throw SchemaError("empty GIS file");
  }
  // Tolerate a UTF-8 BOM and \r\n endings.
  if (line.size() >= 3 && line.compare(0, 3, "\xef\xbb\xbf") == 0) {
    line.erase(0, 3);
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != "name,level,lat,lon") {
    throw SchemaError("GIS header must be 'name,level,lat,lon', got '" + line + "'");
  }

  std::vector<GisRecord> records;
  int line_number = 1;
  while (std::getline(stream, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }

    // Minimal CSV: quoted first field allowed ("Town, near X"), the rest
    // are plain.
    std::string name;
    std::size_t pos = 0;
    if (!line.empty() && line[0] == '"') {
      pos = 1;
      while (pos < line.size()) {
        if (line[pos] == '"') {
          if (pos + 1 < line.size() && line[pos + 1] == '"') {
            name.push_back('"');
            pos += 2;
            continue;
          }
          ++pos;
          break;
        }
        name.push_back(line[pos]);
        ++pos;
      }
      if (pos >= line.size() || line[pos] != ',') {
        throw SchemaError("GIS line " + std::to_string(line_number) + ": malformed quoted name");
      }
      ++pos;
    } else {
      const std::size_t comma = line.find(',');
      if (comma == std::string::npos) {
        throw SchemaError("GIS line " + std::to_string(line_number) + ": expected 4 fields");
      }
      name = line.substr(0, comma);
      pos = comma + 1;
    }

    std::istringstream rest(line.substr(pos));
    std::string level_text;
    std::string lat_text;
    std::string lon_text;
    if (!std::getline(rest, level_text, ',') || !std::getline(rest, lat_text, ',') ||
        !std::getline(rest, lon_text)) {
      throw SchemaError("GIS line " + std::to_string(line_number) + ": expected 4 fields");
    }

    GisRecord record;
    record.name = name;
    const auto kind = parse_kind(level_text);
    if (!kind.has_value() ||
        (*kind != LocationKind::Country && *kind != LocationKind::County &&
         *kind != LocationKind::City && *kind != LocationKind::Natural &&
         *kind != LocationKind::Facility)) {
      throw SchemaError("GIS line " + std::to_string(line_number) + ": unknown level '" +
                        level_text + "'");
    }
    record.level = *kind;
    try {
      record.lat = std::stod(lat_text);
      record.lon = std::stod(lon_text);
    } catch (const std::exception&) {
      throw SchemaError("GIS line " + std::to_string(line_number) + ": bad coordinates");
    }
    if (record.name.empty() || record.lat < -90.0 || record.lat > 90.0 || record.lon < -180.0 ||
        record.lon > 180.0) {
      throw SchemaError("GIS line " + std::to_string(line_number) +
                        ": name empty or coordinates out of range");
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::string gis_to_csv(const std::vector<GisRecord>& records) {
  std::ostringstream out;
  out << "name,level,lat,lon\n";
  char line[256];
  for (const GisRecord& record : records) {
    const bool quote = record.name.find(',') != std::string::npos ||
                       record.name.find('"') != std::string::npos;
    std::string name = record.name;
    if (quote) {
      std::string escaped = "\"";
      for (char c : name) {
        if (c == '"') {
          escaped += "\"\"";
        } else {
          escaped.push_back(c);
        }
      }
      escaped.push_back('"');
      name = escaped;
    }
    std::snprintf(line, sizeof(line), ",%s,%.6f,%.6f\n", kind_name(record.level), record.lat,
                  record.lon);
    out << name << line;
  }
  return out.str();
}

LocationGraph build_reference_map(const std::vector<GisRecord>& records) {
  const Levels levels = split_levels(records);
  require_parents(levels);

  LocationGraph graph;
  add_gis_nodes(graph, levels);
  for (const GisRecord& child : levels.children) {
    graph.add_edge({child.name, nearest(child, levels.cities).name, RelationKind::Inclusion});
  }
  for (const GisRecord& city : levels.cities) {
    graph.add_edge({city.name, nearest(city, levels.counties).name, RelationKind::Inclusion});
  }
  if (!levels.countries.empty()) {
    for (const GisRecord& county : levels.counties) {
      graph.add_edge({county.name, nearest(county, levels.countries).name, RelationKind::Inclusion});
    }
  }
  std::sort(graph.edges.begin(), graph.edges.end());
  graph.recompute_degrees();
  return graph;
}

LocationGraph random_tree_baseline(const std::vector<GisRecord>& records, std::uint64_t seed) {
  const Levels levels = split_levels(records);
  require_parents(levels);

  std::mt19937_64 rng(seed);
  LocationGraph graph;
  add_gis_nodes(graph, levels);
  for (const GisRecord& child : levels.children) {
    const GisRecord& parent = levels.cities[bounded_draw(rng, levels.cities.size())];
    graph.add_edge({child.name, parent.name, RelationKind::Inclusion});
  }
  for (const GisRecord& city : levels.cities) {
    const GisRecord& parent = levels.counties[bounded_draw(rng, levels.counties.size())];
    graph.add_edge({city.name, parent.name, RelationKind::Inclusion});
  }
  if (!levels.countries.empty()) {
    for (const GisRecord& county : levels.counties) {
      const GisRecord& parent = levels.countries[bounded_draw(rng, levels.countries.size())];
      graph.add_edge({county.name, parent.name, RelationKind::Inclusion});
    }
  }
  std::sort(graph.edges.begin(), graph.edges.end());
  graph.recompute_degrees();
  return graph;
}

std::optional<LocationKind> reference_level_of(LocationKind kind) {
  switch (kind) {
    case LocationKind::Country:
      return LocationKind::Country;
    case LocationKind::County:
    case LocationKind::Region:
      return LocationKind::County;
    case LocationKind::City:
    case LocationKind::Village:
      return LocationKind::City;
    case LocationKind::Ghetto:
    case LocationKind::ArmyCamp:
    case LocationKind::ConcentrationCamp:
    case LocationKind::DeathCamp:
    case LocationKind::Facility:
      return LocationKind::Facility;
    case LocationKind::Natural:
      return LocationKind::Natural;
    default:
      return std::nullopt;
  }
}

LocationGraph normalize_map_for_eval(const LocationGraph& model_map,
                                     const std::vector<GisRecord>& gis) {
  std::map<std::string, const GisRecord*> labeled;
  for (const GisRecord& record : gis) {
    labeled.try_emplace(record.name, &record);
  }

  // 1. Drop nodes without a GIS label, with their edges.
  LocationGraph out;
  for (const auto& [name, node] : model_map.nodes) {
    if (labeled.count(name) > 0) {
      out.nodes.emplace(name, node);
    }
  }
  for (const GraphEdge& edge : model_map.edges) {
    if (out.has_node(edge.source) && out.has_node(edge.target) && !out.has_edge(edge)) {
      out.edges.push_back(edge);
    }
  }

  // Fallback candidates must live on the map, or re-hanging would dangle.
  std::vector<const GisRecord*> cities;
  for (const auto& [name, record] : labeled) {
    if (record->level == LocationKind::City && out.has_node(name)) {
      cities.push_back(record);
    }
  }

  // 2. Re-hang rank-4 chains: an inclusion edge between two rank-4 nodes is
  // replaced by edges from both endpoints to the container's parent city
  // (nearest GIS city as fallback). New targets are rank 3, so one pass
  // suffices and the operation is idempotent.
  auto rank4 = [&out](const std::string& name) {
    auto it = out.nodes.find(name);
    return it != out.nodes.end() && rank_of(it->second.type.kind) == 4;
  };
  auto parent_city_of = [&out, &labeled, &cities](const std::string& name) -> std::string {
    for (const GraphEdge& edge : out.edges) {
      if (edge.relation != RelationKind::Inclusion || edge.source != name) {
        continue;
      }
      auto it = out.nodes.find(edge.target);
      if (it != out.nodes.end() &&
          reference_level_of(it->second.type.kind) == LocationKind::City) {
        return edge.target;
      }
    }
    // Fallback: nearest GIS city to this node's coordinates.
    auto self = labeled.find(name);
    if (self == labeled.end() || cities.empty()) {
      return "";
    }
    const GisRecord* best = nullptr;
    double best_distance = 0.0;
    for (const GisRecord* city : cities) {
      const double d =
          haversine_km(self->second->lat, self->second->lon, city->lat, city->lon);
      if (best == nullptr || d < best_distance) {
        best = city;
        best_distance = d;
      }
    }
    return best->name;
  };

  std::vector<GraphEdge> kept;
  std::vector<GraphEdge> added;
  for (const GraphEdge& edge : out.edges) {
    if (edge.relation == RelationKind::Inclusion && rank4(edge.source) && rank4(edge.target)) {
      const std::string city = parent_city_of(edge.target);
      if (!city.empty()) {
        if (city != edge.source) {
          added.push_back({edge.source, city, RelationKind::Inclusion});
        }
        if (city != edge.target) {
          added.push_back({edge.target, city, RelationKind::Inclusion});
        }
      }
      continue;
    }
    kept.push_back(edge);
  }
  out.edges = std::move(kept);
  for (GraphEdge& edge : added) {
    if (!out.has_edge(edge)) {
      out.edges.push_back(std::move(edge));
    }
  }
  std::sort(out.edges.begin(), out.edges.end());
  out.recompute_degrees();
  return out;
}

}  // namespace trajmap
