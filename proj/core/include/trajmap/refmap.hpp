#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trajmap/types.hpp"

namespace trajmap {

/// A coordinate-labeled location. level is restricted to the five
/// reference levels (Country, County, City, Natural, Facility).
struct GisRecord {
  std::string name;
  LocationKind level = LocationKind::City;
  double lat = 0.0;
  double lon = 0.0;
};

/// Great-circle distance in km, spherical earth of radius 6371 km.
double haversine_km(double lat1, double lon1, double lat2, double lon2);

/// CSV with header "name,level,lat,lon". Throws SchemaError on malformed
/// rows, unknown levels or out-of-range coordinates.
std::vector<GisRecord> gis_from_csv(const std::string& text);
std::string gis_to_csv(const std::vector<GisRecord>& records);

/// Proximity hierarchy: every Natural/Facility connects to its nearest
/// City, every City to its nearest County, every County to its nearest
/// Country (when any exists). Distance ties break lexicographically by
/// name. Throws MissingParentLevel when a required parent level is empty.
LocationGraph build_reference_map(const std::vector<GisRecord>& records);

/// Mirrors the reference-map format on a model map: nodes without a GIS
/// label are dropped with their edges, and every inclusion edge between two
/// rank-4 nodes is replaced by edges from both endpoints to the container's
/// parent city (nearest GIS city as fallback). Idempotent.
LocationGraph normalize_map_for_eval(const LocationGraph& model_map,
                                     const std::vector<GisRecord>& gis);

/// Same level structure as build_reference_map but each child's parent is
/// drawn uniformly from the appropriate level. Seeded and reproducible.
LocationGraph random_tree_baseline(const std::vector<GisRecord>& records, std::uint64_t seed);

/// Maps the full model type set onto the five reference levels
/// (County/Region -> County, City/Village -> City, camps and ghettos ->
/// Facility). Returns nullopt for Continent/Unknown.
std::optional<LocationKind> reference_level_of(LocationKind kind);

}  // namespace trajmap
