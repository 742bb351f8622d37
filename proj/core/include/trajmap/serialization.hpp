#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "trajmap/types.hpp"

namespace trajmap {

// --- graph -----------------------------------------------------------------
// Schema mirrors the prompt example format: nodes are [name, {"type": ...}]
// pairs, edges are [source, target] or [source, target, {"relation": ...}];
// a missing relation means inclusion. Merged maps additionally carry
// "aliases" and "degree" in the node attribute dictionary.

nlohmann::json graph_to_json(const LocationGraph& graph);
LocationGraph graph_from_json(const nlohmann::json& value);  // SchemaError

// --- trajectory --------------------------------------------------------------
// nodes are [name, {"sentences": [start, end]}], edges are
// [a, b, {"transport": string|null}] between adjacent visits.

nlohmann::json trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const nlohmann::json& value);  // SchemaError

// --- reference sequences -----------------------------------------------------
// One JSON object: doc_id -> list of location names.

std::map<std::string, std::vector<std::string>> references_from_json(const nlohmann::json& value);
nlohmann::json references_to_json(const std::map<std::string, std::vector<std::string>>& refs);

// --- documents ---------------------------------------------------------------

/// Plain-text corpus file: one segment per line, blank lines skipped.
Document document_from_text(const std::string& doc_id, const std::string& text);
/// {"doc_id": ..., "segments": [...]} form.
Document document_from_json(const nlohmann::json& value);  // SchemaError

// --- file helpers --------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);          // IoError
/// Writes via a temp file in the same directory plus rename, so readers
/// never observe a partial file.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);
/// dump(2) with a trailing newline; object keys are sorted, so output is
/// byte-stable for equal values.
std::string dump_json(const nlohmann::json& value);
nlohmann::json load_json_file(const std::filesystem::path& path);  // IoError/SchemaError

}  // namespace trajmap
