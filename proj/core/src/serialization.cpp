#include "trajmap/serialization.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>
#include <sstream>

#include "trajmap/errors.hpp"

namespace trajmap {

using nlohmann::json;

namespace {

[[noreturn]] void schema_fail(const std::string& what) {
  throw SchemaError(what);
}

std::string require_string(const json& value, const char* what) {
  if (!value.is_string()) {
    schema_fail(std::string(what) + " must be a string");
  }
  return value.get<std::string>();
}

}  // namespace

json graph_to_json(const LocationGraph& graph) {
  json nodes = json::array();
  for (const auto& [name, node] : graph.nodes) {
    json attrs = json::object();
    attrs["type"] = node.type.to_string();
    if (!node.aliases.empty()) {
      attrs["aliases"] = node.aliases;
    }
    if (node.degree > 0) {
      attrs["degree"] = node.degree;
    }
    nodes.push_back(json::array({name, attrs}));
  }
  json edges = json::array();
  for (const auto& edge : graph.sorted_edges()) {
    edges.push_back(json::array(
        {edge.source, edge.target, json{{"relation", relation_name(edge.relation)}}}));
  }
  return json{{"nodes", nodes}, {"edges", edges}};
}

LocationGraph graph_from_json(const json& value) {
  if (!value.is_object() || !value.contains("nodes") || !value.contains("edges")) {
    schema_fail("graph JSON must be an object with \"nodes\" and \"edges\"");
  }
  if (!value["nodes"].is_array() || !value["edges"].is_array()) {
    schema_fail("graph \"nodes\" and \"edges\" must be arrays");
  }

  LocationGraph graph;
  for (const json& entry : value["nodes"]) {
    LocationNode node;
    if (entry.is_string()) {
      node.canonical_name = entry.get<std::string>();
    } else if (entry.is_array() && !entry.empty()) {
      node.canonical_name = require_string(entry[0], "node name");
      if (entry.size() > 1) {
        const json& attrs = entry[1];
        if (!attrs.is_object()) {
          schema_fail("node attributes for '" + node.canonical_name + "' must be an object");
        }
        if (attrs.contains("type")) {
          node.type = LocationType::from_string(require_string(attrs["type"], "node type"));
        }
        if (attrs.contains("aliases")) {
          for (const json& alias : attrs["aliases"]) {
            node.aliases.insert(require_string(alias, "alias"));
          }
        }
        if (attrs.contains("degree") && attrs["degree"].is_number_integer()) {
          node.degree = attrs["degree"].get<int>();
        }
      }
    } else {
      schema_fail("graph node entries must be strings or [name, attrs] arrays");
    }
    node.aliases.erase(node.canonical_name);
    graph.upsert_node(std::move(node));
  }

  for (const json& entry : value["edges"]) {
    if (!entry.is_array() || entry.size() < 2) {
      schema_fail("graph edge entries must be [source, target(, attrs)] arrays");
    }
    GraphEdge edge;
    edge.source = require_string(entry[0], "edge source");
    edge.target = require_string(entry[1], "edge target");
    if (entry.size() > 2 && entry[2].is_object() && entry[2].contains("relation")) {
      const std::string rel = require_string(entry[2]["relation"], "edge relation");
      if (auto kind = parse_relation(rel)) {
        edge.relation = *kind;
      } else {
        schema_fail("unknown edge relation '" + rel + "'");
      }
    }
    graph.edges.push_back(std::move(edge));
  }
  return graph;
}

json trajectory_to_json(const Trajectory& traj) {
  json nodes = json::array();
  for (const Visit& visit : traj.visits) {
    nodes.push_back(json::array(
        {visit.location, json{{"sentences", json::array({visit.span.start, visit.span.end})}}}));
  }
  json edges = json::array();
  for (std::size_t i = 0; i + 1 < traj.visits.size(); ++i) {
    json attrs = json::object();
    if (i < traj.transports.size() && traj.transports[i].has_value()) {
      attrs["transport"] = *traj.transports[i];
    } else {
      attrs["transport"] = nullptr;
    }
    edges.push_back(
        json::array({traj.visits[i].location, traj.visits[i + 1].location, attrs}));
  }
  return json{{"doc_id", traj.doc_id}, {"nodes", nodes}, {"edges", edges}};
}

Trajectory trajectory_from_json(const json& value) {
  if (!value.is_object() || !value.contains("nodes")) {
    schema_fail("trajectory JSON must be an object with \"nodes\"");
  }
  Trajectory traj;
  if (value.contains("doc_id")) {
    traj.doc_id = require_string(value["doc_id"], "doc_id");
  }
  for (const json& entry : value["nodes"]) {
    if (!entry.is_array() || entry.size() < 2 || !entry[1].is_object()) {
      schema_fail("trajectory node entries must be [name, {\"sentences\": ...}]");
    }
    Visit visit;
    visit.location = require_string(entry[0], "visit location");
    const json& sentences = entry[1].value("sentences", json());
    if (sentences.is_number_integer()) {
      visit.span.start = visit.span.end = sentences.get<int>();
    } else if (sentences.is_array() && sentences.size() == 1 && sentences[0].is_number_integer()) {
      visit.span.start = visit.span.end = sentences[0].get<int>();
    } else if (sentences.is_array() && sentences.size() == 2 &&
               sentences[0].is_number_integer() && sentences[1].is_number_integer()) {
      visit.span.start = sentences[0].get<int>();
      visit.span.end = sentences[1].get<int>();
    } else {
      schema_fail("visit '" + visit.location + "' needs an integer or [start, end] \"sentences\"");
    }
    traj.visits.push_back(std::move(visit));
  }

  // Transport labels are positional: edge i belongs between visits i and i+1.
  const std::size_t pairs = traj.visits.empty() ? 0 : traj.visits.size() - 1;
  traj.transports.assign(pairs, std::nullopt);
  if (value.contains("edges")) {
    if (!value["edges"].is_array()) {
      schema_fail("trajectory \"edges\" must be an array");
    }
    std::size_t cursor = 0;
    for (const json& entry : value["edges"]) {
      if (!entry.is_array() || entry.size() < 2) {
        schema_fail("trajectory edge entries must be [a, b(, attrs)] arrays");
      }
      const std::string from = require_string(entry[0], "edge source");
      const std::string to = require_string(entry[1], "edge target");
      // Match against the next adjacent pair; model output occasionally
      // skips or reorders edges, so scan forward rather than require i==cursor.
      for (std::size_t i = cursor; i < pairs; ++i) {
        if (traj.visits[i].location == from && traj.visits[i + 1].location == to) {
          if (entry.size() > 2 && entry[2].is_object() && entry[2].contains("transport") &&
              entry[2]["transport"].is_string()) {
            traj.transports[i] = entry[2]["transport"].get<std::string>();
          }
          cursor = i + 1;
          break;
        }
      }
    }
  }
  return traj;
}

std::map<std::string, std::vector<std::string>> references_from_json(const json& value) {
  if (!value.is_object()) {
    schema_fail("reference file must be a JSON object of doc_id -> name list");
  }
  std::map<std::string, std::vector<std::string>> refs;
  for (const auto& [doc_id, names] : value.items()) {
    if (!names.is_array()) {
      schema_fail("reference entry for '" + doc_id + "' must be an array");
    }
    std::vector<std::string>& out = refs[doc_id];
    for (const json& name : names) {
      out.push_back(require_string(name, "reference name"));
    }
  }
  return refs;
}

json references_to_json(const std::map<std::string, std::vector<std::string>>& refs) {
  json out = json::object();
  for (const auto& [doc_id, names] : refs) {
    out[doc_id] = names;
  }
  return out;
}

Document document_from_text(const std::string& doc_id, const std::string& text) {
  Document doc;
  doc.doc_id = doc_id;
  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.find_first_not_of(" \t") == std::string::npos) {
      continue;
    }
    doc.segments.push_back(line);
  }
  return doc;
}

Document document_from_json(const json& value) {
  if (!value.is_object() || !value.contains("doc_id") || !value.contains("segments")) {
    schema_fail("document JSON must contain \"doc_id\" and \"segments\"");
  }
  Document doc;
  doc.doc_id = require_string(value["doc_id"], "doc_id");
  if (!value["segments"].is_array()) {
    schema_fail("document \"segments\" must be an array");
  }
  for (const json& segment : value["segments"]) {
    doc.segments.push_back(require_string(segment, "segment"));
  }
  return doc;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) {
    throw IoError("read failed for " + path.string());
  }
  return out.str();
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  static std::atomic<unsigned> counter{0};
  std::ostringstream name;
  name << "." << path.filename().string() << ".tmp." << ::getpid() << "." << counter++;
  const fs::path tmp = (path.has_parent_path() ? path.parent_path() : fs::path(".")) / name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot create " + tmp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw IoError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("rename to " + path.string() + " failed: " + ec.message());
  }
}

std::string dump_json(const json& value) {
  return value.dump(2) + "\n";
}

json load_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) {
    throw SchemaError("invalid JSON in " + path.string());
  }
  return value;
}

}  // namespace trajmap
