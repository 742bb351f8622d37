#include "trajmap/extraction.hpp"

#include <atomic>
#include <set>
#include <sstream>
#include <thread>

#include "trajmap/errors.hpp"
#include "trajmap/json_recovery.hpp"
#include "trajmap/validate.hpp"

namespace trajmap {

using nlohmann::json;

namespace {

constexpr const char* kReformatFollowUp = "Give your answer as valid JSON only.";

std::set<std::string> node_names(const LocationGraph& graph) {
  std::set<std::string> names;
  for (const auto& [name, node] : graph.nodes) {
    names.insert(name);
  }
  return names;
}

}  // namespace

void DocumentDiagnostics::add(const std::string& stage, std::vector<std::string> notes) {
  stages.push_back({stage, std::move(notes)});
}

json DocumentDiagnostics::to_json() const {
  json out = json::object();
  out["doc_id"] = doc_id;
  json stage_list = json::array();
  for (const StageDiagnostics& stage : stages) {
    stage_list.push_back({{"stage", stage.stage}, {"notes", stage.notes}});
  }
  out["stages"] = stage_list;
  return out;
}

std::string numbered_segments(const Document& doc) {
  std::ostringstream out;
  for (std::size_t i = 0; i < doc.segments.size(); ++i) {
    out << (i + 1) << ". " << doc.segments[i] << "\n";
  }
  return out.str();
}

LocationGraph parse_graph_response(const json& value, std::vector<std::string>* notes) {
  if (!value.is_object() || !value.contains("nodes") || !value.contains("edges") ||
      !value["nodes"].is_array() || !value["edges"].is_array()) {
    throw SchemaError("graph response lacks \"nodes\"/\"edges\" arrays");
  }

  auto note = [notes](const std::string& text) {
    if (notes != nullptr) {
      notes->push_back(text);
    }
  };

  LocationGraph graph;
  for (const json& entry : value["nodes"]) {
    LocationNode node;
    if (entry.is_string()) {
      node.canonical_name = entry.get<std::string>();
    } else if (entry.is_array() && !entry.empty() && entry[0].is_string()) {
      node.canonical_name = entry[0].get<std::string>();
      if (entry.size() > 1 && entry[1].is_object() && entry[1].contains("type") &&
          entry[1]["type"].is_string()) {
        node.type = LocationType::from_string(entry[1]["type"].get<std::string>());
      }
    } else {
      note("unusable node entry skipped: " + entry.dump());
      continue;
    }
    if (node.canonical_name.empty()) {
      note("node with empty name skipped");
      continue;
    }
    if (graph.has_node(node.canonical_name)) {
      note("duplicate node entry '" + node.canonical_name + "' ignored");
      continue;
    }
    graph.upsert_node(std::move(node));
  }

  for (const json& entry : value["edges"]) {
    if (!entry.is_array() || entry.size() < 2 || !entry[0].is_string() || !entry[1].is_string()) {
      note("unusable edge entry skipped: " + entry.dump());
      continue;
    }
    GraphEdge edge;
    edge.source = entry[0].get<std::string>();
    edge.target = entry[1].get<std::string>();
    if (entry.size() > 2 && entry[2].is_object() && entry[2].contains("relation") &&
        entry[2]["relation"].is_string()) {
      const std::string rel = entry[2]["relation"].get<std::string>();
      if (auto kind = parse_relation(rel)) {
        edge.relation = *kind;
      } else {
        note("edge '" + edge.source + "' -> '" + edge.target + "': unknown relation '" + rel +
             "', treated as inclusion");
      }
    }
    if (edge.source == edge.target) {
      note("self-loop on '" + edge.source + "' dropped");
      continue;
    }
    if (!graph.has_node(edge.source) || !graph.has_node(edge.target)) {
      note("edge '" + edge.source + "' -> '" + edge.target + "' references a missing node; dropped");
      continue;
    }
    if (graph.has_edge(edge)) {
      note("duplicate edge '" + edge.source + "' -> '" + edge.target + "' dropped");
      continue;
    }
    graph.edges.push_back(std::move(edge));
  }
  return graph;
}

Trajectory parse_trajectory_response(const json& value, const std::string& doc_id,
                                     std::vector<std::string>* notes) {
  if (!value.is_object() || !value.contains("nodes") || !value["nodes"].is_array()) {
    throw SchemaError("trajectory response lacks a \"nodes\" array");
  }

  auto note = [notes](const std::string& text) {
    if (notes != nullptr) {
      notes->push_back(text);
    }
  };

  Trajectory traj;
  traj.doc_id = doc_id;
  for (const json& entry : value["nodes"]) {
    if (!entry.is_array() || entry.empty() || !entry[0].is_string()) {
      note("unusable visit entry skipped: " + entry.dump());
      continue;
    }
    Visit visit;
    visit.location = entry[0].get<std::string>();
    json sentences;
    if (entry.size() > 1 && entry[1].is_object()) {
      sentences = entry[1].value("sentences", json());
    }
    if (sentences.is_number_integer()) {
      visit.span.start = visit.span.end = sentences.get<int>();
    } else if (sentences.is_array() && sentences.size() == 1 && sentences[0].is_number_integer()) {
      visit.span.start = visit.span.end = sentences[0].get<int>();
    } else if (sentences.is_array() && sentences.size() == 2 &&
               sentences[0].is_number_integer() && sentences[1].is_number_integer()) {
      visit.span.start = sentences[0].get<int>();
      visit.span.end = sentences[1].get<int>();
    } else {
      note("visit '" + visit.location + "' has no usable \"sentences\" label; skipped");
      continue;
    }
    traj.visits.push_back(std::move(visit));
  }
  traj.transports.assign(traj.visits.empty() ? 0 : traj.visits.size() - 1, std::nullopt);

  if (value.contains("edges") && value["edges"].is_array()) {
    std::size_t cursor = 0;
    for (const json& entry : value["edges"]) {
      if (!entry.is_array() || entry.size() < 2 || !entry[0].is_string() || !entry[1].is_string()) {
        continue;
      }
      const std::string from = entry[0].get<std::string>();
      const std::string to = entry[1].get<std::string>();
      // Edges may arrive sparse or out of order; match each against the next
      // adjacent visit pair.
      for (std::size_t i = cursor; i + 1 < traj.visits.size(); ++i) {
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

  int collapsed = 0;
  traj = collapse_adjacent_visits(traj, &collapsed);
  for (int i = 0; i < collapsed; ++i) {
    note("adjacent duplicate visit collapsed");
  }
  return traj;
}

DocumentExtractor::DocumentExtractor(Gateway& gateway, const PromptLibrary& prompts,
                                     ExtractionOptions options)
    : gateway_(gateway), prompts_(prompts), options_(std::move(options)) {}

std::string DocumentExtractor::send(const std::string& user_text) {
  conversation_.push_back({ChatRole::User, user_text});
  ChatRequest request{options_.model_id, conversation_, options_.temperature,
                      options_.max_output_tokens};
  const ChatResponse response = gateway_.complete(request);
  conversation_.push_back({ChatRole::Assistant, response.text});
  return response.text;
}

json DocumentExtractor::send_for_json(const std::string& user_text) {
  const std::string reply = send(user_text);
  try {
    return extract_json_block(reply);
  } catch (const JsonRecoveryError&) {
    const std::string retry = send(kReformatFollowUp);
    return extract_json_block(retry);  // second failure propagates
  }
}

LocationGraph DocumentExtractor::extract_location_graph(const Document& doc) {
  conversation_.clear();
  diagnostics_ = DocumentDiagnostics{};
  diagnostics_.doc_id = doc.doc_id;

  const std::string prompt =
      prompts_.render(TemplateId::GraphExtraction, {{"testimony", numbered_segments(doc)}});
  const json value = send_for_json(prompt);

  std::vector<std::string> notes;
  LocationGraph graph = parse_graph_response(value, &notes);
  draft_graph_violations_ = notes.size();
  for (const std::string& violation : validate_graph(graph)) {
    notes.push_back(violation);
    ++draft_graph_violations_;
  }
  diagnostics_.add("graph", std::move(notes));
  return graph;
}

LocationGraph DocumentExtractor::revise_graph(const Document& doc, const LocationGraph& draft) {
  (void)doc;
  std::vector<std::string> notes;
  LocationGraph revision;
  std::size_t revision_violations = 0;
  try {
    const std::string reply = send(prompts_.render(TemplateId::GraphRevision, {}));
    const json value = extract_json_block(reply);
    revision = parse_graph_response(value, &notes);
    revision_violations = notes.size();
    for (const std::string& violation : validate_graph(revision)) {
      notes.push_back(violation);
      ++revision_violations;
    }
  } catch (const std::runtime_error& error) {
    notes.push_back(std::string("revision unusable, draft kept: ") + error.what());
    diagnostics_.add("graph_revision", std::move(notes));
    return draft;
  }

  if (revision_violations <= draft_graph_violations_) {
    diagnostics_.add("graph_revision", std::move(notes));
    return revision;
  }
  std::ostringstream why;
  why << "revision rejected: " << revision_violations << " violations vs "
      << draft_graph_violations_ << " in draft";
  notes.push_back(why.str());
  diagnostics_.add("graph_revision", std::move(notes));
  return draft;
}

std::size_t DocumentExtractor::trajectory_violations(const Trajectory& traj, const Document& doc,
                                                     const LocationGraph& graph,
                                                     std::vector<std::string>* notes) const {
  const std::vector<std::string> violations = validate_trajectory(traj, doc, node_names(graph));
  if (notes != nullptr) {
    notes->insert(notes->end(), violations.begin(), violations.end());
  }
  return violations.size();
}

Trajectory DocumentExtractor::extract_trajectory(const Document& doc, const LocationGraph& graph) {
  const json value = send_for_json(prompts_.render(TemplateId::TrajectoryExtraction, {}));

  std::vector<std::string> notes;
  Trajectory traj = parse_trajectory_response(value, doc.doc_id, &notes);
  draft_trajectory_violations_ = notes.size();
  draft_trajectory_violations_ += trajectory_violations(traj, doc, graph, &notes);
  diagnostics_.add("trajectory", std::move(notes));
  last_graph_ = graph;
  return traj;
}

Trajectory DocumentExtractor::revise_trajectory(const Document& doc, const Trajectory& draft) {
  std::vector<std::string> notes;
  Trajectory revision;
  std::size_t revision_violations = 0;
  try {
    const std::string reply = send(prompts_.render(TemplateId::TrajectoryRevision, {}));
    const json value = extract_json_block(reply);
    revision = parse_trajectory_response(value, doc.doc_id, &notes);
    revision_violations = notes.size();
    revision_violations += trajectory_violations(revision, doc, last_graph_, &notes);
  } catch (const std::runtime_error& error) {
    notes.push_back(std::string("revision unusable, draft kept: ") + error.what());
    diagnostics_.add("trajectory_revision", std::move(notes));
    return draft;
  }

  if (revision_violations <= draft_trajectory_violations_) {
    diagnostics_.add("trajectory_revision", std::move(notes));
    return revision;
  }
  std::ostringstream why;
  why << "revision rejected: " << revision_violations << " violations vs "
      << draft_trajectory_violations_ << " in draft";
  notes.push_back(why.str());
  diagnostics_.add("trajectory_revision", std::move(notes));
  return draft;
}

DocumentResult DocumentExtractor::run(const Document& doc) {
  DocumentResult result;
  result.doc_id = doc.doc_id;
  const LocationGraph draft_graph = extract_location_graph(doc);
  result.graph = revise_graph(doc, draft_graph);
  const Trajectory draft_traj = extract_trajectory(doc, result.graph);
  result.trajectory = revise_trajectory(doc, draft_traj);
  result.diagnostics = diagnostics_;
  return result;
}

CorpusResult extract_corpus(const std::vector<Document>& docs, Gateway& gateway,
                            const PromptLibrary& prompts, const ExtractionOptions& options) {
  struct Slot {
    bool ok = false;
    DocumentResult result;
    FailureEntry failure;
  };
  std::vector<Slot> slots(docs.size());

  const int workers =
      std::max(1, std::min<int>(options.concurrency, static_cast<int>(docs.size())));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t index = next.fetch_add(1);
        if (index >= docs.size()) {
          return;
        }
        DocumentExtractor extractor(gateway, prompts, options);
        try {
          slots[index].result = extractor.run(docs[index]);
          slots[index].ok = true;
        } catch (const std::exception& error) {
          slots[index].failure = {docs[index].doc_id, "extraction", error.what()};
        }
      }
    });
  }
  for (std::thread& worker : pool) {
    worker.join();
  }

  CorpusResult out;
  for (Slot& slot : slots) {
    if (slot.ok) {
      out.documents.push_back(std::move(slot.result));
    } else {
      out.failures.push_back(std::move(slot.failure));
    }
  }
  return out;
}

}  // namespace trajmap
