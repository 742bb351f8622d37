#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "trajmap/gateway.hpp"
#include "trajmap/prompts.hpp"
#include "trajmap/types.hpp"

namespace trajmap {

struct ExtractionOptions {
  std::string model_id = "gpt-4o-mini";
  double temperature = 0.0;
  int max_output_tokens = 4096;
  int concurrency = 4;
};

/// Per-stage notes: dropped edges, collapsed visits, validation findings.
/// These are diagnostics, not failures; the entry count is also what decides
/// whether a revision is accepted over its draft.
struct StageDiagnostics {
  std::string stage;
  std::vector<std::string> notes;
};

struct DocumentDiagnostics {
  std::string doc_id;
  std::vector<StageDiagnostics> stages;

  void add(const std::string& stage, std::vector<std::string> notes);
  nlohmann::json to_json() const;
};

struct DocumentResult {
  std::string doc_id;
  LocationGraph graph;
  Trajectory trajectory;
  DocumentDiagnostics diagnostics;
};

struct FailureEntry {
  std::string doc_id;
  std::string stage;
  std::string error;
};

struct CorpusResult {
  std::vector<DocumentResult> documents;  // input order, failed docs excluded
  std::vector<FailureEntry> failures;
};

/// "N. text" per line, 1-indexed.
std::string numbered_segments(const Document& doc);

/// Converts a model graph response into a structurally clean LocationGraph:
/// duplicate nodes, self-loops, duplicate edges and edges naming absent
/// nodes are dropped, each with a note.
LocationGraph parse_graph_response(const nlohmann::json& value, std::vector<std::string>* notes);

/// Converts a model trajectory response into a Trajectory: "sentences" may
/// be an integer or a pair, adjacent duplicate locations are collapsed.
Trajectory parse_trajectory_response(const nlohmann::json& value, const std::string& doc_id,
                                     std::vector<std::string>* notes);

/// Runs the four chat turns for one document as a single conversation:
/// graph extraction, graph revision, trajectory extraction, trajectory
/// revision. The step methods must be called in that order; run() does.
class DocumentExtractor {
 public:
  DocumentExtractor(Gateway& gateway, const PromptLibrary& prompts, ExtractionOptions options);

  DocumentResult run(const Document& doc);

  LocationGraph extract_location_graph(const Document& doc);
  LocationGraph revise_graph(const Document& doc, const LocationGraph& draft);
  Trajectory extract_trajectory(const Document& doc, const LocationGraph& graph);
  Trajectory revise_trajectory(const Document& doc, const Trajectory& draft);

  const DocumentDiagnostics& diagnostics() const { return diagnostics_; }

 private:
  Gateway& gateway_;
  const PromptLibrary& prompts_;
  ExtractionOptions options_;

  std::vector<ChatMessage> conversation_;
  DocumentDiagnostics diagnostics_;
  LocationGraph last_graph_;  // graph the trajectory is checked against
  std::size_t draft_graph_violations_ = 0;
  std::size_t draft_trajectory_violations_ = 0;

  /// Sends a user turn, appends the assistant reply, returns its text.
  std::string send(const std::string& user_text);
  /// send() + JSON recovery with one "valid JSON only" reformat follow-up.
  nlohmann::json send_for_json(const std::string& user_text);

  std::size_t trajectory_violations(const Trajectory& traj, const Document& doc,
                                    const LocationGraph& graph,
                                    std::vector<std::string>* notes) const;
};

/// Runs document pipelines concurrently (up to options.concurrency); output
/// order matches input order and per-document failures are collected, not
/// fatal.
CorpusResult extract_corpus(const std::vector<Document>& docs, Gateway& gateway,
                            const PromptLibrary& prompts, const ExtractionOptions& options);

}  // namespace trajmap
