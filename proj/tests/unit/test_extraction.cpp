#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "builders.hpp"
#include "trajmap/errors.hpp"
#include "trajmap/extraction.hpp"
#include "trajmap/gateway.hpp"
#include "trajmap/prompts.hpp"

using namespace trajmap;
using nlohmann::json;

namespace {

const PromptLibrary& prompts() {
  static const PromptLibrary lib(TRAJMAP_TEMPLATE_DIR, "holocaust");
  return lib;
}

ExtractionOptions options() {
  ExtractionOptions out;
  out.model_id = "test-model";
  out.concurrency = 2;
  return out;
}

/// Routes a conversation to canned replies by inspecting the last user turn.
class StepResponder {
 public:
  StepResponder& on_graph(std::string text) {
    graph_ = std::move(text);
    return *this;
  }
  StepResponder& on_graph_revision(std::string text) {
    graph_revision_ = std::move(text);
    return *this;
  }
  StepResponder& on_trajectory(std::string text) {
    trajectory_ = std::move(text);
    return *this;
  }
  StepResponder& on_trajectory_revision(std::string text) {
    trajectory_revision_ = std::move(text);
    return *this;
  }
  StepResponder& on_reformat(std::string text) {
    reformat_ = std::move(text);
    return *this;
  }

  std::string operator()(const ChatRequest& request) const {
    const std::string& last = request.messages.back().text;
    if (last.find("Give your answer as valid JSON only.") != std::string::npos) {
      return reformat_;
    }
    if (last.find("I'll give you a Holocaust testimony") != std::string::npos) {
      return graph_;
    }
    if (last.find("Check the types of the nodes") != std::string::npos) {
      return graph_revision_;
    }
    if (last.find("trajectory of the witness") != std::string::npos) {
      return trajectory_;
    }
    if (last.find("sentence numbers are in ascending order") != std::string::npos) {
      return trajectory_revision_;
    }
    return "???";
  }

 private:
  std::string graph_ = "{\"nodes\": [], \"edges\": []}";
  std::string graph_revision_ = "{\"nodes\": [], \"edges\": []}";
  std::string trajectory_ = "{\"nodes\": [], \"edges\": []}";
  std::string trajectory_revision_ = "{\"nodes\": [], \"edges\": []}";
  std::string reformat_ = "still not json";
};

Gateway make_gateway(const StepResponder& responder) {
  return Gateway(std::make_shared<ScriptedTransport>(responder), {"", 4, 128000});
}

const char* kGraphKrakow = R"({
  "nodes": [["Krakow", {"type": "City"}], ["Poland", {"type": "Country"}]],
  "edges": [["Krakow", "Poland"]]
})";

Document three_segments() {
  return Document{"doc1", {"I was born in Krakow.", "Krakow is in Poland.", "I stayed there."}};
}

}  // namespace

TEST_CASE("numbered segments are 1-indexed, one per line") {
  CHECK(numbered_segments(Document{"d", {"alpha", "beta"}}) == "1. alpha\n2. beta\n");
}

TEST_CASE("graph extraction parses the fixture transcript") {
  StepResponder responder;
  responder.on_graph(kGraphKrakow);
  Gateway gateway = make_gateway(responder);
  DocumentExtractor extractor(gateway, prompts(), options());

  const LocationGraph graph = extractor.extract_location_graph(three_segments());
  CHECK(graph.nodes.size() == 2);
  CHECK(graph.edges.size() == 1);
  CHECK(graph.nodes.at("Krakow").type.kind == LocationKind::City);
  CHECK(graph.edges[0] == GraphEdge{"Krakow", "Poland", RelationKind::Inclusion});
}

TEST_CASE("duplicate nodes, self-loops and dangling edges are dropped with notes") {
  StepResponder responder;
  responder.on_graph(R"({
    "nodes": [["A", {"type": "City"}], ["A", {"type": "City"}], ["B", {"type": "Country"}]],
    "edges": [["A", "B"], ["A", "B"], ["A", "A"], ["A", "Ghost"]]
  })");
  Gateway gateway = make_gateway(responder);
  DocumentExtractor extractor(gateway, prompts(), options());

  const LocationGraph graph = extractor.extract_location_graph(three_segments());
  CHECK(graph.nodes.size() == 2);
  CHECK(graph.edges.size() == 1);
  REQUIRE(extractor.diagnostics().stages.size() == 1);
  CHECK(extractor.diagnostics().stages[0].notes.size() == 4);
}

TEST_CASE("json recovery retries once with a reformat follow-up") {
  StepResponder responder;
  responder.on_graph("I looked at the testimony very carefully.");
  responder.on_reformat(kGraphKrakow);
  Gateway gateway = make_gateway(responder);
  DocumentExtractor extractor(gateway, prompts(), options());

  const LocationGraph graph = extractor.extract_location_graph(three_segments());
  CHECK(graph.nodes.size() == 2);
}

TEST_CASE("persistent junk fails the document after one reformat") {
  StepResponder responder;
  responder.on_graph("no json here");
  responder.on_reformat("still no json");
  Gateway gateway = make_gateway(responder);
  DocumentExtractor extractor(gateway, prompts(), options());
  CHECK_THROWS_AS(extractor.extract_location_graph(three_segments()), JsonRecoveryError);
}

TEST_CASE("missing nodes/edges is a schema error") {
  StepResponder responder;
  responder.on_graph("{\"vertices\": []}");
  Gateway gateway = make_gateway(responder);
  DocumentExtractor extractor(gateway, prompts(), options());
  CHECK_THROWS_AS(extractor.extract_location_graph(three_segments()), SchemaError);
}

TEST_CASE("revision replacing a reversed edge is accepted") {
  StepResponder responder;
  responder.on_graph(R"({
    "nodes": [["Krakow", {"type": "City"}], ["Poland", {"type": "Country"}]],
    "edges": [["Poland", "Krakow"]]
  })");
  responder.on_graph_revision(kGraphKrakow);
  Gateway gateway = make_gateway(responder);
  DocumentExtractor extractor(gateway, prompts(), options());

  const LocationGraph draft = extractor.extract_location_graph(three_segments());
  const LocationGraph revised = extractor.revise_graph(three_segments(), draft);
  CHECK(revised.edges[0] == GraphEdge{"Krakow", "Poland", RelationKind::Inclusion});
}

TEST_CASE("unparseable revision keeps the draft with a note") {
  StepResponder responder;
  responder.on_graph(kGraphKrakow);
  responder.on_graph_revision("The answer is already consistent, nothing to change!");
  Gateway gateway = make_gateway(responder);
  DocumentExtractor extractor(gateway, prompts(), options());

  const LocationGraph draft = extractor.extract_location_graph(three_segments());
  const LocationGraph revised = extractor.revise_graph(three_segments(), draft);
  CHECK(revised == draft);
  const auto& stages = extractor.diagnostics().stages;
  REQUIRE(stages.size() == 2);
  CHECK(stages[1].notes.size() == 1);
}

TEST_CASE("revision that validates worse is rejected") {
  StepResponder responder;
  responder.on_graph(kGraphKrakow);
  responder.on_graph_revision(R"({
    "nodes": [["Krakow", {"type": "City"}], ["Poland", {"type": "Country"}]],
    "edges": [["Krakow", "Poland"], ["Krakow", "Nowhere"]]
  })");
  Gateway gateway = make_gateway(responder);
  DocumentExtractor extractor(gateway, prompts(), options());

  const LocationGraph draft = extractor.extract_location_graph(three_segments());
  const LocationGraph revised = extractor.revise_graph(three_segments(), draft);
  CHECK(revised == draft);
}

TEST_CASE("trajectory parsing: single-int spans, collapsing, transports") {
  StepResponder responder;
  responder.on_graph(kGraphKrakow);
  responder.on_trajectory(R"({
    "nodes": [["Krakow", {"sentences": 1}], ["Krakow", {"sentences": [2, 2]}],
              ["Poland", {"sentences": [3, 3]}]],
    "edges": [["Krakow", "Poland", {"transport": "by train"}]]
  })");
  Gateway gateway = make_gateway(responder);
  DocumentExtractor extractor(gateway, prompts(), options());

  const LocationGraph graph = extractor.extract_location_graph(three_segments());
  const Trajectory traj = extractor.extract_trajectory(three_segments(), graph);
  REQUIRE(traj.visits.size() == 2);
  CHECK(traj.visits[0].span == SegmentSpan{1, 2});  // collapsed single-int spans
  REQUIRE(traj.transports.size() == 1);
  CHECK(traj.transports[0] == "by train");
}

TEST_CASE("locations outside the graph stay in the trajectory but are flagged") {
  StepResponder responder;
  responder.on_graph(kGraphKrakow);
  responder.on_trajectory(R"({
    "nodes": [["Krakow", {"sentences": [1, 1]}], ["Vienna", {"sentences": [2, 2]}]],
    "edges": []
  })");
  Gateway gateway = make_gateway(responder);
  DocumentExtractor extractor(gateway, prompts(), options());

  const LocationGraph graph = extractor.extract_location_graph(three_segments());
  const Trajectory traj = extractor.extract_trajectory(three_segments(), graph);
  REQUIRE(traj.visits.size() == 2);
  CHECK(traj.visits[1].location == "Vienna");
  bool flagged = false;
  for (const auto& stage : extractor.diagnostics().stages) {
    for (const auto& note : stage.notes) {
      flagged = flagged || note.find("Vienna") != std::string::npos;
    }
  }
  CHECK(flagged);
}

TEST_CASE("trajectory revision fixing descending spans is accepted") {
  StepResponder responder;
  responder.on_graph(kGraphKrakow);
  responder.on_trajectory(R"({
    "nodes": [["Krakow", {"sentences": [2, 2]}], ["Poland", {"sentences": [1, 3]}]],
    "edges": []
  })");
  responder.on_trajectory_revision(R"({
    "nodes": [["Krakow", {"sentences": [1, 2]}], ["Poland", {"sentences": [3, 3]}]],
    "edges": []
  })");
  Gateway gateway = make_gateway(responder);
  DocumentExtractor extractor(gateway, prompts(), options());

  const LocationGraph graph = extractor.extract_location_graph(three_segments());
  const Trajectory draft = extractor.extract_trajectory(three_segments(), graph);
  const Trajectory revised = extractor.revise_trajectory(three_segments(), draft);
  CHECK(revised.visits[0].span == SegmentSpan{1, 2});
}

TEST_CASE("trajectory revision introducing an adjacency violation keeps the draft") {
  StepResponder responder;
  responder.on_graph(kGraphKrakow);
  responder.on_trajectory(R"({
    "nodes": [["Krakow", {"sentences": [1, 2]}], ["Poland", {"sentences": [3, 3]}]],
    "edges": []
  })");
  responder.on_trajectory_revision(R"({
    "nodes": [["Krakow", {"sentences": [1, 1]}], ["Krakow", {"sentences": [2, 2]}],
              ["Poland", {"sentences": [3, 3]}]],
    "edges": []
  })");
  Gateway gateway = make_gateway(responder);
  DocumentExtractor extractor(gateway, prompts(), options());

  const LocationGraph graph = extractor.extract_location_graph(three_segments());
  const Trajectory draft = extractor.extract_trajectory(three_segments(), graph);
  const Trajectory revised = extractor.revise_trajectory(three_segments(), draft);
  CHECK(revised == draft);
}

TEST_CASE("extract_corpus keeps input order and isolates failures") {
  StepResponder good;
  good.on_graph(kGraphKrakow);
  good.on_trajectory(R"({"nodes": [["Krakow", {"sentences": [1, 1]}]], "edges": []})");

  auto transport = std::make_shared<ScriptedTransport>([&](const ChatRequest& request) {
    for (const ChatMessage& message : request.messages) {
      if (message.text.find("POISON") != std::string::npos) {
        return std::string("never json");
      }
    }
    return good(request);
  });
  Gateway gateway(transport, {"", 4, 128000});

  const std::vector<Document> docs = {
      Document{"a", {"I was born in Krakow."}},
      Document{"b", {"POISON segment."}},
      Document{"c", {"I was born in Krakow too."}},
  };
  const CorpusResult result = extract_corpus(docs, gateway, prompts(), options());
  REQUIRE(result.documents.size() == 2);
  CHECK(result.documents[0].doc_id == "a");
  CHECK(result.documents[1].doc_id == "c");
  REQUIRE(result.failures.size() == 1);
  CHECK(result.failures[0].doc_id == "b");

  const CorpusResult empty = extract_corpus({}, gateway, prompts(), options());
  CHECK(empty.documents.empty());
  CHECK(empty.failures.empty());
}

TEST_CASE("extraction is deterministic under a recorded cache") {
  namespace fs = std::filesystem;
  const fs::path cache =
      fs::temp_directory_path() / ("trajmap_det_" + std::to_string(::getpid()));
  fs::remove_all(cache);

  StepResponder responder;
  responder.on_graph(kGraphKrakow);
  responder.on_trajectory(R"({"nodes": [["Krakow", {"sentences": [1, 1]}]], "edges": []})");

  auto run = [&](std::shared_ptr<Transport> transport) {
    Gateway gateway(transport, {cache, 2, 128000});
    DocumentExtractor extractor(gateway, prompts(), options());
    return extractor.run(three_segments());
  };

  const DocumentResult live = run(std::make_shared<ScriptedTransport>(responder));
  const DocumentResult replayed = run(std::make_shared<ReplayTransport>(cache));
  CHECK(live.graph == replayed.graph);
  CHECK(live.trajectory == replayed.trajectory);
  fs::remove_all(cache);
}
