#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "builders.hpp"
#include "oracles.hpp"
#include "trajmap/gateway.hpp"
#include "trajmap/metrics.hpp"

using namespace trajmap;

namespace {

std::vector<int> random_sequence(std::mt19937_64& rng, int max_len, int alphabet) {
  const int len = static_cast<int>(rng() % (max_len + 1));
  std::vector<int> out(len);
  for (int& symbol : out) {
    symbol = static_cast<int>(rng() % alphabet);
  }
  return out;
}

}  // namespace

TEST_CASE("edit distance: pinned examples") {
  using V = std::vector<int>;
  CHECK(edit_distance(V{1, 2, 3}, V{1, 2, 3}) == 0);
  CHECK(edit_distance(V{}, V{1, 2}) == 2);
  // Verified against the exhaustive oracle: one substitution + one insertion.
  CHECK(oracles::edit_distance(V{1, 9, 3}, V{1, 2, 3, 4}) == 2);
  CHECK(edit_distance(V{1, 9, 3}, V{1, 2, 3, 4}) == 2);
}

TEST_CASE("edit distance matches the exhaustive oracle on random pairs") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 400; ++trial) {
    const auto a = random_sequence(rng, 5, 4);
    const auto b = random_sequence(rng, 5, 4);
    CHECK(edit_distance(a, b) == oracles::edit_distance(a, b));
  }
}

TEST_CASE("normalized edit: identity, all-miss, empty reference") {
  const std::vector<int> ref = {1, 2, 3, 4, 5};
  CHECK(normalized_edit(ref, ref) == 0.0);

  // 15 predicted symbols, none matching a 5-symbol reference: 10 deletions
  // + 5 substitutions = 15 edits over 5.
  std::vector<int> pred(15, 99);
  CHECK(normalized_edit(pred, ref) == 3.0);
  CHECK(oracles::edit_distance(pred, ref) == 15);

  CHECK_THROWS_AS(normalized_edit(ref, std::vector<int>{}), EmptyReference);
}

TEST_CASE("r_edit: free deletions, empty prediction, derived example") {
  using V = std::vector<int>;
  // Reference is a subsequence of the prediction: deletions are free.
  CHECK(r_edit(V{9, 1, 8, 2, 7, 3}, V{1, 2, 3}) == 0.0);
  CHECK(r_edit(V{}, V{1, 2, 3, 4}) == 1.0);
  // LCS([A,X,C],[A,B,C,D]) = 2, so (4-2)/4.
  CHECK(oracles::lcs_length(V{1, 9, 3}, V{1, 2, 3, 4}) == 2);
  CHECK(r_edit(V{1, 9, 3}, V{1, 2, 3, 4}) == 0.5);
  CHECK_THROWS_AS(r_edit(V{1}, V{}), EmptyReference);
}

TEST_CASE("r_edit equals (|ref| - LCS)/|ref| and never exceeds normalized edit") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto pred = random_sequence(rng, 12, 5);
    auto ref = random_sequence(rng, 12, 5);
    if (ref.empty()) {
      ref.push_back(0);
    }
    const int cost = r_edit_cost(pred, ref);
    CHECK(cost == static_cast<int>(ref.size()) - lcs_length(pred, ref));
    CHECK(cost == oracles::r_edit_cost(pred, ref));
    CHECK(r_edit(pred, ref) <= normalized_edit(pred, ref));
  }
}

TEST_CASE("normalized edit is invariant under symbol relabeling") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pred = random_sequence(rng, 10, 6);
    auto ref = random_sequence(rng, 10, 6);
    if (ref.empty()) {
      ref.push_back(0);
    }
    std::vector<int> permutation = {0, 1, 2, 3, 4, 5};
    std::shuffle(permutation.begin(), permutation.end(), rng);
    auto relabel = [&permutation](std::vector<int> v) {
      for (int& s : v) {
        s = permutation[s];
      }
      return v;
    };
    CHECK(normalized_edit(pred, ref) == normalized_edit(relabel(pred), relabel(ref)));
  }
}

TEST_CASE("map accuracy: identity, disjoint, derived case") {
  const auto g = builders::graph(
      {{"a", LocationKind::City}, {"b", LocationKind::Country}, {"c", LocationKind::Country}},
      {builders::in("a", "b"), builders::in("a", "c")});
  const MapAccuracy self = map_accuracy(g, g);
  CHECK(self.precision == 1.0);
  CHECK(self.recall == 1.0);
  CHECK(self.f1 == 1.0);
  CHECK_FALSE(self.zero_denominator);

  const auto r = builders::graph(
      {{"a", LocationKind::City}, {"b", LocationKind::Country}, {"c", LocationKind::Country}},
      {builders::in("b", "a"), builders::in("c", "a")});
  const MapAccuracy disjoint = map_accuracy(g, r);
  CHECK(disjoint.precision == 0.0);
  CHECK(disjoint.recall == 0.0);
  CHECK(disjoint.f1 == 0.0);

  // model {a->b, a->c} vs reference {a->b, b->c}: TP=1, FP=1, FN=1.
  const auto ref = builders::graph(
      {{"a", LocationKind::City}, {"b", LocationKind::Country}, {"c", LocationKind::Country}},
      {builders::in("a", "b"), builders::in("b", "c")});
  const MapAccuracy mixed = map_accuracy(g, ref);
  CHECK(mixed.precision == 0.5);
  CHECK(mixed.recall == 0.5);
  CHECK(mixed.f1 == 0.5);
}

TEST_CASE("map accuracy intersects node sets before comparing edges") {
  const auto model = builders::graph(
      {{"a", LocationKind::City}, {"b", LocationKind::Country}, {"x", LocationKind::City}},
      {builders::in("a", "b"), builders::in("x", "b")});
  const auto reference = builders::graph(
      {{"a", LocationKind::City}, {"b", LocationKind::Country}, {"y", LocationKind::City}},
      {builders::in("a", "b"), builders::in("y", "b")});
  // Edges touching x / y fall outside the common node set.
  const MapAccuracy accuracy = map_accuracy(model, reference);
  CHECK(accuracy.precision == 1.0);
  CHECK(accuracy.recall == 1.0);
}

TEST_CASE("map accuracy flags zero denominators instead of failing") {
  const auto empty = builders::graph({{"a", LocationKind::City}}, {});
  const MapAccuracy accuracy = map_accuracy(empty, empty);
  CHECK(accuracy.precision == 0.0);
  CHECK(accuracy.recall == 0.0);
  CHECK(accuracy.f1 == 0.0);
  CHECK(accuracy.zero_denominator);
}

TEST_CASE("precision/recall duality on random graph pairs") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 5);
    auto random_graph = [&]() {
      LocationGraph g;
      for (int i = 0; i < n; ++i) {
        LocationNode node;
        node.canonical_name = "n" + std::to_string(i);
        node.type = LocationType{LocationKind::City, ""};
        g.upsert_node(std::move(node));
      }
      for (int e = 0; e < n; ++e) {
        const std::string a = "n" + std::to_string(rng() % n);
        const std::string b = "n" + std::to_string(rng() % n);
        if (a != b) {
          g.add_edge({a, b, RelationKind::Inclusion});
        }
      }
      return g;
    };
    const LocationGraph g1 = random_graph();
    const LocationGraph g2 = random_graph();
    const MapAccuracy forward = map_accuracy(g1, g2);
    const MapAccuracy backward = map_accuracy(g2, g1);
    CHECK(forward.precision == backward.recall);
    CHECK(forward.recall == backward.precision);
  }
}

TEST_CASE("deterministic alignment reproduces the worked example") {
  const AlignmentMap result = align_locations(
      {"Warsaw (Ghetto)", "Luck", "Warsaw", "New York"}, {"Lutsk", "The Warsaw ghetto"});
  CHECK(result.ids == std::vector<int>{1, 0, -1, -1});
}

TEST_CASE("deterministic alignment maps identical lists to the identity") {
  const std::vector<std::string> names = {"Lodz", "Warsaw", "Krakow"};
  CHECK(align_locations(names, names).ids == std::vector<int>{0, 1, 2});
  CHECK(align_locations({}, names).ids.empty());
}

TEST_CASE("name normalization folds case, diacritics and punctuation") {
  CHECK(normalize_location_name("Łódź") == normalize_location_name("Lodz"));
  CHECK(normalize_location_name("The Warsaw ghetto") == normalize_location_name("Warsaw Ghetto"));
  CHECK(normalize_location_name("Lutsk") == normalize_location_name("Luck"));
  CHECK(normalize_location_name("Brooklyn, New York") ==
        normalize_location_name("Brooklyn New York"));
  CHECK(normalize_location_name("Paris") != normalize_location_name("London"));
}

TEST_CASE("gateway alignment parses ids and coerces out-of-range values") {
  auto transport = std::make_shared<ScriptedTransport>([](const ChatRequest&) {
    return std::string(R"({"ids": [1, 0, 7, -1]})");
  });
  Gateway gateway(transport, {"", 2, 128000});
  const PromptLibrary prompts(TRAJMAP_TEMPLATE_DIR, "holocaust");
  const AlignmentMap result =
      align_locations({"a", "b", "c", "d"}, {"x", "y"}, gateway, prompts, ExtractionOptions{});
  CHECK(result.ids == std::vector<int>{1, 0, -1, -1});
  CHECK(result.notes.size() == 1);
}

TEST_CASE("evaluate_trajectories scores a hand-checked suite") {
  const std::vector<Trajectory> preds = {
      builders::walk("d1", {"A", "B", "C"}),
      builders::walk("d2", {"A", "X", "C"}),
      builders::walk("d3", {}),
  };
  const std::map<std::string, std::vector<std::string>> refs = {
      {"d1", {"A", "B", "C"}},
      {"d2", {"A", "B", "C", "D"}},
      {"d3", {"A", "B", "C", "D"}},
  };
  const EvalReport report = evaluate_trajectories(preds, refs, EvalContext{});
  REQUIRE(report.per_document.size() == 3);

  CHECK(report.per_document[0].edit == 0.0);
  CHECK(report.per_document[0].r_edit == 0.0);

  // d2: X is unmatched -> sentinel; one substitution + one insertion over 4.
  CHECK(report.per_document[1].edit == 0.5);
  CHECK(report.per_document[1].r_edit == 0.5);

  // d3: empty prediction = all insertions.
  CHECK(report.per_document[2].edit == 1.0);
  CHECK(report.per_document[2].r_edit == 1.0);

  CHECK(report.edit.mean == doctest::Approx(0.5));
  CHECK(report.per_document[1].pred_len == 3);
  CHECK(report.per_document[1].ref_len == 4);

  for (const EvalRow& row : report.per_document) {
    CHECK(row.r_edit <= row.edit);
  }
}

TEST_CASE("evaluation canonicalizes repeated gold names to one symbol") {
  // The reference revisits A; a prediction hitting either occurrence
  // matches the same symbol.
  const std::vector<Trajectory> preds = {builders::walk("d", {"A", "B", "A"})};
  const std::map<std::string, std::vector<std::string>> refs = {{"d", {"A", "B", "A"}}};
  const EvalReport report = evaluate_trajectories(preds, refs, EvalContext{});
  CHECK(report.per_document[0].edit == 0.0);
}

TEST_CASE("unmatched predictions never match each other") {
  // With distinct sentinels [X, Y, A] vs [A, B] costs 3 edits; shared
  // sentinels would collapse X and Y into one symbol and cost only 2.
  const std::vector<Trajectory> preds = {builders::walk("d", {"X", "Y", "A"})};
  const std::map<std::string, std::vector<std::string>> refs = {{"d", {"A", "B"}}};
  const EvalReport report = evaluate_trajectories(preds, refs, EvalContext{});
  CHECK(report.per_document[0].edit == 1.5);
  CHECK(report.per_document[0].pred_len == 3);
}

TEST_CASE("missing reference raises") {
  const std::vector<Trajectory> preds = {builders::walk("nope", {"A"})};
  CHECK_THROWS_AS(evaluate_trajectories(preds, {}, EvalContext{}), MissingReference);
}

TEST_CASE("eval report serializes to JSON and CSV") {
  const std::vector<Trajectory> preds = {builders::walk("d1", {"A", "B"})};
  const std::map<std::string, std::vector<std::string>> refs = {{"d1", {"A", "B"}}};
  const EvalReport report = evaluate_trajectories(preds, refs, EvalContext{});

  const nlohmann::json value = report.to_json();
  CHECK(value["per_document"].size() == 1);
  CHECK(value["aggregate"]["edit"]["mean"] == 0.0);

  const std::string csv = report.to_csv();
  CHECK(csv.find("doc_id,edit,r_edit,pred_len,ref_len") == 0);
  CHECK(csv.find("d1,0.0000,0.0000,2,2") != std::string::npos);
  CHECK(csv.find("mean,") != std::string::npos);
  CHECK(csv.find("stddev,") != std::string::npos);
}
