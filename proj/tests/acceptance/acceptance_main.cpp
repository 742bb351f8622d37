// Acceptance suite: runs every gate criterion and prints one pass/fail line
// per criterion. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "builders.hpp"
#include "oracles.hpp"
#include "trajmap/alias.hpp"
#include "trajmap/baselines.hpp"
#include "trajmap/map_builder.hpp"
#include "trajmap/metrics.hpp"
#include "trajmap/refmap.hpp"
#include "trajmap/serialization.hpp"
#include "trajmap/similarity.hpp"
#include "trajmap/types.hpp"

namespace fs = std::filesystem;
using namespace trajmap;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::vector<int> random_sequence(std::mt19937_64& rng, int max_len, int alphabet,
                                 int min_len = 0) {
  const int len = min_len + static_cast<int>(rng() % (max_len - min_len + 1));
  std::vector<int> out(len);
  for (int& symbol : out) {
    symbol = static_cast<int>(rng() % alphabet);
  }
  return out;
}

std::vector<std::vector<int>> all_sequences(int max_len, int alphabet) {
  std::vector<std::vector<int>> out = {{}};
  std::vector<std::vector<int>> frontier = {{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& base : frontier) {
      for (int symbol = 0; symbol < alphabet; ++symbol) {
        auto extended = base;
        extended.push_back(symbol);
        out.push_back(extended);
        next.push_back(std::move(extended));
      }
    }
    frontier = std::move(next);
  }
  return out;
}

// --- C1: DP metrics match exhaustive enumeration -----------------------------

Check criterion1() {
  Check check;
  int cases = 0;

  // Every pair with lengths <= 3 over a 4-symbol alphabet.
  const auto short_sequences = all_sequences(3, 4);
  for (const auto& a : short_sequences) {
    for (const auto& b : short_sequences) {
      check.require(edit_distance(a, b) == oracles::edit_distance(a, b), "edit mismatch");
      check.require(r_edit_cost(a, b) == oracles::r_edit_cost(a, b), "r_edit mismatch");
      ++cases;
    }
  }

  // Random pairs up to length 5.
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 3000; ++trial) {
    const auto a = random_sequence(rng, 5, 4);
    const auto b = random_sequence(rng, 5, 4);
    check.require(edit_distance(a, b) == oracles::edit_distance(a, b), "edit mismatch");
    check.require(r_edit_cost(a, b) == oracles::r_edit_cost(a, b), "r_edit mismatch");
    ++cases;
  }

  // DTW against exhaustive path enumeration over a 4-location map.
  const auto map = builders::graph({{"w", LocationKind::City},
                                    {"x", LocationKind::City},
                                    {"y", LocationKind::Country},
                                    {"z", LocationKind::Ghetto}},
                                   {builders::in("w", "y"), builders::in("x", "y"),
                                    builders::in("z", "x")});
  PointwiseDistanceConfig config;
  config.d_max = 3.0;
  config.type_penalty = 0.5;
  const PointwiseDistance distance(map, config);
  const std::vector<std::string> names = {"w", "x", "y", "z"};
  for (int trial = 0; trial < 2000; ++trial) {
    auto draw = [&]() {
      std::vector<std::string> out;
      const int len = 1 + static_cast<int>(rng() % 5);
      for (int i = 0; i < len; ++i) {
        const std::string& next = names[rng() % names.size()];
        if (out.empty() || out.back() != next) {
          out.push_back(next);
        }
      }
      return out;
    };
    const auto sa = draw();
    const auto sb = draw();
    std::vector<std::vector<double>> costs(sa.size(), std::vector<double>(sb.size()));
    for (std::size_t i = 0; i < sa.size(); ++i) {
      for (std::size_t j = 0; j < sb.size(); ++j) {
        costs[i][j] = distance(sa[i], sb[j]);
      }
    }
    const auto result =
        dtw_distance(builders::walk("a", sa), builders::walk("b", sb), distance);
    check.require(std::abs(result.cost - oracles::dtw(costs)) < 1e-12, "dtw mismatch");
    ++cases;
  }

  std::ostringstream detail;
  detail << cases << " cases";
  if (check.ok) {
    check.detail = detail.str();
  }
  return check;
}

// --- C2: R-Edit identity ------------------------------------------------------

Check criterion2() {
  Check check;
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto pred = random_sequence(rng, 30, 6);
    const auto ref = random_sequence(rng, 30, 6, 1);
    const int via_dp = r_edit_cost(pred, ref);
    const int via_lcs = static_cast<int>(ref.size()) - lcs_length(pred, ref);
    check.require(via_dp == via_lcs, "r_edit != |ref| - LCS");
  }
  if (check.ok) {
    check.detail = "10000 pairs";
  }
  return check;
}

// --- C3: random baseline scores ~1 ---------------------------------------------

Check criterion3() {
  Check check;
  std::set<std::string> vocabulary;
  for (int i = 0; i < 500; ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "node%03d", i);
    vocabulary.insert(name);
  }
  std::vector<std::string> reference;
  for (int i = 0; i < 10; ++i) {
    reference.push_back("ref" + std::to_string(i));  // disjoint from the vocabulary
  }

  std::vector<Trajectory> predictions;
  std::map<std::string, std::vector<std::string>> references;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::string doc_id = "trial" + std::to_string(trial);
    const auto names = random_trajectory_baseline(vocabulary, 10, 9000 + trial);
    Trajectory traj;
    traj.doc_id = doc_id;
    int segment = 1;
    for (const std::string& name : names) {
      traj.visits.push_back({name, {segment, segment}});
      ++segment;
    }
    traj.transports.assign(traj.visits.empty() ? 0 : traj.visits.size() - 1, std::nullopt);
    predictions.push_back(std::move(traj));
    references[doc_id] = reference;
  }

  const EvalReport report = evaluate_trajectories(predictions, references, EvalContext{});
  check.require(report.edit.mean >= 0.95 && report.edit.mean <= 1.0,
                "mean edit " + std::to_string(report.edit.mean));
  check.require(report.r_edit.mean >= 0.95 && report.r_edit.mean <= 1.0,
                "mean r_edit " + std::to_string(report.r_edit.mean));
  if (check.ok) {
    char detail[96];
    std::snprintf(detail, sizeof(detail), "mean edit %.4f, r-edit %.4f", report.edit.mean,
                  report.r_edit.mean);
    check.detail = detail;
  }
  return check;
}

// --- C4: the worked alignment example -------------------------------------------

Check criterion4() {
  Check check;
  const AlignmentMap result = align_locations(
      {"Warsaw (Ghetto)", "Luck", "Warsaw", "New York"}, {"Lutsk", "The Warsaw ghetto"});
  check.require(result.ids == std::vector<int>{1, 0, -1, -1},
                "unexpected alignment ids");
  if (check.ok) {
    check.detail = "[1, 0, -1, -1]";
  }
  return check;
}

// --- C5: map accuracy algebra ----------------------------------------------------

LocationGraph random_city_graph(std::mt19937_64& rng, int nodes, int edge_attempts,
                                bool ensure_edge) {
  LocationGraph g;
  for (int i = 0; i < nodes; ++i) {
    LocationNode node;
    node.canonical_name = "n" + std::to_string(i);
    node.type = LocationType{LocationKind::City, ""};
    g.upsert_node(std::move(node));
  }
  for (int e = 0; e < edge_attempts; ++e) {
    const std::string a = "n" + std::to_string(rng() % nodes);
    const std::string b = "n" + std::to_string(rng() % nodes);
    if (a != b) {
      g.add_edge({a, b, RelationKind::Inclusion});
    }
  }
  if (ensure_edge && g.edges.empty()) {
    g.add_edge({"n0", "n1", RelationKind::Inclusion});
  }
  return g;
}

Check criterion5() {
  Check check;
  std::mt19937_64 rng(505);
  for (int trial = 0; trial < 1000; ++trial) {
    const int nodes = 3 + static_cast<int>(rng() % 6);
    const LocationGraph g = random_city_graph(rng, nodes, nodes, true);
    const MapAccuracy self = map_accuracy(g, g);
    check.require(self.precision == 1.0 && self.recall == 1.0 && self.f1 == 1.0,
                  "self-accuracy != (1,1,1)");

    const LocationGraph h = random_city_graph(rng, nodes, nodes, true);
    const MapAccuracy forward = map_accuracy(g, h);
    const MapAccuracy backward = map_accuracy(h, g);
    check.require(forward.precision == backward.recall && forward.recall == backward.precision,
                  "precision/recall duality broken");
  }

  // Disjoint non-empty edge sets over one node set.
  const auto g = builders::graph(
      {{"a", LocationKind::City}, {"b", LocationKind::City}, {"c", LocationKind::City}},
      {builders::in("a", "b")});
  const auto h = builders::graph(
      {{"a", LocationKind::City}, {"b", LocationKind::City}, {"c", LocationKind::City}},
      {builders::in("b", "c")});
  const MapAccuracy disjoint = map_accuracy(g, h);
  check.require(disjoint.precision == 0.0 && disjoint.recall == 0.0 && disjoint.f1 == 0.0,
                "disjoint sets must score zero");
  if (check.ok) {
    check.detail = "1000 random pairs";
  }
  return check;
}

// --- C6: reference-map properties -------------------------------------------------

Check criterion6() {
  Check check;

  // 20 natural children, 5 cities, single county and country, so every
  // random edge agrees with the reference with probability exactly 1/5.
  std::vector<GisRecord> records = {
      {"Country", LocationKind::Country, 50.0, 0.0},
      {"County", LocationKind::County, 54.0, -3.0},
  };
  for (int i = 0; i < 5; ++i) {
    records.push_back({"city" + std::to_string(i), LocationKind::City, 54.0 + 0.05 * i,
                       -3.0 + 0.07 * i});
  }
  for (int i = 0; i < 20; ++i) {
    records.push_back({"tarn" + std::to_string(i), LocationKind::Natural, 54.0 + 0.013 * i,
                       -3.0 - 0.011 * i});
  }

  const LocationGraph reference = build_reference_map(records);

  std::map<std::string, int> out_degree;
  for (const GraphEdge& edge : reference.edges) {
    check.require(edge.relation == RelationKind::Inclusion, "non-inclusion edge in reference");
    ++out_degree[edge.source];
  }
  for (const auto& [name, node] : reference.nodes) {
    const int expected = node.type.kind == LocationKind::Country ? 0 : 1;
    check.require(out_degree[name] == expected, "not a forest: " + name);
  }

  const MapAccuracy self = map_accuracy(reference, reference);
  check.require(self.f1 == 1.0, "reference self-score must be 1");

  // Analytic expectation: 20 free edges at 1/5 + 6 forced edges, over 26.
  const double analytic = (20.0 * (1.0 / 5.0) + 6.0) / 26.0;
  double sum_f1 = 0.0;
  for (int seed = 0; seed < 200; ++seed) {
    const LocationGraph random_tree = random_tree_baseline(records, seed);
    sum_f1 += map_accuracy(random_tree, reference).f1;
  }
  const double mean_f1 = sum_f1 / 200.0;
  check.require(std::abs(mean_f1 - analytic) <= 0.05,
                "random-tree F1 " + std::to_string(mean_f1) + " vs analytic " +
                    std::to_string(analytic));
  check.require(mean_f1 < self.f1, "reference must beat the random tree");

  if (check.ok) {
    char detail[96];
    std::snprintf(detail, sizeof(detail), "random-tree F1 %.4f ~ %.4f, self F1 = 1", mean_f1,
                  analytic);
    check.detail = detail;
  }
  return check;
}

// --- C7: merge/sparsify property suite ---------------------------------------------

Check criterion7() {
  Check check;
  std::mt19937_64 rng(707);
  const std::vector<LocationKind> kinds = {
      LocationKind::Continent, LocationKind::Country, LocationKind::County,
      LocationKind::Region,    LocationKind::City,    LocationKind::Village,
      LocationKind::Ghetto,    LocationKind::Natural, LocationKind::Facility,
      LocationKind::ConcentrationCamp};

  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 12);
    LocationGraph g;
    for (int i = 0; i < n; ++i) {
      LocationNode node;
      node.canonical_name = "p" + std::to_string(i);
      node.type = LocationType{kinds[rng() % kinds.size()], ""};
      g.upsert_node(std::move(node));
    }
    const int m = static_cast<int>(rng() % (3 * n));
    for (int e = 0; e < m; ++e) {
      const std::string a = "p" + std::to_string(rng() % n);
      const std::string b = "p" + std::to_string(rng() % n);
      if (a != b) {
        g.add_edge({a, b, rng() % 3 == 0 ? RelationKind::Proximity : RelationKind::Inclusion});
      }
    }

    const LocationGraph sparse = sparsify(g);
    check.require(sparsify(sparse) == sparse, "sparsify not idempotent");
    check.require(sparse.nodes.size() == g.nodes.size(), "sparsify dropped nodes");
    for (const GraphEdge& edge : sparse.edges) {
      if (edge.relation != RelationKind::Inclusion) {
        continue;
      }
      const LocationKind a = sparse.nodes.at(edge.source).type.kind;
      const LocationKind b = sparse.nodes.at(edge.target).type.kind;
      check.require(a != b, "same-kind inclusion edge survived");
      check.require(rank_of(a) >= rank_of(b), "hierarchy-violating edge survived");
    }

    // Alias transitive closure: random groups, then compare against a naive
    // fixpoint closure of overlapping groups.
    const int pool = 8;
    std::vector<std::vector<std::string>> groups;
    const int group_count = 1 + static_cast<int>(rng() % 4);
    for (int k = 0; k < group_count; ++k) {
      std::vector<std::string> group;
      const int size = 2 + static_cast<int>(rng() % 3);
      for (int j = 0; j < size; ++j) {
        group.push_back("name" + std::to_string(rng() % pool));
      }
      groups.push_back(group);
    }
    const AliasDictionary dict = AliasDictionary::from_groups(groups, {}, {});

    std::vector<std::set<std::string>> closed;
    for (const auto& group : groups) {
      closed.emplace_back(group.begin(), group.end());
    }
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < closed.size() && !changed; ++i) {
        for (std::size_t j = i + 1; j < closed.size() && !changed; ++j) {
          for (const std::string& name : closed[j]) {
            if (closed[i].count(name) > 0) {
              closed[i].insert(closed[j].begin(), closed[j].end());
              closed.erase(closed.begin() + static_cast<long>(j));
              changed = true;
              break;
            }
          }
        }
      }
    }
    std::set<std::set<std::string>> expected;
    for (const auto& component : closed) {
      if (component.size() >= 2) {
        expected.insert(component);
      }
    }
    std::set<std::set<std::string>> actual;
    for (const auto& group : dict.groups) {
      actual.insert(std::set<std::string>(group.begin(), group.end()));
    }
    check.require(actual == expected, "alias closure mismatch");
    for (const auto& group : dict.groups) {
      const std::string& representative = dict.canonical_of(group.front());
      for (const std::string& member : group) {
        check.require(dict.canonical_of(member) == representative,
                      "group members disagree on the representative");
      }
    }
  }

  // normalize_map_for_eval idempotence over labeled random maps.
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 8);
    LocationGraph g;
    std::vector<GisRecord> gis;
    for (int i = 0; i < n; ++i) {
      const std::string name = "q" + std::to_string(i);
      const LocationKind kind = i == 0 ? LocationKind::City : kinds[rng() % kinds.size()];
      LocationNode node;
      node.canonical_name = name;
      node.type = LocationType{kind, ""};
      g.upsert_node(std::move(node));
      if (rng() % 4 != 0) {  // some nodes stay unlabeled
        const LocationKind level =
            kind == LocationKind::City || kind == LocationKind::Village ? LocationKind::City
                                                                        : LocationKind::Natural;
        gis.push_back({name, level, 50.0 + 0.01 * i, -3.0 + 0.01 * i});
      }
    }
    for (int e = 0; e < n; ++e) {
      const std::string a = "q" + std::to_string(rng() % n);
      const std::string b = "q" + std::to_string(rng() % n);
      if (a != b) {
        g.add_edge({a, b, RelationKind::Inclusion});
      }
    }
    const LocationGraph normalized = normalize_map_for_eval(g, gis);
    check.require(normalize_map_for_eval(normalized, gis) == normalized,
                  "normalize_map_for_eval not idempotent");
  }

  if (check.ok) {
    check.detail = "500 graphs + 100 normalizations";
  }
  return check;
}

// --- C8: end-to-end pipeline determinism ---------------------------------------------

int run_cli(const std::string& arguments) {
  const std::string command = std::string(TRAJMAP_CLI_PATH) + " " + arguments + " >/dev/null 2>&1";
  return std::system(command.c_str());
}

Check criterion8() {
  Check check;
  const fs::path data_dir = TRAJMAP_TEST_DATA_DIR;
  const fs::path golden_dir = data_dir / "golden" / "pipeline";
  const fs::path out_a = fs::temp_directory_path() / "trajmap_accept_a";
  const fs::path out_b = fs::temp_directory_path() / "trajmap_accept_b";
  fs::remove_all(out_a);
  fs::remove_all(out_b);

  const std::string common =
      "pipeline --corpus " + (data_dir / "fixtures" / "corpus").string() +
      " --refs " + (data_dir / "fixtures" / "refs.json").string() +
      " --overrides " + (data_dir / "fixtures" / "overrides.json").string() +
      " --replay " + (data_dir / "fixtures" / "replay").string() + " --min-docs 2";

  check.require(run_cli(common + " --out " + out_a.string()) == 0, "first pipeline run failed");
  check.require(run_cli(common + " --out " + out_b.string()) == 0, "second pipeline run failed");
  if (!check.ok) {
    return check;
  }

  const std::vector<std::string> artifacts = {
      "map.json",
      "aliases.json",
      "mapped/t001.traj.json",
      "mapped/t002.traj.json",
      "mapped/t003.traj.json",
      "mapped/t004.traj.json",
      "mapped/t005.traj.json",
      "eval/report.json",
      "eval/report.csv",
      "transitions.csv",
      "similarity.csv",
      "map.dot",
  };
  for (const std::string& artifact : artifacts) {
    const fs::path golden = golden_dir / artifact;
    if (!fs::exists(golden)) {
      check.require(false, "missing golden " + artifact);
      break;
    }
    const std::string expected = read_file(golden);
    const std::string got_a = read_file(out_a / artifact);
    const std::string got_b = read_file(out_b / artifact);
    check.require(got_a == expected, artifact + " differs from golden");
    check.require(got_a == got_b, artifact + " differs between runs");
  }

  fs::remove_all(out_a);
  fs::remove_all(out_b);
  if (check.ok) {
    check.detail = std::to_string(artifacts.size()) + " artifacts byte-identical";
  }
  return check;
}

// --- C9: weighted edit reduces to unit edit distance -----------------------------------

Check criterion9() {
  Check check;
  const auto map = builders::graph({{"a", LocationKind::City},
                                    {"b", LocationKind::City},
                                    {"c", LocationKind::Country},
                                    {"d", LocationKind::Ghetto},
                                    {"e", LocationKind::Natural}},
                                   {builders::in("a", "c"), builders::in("b", "c"),
                                    builders::in("d", "a"), builders::in("e", "b")});
  PointwiseDistanceConfig config;
  config.unit_substitution = true;
  const PointwiseDistance distance(map, config);
  const std::vector<std::string> names = {"a", "b", "c", "d", "e"};

  std::mt19937_64 rng(909);
  for (int trial = 0; trial < 1000; ++trial) {
    auto draw = [&]() {
      std::vector<std::string> out;
      const int len = static_cast<int>(rng() % 8);
      for (int i = 0; i < len; ++i) {
        const std::string& next = names[rng() % names.size()];
        if (out.empty() || out.back() != next) {
          out.push_back(next);
        }
      }
      return out;
    };
    const auto sa = draw();
    const auto sb = draw();
    const auto weighted =
        weighted_edit_distance(builders::walk("a", sa), builders::walk("b", sb), distance);
    const int unit = edit_distance(sa, sb);
    check.require(weighted.cost == static_cast<double>(unit), "weighted != unit edit");
  }
  if (check.ok) {
    check.detail = "1000 pairs";
  }
  return check;
}

// --- C10: transition mining on a hand-built corpus ---------------------------------------

Check criterion10() {
  Check check;
  const auto map = builders::graph({{"A", LocationKind::City},
                                    {"B", LocationKind::City},
                                    {"G", LocationKind::Ghetto},
                                    {"C", LocationKind::ConcentrationCamp}},
                                   {});
  // Six documents; (G -> C) appears in five of them (twice inside d1, which
  // must count once), (A -> G) in four, everything else in fewer.
  const std::vector<Trajectory> corpus = {
      builders::walk("d1", {"A", "G", "C", "G", "C"}),
      builders::walk("d2", {"A", "G", "C"}),
      builders::walk("d3", {"A", "G", "C", "B"}),
      builders::walk("d4", {"G", "C", "A"}),
      builders::walk("d5", {"G", "C", "B"}),
      builders::walk("d6", {"A", "G", "B"}),
  };
  const std::set<LocationKind> filter = {LocationKind::Ghetto, LocationKind::ArmyCamp,
                                         LocationKind::ConcentrationCamp,
                                         LocationKind::DeathCamp};
  const auto rows = transition_counts(corpus, map, filter, 4);
  const std::vector<TransitionCount> expected = {
      {"G", "C", 5},
      {"A", "G", 4},
  };
  check.require(rows == expected, "transition table mismatch");
  if (check.ok) {
    check.detail = "hand table reproduced";
  }
  return check;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Check()> run;
    long long budget_ms;  // 0 = no stated limit
  };
  const std::vector<Criterion> criteria = {
      {"C1 metric oracle equivalence (edit, r-edit, dtw)", criterion1, 60000},
      {"C2 r-edit equals (|ref| - LCS) / |ref|", criterion2, 30000},
      {"C3 random baseline scores ~1.0", criterion3, 0},
      {"C4 deterministic alignment worked example", criterion4, 0},
      {"C5 map-accuracy algebra", criterion5, 0},
      {"C6 reference map forest + random tree expectation", criterion6, 0},
      {"C7 merge/sparsify/normalize property suite", criterion7, 60000},
      {"C8 pipeline byte-for-byte determinism", criterion8, 10000},
      {"C9 weighted edit reduces to unit edit distance", criterion9, 0},
      {"C10 transition mining hand table", criterion10, 0},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check check;
    try {
      check = criterion.run();
    } catch (const std::exception& error) {
      check.ok = false;
      check.detail = std::string("exception: ") + error.what();
    }
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    if (check.ok && criterion.budget_ms > 0 && elapsed > criterion.budget_ms) {
      check.ok = false;
      check.detail = "over time budget of " + std::to_string(criterion.budget_ms) + " ms";
    }
    std::printf("[%s] %s (%s, %lld ms)\n", check.ok ? "PASS" : "FAIL", criterion.name,
                check.detail.c_str(), static_cast<long long>(elapsed));
    if (!check.ok) {
      ++failures;
    }
  }
  return failures;
}
