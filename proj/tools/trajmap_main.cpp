// trajmap: builds location maps from narrative corpora, extracts per-document
// trajectories, positions them on the merged map, and scores maps and
// trajectories against references.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trajmap/alias.hpp"
#include "trajmap/baselines.hpp"
#include "trajmap/errors.hpp"
#include "trajmap/extraction.hpp"
#include "trajmap/gateway.hpp"
#include "trajmap/map_builder.hpp"
#include "trajmap/metrics.hpp"
#include "trajmap/prompts.hpp"
#include "trajmap/refmap.hpp"
#include "trajmap/serialization.hpp"
#include "trajmap/similarity.hpp"
#include "trajmap/validate.hpp"
#include "trajmap/visualize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace trajmap;

namespace {

// Exit-code contract: 0 success (possibly partial), 1 input error,
// 2 total failure, 3 configuration error.
constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kTotalFailure = 2;
constexpr int kConfigError = 3;

struct Settings {
  std::string endpoint;
  std::string endpoint_api_path = "/v1/chat/completions";
  std::string model = "gpt-4o-mini";
  std::string token_env = "TRAJMAP_API_TOKEN";
  std::string replay_dir;
  std::string cache_dir;
  std::string templates_dir;
  std::string profile = "holocaust";
  int concurrency = 4;
  double temperature = 0.0;
  int max_tokens = 4096;
  long context_limit = 128000;
  std::uint64_t seed = 17;
  double d_max = 0.0;
  double lambda = 0.5;
  double graph_cap = 0.0;
  int degree_filter = 0;
};

ExtractionOptions extraction_options(const Settings& settings) {
  ExtractionOptions options;
  options.model_id = settings.model;
  options.temperature = settings.temperature;
  options.max_output_tokens = settings.max_tokens;
  options.concurrency = settings.concurrency;
  return options;
}

std::unique_ptr<Gateway> make_gateway(const Settings& settings) {
  std::shared_ptr<Transport> transport;
  if (!settings.replay_dir.empty()) {
    if (!fs::is_directory(settings.replay_dir)) {
      throw ConfigError("replay directory " + settings.replay_dir + " does not exist");
    }
    transport = std::make_shared<ReplayTransport>(settings.replay_dir);
  } else if (!settings.endpoint.empty()) {
    HttpTransport::Options http;
    http.base_url = settings.endpoint;
    http.path = settings.endpoint_api_path;
    if (const char* token = std::getenv(settings.token_env.c_str())) {
      http.bearer_token = token;
    }
    transport = std::make_shared<HttpTransport>(std::move(http));
  } else {
    throw ConfigError("no transport configured: set --replay or --endpoint");
  }
  Gateway::Options options;
  options.cache_dir = settings.cache_dir;
  options.concurrency = settings.concurrency;
  options.context_token_limit = settings.context_limit;
  return std::make_unique<Gateway>(std::move(transport), options);
}

PromptLibrary load_prompts(const Settings& settings) {
  const fs::path root = settings.templates_dir.empty() ? PromptLibrary::default_root()
                                                       : fs::path(settings.templates_dir);
  return PromptLibrary(root, settings.profile);
}

std::vector<Document> load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw IoError("corpus directory " + dir.string() + " does not exist");
  }
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) {
      continue;
    }
    const std::string ext = entry.path().extension().string();
    if (ext == ".txt" || ext == ".json") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<Document> docs;
  for (const fs::path& path : paths) {
    if (path.extension() == ".txt") {
      docs.push_back(document_from_text(path.stem().string(), read_file(path)));
    } else {
      docs.push_back(document_from_json(load_json_file(path)));
    }
  }
  return docs;
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& suffix) {
  if (!fs::is_directory(dir)) {
    throw IoError("directory " + dir.string() + " does not exist");
  }
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename().string().ends_with(suffix)) {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

std::vector<LocationGraph> load_graphs(const fs::path& dir) {
  std::vector<LocationGraph> graphs;
  for (const fs::path& path : sorted_files(dir, ".graph.json")) {
    graphs.push_back(graph_from_json(load_json_file(path)));
  }
  return graphs;
}

std::vector<Trajectory> load_trajectories(const fs::path& dir) {
  std::vector<Trajectory> out;
  for (const fs::path& path : sorted_files(dir, ".traj.json")) {
    Trajectory traj = trajectory_from_json(load_json_file(path));
    if (traj.doc_id.empty()) {
      std::string stem = path.filename().string();
      stem.erase(stem.size() - std::string(".traj.json").size());
      traj.doc_id = stem;
    }
    out.push_back(std::move(traj));
  }
  return out;
}

std::optional<std::set<LocationKind>> parse_kind_filter(const std::string& csv) {
  if (csv.empty()) {
    return std::nullopt;
  }
  std::set<LocationKind> kinds;
  std::istringstream stream(csv);
  std::string token;
  while (std::getline(stream, token, ',')) {
    if (token.find_first_not_of(" \t") == std::string::npos) {
      continue;
    }
    const auto kind = parse_kind(token);
    if (!kind.has_value()) {
      throw ConfigError("unknown location type '" + token + "' in kind filter");
    }
    kinds.insert(*kind);
  }
  if (kinds.empty()) {
    return std::nullopt;
  }
  return kinds;
}

std::string transitions_to_csv(const std::vector<TransitionCount>& rows) {
  std::ostringstream out;
  out << "from,to,count\n";
  for (const TransitionCount& row : rows) {
    out << row.from << "," << row.to << "," << row.document_count << "\n";
  }
  return out.str();
}

/// Similarity needs every location on the map; visits flagged as unmapped
/// are dropped here (the mapped trajectory files keep them).
std::vector<Trajectory> restrict_to_map(const std::vector<Trajectory>& trajectories,
                                        const LocationGraph& map, int* dropped) {
  std::vector<Trajectory> out;
  for (const Trajectory& traj : trajectories) {
    Trajectory kept;
    kept.doc_id = traj.doc_id;
    for (const Visit& visit : traj.visits) {
      if (map.has_node(visit.location)) {
        kept.visits.push_back(visit);
      } else if (dropped != nullptr) {
        ++*dropped;
      }
    }
    kept.transports.assign(kept.visits.empty() ? 0 : kept.visits.size() - 1, std::nullopt);
    out.push_back(collapse_adjacent_visits(kept));
  }
  return out;
}

std::string matrix_to_csv(const std::vector<std::vector<double>>& matrix,
                          const std::vector<std::string>& ids) {
  std::ostringstream out;
  out << "doc_id";
  for (const std::string& id : ids) {
    out << "," << id;
  }
  out << "\n";
  char cell[32];
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    out << ids[i];
    for (std::size_t j = 0; j < matrix[i].size(); ++j) {
      std::snprintf(cell, sizeof(cell), ",%.4f", matrix[i][j]);
      out << cell;
    }
    out << "\n";
  }
  return out.str();
}

// --- stages shared by individual commands and `pipeline` ------------------------

struct ExtractStageResult {
  int ok = 0;
  int failed = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
};

ExtractStageResult run_extract_stage(const std::vector<Document>& docs, Gateway& gateway,
                                     const PromptLibrary& prompts,
                                     const ExtractionOptions& options, const fs::path& out_dir) {
  const CorpusResult corpus = extract_corpus(docs, gateway, prompts, options);

  ExtractStageResult summary;
  for (const DocumentResult& result : corpus.documents) {
    atomic_write_file(out_dir / "graphs" / (result.doc_id + ".graph.json"),
                      dump_json(graph_to_json(result.graph)));
    atomic_write_file(out_dir / "trajectories" / (result.doc_id + ".traj.json"),
                      dump_json(trajectory_to_json(result.trajectory)));
    atomic_write_file(out_dir / "diagnostics" / (result.doc_id + ".diag.json"),
                      dump_json(result.diagnostics.to_json()));
    summary.nodes += result.graph.nodes.size();
    summary.edges += result.graph.edges.size();
  }
  summary.ok = static_cast<int>(corpus.documents.size());
  summary.failed = static_cast<int>(corpus.failures.size());
  if (!corpus.failures.empty()) {
    json failures = json::array();
    for (const FailureEntry& failure : corpus.failures) {
      failures.push_back(
          {{"doc_id", failure.doc_id}, {"stage", failure.stage}, {"error", failure.error}});
    }
    atomic_write_file(out_dir / "failures.json", dump_json(failures));
  }
  return summary;
}

struct MergeStageResult {
  LocationGraph map;
  AliasDictionary dict;
};

MergeStageResult run_merge_stage(const std::vector<LocationGraph>& graphs,
                                 const std::vector<std::vector<std::string>>& overrides,
                                 Gateway& gateway, const PromptLibrary& prompts,
                                 const ExtractionOptions& options, const fs::path& map_path,
                                 const fs::path& aliases_path, bool prune_proximity) {
  // Occurrence counts drive canonical-name selection: one count per graph
  // containing the surface form.
  std::map<std::string, int> counts;
  for (const LocationGraph& graph : graphs) {
    for (const auto& [name, node] : graph.nodes) {
      ++counts[name];
    }
  }
  std::vector<std::string> names;
  names.reserve(counts.size());
  for (const auto& [name, count] : counts) {
    names.push_back(name);
  }

  MergeStageResult out;
  std::vector<std::string> notes;
  out.dict = build_alias_dictionary(names, counts, overrides, gateway, prompts, options, &notes);
  out.map = sparsify(merge_graphs(graphs, out.dict, &notes), prune_proximity);
  atomic_write_file(map_path, dump_json(graph_to_json(out.map)));
  atomic_write_file(aliases_path, dump_json(out.dict.to_json()));
  return out;
}

int run_trajectories_stage(const std::vector<Trajectory>& trajectories, const LocationGraph& map,
                           const AliasDictionary& dict, const fs::path& out_dir) {
  std::vector<std::string> notes;
  for (const Trajectory& traj : trajectories) {
    const Trajectory mapped = trajectory_to_map(traj, map, dict, &notes);
    atomic_write_file(out_dir / (mapped.doc_id + ".traj.json"),
                      dump_json(trajectory_to_json(mapped)));
  }
  atomic_write_file(out_dir / "mapping_notes.json", dump_json(json(notes)));
  return static_cast<int>(trajectories.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"narrative location mapping and trajectory analysis"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML-like key/value configuration file");

  Settings settings;
  app.add_option("--endpoint", settings.endpoint, "chat-completions base URL");
  app.add_option("--endpoint-api-path", settings.endpoint_api_path, "endpoint request path");
  app.add_option("--model", settings.model, "model identifier");
  app.add_option("--token-env", settings.token_env, "environment variable holding the API token");
  app.add_option("--replay", settings.replay_dir, "replay directory of recorded responses");
  app.add_option("--cache", settings.cache_dir, "response cache directory");
  app.add_option("--templates", settings.templates_dir, "prompt template directory");
  app.add_option("--profile", settings.profile, "domain profile (holocaust, lake_district)");
  app.add_option("--concurrency", settings.concurrency, "in-flight request limit");
  app.add_option("--temperature", settings.temperature, "sampling temperature");
  app.add_option("--max-tokens", settings.max_tokens, "response token limit");
  app.add_option("--context-limit", settings.context_limit, "hard input token limit");
  app.add_option("--seed", settings.seed, "seed for randomized baselines");
  app.add_option("--d-max", settings.d_max, "graph distance normalizer (0 = auto diameter)");
  app.add_option("--lambda", settings.lambda, "type mismatch penalty");
  app.add_option("--graph-cap", settings.graph_cap, "distance for disconnected pairs (0 = d-max)");
  app.add_option("--degree-filter", settings.degree_filter, "drop nodes below this degree");

  // extract
  auto* cmd_extract = app.add_subcommand("extract", "per-document graphs and trajectories");
  std::string corpus_dir;
  std::string extract_out;
  cmd_extract->add_option("--corpus", corpus_dir, "corpus directory")->required();
  cmd_extract->add_option("--out", extract_out, "output directory")->required();

  // merge
  auto* cmd_merge = app.add_subcommand("merge", "alias dictionary, graph union, sparsification");
  std::string merge_extract_dir;
  std::string merge_out_map = "map.json";
  std::string merge_aliases = "aliases.json";
  std::string merge_overrides;
  bool merge_prune_proximity = false;
  cmd_merge->add_option("--extract-dir", merge_extract_dir, "extract output directory")->required();
  cmd_merge->add_option("--out-map", merge_out_map, "merged map file");
  cmd_merge->add_option("--aliases-out", merge_aliases, "alias dictionary file");
  cmd_merge->add_option("--overrides", merge_overrides, "manual alias overrides (JSON list of lists)");
  cmd_merge->add_flag("--prune-same-kind-proximity", merge_prune_proximity,
                      "also drop proximity edges between same-kind nodes");

  // trajectories
  auto* cmd_traj = app.add_subcommand("trajectories", "map per-document trajectories onto the merged map");
  std::string traj_extract_dir;
  std::string traj_map_file;
  std::string traj_aliases_file;
  std::string traj_out_dir;
  cmd_traj->add_option("--extract-dir", traj_extract_dir, "extract output directory")->required();
  cmd_traj->add_option("--map", traj_map_file, "merged map file")->required();
  cmd_traj->add_option("--aliases", traj_aliases_file, "alias dictionary file")->required();
  cmd_traj->add_option("--out", traj_out_dir, "output directory")->required();

  // evaluate
  auto* cmd_eval = app.add_subcommand("evaluate", "Edit / R-Edit against reference trajectories");
  std::string eval_pred_dir;
  std::string eval_refs;
  std::string eval_mode = "deterministic";
  std::string eval_out_json;
  std::string eval_out_csv;
  std::string eval_map_file;
  std::string eval_reference_map;
  std::string eval_gis;
  cmd_eval->add_option("--pred-dir", eval_pred_dir, "directory of mapped trajectories")->required();
  cmd_eval->add_option("--refs", eval_refs, "reference sequences JSON")->required();
  cmd_eval->add_option("--mode", eval_mode, "alignment mode: deterministic | llm");
  cmd_eval->add_option("--out-json", eval_out_json, "report JSON path");
  cmd_eval->add_option("--out-csv", eval_out_csv, "report CSV path");
  cmd_eval->add_option("--map", eval_map_file, "model map for additional map accuracy");
  cmd_eval->add_option("--reference-map", eval_reference_map, "reference map for map accuracy");
  cmd_eval->add_option("--gis", eval_gis, "GIS CSV used to normalize maps before scoring");

  // evaluate-map
  auto* cmd_eval_map = app.add_subcommand("evaluate-map", "edge precision/recall/F1 of a map");
  std::string em_map;
  std::string em_reference;
  std::string em_gis;
  std::string em_out;
  cmd_eval_map->add_option("--map", em_map, "model map")->required();
  cmd_eval_map->add_option("--reference-map", em_reference, "reference map")->required();
  cmd_eval_map->add_option("--gis", em_gis, "GIS CSV; normalizes both maps before scoring");
  cmd_eval_map->add_option("--out", em_out, "write scores as JSON");

  // refmap
  auto* cmd_refmap = app.add_subcommand("refmap", "GIS proximity hierarchy");
  std::string refmap_gis;
  std::string refmap_out;
  cmd_refmap->add_option("--gis", refmap_gis, "GIS CSV (name,level,lat,lon)")->required();
  cmd_refmap->add_option("--out", refmap_out, "reference map file")->required();

  // baseline
  auto* cmd_baseline = app.add_subcommand("baseline", "trajectory and map baselines");
  std::string baseline_kind;
  std::string baseline_map;
  std::string baseline_refs;
  std::string baseline_corpus;
  std::string baseline_gazetteer;
  std::string baseline_gis;
  std::string baseline_out;
  cmd_baseline->add_option("--kind", baseline_kind, "random | frequent | ner | random-tree")
      ->required();
  cmd_baseline->add_option("--map", baseline_map, "map file (random kind)");
  cmd_baseline->add_option("--refs", baseline_refs, "reference sequences (random, frequent)");
  cmd_baseline->add_option("--corpus", baseline_corpus, "corpus directory (ner kind)");
  cmd_baseline->add_option("--gazetteer", baseline_gazetteer, "gazetteer TSV (ner kind)");
  cmd_baseline->add_option("--gis", baseline_gis, "GIS CSV (random-tree kind)");
  cmd_baseline->add_option("--out", baseline_out, "output file")->required();

  // similarity
  auto* cmd_sim = app.add_subcommand("similarity", "pairwise trajectory distance matrix");
  std::string sim_map;
  std::string sim_traj_dir;
  std::string sim_measure = "weighted-edit";
  std::string sim_out;
  int sim_top_k = 5;
  cmd_sim->add_option("--map", sim_map, "merged map file")->required();
  cmd_sim->add_option("--traj-dir", sim_traj_dir, "directory of mapped trajectories")->required();
  cmd_sim->add_option("--measure", sim_measure, "weighted-edit | dtw");
  cmd_sim->add_option("--out", sim_out, "matrix CSV path")->required();
  cmd_sim->add_option("--top-k", sim_top_k, "closest pairs to print");

  // transitions
  auto* cmd_trans = app.add_subcommand("transitions", "common adjacent location pairs");
  std::string trans_traj_dir;
  std::string trans_map;
  std::string trans_out;
  std::string trans_kinds = "Ghetto,Army Camp,Concentration Camp,Death Camp";
  int trans_min_docs = 4;
  cmd_trans->add_option("--traj-dir", trans_traj_dir, "directory of mapped trajectories")->required();
  cmd_trans->add_option("--map", trans_map, "merged map file")->required();
  cmd_trans->add_option("--out", trans_out, "transitions CSV path")->required();
  cmd_trans->add_option("--kinds", trans_kinds, "type filter (comma separated, empty = none)");
  cmd_trans->add_option("--min-docs", trans_min_docs, "minimum distinct documents");

  // visualize
  auto* cmd_viz = app.add_subcommand("visualize", "styled DOT / GraphML / JSON export");
  std::string viz_map;
  std::string viz_traj;
  std::string viz_format = "dot";
  std::string viz_out;
  cmd_viz->add_option("--map", viz_map, "map file")->required();
  cmd_viz->add_option("--trajectory", viz_traj, "trajectory file to overlay");
  cmd_viz->add_option("--format", viz_format, "dot | graphml | json");
  cmd_viz->add_option("--out", viz_out, "output file")->required();

  // pipeline
  auto* cmd_pipe = app.add_subcommand("pipeline", "extract, merge, map, evaluate, analyze");
  std::string pipe_corpus;
  std::string pipe_out;
  std::string pipe_refs;
  std::string pipe_overrides;
  std::string pipe_kinds = "Ghetto,Army Camp,Concentration Camp,Death Camp";
  int pipe_min_docs = 4;
  bool pipe_prune_proximity = false;
  cmd_pipe->add_option("--corpus", pipe_corpus, "corpus directory")->required();
  cmd_pipe->add_option("--out", pipe_out, "output directory")->required();
  cmd_pipe->add_option("--refs", pipe_refs, "reference sequences JSON (enables evaluation)");
  cmd_pipe->add_option("--overrides", pipe_overrides, "manual alias overrides");
  cmd_pipe->add_option("--kinds", pipe_kinds, "transition type filter");
  cmd_pipe->add_option("--min-docs", pipe_min_docs, "transition document threshold");
  cmd_pipe->add_flag("--prune-same-kind-proximity", pipe_prune_proximity,
                     "also drop proximity edges between same-kind nodes");

  // Shared options may appear after the subcommand name.
  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_extract) {
      const std::vector<Document> docs = load_corpus(corpus_dir);
      auto gateway = make_gateway(settings);
      const PromptLibrary prompts = load_prompts(settings);
      const ExtractStageResult summary = run_extract_stage(
          docs, *gateway, prompts, extraction_options(settings), extract_out);
      std::cout << summary.ok << " ok, " << summary.failed << " failed; " << summary.nodes
                << " nodes, " << summary.edges << " edges\n";
      if (summary.ok == 0 && summary.failed > 0) {
        return kTotalFailure;
      }
      return kOk;
    }

    if (*cmd_merge) {
      const std::vector<LocationGraph> graphs = load_graphs(fs::path(merge_extract_dir) / "graphs");
      std::vector<std::vector<std::string>> overrides;
      if (!merge_overrides.empty()) {
        overrides = overrides_from_json(load_json_file(merge_overrides));
      }
      auto gateway = make_gateway(settings);
      const PromptLibrary prompts = load_prompts(settings);
      const MergeStageResult merged =
          run_merge_stage(graphs, overrides, *gateway, prompts, extraction_options(settings),
                          merge_out_map, merge_aliases, merge_prune_proximity);
      std::cout << "map: " << merged.map.nodes.size() << " nodes, " << merged.map.edges.size()
                << " edges; " << merged.dict.groups.size() << " alias groups\n";
      return kOk;
    }

    if (*cmd_traj) {
      const std::vector<Trajectory> trajectories =
          load_trajectories(fs::path(traj_extract_dir) / "trajectories");
      const LocationGraph map = graph_from_json(load_json_file(traj_map_file));
      const AliasDictionary dict = AliasDictionary::from_json(load_json_file(traj_aliases_file));
      const int mapped = run_trajectories_stage(trajectories, map, dict, traj_out_dir);
      std::cout << mapped << " trajectories mapped\n";
      return kOk;
    }

    if (*cmd_eval) {
      const std::vector<Trajectory> preds = load_trajectories(eval_pred_dir);
      const auto refs = references_from_json(load_json_file(eval_refs));
      EvalContext context;
      std::unique_ptr<Gateway> gateway;
      PromptLibrary* prompts_ptr = nullptr;
      std::optional<PromptLibrary> prompts;
      if (eval_mode == "llm" || eval_mode == "gateway") {
        context.mode = AlignmentMode::Gateway;
        gateway = make_gateway(settings);
        prompts.emplace(load_prompts(settings));
        prompts_ptr = &*prompts;
        context.gateway = gateway.get();
        context.prompts = prompts_ptr;
        context.options = extraction_options(settings);
      } else if (eval_mode != "deterministic" && eval_mode != "det") {
        throw ConfigError("unknown evaluation mode '" + eval_mode + "'");
      }
      const EvalReport report = evaluate_trajectories(preds, refs, context);
      if (!eval_out_json.empty()) {
        atomic_write_file(eval_out_json, dump_json(report.to_json()));
      }
      if (!eval_out_csv.empty()) {
        atomic_write_file(eval_out_csv, report.to_csv());
      }
      std::printf("edit %.4f ± %.4f, r-edit %.4f ± %.4f over %zu documents\n", report.edit.mean,
                  report.edit.stddev, report.r_edit.mean, report.r_edit.stddev,
                  report.per_document.size());
      if (!eval_map_file.empty() && !eval_reference_map.empty()) {
        LocationGraph model = graph_from_json(load_json_file(eval_map_file));
        LocationGraph reference = graph_from_json(load_json_file(eval_reference_map));
        if (!eval_gis.empty()) {
          const auto gis = gis_from_csv(read_file(eval_gis));
          model = normalize_map_for_eval(model, gis);
          reference = normalize_map_for_eval(reference, gis);
        }
        const MapAccuracy accuracy = map_accuracy(model, reference);
        std::printf("map precision %.4f recall %.4f f1 %.4f%s\n", accuracy.precision,
                    accuracy.recall, accuracy.f1,
                    accuracy.zero_denominator ? " (zero denominator)" : "");
      }
      return kOk;
    }

    if (*cmd_eval_map) {
      LocationGraph model = graph_from_json(load_json_file(em_map));
      LocationGraph reference = graph_from_json(load_json_file(em_reference));
      if (!em_gis.empty()) {
        const auto gis = gis_from_csv(read_file(em_gis));
        model = normalize_map_for_eval(model, gis);
        reference = normalize_map_for_eval(reference, gis);
      }
      const MapAccuracy accuracy = map_accuracy(model, reference);
      std::printf("precision %.4f recall %.4f f1 %.4f%s\n", accuracy.precision, accuracy.recall,
                  accuracy.f1, accuracy.zero_denominator ? " (zero denominator)" : "");
      if (!em_out.empty()) {
        atomic_write_file(em_out, dump_json(json{{"precision", accuracy.precision},
                                                 {"recall", accuracy.recall},
                                                 {"f1", accuracy.f1},
                                                 {"zero_denominator", accuracy.zero_denominator}}));
      }
      return kOk;
    }

    if (*cmd_refmap) {
      const auto records = gis_from_csv(read_file(refmap_gis));
      const LocationGraph reference = build_reference_map(records);
      atomic_write_file(refmap_out, dump_json(graph_to_json(reference)));
      std::cout << "reference map: " << reference.nodes.size() << " nodes, "
                << reference.edges.size() << " edges\n";
      return kOk;
    }

    if (*cmd_baseline) {
      if (baseline_kind == "random") {
        if (baseline_map.empty() || baseline_refs.empty()) {
          throw ConfigError("random baseline needs --map and --refs");
        }
        const LocationGraph map = graph_from_json(load_json_file(baseline_map));
        std::set<std::string> names;
        for (const auto& [name, node] : map.nodes) {
          names.insert(name);
        }
        const auto refs = references_from_json(load_json_file(baseline_refs));
        std::map<std::string, std::vector<std::string>> out;
        std::uint64_t seed = settings.seed;
        for (const auto& [doc_id, ref] : refs) {
          out[doc_id] =
              random_trajectory_baseline(names, static_cast<int>(ref.size()), seed++);
        }
        atomic_write_file(baseline_out, dump_json(references_to_json(out)));
      } else if (baseline_kind == "frequent") {
        if (baseline_refs.empty()) {
          throw ConfigError("frequent baseline needs --refs");
        }
        const auto refs = references_from_json(load_json_file(baseline_refs));
        std::map<std::string, std::vector<std::string>> out;
        for (const auto& [doc_id, ref] : refs) {
          out[doc_id] = frequent_location_baseline(ref);
        }
        atomic_write_file(baseline_out, dump_json(references_to_json(out)));
      } else if (baseline_kind == "ner") {
        if (baseline_corpus.empty() || baseline_gazetteer.empty()) {
          throw ConfigError("ner baseline needs --corpus and --gazetteer");
        }
        GazetteerTagger tagger(baseline_gazetteer);
        std::map<std::string, std::vector<std::string>> out;
        for (const Document& doc : load_corpus(baseline_corpus)) {
          out[doc.doc_id] = ner_sequence_baseline(doc, tagger);
        }
        atomic_write_file(baseline_out, dump_json(references_to_json(out)));
      } else if (baseline_kind == "random-tree") {
        if (baseline_gis.empty()) {
          throw ConfigError("random-tree baseline needs --gis");
        }
        const auto records = gis_from_csv(read_file(baseline_gis));
        const LocationGraph tree = random_tree_baseline(records, settings.seed);
        atomic_write_file(baseline_out, dump_json(graph_to_json(tree)));
      } else {
        throw ConfigError("unknown baseline kind '" + baseline_kind + "'");
      }
      std::cout << "baseline '" << baseline_kind << "' written to " << baseline_out << "\n";
      return kOk;
    }

    if (*cmd_sim) {
      const LocationGraph map = graph_from_json(load_json_file(sim_map));
      int dropped = 0;
      const std::vector<Trajectory> trajectories =
          restrict_to_map(load_trajectories(sim_traj_dir), map, &dropped);
      if (dropped > 0) {
        std::cerr << "warning: " << dropped << " off-map visits excluded from similarity\n";
      }
      PointwiseDistanceConfig config;
      config.d_max = settings.d_max;
      config.type_penalty = settings.lambda;
      config.graph_cap = settings.graph_cap;
      const PointwiseDistance distance(map, config);
      SimilarityMeasure measure;
      if (sim_measure == "weighted-edit" || sim_measure == "weighted_edit") {
        measure = SimilarityMeasure::WeightedEdit;
      } else if (sim_measure == "dtw") {
        measure = SimilarityMeasure::Dtw;
      } else {
        throw ConfigError("unknown similarity measure '" + sim_measure + "'");
      }
      const auto matrix = pairwise_matrix(trajectories, distance, measure);
      std::vector<std::string> ids;
      for (const Trajectory& traj : trajectories) {
        ids.push_back(traj.doc_id);
      }
      atomic_write_file(sim_out, matrix_to_csv(matrix, ids));

      struct Pair {
        double cost;
        std::string a;
        std::string b;
      };
      std::vector<Pair> pairs;
      for (std::size_t i = 0; i < matrix.size(); ++i) {
        for (std::size_t j = i + 1; j < matrix.size(); ++j) {
          pairs.push_back({matrix[i][j], ids[i], ids[j]});
        }
      }
      std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
        return std::tie(x.cost, x.a, x.b) < std::tie(y.cost, y.a, y.b);
      });
      const std::size_t k = std::min<std::size_t>(pairs.size(), std::max(0, sim_top_k));
      for (std::size_t i = 0; i < k; ++i) {
        std::printf("%.4f  %s  %s\n", pairs[i].cost, pairs[i].a.c_str(), pairs[i].b.c_str());
      }
      return kOk;
    }

    if (*cmd_trans) {
      const LocationGraph map = graph_from_json(load_json_file(trans_map));
      const std::vector<Trajectory> trajectories = load_trajectories(trans_traj_dir);
      const auto filter = parse_kind_filter(trans_kinds);
      const auto rows = transition_counts(trajectories, map, filter, trans_min_docs);
      atomic_write_file(trans_out, transitions_to_csv(rows));
      std::cout << rows.size() << " transitions with at least " << trans_min_docs
                << " documents\n";
      return kOk;
    }

    if (*cmd_viz) {
      const LocationGraph map = graph_from_json(load_json_file(viz_map));
      std::optional<Trajectory> trajectory;
      if (!viz_traj.empty()) {
        trajectory = trajectory_from_json(load_json_file(viz_traj));
      }
      StyleOptions style;
      style.degree_filter = settings.degree_filter;
      std::vector<std::string> warnings;
      const std::string text =
          export_visualization(map, trajectory.has_value() ? &*trajectory : nullptr,
                               parse_export_format(viz_format), style, &warnings);
      atomic_write_file(viz_out, text);
      for (const std::string& warning : warnings) {
        std::cerr << "warning: " << warning << "\n";
      }
      return kOk;
    }

    if (*cmd_pipe) {
      const fs::path out_dir = pipe_out;
      const std::vector<Document> docs = load_corpus(pipe_corpus);
      auto gateway = make_gateway(settings);
      const PromptLibrary prompts = load_prompts(settings);
      const ExtractionOptions options = extraction_options(settings);

      const ExtractStageResult extracted =
          run_extract_stage(docs, *gateway, prompts, options, out_dir);
      std::cout << "extract: " << extracted.ok << " ok, " << extracted.failed << " failed\n";
      if (extracted.ok == 0 && extracted.failed > 0) {
        return kTotalFailure;
      }

      std::vector<std::vector<std::string>> overrides;
      if (!pipe_overrides.empty()) {
        overrides = overrides_from_json(load_json_file(pipe_overrides));
      }
      const std::vector<LocationGraph> graphs = load_graphs(out_dir / "graphs");
      const MergeStageResult merged =
          run_merge_stage(graphs, overrides, *gateway, prompts, options, out_dir / "map.json",
                          out_dir / "aliases.json", pipe_prune_proximity);
      std::cout << "merge: " << merged.map.nodes.size() << " nodes, " << merged.map.edges.size()
                << " edges\n";

      const std::vector<Trajectory> raw = load_trajectories(out_dir / "trajectories");
      run_trajectories_stage(raw, merged.map, merged.dict, out_dir / "mapped");
      const std::vector<Trajectory> mapped = load_trajectories(out_dir / "mapped");
      std::cout << "trajectories: " << mapped.size() << " mapped\n";

      if (!pipe_refs.empty()) {
        const auto refs = references_from_json(load_json_file(pipe_refs));
        const EvalReport report = evaluate_trajectories(mapped, refs, EvalContext{});
        atomic_write_file(out_dir / "eval" / "report.json", dump_json(report.to_json()));
        atomic_write_file(out_dir / "eval" / "report.csv", report.to_csv());
        std::printf("evaluate: edit %.4f, r-edit %.4f\n", report.edit.mean, report.r_edit.mean);
      }

      const auto filter = parse_kind_filter(pipe_kinds);
      const auto rows = transition_counts(mapped, merged.map, filter, pipe_min_docs);
      atomic_write_file(out_dir / "transitions.csv", transitions_to_csv(rows));
      std::cout << "transitions: " << rows.size() << " rows\n";

      if (mapped.size() >= 2) {
        PointwiseDistanceConfig config;
        config.d_max = settings.d_max;
        config.type_penalty = settings.lambda;
        config.graph_cap = settings.graph_cap;
        const PointwiseDistance distance(merged.map, config);
        int dropped = 0;
        const std::vector<Trajectory> on_map = restrict_to_map(mapped, merged.map, &dropped);
        const auto matrix = pairwise_matrix(on_map, distance, SimilarityMeasure::WeightedEdit);
        std::vector<std::string> ids;
        for (const Trajectory& traj : on_map) {
          ids.push_back(traj.doc_id);
        }
        atomic_write_file(out_dir / "similarity.csv", matrix_to_csv(matrix, ids));
        std::cout << "similarity: " << matrix.size() << "x" << matrix.size() << " matrix\n";
      }

      StyleOptions style;
      style.degree_filter = settings.degree_filter;
      const Trajectory* overlay = mapped.empty() ? nullptr : &mapped.front();
      atomic_write_file(out_dir / "map.dot",
                        export_visualization(merged.map, overlay, ExportFormat::Dot, style));
      std::cout << "visualize: map.dot written\n";
      return kOk;
    }
  } catch (const ConfigError& error) {
    std::cerr << "config error: " << error.what() << "\n";
    return kConfigError;
  } catch (const IoError& error) {
    std::cerr << "input error: " << error.what() << "\n";
    return kInputError;
  } catch (const SchemaError& error) {
    std::cerr << "input error: " << error.what() << "\n";
    return kInputError;
  } catch (const MissingReference& error) {
    std::cerr << "input error: " << error.what() << "\n";
    return kInputError;
  } catch (const EmptyReference& error) {
    std::cerr << "input error: " << error.what() << "\n";
    return kInputError;
  } catch (const MissingParentLevel& error) {
    std::cerr << "input error: " << error.what() << "\n";
    return kInputError;
  } catch (const TaggerUnavailable& error) {
    std::cerr << "input error: " << error.what() << "\n";
    return kInputError;
  } catch (const UnknownFormat& error) {
    std::cerr << "input error: " << error.what() << "\n";
    return kInputError;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kTotalFailure;
  }

  return kOk;
}
