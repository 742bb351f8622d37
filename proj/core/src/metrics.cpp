#include "trajmap/metrics.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <set>
#include <sstream>

#include "trajmap/json_recovery.hpp"

namespace trajmap {

using nlohmann::json;

// --- map accuracy --------------------------------------------------------------

MapAccuracy map_accuracy(const LocationGraph& model, const LocationGraph& reference) {
  std::set<std::string> common;
  for (const auto& [name, node] : model.nodes) {
    if (reference.has_node(name)) {
      common.insert(name);
    }
  }

  auto restricted = [&common](const LocationGraph& graph) {
    std::set<std::pair<std::string, std::string>> edges;
    for (const GraphEdge& edge : graph.edges) {
      if (common.count(edge.source) > 0 && common.count(edge.target) > 0) {
        edges.emplace(edge.source, edge.target);  // relation label ignored
      }
    }
    return edges;
  };

  const auto model_edges = restricted(model);
  const auto reference_edges = restricted(reference);

  std::size_t tp = 0;
  for (const auto& edge : model_edges) {
    if (reference_edges.count(edge) > 0) {
      ++tp;
    }
  }
  const std::size_t fp = model_edges.size() - tp;
  const std::size_t fn = reference_edges.size() - tp;

  MapAccuracy out;
  if (tp + fp == 0) {
    out.zero_denominator = true;
  } else {
    out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  if (tp + fn == 0) {
    out.zero_denominator = true;
  } else {
    out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  if (out.precision + out.recall > 0.0) {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

// --- deterministic name alignment -------------------------------------------------

namespace {

/// Latin diacritics folded to ASCII; covers the alphabets common in both
/// corpus domains. Unrecognized multi-byte sequences pass through.
std::string strip_diacritics(const std::string& text) {
  static const std::map<std::string, std::string> kFold = {
      {"à", "a"}, {"á", "a"}, {"â", "a"}, {"ä", "a"}, {"ã", "a"}, {"å", "a"}, {"ą", "a"},
      {"ć", "c"}, {"č", "c"}, {"ç", "c"}, {"ď", "d"}, {"è", "e"}, {"é", "e"}, {"ê", "e"},
      {"ë", "e"}, {"ę", "e"}, {"ě", "e"}, {"ì", "i"}, {"í", "i"}, {"î", "i"}, {"ï", "i"},
      {"ł", "l"}, {"ń", "n"}, {"ñ", "n"}, {"ň", "n"}, {"ò", "o"}, {"ó", "o"}, {"ô", "o"},
      {"ö", "o"}, {"õ", "o"}, {"ø", "o"}, {"ő", "o"}, {"ř", "r"}, {"ś", "s"}, {"š", "s"},
      {"ß", "ss"}, {"ť", "t"}, {"ù", "u"}, {"ú", "u"}, {"û", "u"}, {"ü", "u"}, {"ů", "u"},
      {"ű", "u"}, {"ý", "y"}, {"ź", "z"}, {"ż", "z"}, {"ž", "z"},
      {"À", "a"}, {"Á", "a"}, {"Â", "a"}, {"Ä", "a"}, {"Ã", "a"}, {"Å", "a"}, {"Ą", "a"},
      {"Ć", "c"}, {"Č", "c"}, {"Ç", "c"}, {"Ď", "d"}, {"È", "e"}, {"É", "e"}, {"Ê", "e"},
      {"Ë", "e"}, {"Ę", "e"}, {"Ě", "e"}, {"Ì", "i"}, {"Í", "i"}, {"Î", "i"}, {"Ï", "i"},
      {"Ł", "l"}, {"Ń", "n"}, {"Ñ", "n"}, {"Ň", "n"}, {"Ò", "o"}, {"Ó", "o"}, {"Ô", "o"},
      {"Ö", "o"}, {"Õ", "o"}, {"Ø", "o"}, {"Ő", "o"}, {"Ř", "r"}, {"Ś", "s"}, {"Š", "s"},
      {"Ť", "t"}, {"Ù", "u"}, {"Ú", "u"}, {"Û", "u"}, {"Ü", "u"}, {"Ů", "u"}, {"Ű", "u"},
      {"Ý", "y"}, {"Ź", "z"}, {"Ż", "z"}, {"Ž", "z"},
  };
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const unsigned char byte = static_cast<unsigned char>(text[i]);
    if (byte < 0x80) {
      out.push_back(text[i]);
      ++i;
      continue;
    }
    std::size_t len = 2;
    if ((byte & 0xf0) == 0xe0) {
      len = 3;
    } else if ((byte & 0xf8) == 0xf0) {
      len = 4;
    }
    len = std::min(len, text.size() - i);
    const std::string seq = text.substr(i, len);
    auto it = kFold.find(seq);
    if (it != kFold.end()) {
      out += it->second;
    } else {
      out += seq;
    }
    i += len;
  }
  return out;
}

std::string drop_parentheticals(const std::string& text) {
  std::string out;
  int depth = 0;
  for (char c : text) {
    if (c == '(') {
      ++depth;
    } else if (c == ')') {
      depth = std::max(0, depth - 1);
    } else if (depth == 0) {
      out.push_back(c);
    }
  }
  return out;
}

std::string apply_transliteration_folds(std::string text) {
  // Romanization variants of the same place: Lutsk/Luck, Tzfat/Cfat.
  static const std::array<std::pair<const char*, const char*>, 2> kFolds = {{
      {"ts", "c"},
      {"tz", "c"},
  }};
  for (const auto& [from, to] : kFolds) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
      text.replace(pos, std::strlen(from), to);
      pos += std::strlen(to);
    }
  }
  return text;
}

}  // namespace

std::string normalize_location_name(const std::string& name) {
  std::string text = strip_diacritics(name);
  std::string spaced;
  spaced.reserve(text.size());
  for (char c : text) {
    const unsigned char byte = static_cast<unsigned char>(c);
    if (byte >= 0x80 || std::isalnum(byte)) {
      spaced.push_back(static_cast<char>(std::tolower(byte)));
    } else {
      spaced.push_back(' ');
    }
  }
  std::istringstream stream(spaced);
  std::string token;
  std::vector<std::string> tokens;
  while (stream >> token) {
    tokens.push_back(token);
  }
  // Drop a leading article so "The Warsaw ghetto" matches "Warsaw Ghetto";
  // a name that IS just an article-looking token ("A") stays intact.
  if (tokens.size() > 1 && (tokens[0] == "the" || tokens[0] == "a" || tokens[0] == "an")) {
    tokens.erase(tokens.begin());
  }
  std::string joined;
  for (const std::string& t : tokens) {
    if (!joined.empty()) {
      joined.push_back(' ');
    }
    joined += t;
  }
  return apply_transliteration_folds(joined);
}

AlignmentMap align_locations(const std::vector<std::string>& pred_names,
                             const std::vector<std::string>& gold_names) {
  std::vector<std::string> gold_keys;
  std::vector<std::string> gold_variants;
  gold_keys.reserve(gold_names.size());
  for (const std::string& name : gold_names) {
    gold_keys.push_back(normalize_location_name(name));
    gold_variants.push_back(normalize_location_name(drop_parentheticals(name)));
  }

  AlignmentMap out;
  out.ids.reserve(pred_names.size());
  for (const std::string& name : pred_names) {
    const std::string key = normalize_location_name(name);
    int match = -1;
    if (!key.empty()) {
      for (std::size_t g = 0; g < gold_keys.size(); ++g) {
        if (gold_keys[g] == key) {
          match = static_cast<int>(g);
          break;
        }
      }
    }
    if (match < 0) {
      const std::string variant = normalize_location_name(drop_parentheticals(name));
      if (!variant.empty()) {
        for (std::size_t g = 0; g < gold_keys.size(); ++g) {
          if (gold_variants[g] == variant || gold_keys[g] == variant ||
              gold_variants[g] == key) {
            match = static_cast<int>(g);
            break;
          }
        }
      }
    }
    out.ids.push_back(match);
  }
  return out;
}

AlignmentMap align_locations(const std::vector<std::string>& pred_names,
                             const std::vector<std::string>& gold_names, Gateway& gateway,
                             const PromptLibrary& prompts, const ExtractionOptions& options) {
  AlignmentMap out;
  if (pred_names.empty()) {
    return out;
  }
  const std::string prompt = prompts.render(
      TemplateId::EvalAlignment,
      {{"predicted", json(pred_names).dump()}, {"gold", json(gold_names).dump()}});
  ChatRequest request{options.model_id,
                      {{ChatRole::User, prompt}},
                      options.temperature,
                      options.max_output_tokens};
  const ChatResponse response = gateway.complete(request);
  const json value = extract_json_block(response.text);
  if (!value.is_object() || !value.contains("ids") || !value["ids"].is_array()) {
    throw SchemaError("alignment response lacks an \"ids\" array");
  }
  const json& ids = value["ids"];
  if (ids.size() != pred_names.size()) {
    throw SchemaError("alignment returned " + std::to_string(ids.size()) + " ids for " +
                      std::to_string(pred_names.size()) + " predictions");
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    int id = -1;
    if (ids[i].is_number_integer()) {
      id = ids[i].get<int>();
    } else {
      out.notes.push_back("non-integer id for '" + pred_names[i] + "' coerced to -1");
    }
    if (id < -1 || id >= static_cast<int>(gold_names.size())) {
      out.notes.push_back("out-of-range id " + std::to_string(id) + " for '" + pred_names[i] +
                          "' coerced to -1");
      id = -1;
    }
    out.ids.push_back(id);
  }
  return out;
}

// --- trajectory evaluation ---------------------------------------------------------

namespace {

ColumnStats stats_of(const std::vector<double>& values) {
  ColumnStats out;
  if (values.empty()) {
    return out;
  }
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  out.mean = sum / static_cast<double>(values.size());
  double variance = 0.0;
  for (double v : values) {
    variance += (v - out.mean) * (v - out.mean);
  }
  out.stddev = std::sqrt(variance / static_cast<double>(values.size()));
  return out;
}

std::vector<int> collapse_consecutive(const std::vector<int>& symbols) {
  std::vector<int> out;
  for (int symbol : symbols) {
    if (out.empty() || out.back() != symbol) {
      out.push_back(symbol);
    }
  }
  return out;
}

}  // namespace

json EvalReport::to_json() const {
  json rows = json::array();
  for (const EvalRow& row : per_document) {
    rows.push_back({{"doc_id", row.doc_id},
                    {"edit", row.edit},
                    {"r_edit", row.r_edit},
                    {"pred_len", row.pred_len},
                    {"ref_len", row.ref_len}});
  }
  auto stat = [](const ColumnStats& s) {
    return json{{"mean", s.mean}, {"stddev", s.stddev}};
  };
  return json{{"per_document", rows},
              {"aggregate",
               {{"edit", stat(edit)},
                {"r_edit", stat(r_edit)},
                {"pred_len", stat(pred_len)},
                {"ref_len", stat(ref_len)}}}};
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  char line[256];
  out << "doc_id,edit,r_edit,pred_len,ref_len\n";
  for (const EvalRow& row : per_document) {
    std::snprintf(line, sizeof(line), "%s,%.4f,%.4f,%d,%d\n", row.doc_id.c_str(), row.edit,
                  row.r_edit, row.pred_len, row.ref_len);
    out << line;
  }
  std::snprintf(line, sizeof(line), "mean,%.4f,%.4f,%.4f,%.4f\n", edit.mean, r_edit.mean,
                pred_len.mean, ref_len.mean);
  out << line;
  std::snprintf(line, sizeof(line), "stddev,%.4f,%.4f,%.4f,%.4f\n", edit.stddev, r_edit.stddev,
                pred_len.stddev, ref_len.stddev);
  out << line;
  return out.str();
}

EvalReport evaluate_trajectories(const std::vector<Trajectory>& preds,
                                 const std::map<std::string, std::vector<std::string>>& refs,
                                 const EvalContext& context) {
  if (context.mode == AlignmentMode::Gateway &&
      (context.gateway == nullptr || context.prompts == nullptr)) {
    throw PreconditionError("gateway alignment mode needs a gateway and prompt library");
  }

  EvalReport report;
  std::vector<double> edits;
  std::vector<double> r_edits;
  std::vector<double> pred_lens;
  std::vector<double> ref_lens;

  for (const Trajectory& pred : preds) {
    auto it = refs.find(pred.doc_id);
    if (it == refs.end()) {
      throw MissingReference("no reference sequence for doc '" + pred.doc_id + "'");
    }
    const std::vector<std::string>& gold = it->second;
    if (gold.empty()) {
      throw EmptyReference("reference sequence for doc '" + pred.doc_id + "' is empty");
    }
    const std::vector<std::string> pred_names = location_sequence(pred);

    AlignmentMap alignment;
    if (context.mode == AlignmentMode::Deterministic) {
      alignment = align_locations(pred_names, gold);
    } else {
      alignment = align_locations(pred_names, gold, *context.gateway, *context.prompts,
                                  context.options);
    }

    // Gold ids are canonicalized to the first occurrence of each name so a
    // repeated reference location is one symbol throughout.
    std::map<std::string, int> first_occurrence;
    std::vector<int> ref_symbols;
    for (std::size_t j = 0; j < gold.size(); ++j) {
      auto [entry, inserted] = first_occurrence.try_emplace(gold[j], static_cast<int>(j));
      ref_symbols.push_back(entry->second);
    }
    std::vector<int> pred_symbols;
    int sentinel = static_cast<int>(gold.size());
    for (int id : alignment.ids) {
      if (id >= 0) {
        pred_symbols.push_back(first_occurrence.at(gold[static_cast<std::size_t>(id)]));
      } else {
        pred_symbols.push_back(sentinel++);  // unique: never equal to anything
      }
    }

    const std::vector<int> p = collapse_consecutive(pred_symbols);
    const std::vector<int> r = collapse_consecutive(ref_symbols);

    EvalRow row;
    row.doc_id = pred.doc_id;
    row.edit = normalized_edit(p, r);
    row.r_edit = r_edit(p, r);
    row.pred_len = static_cast<int>(p.size());
    row.ref_len = static_cast<int>(r.size());
    edits.push_back(row.edit);
    r_edits.push_back(row.r_edit);
    pred_lens.push_back(row.pred_len);
    ref_lens.push_back(row.ref_len);
    report.per_document.push_back(std::move(row));
  }

  report.edit = stats_of(edits);
  report.r_edit = stats_of(r_edits);
  report.pred_len = stats_of(pred_lens);
  report.ref_len = stats_of(ref_lens);
  return report;
}

}  // namespace trajmap
