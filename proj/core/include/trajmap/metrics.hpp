#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "trajmap/errors.hpp"
#include "trajmap/extraction.hpp"
#include "trajmap/gateway.hpp"
#include "trajmap/prompts.hpp"
#include "trajmap/types.hpp"

namespace trajmap {

/// Unit-cost Levenshtein distance; symbols compare by exact equality.
template <typename Symbol>
int edit_distance(const std::vector<Symbol>& pred, const std::vector<Symbol>& ref) {
  const std::size_t n = pred.size();
  const std::size_t m = ref.size();
  std::vector<int> previous(m + 1);
  std::vector<int> current(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    previous[j] = static_cast<int>(j);
  }
  for (std::size_t i = 1; i <= n; ++i) {
    current[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const int substitution = previous[j - 1] + (pred[i - 1] == ref[j - 1] ? 0 : 1);
      current[j] = std::min({previous[j] + 1, current[j - 1] + 1, substitution});
    }
    std::swap(previous, current);
  }
  return previous[m];
}

/// Longest common subsequence length; the independent route for R-Edit.
template <typename Symbol>
int lcs_length(const std::vector<Symbol>& a, const std::vector<Symbol>& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<int> previous(m + 1, 0);
  std::vector<int> current(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      current[j] = a[i - 1] == b[j - 1] ? previous[j - 1] + 1
                                        : std::max(previous[j], current[j - 1]);
    }
    std::swap(previous, current);
  }
  return previous[m];
}

/// Minimal cost of rewriting pred into ref when deleting a pred symbol is
/// free and insertions and substitutions cost one.
template <typename Symbol>
int r_edit_cost(const std::vector<Symbol>& pred, const std::vector<Symbol>& ref) {
  const std::size_t n = pred.size();
  const std::size_t m = ref.size();
  std::vector<int> previous(m + 1);
  std::vector<int> current(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    previous[j] = static_cast<int>(j);  // insertions
  }
  for (std::size_t i = 1; i <= n; ++i) {
    current[0] = 0;  // deleting the pred prefix is free
    for (std::size_t j = 1; j <= m; ++j) {
      const int substitution = previous[j - 1] + (pred[i - 1] == ref[j - 1] ? 0 : 1);
      current[j] = std::min({previous[j] + 0, current[j - 1] + 1, substitution});
    }
    std::swap(previous, current);
  }
  return previous[m];
}

/// Levenshtein distance divided by the reference length (word-error-rate
/// style; may exceed one). Throws EmptyReference when ref is empty.
template <typename Symbol>
double normalized_edit(const std::vector<Symbol>& pred, const std::vector<Symbol>& ref) {
  if (ref.empty()) {
    throw EmptyReference("normalized_edit: empty reference sequence");
  }
  return static_cast<double>(edit_distance(pred, ref)) / static_cast<double>(ref.size());
}

/// Recall-oriented edit distance: deletions of extra predicted symbols are
/// free. Equals (|ref| - LCS(pred, ref)) / |ref|.
template <typename Symbol>
double r_edit(const std::vector<Symbol>& pred, const std::vector<Symbol>& ref) {
  if (ref.empty()) {
    throw EmptyReference("r_edit: empty reference sequence");
  }
  return static_cast<double>(r_edit_cost(pred, ref)) / static_cast<double>(ref.size());
}

// --- map accuracy --------------------------------------------------------------

struct MapAccuracy {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Set when some denominator was zero and the metric was pinned to 0.
  bool zero_denominator = false;
};

/// Edge precision/recall/F1 over the two graphs restricted to their common
/// node set; edges compare as unlabeled directed pairs.
MapAccuracy map_accuracy(const LocationGraph& model, const LocationGraph& reference);

// --- location alignment ----------------------------------------------------------

struct AlignmentMap {
  std::vector<int> ids;  // one per predicted name; index into gold or -1
  std::vector<std::string> notes;
};

/// Matching key used by deterministic alignment: casefold, strip
/// diacritics, punctuation to spaces, leading article dropped, light
/// transliteration folding (ts/tz -> c) so romanization variants of the
/// same place compare equal.
std::string normalize_location_name(const std::string& name);

/// Deterministic mode: exact match on normalized keys, then a second pass
/// with parenthetical-free variants. Each predicted name maps to the first
/// matching gold index, else -1.
AlignmentMap align_locations(const std::vector<std::string>& pred_names,
                             const std::vector<std::string>& gold_names);

/// Gateway mode: the alignment prompt, one round-trip. Out-of-range ids are
/// coerced to -1 with a note.
AlignmentMap align_locations(const std::vector<std::string>& pred_names,
                             const std::vector<std::string>& gold_names, Gateway& gateway,
                             const PromptLibrary& prompts, const ExtractionOptions& options);

// --- trajectory evaluation ---------------------------------------------------------

struct EvalRow {
  std::string doc_id;
  double edit = 0.0;
  double r_edit = 0.0;
  int pred_len = 0;
  int ref_len = 0;
};

struct ColumnStats {
  double mean = 0.0;
  double stddev = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> per_document;
  ColumnStats edit;
  ColumnStats r_edit;
  ColumnStats pred_len;
  ColumnStats ref_len;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

enum class AlignmentMode { Deterministic, Gateway };

struct EvalContext {
  AlignmentMode mode = AlignmentMode::Deterministic;
  Gateway* gateway = nullptr;             // required in gateway mode
  const PromptLibrary* prompts = nullptr;
  ExtractionOptions options;
};

/// Scores each trajectory against its reference sequence: aligns predicted
/// names to gold ids (unmatched ones become unique sentinel symbols),
/// collapses consecutive duplicates, then computes Edit and R-Edit.
/// Throws MissingReference when a doc_id has no reference entry.
EvalReport evaluate_trajectories(const std::vector<Trajectory>& preds,
                                 const std::map<std::string, std::vector<std::string>>& refs,
                                 const EvalContext& context);

}  // namespace trajmap
