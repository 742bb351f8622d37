#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "trajmap/extraction.hpp"
#include "trajmap/gateway.hpp"
#include "trajmap/prompts.hpp"

namespace trajmap {

/// Groups of surface names denoting one place, plus the derived
/// surface -> canonical mapping. Groups are disjoint after transitive
/// closure; every grouped name maps to exactly one representative drawn
/// from its group.
struct AliasDictionary {
  std::vector<std::vector<std::string>> groups;     // closed, sorted
  std::vector<std::vector<std::string>> overrides;  // as supplied
  std::map<std::string, std::string> canonical;

  /// Mapped name, or the name itself when ungrouped.
  const std::string& canonical_of(const std::string& name) const;

  /// Closes model groups and override groups under overlap (union-find) and
  /// picks a representative per group: highest occurrence count, then
  /// longest name, then lexicographically smallest.
  static AliasDictionary from_groups(const std::vector<std::vector<std::string>>& model_groups,
                                     const std::vector<std::vector<std::string>>& overrides,
                                     const std::map<std::string, int>& counts);

  nlohmann::json to_json() const;
  static AliasDictionary from_json(const nlohmann::json& value);  // SchemaError
};

/// Parses the model's list-of-lists reply, dropping members that are not in
/// the known-name set (and whole groups left with fewer than two members).
std::vector<std::vector<std::string>> parse_alias_groups(const nlohmann::json& value,
                                                         const std::set<std::string>& known,
                                                         std::vector<std::string>* notes);

/// Override files are a bare JSON list of string lists.
std::vector<std::vector<std::string>> overrides_from_json(const nlohmann::json& value);

/// One gateway round-trip over the merge prompt. names must be deduplicated
/// and sorted; counts drive representative selection (pass {} to fall back
/// to the longest/lexicographic tie rules). An empty name list short-circuits
/// to an empty dictionary without calling the gateway.
AliasDictionary build_alias_dictionary(const std::vector<std::string>& names,
                                       const std::map<std::string, int>& counts,
                                       const std::vector<std::vector<std::string>>& overrides,
                                       Gateway& gateway, const PromptLibrary& prompts,
                                       const ExtractionOptions& options,
                                       std::vector<std::string>* notes = nullptr);

}  // namespace trajmap
