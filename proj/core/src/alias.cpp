#include "trajmap/alias.hpp"

#include <algorithm>
#include <numeric>

#include "trajmap/errors.hpp"
#include "trajmap/json_recovery.hpp"

namespace trajmap {

using nlohmann::json;

namespace {

/// Plain union-find over string names.
class UnionFind {
 public:
  std::string find(const std::string& name) {
    auto it = parent_.find(name);
    if (it == parent_.end()) {
      parent_[name] = name;
      return name;
    }
    if (it->second == name) {
      return name;
    }
    const std::string root = find(it->second);
    parent_[name] = root;
    return root;
  }

  void unite(const std::string& a, const std::string& b) {
    const std::string ra = find(a);
    const std::string rb = find(b);
    if (ra != rb) {
      parent_[rb] = ra;
    }
  }

  std::map<std::string, std::vector<std::string>> components() {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& [name, _] : parent_) {
      out[find(name)].push_back(name);
    }
    return out;
  }

 private:
  std::map<std::string, std::string> parent_;
};

}  // namespace

const std::string& AliasDictionary::canonical_of(const std::string& name) const {
  auto it = canonical.find(name);
  return it != canonical.end() ? it->second : name;
}

AliasDictionary AliasDictionary::from_groups(
    const std::vector<std::vector<std::string>>& model_groups,
    const std::vector<std::vector<std::string>>& overrides,
    const std::map<std::string, int>& counts) {
  UnionFind uf;
  auto unite_group = [&uf](const std::vector<std::string>& group) {
    for (std::size_t i = 1; i < group.size(); ++i) {
      uf.unite(group[0], group[i]);
    }
    if (group.size() == 1) {
      uf.find(group[0]);
    }
  };
  for (const auto& group : model_groups) {
    unite_group(group);
  }
  for (const auto& group : overrides) {
    unite_group(group);
  }

  AliasDictionary dict;
  dict.overrides = overrides;
  for (auto& [root, members] : uf.components()) {
    if (members.size() < 2) {
      continue;
    }
    std::sort(members.begin(), members.end());
    // Representative: most frequent surface form, tie-broken by longest
    // string, then lexicographically smallest.
    const std::string* best = &members.front();
    for (const std::string& member : members) {
      const int count = counts.count(member) ? counts.at(member) : 0;
      const int best_count = counts.count(*best) ? counts.at(*best) : 0;
      if (count > best_count ||
          (count == best_count && member.size() > best->size()) ||
          (count == best_count && member.size() == best->size() && member < *best)) {
        best = &member;
      }
    }
    for (const std::string& member : members) {
      dict.canonical[member] = *best;
    }
    dict.groups.push_back(std::move(members));
  }
  std::sort(dict.groups.begin(), dict.groups.end());
  return dict;
}

json AliasDictionary::to_json() const {
  json canonical_map = json::object();
  for (const auto& [name, rep] : canonical) {
    canonical_map[name] = rep;
  }
  return json{{"groups", groups}, {"overrides", overrides}, {"canonical", canonical_map}};
}

AliasDictionary AliasDictionary::from_json(const json& value) {
  if (!value.is_object() || !value.contains("groups")) {
    throw SchemaError("alias dictionary JSON must contain \"groups\"");
  }
  AliasDictionary dict;
  for (const json& group : value["groups"]) {
    std::vector<std::string> members;
    for (const json& member : group) {
      if (!member.is_string()) {
        throw SchemaError("alias group members must be strings");
      }
      members.push_back(member.get<std::string>());
    }
    dict.groups.push_back(std::move(members));
  }
  if (value.contains("overrides")) {
    for (const json& group : value["overrides"]) {
      std::vector<std::string> members;
      for (const json& member : group) {
        members.push_back(member.get<std::string>());
      }
      dict.overrides.push_back(std::move(members));
    }
  }
  if (value.contains("canonical") && value["canonical"].is_object()) {
    for (const auto& [name, rep] : value["canonical"].items()) {
      dict.canonical[name] = rep.get<std::string>();
    }
  }
  return dict;
}

std::vector<std::vector<std::string>> parse_alias_groups(const json& value,
                                                         const std::set<std::string>& known,
                                                         std::vector<std::string>* notes) {
  const json* groups = &value;
  if (value.is_object()) {
    if (value.contains("groups") && value["groups"].is_array()) {
      groups = &value["groups"];
    } else {
      throw SchemaError("alias response must be a list of lists");
    }
  }
  if (!groups->is_array()) {
    throw SchemaError("alias response must be a list of lists");
  }

  auto note = [notes](const std::string& text) {
    if (notes != nullptr) {
      notes->push_back(text);
    }
  };

  std::vector<std::vector<std::string>> out;
  for (const json& group : *groups) {
    if (!group.is_array()) {
      note("non-list alias group skipped: " + group.dump());
      continue;
    }
    std::vector<std::string> members;
    for (const json& member : group) {
      if (!member.is_string()) {
        note("non-string alias member skipped: " + member.dump());
        continue;
      }
      const std::string name = member.get<std::string>();
      if (known.count(name) == 0) {
        note("alias member '" + name + "' not in the input list; dropped");
        continue;
      }
      members.push_back(name);
    }
    if (members.size() >= 2) {
      out.push_back(std::move(members));
    }
  }
  return out;
}

std::vector<std::vector<std::string>> overrides_from_json(const json& value) {
  if (!value.is_array()) {
    throw SchemaError("overrides file must be a JSON list of string lists");
  }
  std::vector<std::vector<std::string>> out;
  for (const json& group : value) {
    if (!group.is_array()) {
      throw SchemaError("override entries must be lists");
    }
    std::vector<std::string> members;
    for (const json& member : group) {
      if (!member.is_string()) {
        throw SchemaError("override members must be strings");
      }
      members.push_back(member.get<std::string>());
    }
    if (!members.empty()) {
      out.push_back(std::move(members));
    }
  }
  return out;
}

AliasDictionary build_alias_dictionary(const std::vector<std::string>& names,
                                       const std::map<std::string, int>& counts,
                                       const std::vector<std::vector<std::string>>& overrides,
                                       Gateway& gateway, const PromptLibrary& prompts,
                                       const ExtractionOptions& options,
                                       std::vector<std::string>* notes) {
  if (names.empty()) {
    return AliasDictionary::from_groups({}, overrides, counts);
  }

  const std::string prompt =
      prompts.render(TemplateId::AliasMerge, {{"locations", json(names).dump()}});
  std::vector<ChatMessage> conversation{{ChatRole::User, prompt}};
  ChatRequest request{options.model_id, conversation, options.temperature,
                      options.max_output_tokens};
  const ChatResponse response = gateway.complete(request);

  json value;
  try {
    value = extract_json_block(response.text);
  } catch (const JsonRecoveryError&) {
    // One reformat follow-up, then give up.
    conversation.push_back({ChatRole::Assistant, response.text});
    conversation.push_back({ChatRole::User, "Give your answer as valid JSON only."});
    ChatRequest retry{options.model_id, conversation, options.temperature,
                      options.max_output_tokens};
    value = extract_json_block(gateway.complete(retry).text);
  }

  const std::set<std::string> known(names.begin(), names.end());
  const auto model_groups = parse_alias_groups(value, known, notes);
  return AliasDictionary::from_groups(model_groups, overrides, counts);
}

}  // namespace trajmap
