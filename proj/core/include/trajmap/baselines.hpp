#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "trajmap/types.hpp"

namespace trajmap {

/// ref_len independent uniform draws from the node-name set (sorted before
/// drawing, so a seed fully determines the output). Repeats allowed.
std::vector<std::string> random_trajectory_baseline(const std::set<std::string>& map_nodes,
                                                    int ref_len, std::uint64_t seed);

/// The modal reference location repeated |ref| times; ties break to the
/// earliest first occurrence. Throws EmptyReference.
std::vector<std::string> frequent_location_baseline(const std::vector<std::string>& ref);

struct TaggedEntity {
  std::string text;
  std::string label;
  int segment_index = 0;  // 1-based
};

/// External entity tagger boundary. The production tagger lives outside
/// this codebase; tests and offline runs use GazetteerTagger.
class EntityTagger {
 public:
  virtual ~EntityTagger() = default;
  virtual std::vector<TaggedEntity> tag(const Document& doc) = 0;
};

/// File-backed fixture tagger: a TSV of "name<TAB>label" entries, matched
/// longest-first left to right within each segment.
class GazetteerTagger : public EntityTagger {
 public:
  explicit GazetteerTagger(const std::filesystem::path& path);  // TaggerUnavailable

  std::vector<TaggedEntity> tag(const Document& doc) override;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;  // longest first
};

/// GPE/LOC entities in document order with consecutive string-identical
/// entities collapsed.
std::vector<std::string> ner_sequence_baseline(const Document& doc, EntityTagger& tagger);

}  // namespace trajmap
