#include "trajmap/baselines.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>

#include "trajmap/errors.hpp"

namespace trajmap {

namespace {

std::size_t bounded_draw(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t value = rng();
  while (value >= limit) {
    value = rng();
  }
  return static_cast<std::size_t>(value % n);
}

}  // namespace

std::vector<std::string> random_trajectory_baseline(const std::set<std::string>& map_nodes,
                                                    int ref_len, std::uint64_t seed) {
  if (map_nodes.empty()) {
    throw PreconditionError("random_trajectory_baseline: empty node set");
  }
  const std::vector<std::string> names(map_nodes.begin(), map_nodes.end());
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(std::max(0, ref_len)));
  for (int i = 0; i < ref_len; ++i) {
    out.push_back(names[bounded_draw(rng, names.size())]);
  }
  return out;
}

std::vector<std::string> frequent_location_baseline(const std::vector<std::string>& ref) {
  if (ref.empty()) {
    throw EmptyReference("frequent_location_baseline: empty reference");
  }
  std::map<std::string, int> counts;
  for (const std::string& name : ref) {
    ++counts[name];
  }
  const std::string* mode = &ref.front();
  for (const std::string& name : ref) {  // earliest first occurrence wins ties
    if (counts[name] > counts[*mode]) {
      mode = &name;
    }
  }
  return std::vector<std::string>(ref.size(), *mode);
}

GazetteerTagger::GazetteerTagger(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw TaggerUnavailable("cannot open gazetteer " + path.string());
  }
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      continue;
    }
    entries_.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  if (entries_.empty()) {
    throw TaggerUnavailable("gazetteer " + path.string() + " has no entries");
  }
  std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) {
      return a.first.size() > b.first.size();  // longest match first
    }
    return a.first < b.first;
  });
}

std::vector<TaggedEntity> GazetteerTagger::tag(const Document& doc) {
  std::vector<TaggedEntity> out;
  for (std::size_t s = 0; s < doc.segments.size(); ++s) {
    const std::string& segment = doc.segments[s];
    std::size_t pos = 0;
    while (pos < segment.size()) {
      bool matched = false;
      for (const auto& [name, label] : entries_) {
        if (segment.compare(pos, name.size(), name) == 0) {
          out.push_back({name, label, static_cast<int>(s + 1)});
          pos += name.size();
          matched = true;
          break;
        }
      }
      if (!matched) {
        ++pos;
      }
    }
  }
  return out;
}

std::vector<std::string> ner_sequence_baseline(const Document& doc, EntityTagger& tagger) {
  const std::vector<TaggedEntity> entities = tagger.tag(doc);
  std::vector<std::string> out;
  for (const TaggedEntity& entity : entities) {
    if (entity.label != "GPE" && entity.label != "LOC" && entity.label != "LOCATION") {
      continue;
    }
    if (!out.empty() && out.back() == entity.text) {
      continue;  // omit consecutive identical entities
    }
    out.push_back(entity.text);
  }
  return out;
}

}  // namespace trajmap
