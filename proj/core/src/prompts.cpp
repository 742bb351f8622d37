#include "trajmap/prompts.hpp"

#include <array>

#include "trajmap/errors.hpp"
#include "trajmap/serialization.hpp"

#ifndef TRAJMAP_DEFAULT_TEMPLATE_DIR
#define TRAJMAP_DEFAULT_TEMPLATE_DIR ""
#endif

namespace trajmap {

const char* template_file_name(TemplateId id) {
  switch (id) {
    case TemplateId::GraphExtraction:
      return "graph_extraction.txt";
    case TemplateId::TrajectoryExtraction:
      return "trajectory_extraction.txt";
    case TemplateId::GraphRevision:
      return "graph_revision.txt";
    case TemplateId::TrajectoryRevision:
      return "trajectory_revision.txt";
    case TemplateId::AliasMerge:
      return "alias_merge.txt";
    case TemplateId::EvalAlignment:
      return "eval_alignment.txt";
  }
  return "";
}

std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find("{{", pos);
    if (open == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    const std::size_t close = text.find("}}", open + 2);
    if (close == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    out.append(text, pos, open - pos);
    const std::string name = text.substr(open + 2, close - open - 2);
    auto it = bindings.find(name);
    if (it == bindings.end()) {
      throw MissingBinding("template placeholder '" + name + "' has no binding");
    }
    out += it->second;
    pos = close + 2;
  }
  return out;
}

PromptLibrary::PromptLibrary(std::filesystem::path root, std::string profile)
    : profile_(std::move(profile)) {
  static constexpr std::array<TemplateId, 6> kAll = {
      TemplateId::GraphExtraction,  TemplateId::TrajectoryExtraction,
      TemplateId::GraphRevision,    TemplateId::TrajectoryRevision,
      TemplateId::AliasMerge,       TemplateId::EvalAlignment,
  };
  const std::filesystem::path dir = root / profile_;
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("no template profile '" + profile_ + "' under " + root.string());
  }
  for (TemplateId id : kAll) {
    const std::filesystem::path path = dir / template_file_name(id);
    if (!std::filesystem::exists(path)) {
      throw ConfigError("missing template file " + path.string());
    }
    texts_[id] = read_file(path);
  }
}

std::string PromptLibrary::render(TemplateId id,
                                  const std::map<std::string, std::string>& bindings) const {
  return render_template(text(id), bindings);
}

const std::string& PromptLibrary::text(TemplateId id) const {
  return texts_.at(id);
}

std::filesystem::path PromptLibrary::default_root() {
  return TRAJMAP_DEFAULT_TEMPLATE_DIR;
}

}  // namespace trajmap
