#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace trajmap {

enum class TemplateId {
  GraphExtraction,
  TrajectoryExtraction,
  GraphRevision,
  TrajectoryRevision,
  AliasMerge,
  EvalAlignment,
};

const char* template_file_name(TemplateId id);

/// Substitutes {{name}} markers. Throws MissingBinding when the text
/// declares a placeholder the bindings do not cover.
std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& bindings);

/// Loads the six prompt templates of one domain profile from
/// <root>/<profile>/<template>.txt. Profiles carry the domain-specific
/// wording; the code never embeds prompt text.
class PromptLibrary {
 public:
  PromptLibrary(std::filesystem::path root, std::string profile);  // ConfigError

  std::string render(TemplateId id, const std::map<std::string, std::string>& bindings) const;
  const std::string& text(TemplateId id) const;
  const std::string& profile() const { return profile_; }

  /// Compile-time default template directory (the source tree in a build,
  /// the installed share/ directory otherwise).
  static std::filesystem::path default_root();

 private:
  std::string profile_;
  std::map<TemplateId, std::string> texts_;
};

}  // namespace trajmap
