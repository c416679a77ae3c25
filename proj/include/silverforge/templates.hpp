#pragma once
// Prompt templates: embedded defaults, optional on-disk overrides, and
// content-derived version strings recorded in the audit log.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace silverforge::tpl {

struct Template {
  std::string name;  // "generation" | "judge_extraction" | "judge_rewrite" | "judge_blur"
  std::string text;
  std::string version;  // first 12 hex digits of the content SHA-256
};

// The four templates the pipeline uses, with their required placeholders:
//   generation       — {media} {prompt}
//   judge_extraction — {candidate}
//   judge_rewrite    — {facts} {answer}
//   judge_blur       — {claims}
extern const char* const kTemplateNames[4];

// Embedded default text for a template name; throws TemplateError on an
// unknown name.
std::string default_text(const std::string& name);

// Loads a template from `<dir>/<name>.txt` when dir is non-empty and the
// file exists; falls back to the embedded default otherwise.
Template load(const std::string& name, const std::filesystem::path& dir = {});

std::map<std::string, std::string> versions(const std::filesystem::path& dir = {});

// Replaces every "{key}" with its value. Throws TemplateError when a
// required placeholder does not occur in the template text.
std::string render(const std::string& template_text,
                   const std::map<std::string, std::string>& values,
                   const std::vector<std::string>& required);

}  // namespace silverforge::tpl
