#include "silverforge/templates.hpp"

#include <fstream>
#include <sstream>

#include "silverforge/errors.hpp"
#include "silverforge/text.hpp"

namespace silverforge::tpl {

const char* const kTemplateNames[4] = {"generation", "judge_extraction",
                                       "judge_rewrite", "judge_blur"};

namespace {

const char kGeneration[] =
    R"(You are answering a question about the given media.
{media}
Question: {prompt}

Think through the problem step by step inside <think> and </think> tags,
describing only what you can actually perceive. Then give your final answer
on a new line after the closing tag.
)";

const char kJudgeExtraction[] =
    R"(Below is one candidate answer to a perception question. Extract every
atomic sensory claim it makes about the scene (colors, shapes, objects,
positions, sounds). State each claim as one short subject-attribute
sentence in lowercase. Reply with the header line "CLAIMS:" followed by
one claim per line, and nothing else. If the candidate makes no sensory
claims, reply with the header line alone.

Candidate:
{candidate}
)";

const char kJudgeRewrite[] =
    R"(Rewrite the reasoning for the answer below as a short paragraph that
uses every given fact verbatim and introduces no other sensory detail.
Reply with the paragraph only.

Facts:
{facts}

Answer: {answer}
)";

const char kJudgeBlur[] =
    R"(The following claims about one subject disagree. Write a single generic
statement about the subject that stays true regardless of which claim is
right, omitting every disputed detail. Reply with the statement only, in
lowercase.

Claims:
{claims}
)";

}  // namespace

std::string default_text(const std::string& name) {
  if (name == "generation") return kGeneration;
  if (name == "judge_extraction") return kJudgeExtraction;
  if (name == "judge_rewrite") return kJudgeRewrite;
  if (name == "judge_blur") return kJudgeBlur;
  throw TemplateError("unknown template: \"" + name + "\"");
}

Template load(const std::string& name, const std::filesystem::path& dir) {
  Template t;
  t.name = name;
  if (!dir.empty()) {
    std::filesystem::path p = dir / (name + ".txt");
    if (std::filesystem::exists(p)) {
      std::ifstream in(p, std::ios::binary);
      if (!in) throw IoError("cannot open template " + p.string());
      std::ostringstream buf;
      buf << in.rdbuf();
      t.text = buf.str();
    }
  }
  if (t.text.empty()) t.text = default_text(name);
  t.version = text::sha256_hex(t.text).substr(0, 12);
  return t;
}

std::map<std::string, std::string> versions(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const char* name : kTemplateNames) out[name] = load(name, dir).version;
  return out;
}

std::string render(const std::string& template_text,
                   const std::map<std::string, std::string>& values,
                   const std::vector<std::string>& required) {
  for (const auto& key : required) {
    if (template_text.find("{" + key + "}") == std::string::npos) {
      throw TemplateError("template is missing required placeholder {" + key + "}");
    }
  }
  std::string out = template_text;
  for (const auto& [key, value] : values) {
    const std::string needle = "{" + key + "}";
    for (size_t pos = out.find(needle); pos != std::string::npos;
         pos = out.find(needle, pos + value.size())) {
      out.replace(pos, needle.size(), value);
    }
  }
  return out;
}

}  // namespace silverforge::tpl
