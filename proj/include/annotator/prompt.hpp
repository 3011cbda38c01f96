#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "annotator/corpus.hpp"

namespace annotator {

struct OneShotExample {
  std::string input;
  std::string output;
};

struct PromptTemplate {
  std::string id;
  Task task = Task::Captioning;
  LanguageTag target_language;
  // Captioning: paraphrases beyond the leading translation (default 4, so
  // five target captions total). Style transfer: extra pairs beyond the
  // translated original (the output format fixes this at 1).
  int n_paraphrases = 4;
  // May contain {{language}}, {{n_paraphrases}}, {{generation_instruction}},
  // {{style_directives}}, {{safety_directives}}, {{one_shot_input}},
  // {{one_shot_output}}. A line holding only a placeholder that expands to
  // nothing is dropped.
  std::string system_text;
  OneShotExample one_shot;
  std::vector<std::string> style_directives;
  std::vector<std::string> safety_directives;
};

struct PromptBundle {
  std::string system_message;
  std::string user_message;
  std::string template_id;
};

// Validates invariants and co-validates the one-shot output against the
// parser for the template's task; throws MalformedTemplateError.
void validate_template(const PromptTemplate& t);

std::string render_system_message(const PromptTemplate& t);
std::string render_one_shot_output(const PromptTemplate& t);

PromptBundle build_captioning_prompt(const PromptTemplate& t,
                                     const Annotation& gold);
PromptBundle build_tst_prompt(const PromptTemplate& t, const StylePair& pair);

class TemplateRegistry {
 public:
  void register_template(PromptTemplate t);
  bool contains(const std::string& id) const;
  const PromptTemplate& get(const std::string& id) const;
  std::vector<std::string> ids() const;

  // Registry pre-loaded with captioning-ko, tst-fr, and the generic
  // captioning/tst templates.
  static TemplateRegistry with_builtins();

 private:
  std::map<std::string, PromptTemplate> templates_;
};

// Generic templates parameterised by language. The built-in one-shot
// demonstrates the output format with the stock example; supply a custom
// template file for production-quality in-language examples.
PromptTemplate builtin_captioning_template(const LanguageTag& language,
                                           int n_paraphrases = 4);
PromptTemplate builtin_tst_template(const LanguageTag& language);
PromptTemplate builtin_captioning_korean();
PromptTemplate builtin_tst_french();

PromptTemplate load_template_file(const std::filesystem::path& path);

}  // namespace annotator
