#include "annotator/prompt.hpp"

#include <utility>

#include "json.hpp"

#include "annotator/errors.hpp"
#include "annotator/io.hpp"
#include "annotator/parser.hpp"
#include "annotator/text.hpp"

namespace annotator {

namespace {

using nlohmann::json;

constexpr const char* kSafetyDirective =
    "You must not generate any biased, offensive, or inappropriate "
    "paraphrases.";

constexpr const char* kCaptioningSystemText = R"(You are a helpful assistant.
User will ask you to generate paraphrases of a sentence.
You will generate paraphrases of the sentence and its translation in {{language}} language.
{{style_directives}}
{{generation_instruction}}
Output sentence should be neutral expression. You should not generate phrases like `You will see' or `You will find'.
Output sentence will be complete, natural and fluent.
Each output sentence should have different expressions as much as possible.
You will not generate the same sentence as the input sentence.
{{safety_directives}}
User input example: {{one_shot_input}}
Your output example:
{{one_shot_output}}
You will not say `Sure! here's the output' or any similar phrases.
You will not say `I don't know' or any similar phrases.
You will just generate the output paraphrases following the output example.)";

constexpr const char* kTstSystemText =
    R"(You are a helpful assistant. You are fluent in {{language}} and English.
You will generate paraphrases of formal and informal sentences and their translations into {{language}}.
{{style_directives}}
Output sentence should be neutral expression.
Output sentence will be complete, natural and fluent.
Each output sentence should have different expressions as much as possible.
You will not generate the same sentence as the input sentence.
{{safety_directives}}
You will not say `Sure! here's the output' or any similar phrases.
You will not say `I don't know' or any similar phrases.
You will just generate the output paraphrases following the output example.
{{one_shot_input}}
{{one_shot_output}})";

constexpr const char* kCaptioningExampleInput =
    "The men at bat readies to swing at the pitch while the umpire looks on.";

const std::vector<std::pair<std::string, std::string>>&
captioning_example_pairs() {
  static const std::vector<std::pair<std::string, std::string>> pairs = {
      {"The male players at the bat ready to hit the ball as the umpire "
       "watches attentively.",
       "심판이 주의 깊게 지켜보는 가운데 배트를 든 남자 선수들이 공을 칠 "
       "준비를 하고 있다."},
      {"The male batters at the bat prepare to hit the pitch as the umpire "
       "stands watch.",
       "타석에 선 남성 타자들이 심판이 지켜보는 가운데 타구를 칠 준비를 하고 "
       "있다."},
      {"The batters at the plate are poised to swing as the umpire keeps an "
       "eye on them.",
       "타석에 있는 타자가 심판이 지켜보는 가운데 스윙할 자세를 취한다."},
      {"The hitters at the plate wait for themselves to take their swings at "
       "the ball while the umpire looks on.",
       "타석에 선 타자들은 심판이 지켜보는 동안 공을 향해 스윙할 준비를 "
       "한다."},
  };
  return pairs;
}

constexpr const char* kCaptioningExampleTranslation =
    "타석에 있는 남자들이 심판이 지켜보는 동안 스윙할 준비를 한다.";

std::string captioning_example_output(int n_paraphrases) {
  if (n_paraphrases < 0 ||
      n_paraphrases > static_cast<int>(captioning_example_pairs().size())) {
    throw ConfigError(
        "built-in captioning templates demonstrate 0..4 paraphrases; supply "
        "a custom template for other counts");
  }
  std::string out = std::string("Translation: ") + kCaptioningExampleTranslation;
  for (int i = 0; i < n_paraphrases; ++i) {
    const auto& [english, korean] = captioning_example_pairs()[i];
    out += "\nParaphrase " + std::to_string(i + 1) + ": " + english + " / " +
           korean;
  }
  return out;
}

constexpr const char* kTstExampleInput =
    R"([Input Sentence]
Formal 1: Then kiss her, brother; that works every time.
Informal 1: Then kiss her;) works every time bro!!!!)";

constexpr const char* kTstExampleOutput =
    R"([Paraphrase]
Formal 2: Subsequently, kiss her, sibling; that method proves effective on each occasion.
Informal 2: So, just give her a smooch, bro! It seriously works every single time ;)
[Translation in {{language}}]
Formal 1: Alors embrasse-la, mon frère. Cela fonctionne à chaque fois.
Informal 1: Alors embrasse-la ;) ça marche à chaque fois frérot!!!!
Formal 2: Ensuite, embrasse-la, frère ; cette méthode fonctionne à chaque fois.
Informal 2: Alors, donne-lui un bisou, mec ! Ça marche à tous les coups ;))";

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const std::string& line : lines) {
    if (!out.empty()) out += '\n';
    out += line;
  }
  return out;
}

std::string generation_instruction(const PromptTemplate& t) {
  const std::string& language = t.target_language.display_name;
  if (t.task == Task::Captioning) {
    if (t.n_paraphrases == 0) {
      return "You will generate a translation of input sentence in " +
             language + ".";
    }
    return "You will generate a translation of input sentence in " + language +
           ", and also generate " + std::to_string(t.n_paraphrases) +
           " paraphrases and its translation in " + language + ".";
  }
  return "You will generate a translation of the input pair in " + language +
         " and a paraphrase of the pair with its translation.";
}

std::string substitute(const PromptTemplate& t, std::string_view text) {
  const std::map<std::string, std::string, std::less<>> values = {
      {"language", t.target_language.display_name},
      {"n_paraphrases", std::to_string(t.n_paraphrases)},
      {"generation_instruction", generation_instruction(t)},
      {"style_directives", join_lines(t.style_directives)},
      {"safety_directives", join_lines(t.safety_directives)},
      {"one_shot_input", t.one_shot.input},
      {"one_shot_output", t.one_shot.output},
  };

  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find("{{", pos);
    if (open == std::string_view::npos) {
      out += text.substr(pos);
      break;
    }
    const std::size_t close = text.find("}}", open + 2);
    if (close == std::string_view::npos) {
      throw MalformedTemplateError("unterminated placeholder in template \"" +
                                   t.id + "\"");
    }
    const std::string name =
        trim_copy(text.substr(open + 2, close - open - 2));
    const auto it = values.find(name);
    if (it == values.end()) {
      throw MalformedTemplateError("unknown placeholder {{" + name +
                                   "}} in template \"" + t.id + "\"");
    }
    out += text.substr(pos, open - pos);
    pos = close + 2;
    // A placeholder alone on its line vanishes with the line when empty.
    const bool own_line = (open == 0 || text[open - 1] == '\n') &&
                          (pos == text.size() || text[pos] == '\n');
    if (it->second.empty() && own_line) {
      if (pos < text.size()) ++pos;  // swallow the line's newline
      continue;
    }
    out += it->second;
  }
  return out;
}

}  // namespace

std::string render_system_message(const PromptTemplate& t) {
  return substitute(t, t.system_text);
}

std::string render_one_shot_output(const PromptTemplate& t) {
  return substitute(t, t.one_shot.output);
}

void validate_template(const PromptTemplate& t) {
  if (t.id.empty()) throw MalformedTemplateError("template id is empty");
  make_language(t.target_language.code, t.target_language.display_name);
  if (t.n_paraphrases < 0) {
    throw MalformedTemplateError("n_paraphrases must be non-negative");
  }
  if (t.safety_directives.empty()) {
    throw MalformedTemplateError("template \"" + t.id +
                                 "\" lacks safety directives");
  }
  if (t.one_shot.input.empty() || t.one_shot.output.empty()) {
    throw MalformedTemplateError("template \"" + t.id +
                                 "\" lacks a one-shot example");
  }

  const std::string system_message = render_system_message(t);
  for (const std::string& directive : t.safety_directives) {
    if (system_message.find(directive) == std::string::npos) {
      throw MalformedTemplateError("template \"" + t.id +
                                   "\" drops a safety directive");
    }
  }

  // The one-shot must demonstrate exactly the surface format the parser
  // accepts; templates and parser are co-validated here.
  const std::string example = render_one_shot_output(t);
  if (t.task == Task::Captioning) {
    const auto parsed = parse_captioning(example, t.n_paraphrases);
    if (!parsed.ok()) {
      throw MalformedTemplateError("template \"" + t.id +
                                   "\" one-shot does not parse: " +
                                   parsed.error->message());
    }
  } else {
    if (t.n_paraphrases != 1) {
      throw MalformedTemplateError(
          "style-transfer output format supports exactly one extra pair");
    }
    const auto parsed = parse_tst(example, t.target_language.display_name);
    if (!parsed.ok()) {
      throw MalformedTemplateError("template \"" + t.id +
                                   "\" one-shot does not parse: " +
                                   parsed.error->message());
    }
    const std::string input = substitute(t, t.one_shot.input);
    if (!starts_with_insensitive(trim(input), "[input sentence]")) {
      throw MalformedTemplateError("template \"" + t.id +
                                   "\" one-shot input lacks the "
                                   "[Input Sentence] block");
    }
  }
}

PromptBundle build_captioning_prompt(const PromptTemplate& t,
                                     const Annotation& gold) {
  if (t.task != Task::Captioning) {
    throw TaskMismatchError("template \"" + t.id +
                            "\" is not a captioning template");
  }
  if (gold.language.code != "en") {
    throw NonEnglishGoldError("gold caption must be English, got \"" +
                              gold.language.code + "\"");
  }
  PromptBundle bundle;
  bundle.system_message = render_system_message(t);
  bundle.user_message = "Input: " + gold.text;
  bundle.template_id = t.id;
  return bundle;
}

PromptBundle build_tst_prompt(const PromptTemplate& t, const StylePair& pair) {
  if (t.task != Task::StyleTransfer) {
    throw TaskMismatchError("template \"" + t.id +
                            "\" is not a style-transfer template");
  }
  if (pair.formal.language.code != "en" || pair.informal.language.code != "en") {
    throw NonEnglishGoldError("gold style pair must be English");
  }
  PromptBundle bundle;
  bundle.system_message = render_system_message(t);
  bundle.user_message = "[Input Sentence]\nFormal 1: " + pair.formal.text +
                        "\nInformal 1: " + pair.informal.text;
  bundle.template_id = t.id;
  return bundle;
}

void TemplateRegistry::register_template(PromptTemplate t) {
  if (templates_.count(t.id)) {
    throw DuplicateTemplateIdError(t.id);
  }
  validate_template(t);
  templates_.emplace(t.id, std::move(t));
}

bool TemplateRegistry::contains(const std::string& id) const {
  return templates_.count(id) > 0;
}

const PromptTemplate& TemplateRegistry::get(const std::string& id) const {
  const auto it = templates_.find(id);
  if (it == templates_.end()) {
    throw ConfigError("unknown template \"" + id + "\"");
  }
  return it->second;
}

std::vector<std::string> TemplateRegistry::ids() const {
  std::vector<std::string> out;
  out.reserve(templates_.size());
  for (const auto& [id, t] : templates_) out.push_back(id);
  return out;
}

TemplateRegistry TemplateRegistry::with_builtins() {
  TemplateRegistry registry;
  registry.register_template(builtin_captioning_korean());
  registry.register_template(builtin_tst_french());
  registry.register_template(
      builtin_captioning_template(LanguageTag{"ko", "Korean"}));
  registry.register_template(builtin_tst_template(LanguageTag{"fr", "French"}));
  return registry;
}

PromptTemplate builtin_captioning_template(const LanguageTag& language,
                                           int n_paraphrases) {
  PromptTemplate t;
  t.id = "captioning";
  t.task = Task::Captioning;
  t.target_language = language;
  t.n_paraphrases = n_paraphrases;
  t.system_text = kCaptioningSystemText;
  t.one_shot.input = kCaptioningExampleInput;
  t.one_shot.output = captioning_example_output(n_paraphrases);
  t.safety_directives = {kSafetyDirective};
  return t;
}

PromptTemplate builtin_captioning_korean() {
  PromptTemplate t = builtin_captioning_template(LanguageTag{"ko", "Korean"});
  t.id = "captioning-ko";
  t.style_directives = {
      "VERY IMPORTANT: You must speak `-하다' form in Korean. You must not "
      "use `-합니다' or other forms. 한국어 문장을 번역하여 생성할 때, 반드시 "
      "`-하다' 체를 사용하여야 한다. `-합니다', `-입니다' 등의 표현을 절대 "
      "사용하지 않는다."};
  return t;
}

PromptTemplate builtin_tst_template(const LanguageTag& language) {
  PromptTemplate t;
  t.id = "tst";
  t.task = Task::StyleTransfer;
  t.target_language = language;
  t.n_paraphrases = 1;
  t.system_text = kTstSystemText;
  t.one_shot.input = kTstExampleInput;
  t.one_shot.output = kTstExampleOutput;
  t.safety_directives = {kSafetyDirective};
  return t;
}

PromptTemplate builtin_tst_french() {
  PromptTemplate t = builtin_tst_template(LanguageTag{"fr", "French"});
  t.id = "tst-fr";
  return t;
}

PromptTemplate load_template_file(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& ex) {
    throw MalformedTemplateError(std::string("invalid template JSON: ") +
                                 ex.what());
  }
  PromptTemplate t;
  try {
    t.id = doc.at("id").get<std::string>();
    t.task = task_from_name(doc.at("task").get<std::string>());
    const json& lang = doc.at("target_language");
    t.target_language = make_language(lang.at("code").get<std::string>(),
                                      lang.at("display_name").get<std::string>());
    t.n_paraphrases = doc.value("n_paraphrases", t.task == Task::Captioning ? 4 : 1);
    t.system_text = doc.at("system_text").get<std::string>();
    t.one_shot.input = doc.at("one_shot").at("input").get<std::string>();
    t.one_shot.output = doc.at("one_shot").at("output").get<std::string>();
    if (doc.contains("style_directives")) {
      t.style_directives =
          doc.at("style_directives").get<std::vector<std::string>>();
    }
    if (doc.contains("safety_directives")) {
      t.safety_directives =
          doc.at("safety_directives").get<std::vector<std::string>>();
    }
  } catch (const json::exception& ex) {
    throw MalformedTemplateError(std::string("template field error: ") +
                                 ex.what());
  }
  validate_template(t);
  return t;
}

}  // namespace annotator
