#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mcnest/llm_types.hpp"

namespace mcnest {

/// A named two-part prompt. `user_pattern` may reference the placeholders
/// {problem}, {current_answer}, {critique} and {answer}; every placeholder
/// that appears must be supplied at render time.
struct PromptTemplate {
  std::string name;
  std::string system;
  std::string user_pattern;
};

struct PromptSet {
  PromptTemplate critique;
  PromptTemplate refine;
  PromptTemplate evaluate;
  PromptTemplate classify_field;
  PromptTemplate classify_difficulty;
  PromptTemplate quality;
  std::string zero_shot_cot_suffix;
};

/// Built-in prompt texts. The same texts live as assets under assets/prompts/
/// and must stay byte-identical to the embedded copies.
const PromptSet& default_prompts();

/// Returns the defaults with any template whose <name>_system.txt /
/// <name>_user.txt files exist in `dir` replaced by the file contents.
PromptSet load_prompt_overrides(const std::filesystem::path& dir);

/// Substitutes placeholders and returns the [system, user] message pair.
std::vector<Message> render_messages(const PromptTemplate& tmpl,
                                     const std::map<std::string, std::string>& vars);

}  // namespace mcnest
