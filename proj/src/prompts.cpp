#include "mcnest/prompts.hpp"

#include <array>
#include <fstream>
#include <optional>
#include <sstream>

#include "mcnest/errors.hpp"

namespace mcnest {

namespace {

constexpr const char* kCritiqueSystem =
    "Provide a detailed and constructive critique to improve the answer. Highlight "
    "specific areas that need refinement or correction.";

constexpr const char* kCritiqueUser =
    "<problem>\n"
    "{problem}\n"
    "</problem>\n"
    "<current_answer>\n"
    "{current_answer}\n"
    "</current_answer>";

constexpr const char* kRefineSystem =
    "Instruction: Refine the answer based on the critique. Your refined answer should be a "
    "direct and concise solution to the problem.\n"
    "\n"
    "Additional Guidelines:\n"
    "- Your response should not refer to or discuss the criticisms.\n"
    "- Do not repeat the problem statement.\n"
    "\n"
    "JSON Response format:\n"
    "{\n"
    "    \"thought\": \"The thought process behind the answer.\",\n"
    "    \"answer\": \"A float representing the answer to the problem.\"\n"
    "}";

constexpr const char* kRefineUser =
    "<problem>\n"
    "{problem}\n"
    "</problem>\n"
    "<current_answer>\n"
    "{current_answer}\n"
    "</current_answer>\n"
    "<critique>\n"
    "{critique}\n"
    "</critique>";

constexpr const char* kEvaluateSystem =
    "Provide a reward score between -100 and 100 for the answer quality, using very strict "
    "standards. Do not give a full score above 95. Make sure the reward score is an integer. "
    "Return ONLY the score.";

constexpr const char* kEvaluateUser =
    "<problem>\n"
    "{problem}\n"
    "</problem>\n"
    "<answer>\n"
    "{answer}\n"
    "</answer>";

constexpr const char* kClassifyFieldSystem =
    "The user will provide a problem. Find the general field (such as number theory, "
    "geometry, etc) of this math problem. Only return the general field. Let's think step "
    "by step.";

constexpr const char* kClassifyUser =
    "<problem>\n"
    "{problem}\n"
    "</problem>";

constexpr const char* kClassifyDifficultySystem =
    "The user will provide a problem. Find the difficulty (Easy, Medium, or Hard) of this "
    "math problem. Only return the difficulty. Let's think step by step.";

constexpr const char* kQualitySystem =
    "You are a helpful assistant specializing in complex mathematics. Your task is "
    "objectively scoring mathematical solutions based on given criteria, ensuring "
    "reproducibility and fairness. Provide outputs strictly in the requested JSON format, "
    "avoiding unnecessary text.";

// The two "Insert ..." sentences are the substitution markers; everything else
// is rendered verbatim.
constexpr const char* kQualityUser =
    "Evaluate the quality of two solutions to a mathematical problem (Human Solution and "
    "MC-NEST Solution) based on the following criteria. Compare how these solutions differ "
    "across the criteria, highlighting key strengths and weaknesses for each solution. "
    "Return only the scores for each criterion with their names and a comparison summary in "
    "a JSON format.\n"
    "\n"
    "### Evaluation Criteria:\n"
    "\n"
    "1. **Completeness (100 points)**: Assess whether all necessary steps are included and "
    "logically connected. Comparison of completeness for Human and MC-NEST solutions.\n"
    "2. **Clarity (100 points)**: Check if the explanation and notation are easy to follow "
    "and unambiguous. Comparison of clarity for Human and MC-NEST solutions.\n"
    "3. **Optimality (100 points)**: Measures the efficiency and elegance of the solution. "
    "Comparison of optimality for Human and MC-NEST solutions.\n"
    "4. **Mathematical Rigor (100 points)**: Verifies if all assumptions, justifications, "
    "and definitions are stated explicitly and appropriately. Comparison of mathematical "
    "rigor for Human and MC-NEST solutions.\n"
    "\n"
    "### Inputs:\n"
    "1. **Human Solution**: \"Insert human-generated solution here.\"\n"
    "2. **MC-NEST Solution**: \"Insert LLM-generated MC-NEST solution here.\"\n"
    "\n"
    "### Output Format:\n"
    "Return the evaluation scores and comparison summary as a JSON object in the following "
    "structure:\n"
    "{\n"
    "    \"Scores\": {\n"
    "        \"MC-NEST Solution\": {\n"
    "            \"Completeness\": score,\n"
    "            \"Clarity\": score,\n"
    "            \"Optimality\": score,\n"
    "            \"Mathematical Rigor\": score\n"
    "        }\n"
    "    }\n"
    "}\n"
    "Generate the scores and comparisons based on the provided inputs and criteria. Use "
    "hypothetical scores and comparisons if specific solutions are not provided.";

constexpr std::array<const char*, 4> kPlaceholders = {"problem", "current_answer", "critique",
                                                      "answer"};

std::optional<std::string> read_file_if_exists(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return std::nullopt;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void apply_override(PromptTemplate& tmpl, const std::filesystem::path& dir) {
  if (auto system = read_file_if_exists(dir / (tmpl.name + "_system.txt"))) {
    tmpl.system = *system;
  }
  if (auto user = read_file_if_exists(dir / (tmpl.name + "_user.txt"))) {
    tmpl.user_pattern = *user;
  }
}

std::string substitute(std::string text, const std::map<std::string, std::string>& vars,
                       const std::string& template_name) {
  for (const char* name : kPlaceholders) {
    const std::string marker = std::string("{") + name + "}";
    std::size_t pos = text.find(marker);
    if (pos == std::string::npos) {
      continue;
    }
    const auto it = vars.find(name);
    if (it == vars.end()) {
      throw_error(ErrorCode::invalid_argument, "prompt template '" + template_name +
                                                   "' references unsupplied placeholder {" +
                                                   name + "}");
    }
    while (pos != std::string::npos) {
      text.replace(pos, marker.size(), it->second);
      pos = text.find(marker, pos + it->second.size());
    }
  }
  return text;
}

}  // namespace

const PromptSet& default_prompts() {
  static const PromptSet set{
      {"critique", kCritiqueSystem, kCritiqueUser},
      {"refine", kRefineSystem, kRefineUser},
      {"evaluate", kEvaluateSystem, kEvaluateUser},
      {"classify_field", kClassifyFieldSystem, kClassifyUser},
      {"classify_difficulty", kClassifyDifficultySystem, kClassifyUser},
      {"quality", kQualitySystem, kQualityUser},
      "Let's think step by step.",
  };
  return set;
}

PromptSet load_prompt_overrides(const std::filesystem::path& dir) {
  PromptSet set = default_prompts();
  if (dir.empty()) {
    return set;
  }
  if (!std::filesystem::is_directory(dir)) {
    throw_error(ErrorCode::io, "prompt override directory not found: " + dir.string());
  }
  apply_override(set.critique, dir);
  apply_override(set.refine, dir);
  apply_override(set.evaluate, dir);
  apply_override(set.classify_field, dir);
  apply_override(set.classify_difficulty, dir);
  apply_override(set.quality, dir);
  return set;
}

std::vector<Message> render_messages(const PromptTemplate& tmpl,
                                     const std::map<std::string, std::string>& vars) {
  std::vector<Message> messages;
  if (!tmpl.system.empty()) {
    messages.push_back({"system", substitute(tmpl.system, vars, tmpl.name)});
  }
  messages.push_back({"user", substitute(tmpl.user_pattern, vars, tmpl.name)});
  return messages;
}

}  // namespace mcnest
