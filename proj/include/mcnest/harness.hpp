#pragma once

#include <filesystem>
#include <functional>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mcnest/engine.hpp"
#include "mcnest/llm.hpp"

namespace mcnest {

enum class Domain { algebra, combinatorics, geometry, number_theory, other };
enum class Difficulty { easy, medium, hard };

const char* to_string(Domain domain) noexcept;
const char* to_string(Difficulty difficulty) noexcept;
std::optional<Domain> parse_domain(std::string_view text) noexcept;
std::optional<Difficulty> parse_difficulty(std::string_view text) noexcept;

/// One benchmark item.
struct Problem {
  std::string id;
  std::string statement;
  std::string expected_answer;
  std::optional<Domain> domain;
  std::optional<Difficulty> difficulty;
  std::string source;
};

/// JSON-lines loader; one problem object per line. Rejects malformed lines
/// (with the line number) and duplicate ids.
std::vector<Problem> load_problems(const std::filesystem::path& path);
std::vector<Problem> parse_problems(std::istream& in, const std::string& origin);

/// Last numeric literal in the text after stripping \boxed{...} wrappers and
/// '$' signs. Empty when there is none.
std::optional<double> last_number(std::string_view text);

/// Numeric comparison of the predicted text's final number against a numeric
/// expected answer (|a-b| <= 1e-6 * max(1, |b|)); non-numeric expected answers
/// fall back to a whitespace/case-normalized exact match.
bool match_answer(std::string_view predicted, std::string_view expected);

enum class BaselineStyle { zs, fs3, fs5, fs10, zscot };
const char* to_string(BaselineStyle style) noexcept;
std::optional<BaselineStyle> parse_baseline_style(std::string_view text) noexcept;
int exemplar_count(BaselineStyle style) noexcept;

struct EvalOutcome {
  std::string problem_id;
  std::string predicted;
  bool correct = false;
  std::string method;
  std::optional<int> rollouts;
  std::optional<SelectionPolicy> policy;
};

nlohmann::ordered_json outcome_to_json(const EvalOutcome& outcome);

/// T_correct / N.
double pass_at_1(std::span<const EvalOutcome> outcomes);

/// Single prompting call in the given style, scored with match_answer. Few-
/// shot styles need at least as many exemplars as the style names.
EvalOutcome run_baseline(const Problem& problem, BaselineStyle style, ModelClient& model,
                         std::span<const Problem> exemplars = {},
                         const PromptSet& prompts = default_prompts());

struct SweepCell {
  int rollout = 0;
  SelectionPolicy policy = SelectionPolicy::greedy;
  int solved = 0;
  int total = 0;
};

struct SweepReport {
  std::vector<SweepCell> cells;
  std::vector<EvalOutcome> outcomes;
  std::vector<std::string> errors;  // "<problem_id>@<rollout>: message"
};

/// Runs fn(i) for i in [0, count) across a small worker pool; the first
/// exception (if any) is rethrown after all workers drain.
void parallel_for_items(std::size_t count, int workers,
                        const std::function<void(std::size_t)>& fn);

/// Runs run_search per (rollout value, problem) and counts solved problems.
/// Per-problem failures are recorded, not fatal.
SweepReport rollout_sweep(std::span<const Problem> problems, std::span<const int> rollout_values,
                          const SearchConfig& config, ModelClient& model, int workers = 1,
                          const PromptSet& prompts = default_prompts());

std::string sweep_csv(std::span<const SweepCell> cells);
nlohmann::ordered_json sweep_json(const SweepReport& report);

struct Classification {
  Domain domain = Domain::other;
  std::optional<Difficulty> difficulty;
};

/// Two prompt calls (field, then difficulty) parsed into the closed label
/// sets. Unknown labels map to Other / unset, or raise in strict mode.
Classification classify_problem(ModelClient& model, const Problem& problem, bool strict = false,
                                const PromptSet& prompts = default_prompts());

struct QualityScores {
  double completeness = 0.0;
  double clarity = 0.0;
  double optimality = 0.0;
  double rigor = 0.0;
};

/// Issues the quality-scoring prompt `repeats` times and returns per-criterion
/// means rounded to two decimals.
QualityScores quality_check(ModelClient& model, const Problem& problem,
                            const std::string& human_solution,
                            const std::string& mcnest_solution, int repeats = 3,
                            const PromptSet& prompts = default_prompts());

}  // namespace mcnest
