#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcnest/errors.hpp"
#include "mcnest/policy.hpp"
#include "mcnest/refine.hpp"
#include "mcnest/tree.hpp"

namespace mcnest {

enum class InitStrategy { dummy, zero_shot_cot };

const char* to_string(InitStrategy strategy) noexcept;
std::optional<InitStrategy> parse_init_strategy(std::string_view text) noexcept;

struct SearchConfig {
  int rollouts = 4;
  SelectionPolicy policy = SelectionPolicy::importance_sampling;
  UctParams uct;
  int max_children = 2;
  RewardPolicy reward;
  InitStrategy init_strategy = InitStrategy::dummy;
  std::uint64_t seed = 0;
  int retry_budget = 2;
  bool strict_fully_expanded = false;
  bool reeval_on_visit = false;
  bool continue_on_error = false;
};

void validate(const SearchConfig& config);
nlohmann::ordered_json config_to_json(const SearchConfig& config);

struct RolloutRecord {
  int rollout = 0;
  NodeId selected = 0;
  NodeId child = 0;
  double reward = 0.0;
  std::optional<double> draw;  // uniform draw consumed by a sampling policy
  int candidate_count = 0;
};

struct SearchResult {
  std::string final_answer;
  NodeId final_node = 0;
  SearchTree tree;
  std::vector<RolloutRecord> trace;
  long long model_calls = 0;
  std::chrono::milliseconds elapsed{0};
};

/// A rollout failure. Keeps the cause's error code and carries whatever part
/// of the search completed, so callers can persist the partial trace.
class SearchError : public Error {
 public:
  SearchError(ErrorCode code, const std::string& message, std::shared_ptr<SearchResult> partial)
      : Error(code, message), partial_(std::move(partial)) {}

  const std::shared_ptr<SearchResult>& partial() const noexcept { return partial_; }

 private:
  std::shared_ptr<SearchResult> partial_;
};

/// Single-node tree. The dummy strategy seeds the root with "I don't know.";
/// zero_shot_cot asks the model for a step-by-step answer first.
SearchTree initialize_root(const std::string& problem, InitStrategy strategy, ModelClient* model,
                           const PromptSet& prompts = default_prompts());

/// Refines the node's answer, evaluates the refinement and appends it as a
/// child. The tree is untouched when refine or evaluate fails. With
/// `enforce_open` the node must not be fully expanded.
NodeId expand(SearchTree& tree, NodeId node, const std::string& problem, ModelClient& model,
              const SearchConfig& config, const PromptSet& prompts = default_prompts(),
              bool enforce_open = true);

/// Increments the visit count of `from`, then walks the parent chain updating
/// each ancestor p: q(p) <- (q(p) + max child q) / 2 and visits(p) + 1.
void backpropagate(SearchTree& tree, NodeId from);

SearchResult run_search(const std::string& problem, const SearchConfig& config,
                        ModelClient& model, const PromptSet& prompts = default_prompts());

/// Persisted run record: {problem_id, config, final_answer, final_node, tree,
/// trace, model_calls, elapsed_ms} plus an "error" object for partial runs.
nlohmann::ordered_json run_record_json(const std::string& problem_id, const SearchConfig& config,
                                       const SearchResult& result,
                                       const std::optional<std::string>& error_code = {},
                                       const std::optional<std::string>& error_message = {});

}  // namespace mcnest
