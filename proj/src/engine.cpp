#include "mcnest/engine.hpp"

#include <algorithm>
#include <limits>

namespace mcnest {

namespace {

constexpr const char* kDummyAnswer = "I don't know.";

RefineOptions refine_options(const SearchConfig& config) {
  RefineOptions options;
  options.retry_budget = config.retry_budget;
  return options;
}

/// UCT inputs for one candidate. The root has no parent, so its parent-visit
/// count falls back to its own (floored at 1 to keep ln defined).
int parent_visits_for(const SearchTree& tree, NodeId id) {
  const Node& n = tree.node(id);
  if (n.parent) {
    return std::max(1, tree.node(*n.parent).visits);
  }
  return std::max(1, n.visits);
}

std::vector<CandidateScore> score_candidates(const SearchTree& tree,
                                             const std::vector<NodeId>& candidates,
                                             const UctParams& params) {
  const int n = static_cast<int>(candidates.size());
  const std::vector<double> pis = uniform_distribution(n);
  std::vector<CandidateScore> scores;
  scores.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Node& node = tree.node(candidates[i]);
    scores.push_back({node.id,
                      uct(node.q, node.visits, parent_visits_for(tree, node.id), params, n),
                      pis[i]});
  }
  return scores;
}

}  // namespace

const char* to_string(InitStrategy strategy) noexcept {
  return strategy == InitStrategy::dummy ? "dummy" : "zero_shot_cot";
}

std::optional<InitStrategy> parse_init_strategy(std::string_view text) noexcept {
  if (text == "dummy") return InitStrategy::dummy;
  if (text == "zero_shot_cot" || text == "zscot") return InitStrategy::zero_shot_cot;
  return std::nullopt;
}

void validate(const SearchConfig& config) {
  if (config.rollouts < 1) {
    throw_error(ErrorCode::config, "rollouts must be >= 1");
  }
  if (config.max_children < 1) {
    throw_error(ErrorCode::config, "max_children must be >= 1");
  }
  if (!(config.uct.exploration_c > 0.0)) {
    throw_error(ErrorCode::config, "exploration_c must be positive");
  }
  if (!(config.uct.epsilon > 0.0)) {
    throw_error(ErrorCode::config, "epsilon must be positive");
  }
  if (config.retry_budget < 0) {
    throw_error(ErrorCode::config, "retry_budget must be >= 0");
  }
  validate(config.reward);
}

nlohmann::ordered_json config_to_json(const SearchConfig& config) {
  nlohmann::ordered_json doc;
  doc["rollouts"] = config.rollouts;
  doc["policy"] = to_string(config.policy);
  doc["uct"] = {{"exploration_c", config.uct.exploration_c},
                {"epsilon", config.uct.epsilon},
                {"uniform_bonus", config.uct.uniform_bonus}};
  doc["max_children"] = config.max_children;
  doc["reward"] = {{"reward_min", config.reward.reward_min},
                   {"reward_max", config.reward.reward_max},
                   {"reward_limit", config.reward.reward_limit},
                   {"excess_penalty", config.reward.excess_penalty}};
  doc["init_strategy"] = to_string(config.init_strategy);
  doc["seed"] = config.seed;
  doc["retry_budget"] = config.retry_budget;
  doc["strict_fully_expanded"] = config.strict_fully_expanded;
  doc["reeval_on_visit"] = config.reeval_on_visit;
  doc["continue_on_error"] = config.continue_on_error;
  return doc;
}

SearchTree initialize_root(const std::string& problem, InitStrategy strategy, ModelClient* model,
                           const PromptSet& prompts) {
  SearchTree tree;
  if (strategy == InitStrategy::dummy) {
    tree.create_node(kDummyAnswer, std::nullopt, std::nullopt);
    return tree;
  }

  if (model == nullptr) {
    throw_error(ErrorCode::init_failure, "zero_shot_cot initialization needs a model client");
  }
  if (problem.empty()) {
    throw_error(ErrorCode::invalid_argument, "problem must be non-empty");
  }
  std::string answer;
  try {
    answer = model->complete(
        {{{"user", problem + "\n\n" + prompts.zero_shot_cot_suffix}}, 2048, 0.7, {}});
  } catch (const Error& e) {
    throw Error(ErrorCode::init_failure,
                std::string("zero_shot_cot initialization failed: ") + e.what());
  }
  tree.create_node(std::move(answer), std::nullopt, std::nullopt);
  return tree;
}

NodeId expand(SearchTree& tree, NodeId node, const std::string& problem, ModelClient& model,
              const SearchConfig& config, const PromptSet& prompts, bool enforce_open) {
  if (enforce_open && tree.is_fully_expanded(node, config.max_children,
                                             config.strict_fully_expanded)) {
    throw_error(ErrorCode::precondition,
                "node " + std::to_string(node) + " is fully expanded");
  }

  const std::string current_answer = tree.node(node).answer;
  const Refinement refinement =
      self_refine(model, problem, current_answer, prompts, refine_options(config));
  const int reward =
      self_evaluate(model, problem, refinement.answer, config.reward, prompts,
                    refine_options(config));

  const NodeId child = tree.create_node(refinement.answer, refinement.thought, node);
  Node& c = tree.node(child);
  c.q = static_cast<double>(reward);
  c.eval_sum = static_cast<double>(reward);
  c.eval_count = 1;
  return child;
}

void backpropagate(SearchTree& tree, NodeId from) {
  Node& start = tree.node(from);
  start.visits += 1;

  std::optional<NodeId> current = start.parent;
  while (current) {
    Node& parent = tree.node(*current);
    double best_child_q = -std::numeric_limits<double>::infinity();
    for (NodeId child : parent.children) {
      best_child_q = std::max(best_child_q, tree.node(child).q);
    }
    parent.q = (parent.q + best_child_q) / 2.0;
    parent.visits += 1;
    current = parent.parent;
  }
}

SearchResult run_search(const std::string& problem, const SearchConfig& config,
                        ModelClient& model, const PromptSet& prompts) {
  validate(config);
  const auto started = std::chrono::steady_clock::now();
  const long long calls_before = model.call_count();

  SearchResult result;
  auto fail = [&](ErrorCode code, const std::string& message) -> SearchError {
    auto partial = std::make_shared<SearchResult>();
    partial->tree = result.tree;
    partial->trace = result.trace;
    if (!partial->tree.empty()) {
      partial->final_node = partial->tree.best_final_node();
      partial->final_answer = partial->tree.node(partial->final_node).answer;
    }
    partial->model_calls = model.call_count() - calls_before;
    partial->elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    return SearchError(code, message, std::move(partial));
  };

  try {
    result.tree = initialize_root(problem, config.init_strategy, &model, prompts);
  } catch (const Error& e) {
    throw fail(e.code(), e.what());
  }

  Rng rng(config.seed);
  for (int rollout = 1; rollout <= config.rollouts; ++rollout) {
    try {
      const std::vector<NodeId> candidates =
          result.tree.collect_candidates(config.max_children, config.strict_fully_expanded);
      // collect_candidates falls back to the root when every node is fully
      // expanded; expansion must still proceed there.
      const bool fallback_to_root =
          candidates.size() == 1 && candidates[0] == result.tree.root_id() &&
          result.tree.is_fully_expanded(candidates[0], config.max_children,
                                        config.strict_fully_expanded);

      const std::vector<CandidateScore> scores =
          score_candidates(result.tree, candidates, config.uct);

      NodeId selected = 0;
      std::optional<double> draw;
      switch (config.policy) {
        case SelectionPolicy::greedy:
          selected = select_greedy(scores);
          break;
        case SelectionPolicy::importance_sampling: {
          const double u = rng.next_uniform();
          selected = select_importance_sampling(scores, u);
          draw = u;
          break;
        }
        case SelectionPolicy::pairwise_importance_sampling: {
          const double u = rng.next_uniform();
          selected = select_pairwise(scores, u);
          draw = u;
          break;
        }
      }

      bool reevaluated = false;
      if (config.reeval_on_visit && result.tree.node(selected).eval_count > 0) {
        const int reward = self_evaluate(model, problem, result.tree.node(selected).answer,
                                         config.reward, prompts, refine_options(config));
        Node& n = result.tree.node(selected);
        n.eval_sum += static_cast<double>(reward);
        n.eval_count += 1;
        n.q = n.eval_sum / static_cast<double>(n.eval_count);
        reevaluated = true;
      }

      // Openness was established at selection time; re-evaluation may have
      // moved the node's q past a child's, which must not abort the rollout.
      const NodeId child = expand(result.tree, selected, problem, model, config, prompts,
                                  /*enforce_open=*/!fallback_to_root && !reevaluated);
      backpropagate(result.tree, child);

      result.trace.push_back({rollout, selected, child, result.tree.node(child).q, draw,
                              static_cast<int>(candidates.size())});
    } catch (const Error& e) {
      throw fail(e.code(), "rollout " + std::to_string(rollout) + ": " + e.what());
    }
  }

  result.final_node = result.tree.best_final_node();
  result.final_answer = result.tree.node(result.final_node).answer;
  result.model_calls = model.call_count() - calls_before;
  result.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  return result;
}

nlohmann::ordered_json run_record_json(const std::string& problem_id, const SearchConfig& config,
                                       const SearchResult& result,
                                       const std::optional<std::string>& error_code,
                                       const std::optional<std::string>& error_message) {
  nlohmann::ordered_json doc;
  doc["problem_id"] = problem_id;
  doc["config"] = config_to_json(config);
  doc["final_answer"] = result.final_answer;
  doc["final_node"] = result.final_node;
  doc["tree"] = result.tree.to_json();
  doc["trace"] = nlohmann::ordered_json::array();
  for (const RolloutRecord& r : result.trace) {
    nlohmann::ordered_json jr;
    jr["rollout"] = r.rollout;
    jr["selected"] = r.selected;
    jr["child"] = r.child;
    jr["reward"] = r.reward;
    if (r.draw) {
      jr["draw"] = *r.draw;
    } else {
      jr["draw"] = nullptr;
    }
    jr["candidate_count"] = r.candidate_count;
    doc["trace"].push_back(std::move(jr));
  }
  doc["model_calls"] = result.model_calls;
  doc["elapsed_ms"] = result.elapsed.count();
  if (error_code) {
    doc["error"] = {{"code", *error_code}, {"message", error_message.value_or("")}};
  }
  return doc;
}

}  // namespace mcnest
