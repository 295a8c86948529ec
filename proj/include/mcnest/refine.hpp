#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mcnest/llm.hpp"
#include "mcnest/prompts.hpp"

namespace mcnest {

/// Parsed refine response: {"thought": ..., "answer": ...}.
struct Refinement {
  std::string thought;
  std::string answer;
};

struct RewardPolicy {
  int reward_min = -100;
  int reward_max = 100;
  int reward_limit = 95;
  int excess_penalty = 5;
};

void validate(const RewardPolicy& policy);

struct RefineOptions {
  int retry_budget = 2;  // retries after the first attempt
  double refine_temperature = 0.7;
  double evaluate_temperature = 0.0;
  int max_tokens = 2048;
};

std::vector<Message> build_critique_prompt(const std::string& problem,
                                           const std::string& current_answer,
                                           const PromptSet& prompts = default_prompts());
std::vector<Message> build_refine_prompt(const std::string& problem,
                                         const std::string& current_answer,
                                         const std::string& critique,
                                         const PromptSet& prompts = default_prompts());
std::vector<Message> build_evaluate_prompt(const std::string& problem, const std::string& answer,
                                           const PromptSet& prompts = default_prompts());

/// Accepts either a whole-body JSON document or one fenced ```...``` block
/// wrapping it; anything else is handed to the JSON parser as-is.
std::string extract_json_payload(std::string_view body);

Refinement parse_refinement(std::string_view body);

/// First signed decimal integer token in the text, range-checked against
/// [reward_min, reward_max].
int parse_reward(std::string_view text, const RewardPolicy& policy = {});

/// Rewards above reward_limit lose excess_penalty; everything else passes
/// through unchanged.
int apply_reward_penalty(int reward, const RewardPolicy& policy);

/// Critique call followed by a refine call with the critique embedded.
/// Exactly two model calls when the refine response parses; malformed JSON
/// re-issues only the refine call up to the retry budget.
Refinement self_refine(ModelClient& model, const std::string& problem,
                       const std::string& current_answer,
                       const PromptSet& prompts = default_prompts(),
                       const RefineOptions& options = {});

/// One evaluate call per attempt; returns the penalized reward.
int self_evaluate(ModelClient& model, const std::string& problem, const std::string& answer,
                  const RewardPolicy& policy = {}, const PromptSet& prompts = default_prompts(),
                  const RefineOptions& options = {});

}  // namespace mcnest
