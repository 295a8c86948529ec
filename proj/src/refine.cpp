#include "mcnest/refine.hpp"

#include <cctype>

#include <json.hpp>

#include "mcnest/errors.hpp"

namespace mcnest {

namespace {

using nlohmann::json;

void require_nonempty_text(const std::string& text, const char* what) {
  if (text.empty()) {
    throw_error(ErrorCode::invalid_argument, std::string(what) + " must be non-empty");
  }
}

std::string scalar_to_text(const json& value) {
  if (value.is_string()) {
    return value.get<std::string>();
  }
  if (value.is_number() || value.is_boolean()) {
    return value.dump();
  }
  throw_error(ErrorCode::refine_parse, "field must be a string or number, got " + value.dump());
}

}  // namespace

void validate(const RewardPolicy& policy) {
  if (!(policy.reward_min < policy.reward_limit && policy.reward_limit <= policy.reward_max)) {
    throw_error(ErrorCode::config, "reward policy requires min < limit <= max");
  }
  if (policy.excess_penalty < 0) {
    throw_error(ErrorCode::config, "excess_penalty must be >= 0");
  }
}

std::vector<Message> build_critique_prompt(const std::string& problem,
                                           const std::string& current_answer,
                                           const PromptSet& prompts) {
  require_nonempty_text(problem, "problem");
  require_nonempty_text(current_answer, "current answer");
  return render_messages(prompts.critique,
                         {{"problem", problem}, {"current_answer", current_answer}});
}

std::vector<Message> build_refine_prompt(const std::string& problem,
                                         const std::string& current_answer,
                                         const std::string& critique, const PromptSet& prompts) {
  require_nonempty_text(problem, "problem");
  require_nonempty_text(current_answer, "current answer");
  return render_messages(prompts.refine, {{"problem", problem},
                                          {"current_answer", current_answer},
                                          {"critique", critique}});
}

std::vector<Message> build_evaluate_prompt(const std::string& problem, const std::string& answer,
                                           const PromptSet& prompts) {
  require_nonempty_text(problem, "problem");
  require_nonempty_text(answer, "answer");
  return render_messages(prompts.evaluate, {{"problem", problem}, {"answer", answer}});
}

std::string extract_json_payload(std::string_view body) {
  const std::size_t fence = body.find("```");
  if (fence == std::string_view::npos) {
    return std::string(body);
  }
  std::size_t start = fence + 3;
  // Skip an optional language tag such as ```json
  while (start < body.size() && body[start] != '\n' && body[start] != '{' && body[start] != '[') {
    ++start;
  }
  if (start < body.size() && body[start] == '\n') {
    ++start;
  }
  const std::size_t end = body.find("```", start);
  if (end == std::string_view::npos) {
    return std::string(body.substr(start));
  }
  return std::string(body.substr(start, end - start));
}

Refinement parse_refinement(std::string_view body) {
  json doc;
  try {
    doc = json::parse(extract_json_payload(body));
  } catch (const json::exception& ex) {
    throw_error(ErrorCode::refine_parse,
                std::string("refine response is not valid JSON: ") + ex.what());
  }
  if (!doc.is_object() || !doc.contains("thought") || !doc.contains("answer")) {
    throw_error(ErrorCode::refine_parse,
                "refine response must be an object with 'thought' and 'answer' keys");
  }
  Refinement refinement;
  refinement.thought = scalar_to_text(doc["thought"]);
  refinement.answer = scalar_to_text(doc["answer"]);
  if (refinement.answer.empty()) {
    throw_error(ErrorCode::refine_parse, "refined answer is empty");
  }
  return refinement;
}

int parse_reward(std::string_view text, const RewardPolicy& policy) {
  validate(policy);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    std::size_t digits = i;
    if (c == '+' || c == '-') {
      digits = i + 1;
    }
    if (digits < text.size() && std::isdigit(static_cast<unsigned char>(text[digits]))) {
      std::size_t end = digits;
      while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) {
        ++end;
      }
      long value = 0;
      try {
        value = std::stol(std::string(text.substr(i, end - i)));
      } catch (const std::exception&) {
        throw_error(ErrorCode::reward_parse,
                    "reward token out of integer range: " + std::string(text.substr(i, end - i)));
      }
      if (value < policy.reward_min || value > policy.reward_max) {
        throw_error(ErrorCode::reward_range,
                    "reward " + std::to_string(value) + " outside [" +
                        std::to_string(policy.reward_min) + ", " +
                        std::to_string(policy.reward_max) + "]");
      }
      return static_cast<int>(value);
    }
  }
  throw_error(ErrorCode::reward_parse,
              "no integer reward in model response: \"" + std::string(text.substr(0, 120)) + "\"");
}

int apply_reward_penalty(int reward, const RewardPolicy& policy) {
  validate(policy);
  if (reward > policy.reward_limit) {
    return reward - policy.excess_penalty;
  }
  return reward;
}

Refinement self_refine(ModelClient& model, const std::string& problem,
                       const std::string& current_answer, const PromptSet& prompts,
                       const RefineOptions& options) {
  const auto critique_messages = build_critique_prompt(problem, current_answer, prompts);
  std::string critique;
  try {
    critique =
        model.complete({critique_messages, options.max_tokens, options.refine_temperature, {}});
  } catch (const Error& e) {
    throw Error(e.code(), std::string("self_refine critique call: ") + e.what());
  }

  const auto refine_messages = build_refine_prompt(problem, current_answer, critique, prompts);
  std::string last_parse_failure;
  for (int attempt = 0; attempt <= options.retry_budget; ++attempt) {
    std::string response;
    try {
      response =
          model.complete({refine_messages, options.max_tokens, options.refine_temperature, {}});
    } catch (const Error& e) {
      throw Error(e.code(), std::string("self_refine refine call: ") + e.what());
    }
    try {
      return parse_refinement(response);
    } catch (const Error& e) {
      last_parse_failure = e.what();
    }
  }
  throw Error(ErrorCode::refine_parse, last_parse_failure + " (after " +
                                           std::to_string(options.retry_budget + 1) +
                                           " attempts)");
}

int self_evaluate(ModelClient& model, const std::string& problem, const std::string& answer,
                  const RewardPolicy& policy, const PromptSet& prompts,
                  const RefineOptions& options) {
  validate(policy);
  const auto messages = build_evaluate_prompt(problem, answer, prompts);
  std::string last_parse_failure;
  ErrorCode last_code = ErrorCode::reward_parse;
  for (int attempt = 0; attempt <= options.retry_budget; ++attempt) {
    std::string response;
    try {
      response = model.complete({messages, options.max_tokens, options.evaluate_temperature, {}});
    } catch (const Error& e) {
      throw Error(e.code(), std::string("self_evaluate call: ") + e.what());
    }
    try {
      return apply_reward_penalty(parse_reward(response, policy), policy);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::reward_parse && e.code() != ErrorCode::reward_range) {
        throw;
      }
      last_code = e.code();
      last_parse_failure = e.what();
    }
  }
  throw Error(last_code, last_parse_failure + " (after " +
                             std::to_string(options.retry_budget + 1) + " attempts)");
}

}  // namespace mcnest
