#include "mcnest.h"

#include <cstring>
#include <memory>
#include <string>

#include "mcnest/commands.hpp"
#include "mcnest/engine.hpp"
#include "mcnest/errors.hpp"
#include "mcnest/llm.hpp"

namespace {

thread_local std::string t_last_error;

mcnest_status map_code(mcnest::ErrorCode code) {
  switch (code) {
    case mcnest::ErrorCode::ok:
      return MCNEST_OK;
    case mcnest::ErrorCode::invalid_argument:
      return MCNEST_ERR_INVALID_ARGUMENT;
    case mcnest::ErrorCode::structure:
      return MCNEST_ERR_STRUCTURE;
    case mcnest::ErrorCode::precondition:
      return MCNEST_ERR_PRECONDITION;
    case mcnest::ErrorCode::config:
      return MCNEST_ERR_CONFIG;
    case mcnest::ErrorCode::parse:
      return MCNEST_ERR_PARSE;
    case mcnest::ErrorCode::validation:
      return MCNEST_ERR_VALIDATION;
    case mcnest::ErrorCode::refine_parse:
      return MCNEST_ERR_REFINE_PARSE;
    case mcnest::ErrorCode::reward_parse:
      return MCNEST_ERR_REWARD_PARSE;
    case mcnest::ErrorCode::reward_range:
      return MCNEST_ERR_REWARD_RANGE;
    case mcnest::ErrorCode::quality_parse:
      return MCNEST_ERR_QUALITY_PARSE;
    case mcnest::ErrorCode::transport:
      return MCNEST_ERR_TRANSPORT;
    case mcnest::ErrorCode::timeout:
      return MCNEST_ERR_TIMEOUT;
    case mcnest::ErrorCode::transcript:
      return MCNEST_ERR_TRANSCRIPT;
    case mcnest::ErrorCode::init_failure:
      return MCNEST_ERR_INIT;
    case mcnest::ErrorCode::io:
      return MCNEST_ERR_IO;
    case mcnest::ErrorCode::internal:
      return MCNEST_ERR_INTERNAL;
  }
  return MCNEST_ERR_INTERNAL;
}

mcnest_status fail(const mcnest::Error& e) {
  t_last_error = e.what();
  return map_code(e.code());
}

mcnest_status fail_message(const char* message) {
  t_last_error = message;
  return MCNEST_ERR_INVALID_ARGUMENT;
}

template <typename Fn>
mcnest_status guarded(Fn&& fn) {
  try {
    fn();
    return MCNEST_OK;
  } catch (const mcnest::Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return MCNEST_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown failure";
    return MCNEST_ERR_INTERNAL;
  }
}

char* copy_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out != nullptr) {
    std::memcpy(out, text.c_str(), text.size() + 1);
  }
  return out;
}

void assign_summary(char** summary_json, const nlohmann::ordered_json& summary) {
  if (summary_json != nullptr) {
    *summary_json = copy_string(summary.dump(2));
  }
}

std::string text_or_empty(const char* text) { return text == nullptr ? std::string() : text; }

}  // namespace

struct mcnest_client {
  std::unique_ptr<mcnest::ModelClient> impl;
};

struct mcnest_config {
  mcnest::SearchConfig search;
  mcnest::LabParams lab;
  mcnest::PromptSet prompts = mcnest::default_prompts();
  int workers = 0;  // 0 = use the client's suggestion
};

struct mcnest_result {
  mcnest::SearchResult impl;
  mcnest::SearchConfig config;
};

extern "C" {

const char* mcnest_version(void) { return "0.1.0"; }

const char* mcnest_status_name(mcnest_status status) {
  switch (status) {
    case MCNEST_OK: return "ok";
    case MCNEST_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case MCNEST_ERR_STRUCTURE: return "structure";
    case MCNEST_ERR_PRECONDITION: return "precondition";
    case MCNEST_ERR_CONFIG: return "config";
    case MCNEST_ERR_PARSE: return "parse";
    case MCNEST_ERR_VALIDATION: return "validation";
    case MCNEST_ERR_REFINE_PARSE: return "refine_parse";
    case MCNEST_ERR_REWARD_PARSE: return "reward_parse";
    case MCNEST_ERR_REWARD_RANGE: return "reward_range";
    case MCNEST_ERR_QUALITY_PARSE: return "quality_parse";
    case MCNEST_ERR_TRANSPORT: return "transport";
    case MCNEST_ERR_TIMEOUT: return "timeout";
    case MCNEST_ERR_TRANSCRIPT: return "transcript";
    case MCNEST_ERR_INIT: return "init_failure";
    case MCNEST_ERR_IO: return "io";
    case MCNEST_ERR_INTERNAL: return "internal";
  }
  return "?";
}

const char* mcnest_last_error(void) { return t_last_error.c_str(); }

void mcnest_string_free(char* text) { std::free(text); }

mcnest_status mcnest_client_open_http(const char* base_url, const char* api_key,
                                      const char* model_name, mcnest_client** out) {
  if (out == nullptr) {
    return fail_message("out must not be NULL");
  }
  return guarded([&] {
    mcnest::HttpClientConfig config = mcnest::HttpChatClient::config_from_env();
    if (base_url != nullptr && *base_url != '\0') {
      config.base_url = base_url;
    }
    if (api_key != nullptr && *api_key != '\0') {
      config.api_key = api_key;
    }
    if (model_name != nullptr && *model_name != '\0') {
      config.model_name = model_name;
    }
    config.log_calls = false;
    auto client = std::make_unique<mcnest_client>();
    client->impl = std::make_unique<mcnest::HttpChatClient>(std::move(config));
    *out = client.release();
  });
}

mcnest_status mcnest_client_open_transcript_file(const char* path, mcnest_client** out) {
  if (out == nullptr || path == nullptr) {
    return fail_message("path and out must not be NULL");
  }
  return guarded([&] {
    auto client = std::make_unique<mcnest_client>();
    client->impl = mcnest::ScriptedClient::open_file(path);
    *out = client.release();
  });
}

mcnest_status mcnest_client_open_transcript_json(const char* json_text, mcnest_client** out) {
  if (out == nullptr || json_text == nullptr) {
    return fail_message("json_text and out must not be NULL");
  }
  return guarded([&] {
    auto client = std::make_unique<mcnest_client>();
    client->impl = mcnest::ScriptedClient::from_json_text(json_text);
    *out = client.release();
  });
}

long long mcnest_client_call_count(const mcnest_client* client) {
  return client == nullptr ? -1 : client->impl->call_count();
}

void mcnest_client_close(mcnest_client* client) { delete client; }

mcnest_status mcnest_config_create(mcnest_config** out) {
  if (out == nullptr) {
    return fail_message("out must not be NULL");
  }
  return guarded([&] { *out = new mcnest_config(); });
}

void mcnest_config_destroy(mcnest_config* config) { delete config; }

mcnest_status mcnest_config_set_int(mcnest_config* config, const char* key, long long value) {
  if (config == nullptr || key == nullptr) {
    return fail_message("config and key must not be NULL");
  }
  const std::string k = key;
  return guarded([&] {
    if (k == "rollouts") {
      config->search.rollouts = static_cast<int>(value);
    } else if (k == "max_children") {
      config->search.max_children = static_cast<int>(value);
    } else if (k == "seed") {
      config->search.seed = static_cast<std::uint64_t>(value);
    } else if (k == "retry_budget") {
      config->search.retry_budget = static_cast<int>(value);
    } else if (k == "reward_min") {
      config->search.reward.reward_min = static_cast<int>(value);
    } else if (k == "reward_max") {
      config->search.reward.reward_max = static_cast<int>(value);
    } else if (k == "reward_limit") {
      config->search.reward.reward_limit = static_cast<int>(value);
    } else if (k == "excess_penalty") {
      config->search.reward.excess_penalty = static_cast<int>(value);
    } else if (k == "uniform_bonus") {
      config->search.uct.uniform_bonus = value != 0;
    } else if (k == "strict_fully_expanded") {
      config->search.strict_fully_expanded = value != 0;
    } else if (k == "reeval_on_visit") {
      config->search.reeval_on_visit = value != 0;
    } else if (k == "continue_on_error") {
      config->search.continue_on_error = value != 0;
    } else if (k == "workers") {
      config->workers = static_cast<int>(value);
    } else {
      mcnest::throw_error(mcnest::ErrorCode::config, "unknown integer config key '" + k + "'");
    }
  });
}

mcnest_status mcnest_config_set_double(mcnest_config* config, const char* key, double value) {
  if (config == nullptr || key == nullptr) {
    return fail_message("config and key must not be NULL");
  }
  const std::string k = key;
  return guarded([&] {
    if (k == "exploration_c") {
      config->search.uct.exploration_c = value;
    } else if (k == "epsilon") {
      config->search.uct.epsilon = value;
    } else if (k == "lambda") {
      config->lab.lambda = value;
    } else if (k == "alpha") {
      config->lab.alpha = value;
    } else if (k == "beta") {
      config->lab.beta = value;
    } else if (k == "gamma") {
      config->lab.gamma = value;
    } else {
      mcnest::throw_error(mcnest::ErrorCode::config, "unknown double config key '" + k + "'");
    }
  });
}

mcnest_status mcnest_config_set_string(mcnest_config* config, const char* key,
                                       const char* value) {
  if (config == nullptr || key == nullptr || value == nullptr) {
    return fail_message("config, key and value must not be NULL");
  }
  const std::string k = key;
  const std::string v = value;
  return guarded([&] {
    if (k == "policy") {
      const auto policy = mcnest::parse_policy(v);
      if (!policy) {
        mcnest::throw_error(mcnest::ErrorCode::config,
                            "unknown policy '" + v + "' (expected greedy|is|pis)");
      }
      config->search.policy = *policy;
    } else if (k == "init") {
      const auto strategy = mcnest::parse_init_strategy(v);
      if (!strategy) {
        mcnest::throw_error(mcnest::ErrorCode::config,
                            "unknown init strategy '" + v + "' (expected dummy|zero_shot_cot)");
      }
      config->search.init_strategy = *strategy;
    } else if (k == "prompts_dir") {
      config->prompts = mcnest::load_prompt_overrides(v);
    } else {
      mcnest::throw_error(mcnest::ErrorCode::config, "unknown string config key '" + k + "'");
    }
  });
}

mcnest_status mcnest_solve(mcnest_client* client, const mcnest_config* config,
                           const char* problem_statement, mcnest_result** out) {
  if (client == nullptr || config == nullptr || problem_statement == nullptr) {
    return fail_message("client, config and problem_statement must not be NULL");
  }
  if (out != nullptr) {
    *out = nullptr;
  }
  try {
    auto result = std::make_unique<mcnest_result>();
    result->config = config->search;
    result->impl =
        mcnest::run_search(problem_statement, config->search, *client->impl, config->prompts);
    if (out != nullptr) {
      *out = result.release();
    }
    return MCNEST_OK;
  } catch (const mcnest::SearchError& e) {
    if (out != nullptr && e.partial() != nullptr) {
      auto result = std::make_unique<mcnest_result>();
      result->config = config->search;
      result->impl = *e.partial();
      *out = result.release();
    }
    return fail(e);
  } catch (const mcnest::Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return MCNEST_ERR_INTERNAL;
  }
}

const char* mcnest_result_final_answer(const mcnest_result* result) {
  return result == nullptr ? nullptr : result->impl.final_answer.c_str();
}

long long mcnest_result_final_node(const mcnest_result* result) {
  return result == nullptr ? -1 : result->impl.final_node;
}

long long mcnest_result_model_calls(const mcnest_result* result) {
  return result == nullptr ? -1 : result->impl.model_calls;
}

long long mcnest_result_elapsed_ms(const mcnest_result* result) {
  return result == nullptr ? -1 : static_cast<long long>(result->impl.elapsed.count());
}

int mcnest_result_rollouts_executed(const mcnest_result* result) {
  return result == nullptr ? -1 : static_cast<int>(result->impl.trace.size());
}

int mcnest_result_node_count(const mcnest_result* result) {
  return result == nullptr ? -1 : static_cast<int>(result->impl.tree.size());
}

mcnest_status mcnest_result_tree_json(const mcnest_result* result, char** out) {
  if (result == nullptr || out == nullptr) {
    return fail_message("result and out must not be NULL");
  }
  return guarded([&] { *out = copy_string(result->impl.tree.dump(2)); });
}

mcnest_status mcnest_result_record_json(const mcnest_result* result, const char* problem_id,
                                        char** out) {
  if (result == nullptr || out == nullptr) {
    return fail_message("result and out must not be NULL");
  }
  return guarded([&] {
    *out = copy_string(
        mcnest::run_record_json(text_or_empty(problem_id), result->config, result->impl)
            .dump(2));
  });
}

void mcnest_result_destroy(mcnest_result* result) { delete result; }

mcnest_status mcnest_cmd_solve(mcnest_client* client, const mcnest_config* config,
                               const char* dataset_path, const char* out_dir,
                               char** summary_json) {
  if (client == nullptr || config == nullptr || dataset_path == nullptr || out_dir == nullptr) {
    return fail_message("client, config, dataset_path and out_dir must not be NULL");
  }
  return guarded([&] {
    const int workers = config->workers > 0 ? config->workers
                                            : client->impl->suggested_workers();
    assign_summary(summary_json, mcnest::cmd_solve(*client->impl, config->search, dataset_path,
                                                   out_dir, config->prompts, workers));
  });
}

mcnest_status mcnest_cmd_eval(mcnest_client* client, const mcnest_config* config,
                              const char* dataset_path, const char* method,
                              const char* exemplars_path_or_null, const char* out_dir,
                              char** summary_json) {
  if (client == nullptr || config == nullptr || dataset_path == nullptr || method == nullptr ||
      out_dir == nullptr) {
    return fail_message("client, config, dataset_path, method and out_dir must not be NULL");
  }
  return guarded([&] {
    std::optional<std::filesystem::path> exemplars;
    if (exemplars_path_or_null != nullptr && *exemplars_path_or_null != '\0') {
      exemplars = exemplars_path_or_null;
    }
    const int workers = config->workers > 0 ? config->workers
                                            : client->impl->suggested_workers();
    assign_summary(summary_json,
                   mcnest::cmd_eval(*client->impl, config->search, dataset_path, method,
                                    exemplars, out_dir, config->prompts, workers));
  });
}

mcnest_status mcnest_cmd_sweep(mcnest_client* client, const mcnest_config* config,
                               const char* dataset_path, const int* rollout_values,
                               size_t rollout_count, const char* out_dir, char** summary_json) {
  if (client == nullptr || config == nullptr || dataset_path == nullptr ||
      rollout_values == nullptr || out_dir == nullptr) {
    return fail_message("client, config, dataset_path, rollout_values and out_dir must not be "
                        "NULL");
  }
  return guarded([&] {
    const int workers = config->workers > 0 ? config->workers
                                            : client->impl->suggested_workers();
    assign_summary(summary_json,
                   mcnest::cmd_sweep(*client->impl, config->search, dataset_path,
                                     std::span<const int>(rollout_values, rollout_count),
                                     out_dir, config->prompts, workers));
  });
}

mcnest_status mcnest_cmd_sim(const mcnest_config* config_or_null, const char* arms_spec,
                             int steps, const char* strategy, long long seed,
                             const char* out_dir, const char* out_name_or_null,
                             char** summary_json) {
  if (arms_spec == nullptr || strategy == nullptr || out_dir == nullptr) {
    return fail_message("arms_spec, strategy and out_dir must not be NULL");
  }
  return guarded([&] {
    const mcnest::LabParams lab =
        config_or_null != nullptr ? config_or_null->lab : mcnest::LabParams{};
    const std::string out_name = (out_name_or_null != nullptr && *out_name_or_null != '\0')
                                     ? out_name_or_null
                                     : "results.csv";
    assign_summary(summary_json,
                   mcnest::cmd_sim(arms_spec, steps, strategy,
                                   static_cast<std::uint64_t>(seed), out_dir, out_name, lab));
  });
}

mcnest_status mcnest_cmd_classify(mcnest_client* client, const mcnest_config* config_or_null,
                                  const char* dataset_path, int strict, const char* out_dir,
                                  char** summary_json) {
  if (client == nullptr || dataset_path == nullptr || out_dir == nullptr) {
    return fail_message("client, dataset_path and out_dir must not be NULL");
  }
  return guarded([&] {
    const mcnest::PromptSet prompts =
        config_or_null != nullptr ? config_or_null->prompts : mcnest::default_prompts();
    assign_summary(summary_json, mcnest::cmd_classify(*client->impl, dataset_path, strict != 0,
                                                      out_dir, prompts));
  });
}

mcnest_status mcnest_cmd_quality(mcnest_client* client, const mcnest_config* config_or_null,
                                 const char* input_path, int repeats, const char* out_dir,
                                 char** summary_json) {
  if (client == nullptr || input_path == nullptr || out_dir == nullptr) {
    return fail_message("client, input_path and out_dir must not be NULL");
  }
  return guarded([&] {
    const mcnest::PromptSet prompts =
        config_or_null != nullptr ? config_or_null->prompts : mcnest::default_prompts();
    assign_summary(summary_json, mcnest::cmd_quality(*client->impl, input_path, repeats, out_dir,
                                                     prompts));
  });
}

}  // extern "C"
