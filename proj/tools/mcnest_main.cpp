// Command-line front end. Talks to the engine exclusively through the C API
// in mcnest.h, the same surface embedders use.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <mcnest.h>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Flag {
  std::string value;
  bool set = false;
};

[[noreturn]] void die_usage(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  std::exit(kExitUsage);
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::map<std::string, std::string> values;
  std::ifstream in(path);
  if (!in) {
    die_usage("cannot open config file: " + path);
  }
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::size_t comment = line.find('#');
    if (comment != std::string::npos) {
      line.erase(comment);
    }
    const auto trim = [](std::string text) {
      const char* ws = " \t\r\n";
      const std::size_t begin = text.find_first_not_of(ws);
      if (begin == std::string::npos) {
        return std::string();
      }
      const std::size_t end = text.find_last_not_of(ws);
      return text.substr(begin, end - begin + 1);
    };
    if (trim(line).empty()) {
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      die_usage(path + ":" + std::to_string(line_number) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      die_usage(path + ":" + std::to_string(line_number) + ": empty key");
    }
    values[key] = value;
  }
  return values;
}

// Precedence: CLI flag > environment variable > config file > built-in default.
std::string resolve(const Flag& flag, const char* env_name,
                    const std::map<std::string, std::string>& file_values,
                    const std::string& file_key, const std::string& fallback) {
  if (flag.set) {
    return flag.value;
  }
  if (env_name != nullptr) {
    if (const char* env = std::getenv(env_name); env != nullptr && *env != '\0') {
      return env;
    }
  }
  if (const auto it = file_values.find(file_key); it != file_values.end()) {
    return it->second;
  }
  return fallback;
}

long long to_int(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long value = std::stoll(text, &used);
    if (used != text.size()) {
      throw std::invalid_argument(text);
    }
    return value;
  } catch (const std::exception&) {
    die_usage("bad integer for " + what + ": '" + text + "'");
  }
}

double to_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) {
      throw std::invalid_argument(text);
    }
    return value;
  } catch (const std::exception&) {
    die_usage("bad number for " + what + ": '" + text + "'");
  }
}

bool to_bool(const std::string& text, const std::string& what) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  die_usage("bad boolean for " + what + ": '" + text + "'");
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> values;
  std::stringstream in(text);
  std::string piece;
  while (std::getline(in, piece, ',')) {
    if (!piece.empty()) {
      values.push_back(static_cast<int>(to_int(piece, what)));
    }
  }
  if (values.empty()) {
    die_usage(what + " must contain at least one value");
  }
  return values;
}

struct ConfigHandle {
  mcnest_config* ptr = nullptr;
  ConfigHandle() {
    if (mcnest_config_create(&ptr) != MCNEST_OK) {
      std::cerr << "error: " << mcnest_last_error() << "\n";
      std::exit(kExitRuntime);
    }
  }
  ~ConfigHandle() { mcnest_config_destroy(ptr); }
};

struct ClientHandle {
  mcnest_client* ptr = nullptr;
  ~ClientHandle() { mcnest_client_close(ptr); }
};

void check_usage(mcnest_status status) {
  if (status != MCNEST_OK) {
    die_usage(mcnest_last_error());
  }
}

int finish(mcnest_status status, char* summary) {
  if (summary != nullptr) {
    std::cout << summary << "\n";
    mcnest_string_free(summary);
  }
  if (status != MCNEST_OK) {
    std::cerr << "error (" << mcnest_status_name(status) << "): " << mcnest_last_error() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo tree search with model-driven self-refinement: solver, benchmark "
               "harness and selection-policy simulator"};
  app.require_subcommand(1);

  std::string config_file;
  app.add_option("--config", config_file, "key = value config file");

  // Shared model/search options, resolved per subcommand with the documented
  // precedence (flag > env > config file > default).
  Flag model_base, model_name, api_key_env, transcript, out_dir, policy, init, prompts_dir;
  Flag rollouts, seed, max_children, retry_budget, exploration_c, epsilon, uniform_bonus;
  Flag reward_limit, excess_penalty, strict_expanded, reeval_on_visit, continue_on_error,
      workers;

  const auto add_common = [&](CLI::App* cmd, bool with_search) {
    cmd->fallthrough();  // lets --config (declared on the parent) follow the subcommand
    const auto opt = [cmd](const char* name, Flag& flag, const char* help) {
      cmd->add_option_function<std::string>(
             name, [&flag](const std::string& v) { flag = {v, true}; }, help);
    };
    opt("--out-dir", out_dir, "output directory (default: out)");
    opt("--model-base", model_base, "chat-completions base URL (env MODEL_API_BASE)");
    opt("--model-name", model_name, "model name (env MODEL_NAME)");
    opt("--api-key-env", api_key_env, "env var holding the API key (default MODEL_API_KEY)");
    opt("--transcript", transcript, "scripted-transcript JSON file (replaces the live model)");
    opt("--prompts-dir", prompts_dir, "directory with prompt text overrides");
    opt("--workers", workers, "parallel problems (default: client limit)");
    if (with_search) {
      opt("--rollouts", rollouts, "search iterations (default 4); a comma list for sweep");
      opt("--policy", policy, "node selection policy: greedy|is|pis (default is)");
      opt("--seed", seed, "random seed (default 0)");
      opt("--max-children", max_children, "children cap per node (default 2)");
      opt("--init", init, "root initialization: dummy|zero_shot_cot (default dummy)");
      opt("--retry-budget", retry_budget, "model-response parse retries (default 2)");
      opt("--exploration-c", exploration_c, "UCT exploration constant (default 1.414)");
      opt("--epsilon", epsilon, "UCT epsilon (default 1e-6)");
      opt("--uniform-bonus", uniform_bonus, "add 1/n to UCT scores: true|false (default true)");
      opt("--reward-limit", reward_limit, "reward cap before penalty (default 95)");
      opt("--excess-penalty", excess_penalty, "penalty above the reward limit (default 5)");
      opt("--strict-expanded", strict_expanded,
          "fully-expanded needs a strictly greater child q: true|false");
      opt("--reeval-on-visit", reeval_on_visit,
          "re-evaluate a node when it is selected again: true|false");
      opt("--continue-on-error", continue_on_error,
          "keep going when one problem's search fails: true|false");
    }
  };

  std::string dataset;
  std::string method = "MCNEST";
  std::string exemplars;
  auto* solve = app.add_subcommand("solve", "run the tree search over a dataset");
  solve->add_option("--dataset", dataset, "problems.jsonl")->required();
  add_common(solve, true);

  auto* eval = app.add_subcommand("eval", "run a prompting baseline (or MCNEST) over a dataset");
  eval->add_option("--dataset", dataset, "problems.jsonl")->required();
  eval->add_option("--method", method, "ZS|FS3|FS5|FS10|ZSCoT|MCNEST")->required();
  eval->add_option("--exemplars", exemplars, "exemplar problems.jsonl for few-shot styles");
  add_common(eval, true);

  auto* sweep = app.add_subcommand("sweep", "run the search at several rollout budgets");
  sweep->add_option("--dataset", dataset, "problems.jsonl")->required();
  add_common(sweep, true);

  std::string arms;
  std::string strategy;
  std::string sim_out = "results.csv";
  int steps = 0;
  auto* sim = app.add_subcommand("sim", "model-free selection-policy simulator");
  sim->add_option("--arms", arms, "arm spec, e.g. \"const(5),normal(1,0.5)\"")->required();
  sim->add_option("--steps", steps, "simulation steps")->required()->check(CLI::PositiveNumber);
  auto* strategy_opt = sim->add_option(
      "--strategy", strategy, "uct_baseline|appendix_utility|greedy|is|pis");
  sim->add_option("--out", sim_out, "CSV file name inside --out-dir");
  add_common(sim, true);

  bool strict = false;
  auto* classify = app.add_subcommand("classify", "label problems by field and difficulty");
  classify->add_option("--dataset", dataset, "problems.jsonl")->required();
  classify->add_flag("--strict", strict, "error on labels outside the closed sets");
  add_common(classify, false);

  std::string quality_input;
  int repeats = 0;
  auto* quality = app.add_subcommand("quality", "score solution quality against references");
  quality->add_option("--input", quality_input,
                      "JSONL of {problem_id, statement?, human_solution, mcnest_solution}")
      ->required();
  auto* repeats_opt =
      quality->add_option("--repeats", repeats, "scoring repetitions to average (default 3)")
          ->check(CLI::PositiveNumber);
  add_common(quality, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::map<std::string, std::string> file_values;
  if (!config_file.empty()) {
    static const std::vector<std::string> known = {
        "out_dir", "model_base", "model_name", "api_key_env", "transcript", "prompts_dir",
        "workers", "rollouts", "policy", "seed", "max_children", "init", "retry_budget",
        "exploration_c", "epsilon", "uniform_bonus", "reward_limit", "excess_penalty",
        "strict_expanded", "reeval_on_visit", "continue_on_error", "strategy", "repeats"};
    file_values = load_config_file(config_file);
    for (const auto& [key, value] : file_values) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        die_usage("unknown config file key '" + key + "'");
      }
    }
  }

  const std::string out = resolve(out_dir, nullptr, file_values, "out_dir", "out");
  const std::string transcript_path =
      resolve(transcript, nullptr, file_values, "transcript", "");
  const std::string base = resolve(model_base, "MODEL_API_BASE", file_values, "model_base", "");
  const std::string name = resolve(model_name, "MODEL_NAME", file_values, "model_name", "");
  const std::string key_env =
      resolve(api_key_env, nullptr, file_values, "api_key_env", "MODEL_API_KEY");

  if (!transcript_path.empty() && (model_base.set || model_name.set)) {
    die_usage("--transcript (scripted mode) and live model settings are mutually exclusive");
  }

  ConfigHandle config;
  const auto set_int = [&](const char* ckey, const Flag& flag, const std::string& file_key) {
    const std::string value = resolve(flag, nullptr, file_values, file_key, "");
    if (!value.empty()) {
      check_usage(mcnest_config_set_int(config.ptr, ckey, to_int(value, file_key)));
    }
  };
  const auto set_bool = [&](const char* ckey, const Flag& flag, const std::string& file_key) {
    const std::string value = resolve(flag, nullptr, file_values, file_key, "");
    if (!value.empty()) {
      check_usage(mcnest_config_set_int(config.ptr, ckey, to_bool(value, file_key) ? 1 : 0));
    }
  };
  const auto set_double = [&](const char* ckey, const Flag& flag, const std::string& file_key) {
    const std::string value = resolve(flag, nullptr, file_values, file_key, "");
    if (!value.empty()) {
      check_usage(mcnest_config_set_double(config.ptr, ckey, to_double(value, file_key)));
    }
  };

  std::vector<int> rollout_list;
  {
    const std::string value = resolve(rollouts, nullptr, file_values, "rollouts", "");
    if (!value.empty()) {
      rollout_list = parse_int_list(value, "rollouts");
      if (app.got_subcommand(sweep)) {
        // sweep keeps the whole list; the search config gets the first value
        check_usage(mcnest_config_set_int(config.ptr, "rollouts", rollout_list.front()));
      } else {
        if (rollout_list.size() != 1) {
          die_usage("--rollouts takes a single value outside of sweep");
        }
        check_usage(mcnest_config_set_int(config.ptr, "rollouts", rollout_list.front()));
      }
    }
  }
  set_int("seed", seed, "seed");
  set_int("max_children", max_children, "max_children");
  set_int("retry_budget", retry_budget, "retry_budget");
  set_int("reward_limit", reward_limit, "reward_limit");
  set_int("excess_penalty", excess_penalty, "excess_penalty");
  set_int("workers", workers, "workers");
  set_double("exploration_c", exploration_c, "exploration_c");
  set_double("epsilon", epsilon, "epsilon");
  set_bool("uniform_bonus", uniform_bonus, "uniform_bonus");
  set_bool("strict_fully_expanded", strict_expanded, "strict_expanded");
  set_bool("reeval_on_visit", reeval_on_visit, "reeval_on_visit");
  set_bool("continue_on_error", continue_on_error, "continue_on_error");
  {
    const std::string value = resolve(policy, nullptr, file_values, "policy", "");
    if (!value.empty()) {
      check_usage(mcnest_config_set_string(config.ptr, "policy", value.c_str()));
    }
  }
  {
    const std::string value = resolve(init, nullptr, file_values, "init", "");
    if (!value.empty()) {
      check_usage(mcnest_config_set_string(config.ptr, "init", value.c_str()));
    }
  }
  {
    const std::string value = resolve(prompts_dir, nullptr, file_values, "prompts_dir", "");
    if (!value.empty()) {
      check_usage(mcnest_config_set_string(config.ptr, "prompts_dir", value.c_str()));
    }
  }

  const bool needs_model = !app.got_subcommand(sim);
  ClientHandle client;
  if (needs_model) {
    mcnest_status status;
    if (!transcript_path.empty()) {
      status = mcnest_client_open_transcript_file(transcript_path.c_str(), &client.ptr);
    } else {
      if (base.empty()) {
        die_usage("no model configured: pass --transcript, or --model-base / MODEL_API_BASE");
      }
      const char* api_key = std::getenv(key_env.c_str());
      status = mcnest_client_open_http(base.c_str(), api_key == nullptr ? "" : api_key,
                                       name.c_str(), &client.ptr);
    }
    if (status != MCNEST_OK) {
      std::cerr << "error (" << mcnest_status_name(status) << "): " << mcnest_last_error()
                << "\n";
      return kExitRuntime;
    }
  }

  char* summary = nullptr;
  mcnest_status status = MCNEST_OK;
  if (app.got_subcommand(solve)) {
    status = mcnest_cmd_solve(client.ptr, config.ptr, dataset.c_str(), out.c_str(), &summary);
  } else if (app.got_subcommand(eval)) {
    status = mcnest_cmd_eval(client.ptr, config.ptr, dataset.c_str(), method.c_str(),
                             exemplars.empty() ? nullptr : exemplars.c_str(), out.c_str(),
                             &summary);
  } else if (app.got_subcommand(sweep)) {
    if (rollout_list.empty()) {
      die_usage("sweep needs --rollouts, e.g. --rollouts 4,8,12");
    }
    status = mcnest_cmd_sweep(client.ptr, config.ptr, dataset.c_str(), rollout_list.data(),
                              rollout_list.size(), out.c_str(), &summary);
  } else if (app.got_subcommand(sim)) {
    const std::string strategy_value =
        resolve({strategy, strategy_opt->count() > 0}, nullptr, file_values, "strategy",
                "uct_baseline");
    const long long seed_value =
        to_int(resolve(seed, nullptr, file_values, "seed", "0"), "seed");
    status = mcnest_cmd_sim(config.ptr, arms.c_str(), steps, strategy_value.c_str(), seed_value,
                            out.c_str(), sim_out.c_str(), &summary);
  } else if (app.got_subcommand(classify)) {
    status = mcnest_cmd_classify(client.ptr, config.ptr, dataset.c_str(), strict ? 1 : 0,
                                 out.c_str(), &summary);
  } else if (app.got_subcommand(quality)) {
    const int repeat_value = static_cast<int>(
        to_int(resolve({std::to_string(repeats), repeats_opt->count() > 0}, nullptr,
                       file_values, "repeats", "3"),
               "repeats"));
    status = mcnest_cmd_quality(client.ptr, config.ptr, quality_input.c_str(), repeat_value,
                                out.c_str(), &summary);
  }
  return finish(status, summary);
}
