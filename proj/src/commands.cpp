#include "mcnest/commands.hpp"

#include <cctype>
#include <fstream>
#include <mutex>

namespace mcnest {

namespace {

using nlohmann::ordered_json;

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw_error(ErrorCode::io, "cannot create directory " + dir.string() + ": " + ec.message());
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw_error(ErrorCode::io, "cannot write " + path.string());
  }
  out << content;
  if (!out) {
    throw_error(ErrorCode::io, "write failed for " + path.string());
  }
}

std::string sanitize_filename(const std::string& id) {
  std::string out;
  out.reserve(id.size());
  for (char c : id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
                    c == '.';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? "problem" : out;
}

std::string outcomes_jsonl(std::span<const EvalOutcome> outcomes) {
  std::string text;
  for (const EvalOutcome& outcome : outcomes) {
    text += outcome_to_json(outcome).dump();
    text += '\n';
  }
  return text;
}

}  // namespace

ordered_json cmd_solve(ModelClient& model, const SearchConfig& config,
                       const std::filesystem::path& dataset_path,
                       const std::filesystem::path& out_dir, const PromptSet& prompts,
                       int workers) {
  validate(config);
  const std::vector<Problem> problems = load_problems(dataset_path);
  ensure_dir(out_dir / "runs");

  // One search per problem; searches are independent and share only the model
  // client, so problems can run on a small pool. Each worker writes its own
  // run record file.
  std::vector<std::optional<EvalOutcome>> slots(problems.size());
  std::vector<std::string> error_slots(problems.size());
  std::exception_ptr abort;
  std::mutex abort_mutex;
  parallel_for_items(problems.size(), workers, [&](std::size_t i) {
    {
      std::lock_guard<std::mutex> lock(abort_mutex);
      if (abort && !config.continue_on_error) {
        return;
      }
    }
    const Problem& problem = problems[i];
    const std::filesystem::path record_path =
        out_dir / "runs" / (sanitize_filename(problem.id) + ".json");
    try {
      const SearchResult result = run_search(problem.statement, config, model, prompts);
      write_file(record_path, run_record_json(problem.id, config, result).dump(2) + "\n");
      EvalOutcome outcome;
      outcome.problem_id = problem.id;
      outcome.predicted = result.final_answer;
      outcome.correct = match_answer(result.final_answer, problem.expected_answer);
      outcome.method = "MCNEST";
      outcome.rollouts = config.rollouts;
      outcome.policy = config.policy;
      slots[i] = std::move(outcome);
    } catch (const SearchError& e) {
      write_file(record_path,
                 run_record_json(problem.id, config, *e.partial(), error_code_name(e.code()),
                                 e.what())
                         .dump(2) +
                     "\n");
      error_slots[i] = problem.id + ": " + e.what();
      if (!config.continue_on_error) {
        std::lock_guard<std::mutex> lock(abort_mutex);
        if (!abort) {
          abort = std::current_exception();
        }
      }
    }
  });

  std::vector<EvalOutcome> outcomes;
  std::vector<std::string> errors;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (slots[i]) {
      outcomes.push_back(std::move(*slots[i]));
    } else if (!error_slots[i].empty()) {
      errors.push_back(error_slots[i]);
    }
  }
  write_file(out_dir / "outcomes.jsonl", outcomes_jsonl(outcomes));
  if (abort) {
    std::rethrow_exception(abort);
  }

  ordered_json summary;
  summary["command"] = "solve";
  summary["problems"] = problems.size();
  summary["evaluated"] = outcomes.size();
  int solved = 0;
  for (const EvalOutcome& o : outcomes) {
    solved += o.correct ? 1 : 0;
  }
  summary["solved"] = solved;
  summary["pass_at_1"] = outcomes.empty() ? ordered_json(nullptr)
                                          : ordered_json(pass_at_1(outcomes));
  summary["errors"] = errors;
  return summary;
}

ordered_json cmd_eval(ModelClient& model, const SearchConfig& config,
                      const std::filesystem::path& dataset_path, const std::string& method,
                      const std::optional<std::filesystem::path>& exemplars_path,
                      const std::filesystem::path& out_dir, const PromptSet& prompts,
                      int workers) {
  if (method == "MCNEST") {
    return cmd_solve(model, config, dataset_path, out_dir, prompts, workers);
  }
  const auto style = parse_baseline_style(method);
  if (!style) {
    throw_error(ErrorCode::config, "unknown method '" + method +
                                       "' (expected ZS|FS3|FS5|FS10|ZSCoT|MCNEST)");
  }

  const std::vector<Problem> problems = load_problems(dataset_path);
  std::vector<Problem> exemplars;
  if (exemplars_path) {
    exemplars = load_problems(*exemplars_path);
  }
  if (static_cast<int>(exemplars.size()) < exemplar_count(*style)) {
    throw_error(ErrorCode::config, method + " needs " + std::to_string(exemplar_count(*style)) +
                                       " exemplars (--exemplars), got " +
                                       std::to_string(exemplars.size()));
  }

  ensure_dir(out_dir);
  // Aggregation below is order-independent; slots keep the dataset order.
  std::vector<EvalOutcome> outcomes(problems.size());
  parallel_for_items(problems.size(), workers, [&](std::size_t i) {
    outcomes[i] = run_baseline(problems[i], *style, model, exemplars, prompts);
  });

  write_file(out_dir / "outcomes.jsonl", outcomes_jsonl(outcomes));

  ordered_json summary;
  summary["command"] = "eval";
  summary["method"] = method;
  summary["problems"] = problems.size();
  int solved = 0;
  for (const EvalOutcome& o : outcomes) {
    solved += o.correct ? 1 : 0;
  }
  summary["solved"] = solved;
  summary["pass_at_1"] = pass_at_1(outcomes);
  return summary;
}

ordered_json cmd_sweep(ModelClient& model, const SearchConfig& config,
                       const std::filesystem::path& dataset_path,
                       std::span<const int> rollout_values,
                       const std::filesystem::path& out_dir, const PromptSet& prompts,
                       int workers) {
  const std::vector<Problem> problems = load_problems(dataset_path);
  const SweepReport report =
      rollout_sweep(problems, rollout_values, config, model, workers, prompts);

  ensure_dir(out_dir);
  write_file(out_dir / "sweep.csv", sweep_csv(report.cells));
  write_file(out_dir / "sweep.json", sweep_json(report).dump(2) + "\n");
  write_file(out_dir / "outcomes.jsonl", outcomes_jsonl(report.outcomes));

  ordered_json summary;
  summary["command"] = "sweep";
  summary["problems"] = problems.size();
  summary["cells"] = sweep_json(report)["cells"];
  summary["errors"] = report.errors.size();
  return summary;
}

ordered_json cmd_sim(const std::string& arms_spec, int steps, const std::string& strategy_name,
                     std::uint64_t seed, const std::filesystem::path& out_dir,
                     const std::string& out_name, const LabParams& lab) {
  const auto strategy = parse_sim_strategy(strategy_name);
  if (!strategy) {
    throw_error(ErrorCode::config,
                "unknown strategy '" + strategy_name +
                    "' (expected uct_baseline|appendix_utility|greedy|is|pis)");
  }
  // Outputs stay inside out_dir.
  if (out_name.empty() || out_name.find('/') != std::string::npos ||
      out_name.find("..") != std::string::npos) {
    throw_error(ErrorCode::config, "sim output must be a bare file name: '" + out_name + "'");
  }
  const std::vector<ArmSpec> arms = parse_arms(arms_spec);
  const SimResult result = simulate(arms, steps, *strategy, seed, lab);

  ensure_dir(out_dir);
  write_file(out_dir / out_name, sim_csv(result, *strategy));

  ordered_json summary;
  summary["command"] = "sim";
  summary["strategy"] = to_string(*strategy);
  summary["arms"] = arms.size();
  summary["steps"] = steps;
  summary["seed"] = seed;
  summary["cumulative_reward"] = result.cumulative_reward.back();
  summary["uct_baseline_cumulative"] = result.baseline_cumulative.back();
  summary["reward_vs_uct_baseline"] =
      result.cumulative_reward.back() - result.baseline_cumulative.back();
  summary["final_q"] = result.final_q;
  summary["final_visits"] = result.final_visits;
  return summary;
}

ordered_json cmd_classify(ModelClient& model, const std::filesystem::path& dataset_path,
                          bool strict, const std::filesystem::path& out_dir,
                          const PromptSet& prompts) {
  const std::vector<Problem> problems = load_problems(dataset_path);
  ensure_dir(out_dir);

  std::string lines;
  ordered_json counts = ordered_json::object();
  for (const Problem& problem : problems) {
    const Classification c = classify_problem(model, problem, strict, prompts);
    ordered_json line;
    line["problem_id"] = problem.id;
    line["domain"] = to_string(c.domain);
    if (c.difficulty) {
      line["difficulty"] = to_string(*c.difficulty);
    } else {
      line["difficulty"] = nullptr;
    }
    lines += line.dump();
    lines += '\n';
    const std::string key = to_string(c.domain);
    counts[key] = counts.contains(key) ? counts[key].get<int>() + 1 : 1;
  }
  write_file(out_dir / "classified.jsonl", lines);

  ordered_json summary;
  summary["command"] = "classify";
  summary["problems"] = problems.size();
  summary["domains"] = counts;
  return summary;
}

ordered_json cmd_quality(ModelClient& model, const std::filesystem::path& input_path,
                         int repeats, const std::filesystem::path& out_dir,
                         const PromptSet& prompts) {
  std::ifstream in(input_path, std::ios::binary);
  if (!in) {
    throw_error(ErrorCode::io, "cannot open quality input file: " + input_path.string());
  }
  ensure_dir(out_dir);

  std::string lines;
  int count = 0;
  double completeness = 0.0;
  double clarity = 0.0;
  double optimality = 0.0;
  double rigor = 0.0;

  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) {
      continue;
    }
    const std::string where = input_path.string() + ":" + std::to_string(line_number);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw_error(ErrorCode::parse, where + ": invalid JSON: " + ex.what());
    }
    for (const char* key : {"problem_id", "human_solution", "mcnest_solution"}) {
      if (!doc.contains(key) || !doc[key].is_string()) {
        throw_error(ErrorCode::parse, where + ": missing string '" + std::string(key) + "'");
      }
    }
    Problem problem;
    problem.id = doc["problem_id"].get<std::string>();
    problem.statement = doc.value("statement", "");
    problem.expected_answer = "";

    const QualityScores scores =
        quality_check(model, problem, doc["human_solution"].get<std::string>(),
                      doc["mcnest_solution"].get<std::string>(), repeats, prompts);
    ordered_json out_line;
    out_line["problem_id"] = problem.id;
    out_line["completeness"] = scores.completeness;
    out_line["clarity"] = scores.clarity;
    out_line["optimality"] = scores.optimality;
    out_line["rigor"] = scores.rigor;
    lines += out_line.dump();
    lines += '\n';
    completeness += scores.completeness;
    clarity += scores.clarity;
    optimality += scores.optimality;
    rigor += scores.rigor;
    ++count;
  }
  write_file(out_dir / "quality.jsonl", lines);

  ordered_json summary;
  summary["command"] = "quality";
  summary["solutions"] = count;
  summary["repeats"] = repeats;
  if (count > 0) {
    summary["mean_completeness"] = completeness / count;
    summary["mean_clarity"] = clarity / count;
    summary["mean_optimality"] = optimality / count;
    summary["mean_rigor"] = rigor / count;
  }
  return summary;
}

}  // namespace mcnest
