#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "mcnest/harness.hpp"
#include "mcnest/policylab.hpp"

namespace mcnest {

/// Batch runners behind the CLI subcommands. Every runner writes its outputs
/// under `out_dir` only and returns a summary document.

/// Runs the tree search per problem; writes runs/<id>.json records (partial
/// records with an error object when a search aborts) and outcomes.jsonl.
nlohmann::ordered_json cmd_solve(ModelClient& model, const SearchConfig& config,
                                 const std::filesystem::path& dataset_path,
                                 const std::filesystem::path& out_dir,
                                 const PromptSet& prompts = default_prompts(), int workers = 1);

/// method is one of ZS|FS3|FS5|FS10|ZSCoT|MCNEST. MCNEST delegates to
/// cmd_solve; the prompting styles make one call per problem.
nlohmann::ordered_json cmd_eval(ModelClient& model, const SearchConfig& config,
                                const std::filesystem::path& dataset_path,
                                const std::string& method,
                                const std::optional<std::filesystem::path>& exemplars_path,
                                const std::filesystem::path& out_dir,
                                const PromptSet& prompts = default_prompts(), int workers = 1);

/// Writes sweep.csv, sweep.json and outcomes.jsonl.
nlohmann::ordered_json cmd_sweep(ModelClient& model, const SearchConfig& config,
                                 const std::filesystem::path& dataset_path,
                                 std::span<const int> rollout_values,
                                 const std::filesystem::path& out_dir,
                                 const PromptSet& prompts = default_prompts(), int workers = 1);

/// LLM-free bandit simulation; writes <out_name> (CSV) under out_dir.
nlohmann::ordered_json cmd_sim(const std::string& arms_spec, int steps,
                               const std::string& strategy_name, std::uint64_t seed,
                               const std::filesystem::path& out_dir,
                               const std::string& out_name = "results.csv",
                               const LabParams& lab = {});

/// Writes classified.jsonl with one {problem_id, domain, difficulty} per line.
nlohmann::ordered_json cmd_classify(ModelClient& model,
                                    const std::filesystem::path& dataset_path, bool strict,
                                    const std::filesystem::path& out_dir,
                                    const PromptSet& prompts = default_prompts());

/// Input: JSONL lines {problem_id, statement?, human_solution, mcnest_solution}.
/// Writes quality.jsonl with the averaged scores per line.
nlohmann::ordered_json cmd_quality(ModelClient& model, const std::filesystem::path& input_path,
                                   int repeats, const std::filesystem::path& out_dir,
                                   const PromptSet& prompts = default_prompts());

}  // namespace mcnest
