#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mcnest/policy.hpp"
#include "mcnest/rng.hpp"

namespace mcnest {

struct LabParams {
  double lambda = 1.0;
  double alpha = 1.0;
  double beta = 0.5;
  double gamma = 1.0;
};

void validate(const LabParams& params);

/// Q + lambda * ln(total_visits) / visits_i + alpha / n. The real-valued
/// total_visits overload feeds ln directly; the integer overload delegates.
double appendix_utility(double q, int visits_i, double total_visits, int n,
                        const LabParams& params);
double appendix_utility(double q, int visits_i, int total_visits, int n, const LabParams& params);

/// exp(u_i) / sum exp(u_j), computed with max-subtraction.
std::vector<double> softmax_selection(std::span<const double> utilities);

/// action + beta * (outcome - action).
double refine_adjustment(double action, double outcome, double beta);

/// P = mean-style child aggregate plus lambda-weighted own reward;
/// U = P + gamma * (1 - visits / v_max).
double self_eval_utility(std::span<const double> q_children, double q_self, int visits, int v_max,
                         const LabParams& params);

/// Synthetic per-arm reward distribution.
struct ArmSpec {
  enum class Kind { constant, uniform, normal, bernoulli };
  Kind kind = Kind::constant;
  double a = 0.0;  // constant value / lower bound / mean / success probability
  double b = 0.0;  // upper bound / stddev / success value
};

/// "const(5), uniform(0,1), normal(1,0.5), bern(0.3)" or "bern(0.3,10)".
std::vector<ArmSpec> parse_arms(std::string_view spec);

enum class SimStrategy { uct_baseline, appendix_utility, greedy, is, pis };
const char* to_string(SimStrategy strategy) noexcept;
std::optional<SimStrategy> parse_sim_strategy(std::string_view text) noexcept;

struct SimResult {
  std::vector<double> cumulative_reward;   // R(t) for the chosen strategy
  std::vector<double> baseline_cumulative; // R_UCT(t) from a like-seeded run
  std::vector<int> selections;             // arm picked at each step
  std::vector<double> rewards;             // reward drawn at each step
  std::vector<double> final_q;             // per-arm running-mean reward
  std::vector<int> final_visits;           // per-arm visit counts
};

/// Bandit loop: after one forced visit per arm (in arm order), the strategy
/// picks an arm each step, a reward is drawn, and the arm's Q is updated as a
/// running mean. Deterministic for a fixed seed.
SimResult simulate(std::span<const ArmSpec> arms, int steps, SimStrategy strategy,
                   std::uint64_t seed, const LabParams& lab = {}, const UctParams& uct = {});

/// CSV with columns step,strategy,reward,cumulative.
std::string sim_csv(const SimResult& result, SimStrategy strategy);
nlohmann::ordered_json sim_result_json(const SimResult& result);

}  // namespace mcnest
