#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mcnest/rng.hpp"
#include "mcnest/tree.hpp"

namespace mcnest {

struct UctParams {
  double exploration_c = 1.414;
  double epsilon = 1e-6;
  bool uniform_bonus = true;
};

/// One candidate's score as seen by the selection policies. Across one
/// candidate set all pi are equal and sum to 1.
struct CandidateScore {
  NodeId node = 0;
  double uct = 0.0;
  double pi = 0.0;
};

enum class SelectionPolicy {
  greedy,
  importance_sampling,
  pairwise_importance_sampling,
};

const char* to_string(SelectionPolicy policy) noexcept;
std::optional<SelectionPolicy> parse_policy(std::string_view text) noexcept;

/// n entries of exactly 1/n.
std::vector<double> uniform_distribution(int n);

/// Q + C * sqrt(ln(parent_visits) / (node_visits + epsilon)), plus
/// 1/n_candidates when the uniform bonus is enabled.
double uct(double q, int node_visits, int parent_visits, const UctParams& params,
           int n_candidates);

/// Turns raw selection weights into sampling probabilities. Negative weights
/// cannot be sampled from, so when min(weights) < 0 every weight is shifted by
/// -min + 1e-9 first (order-preserving). An all-zero vector becomes uniform.
std::vector<double> selection_probabilities(std::span<const double> weights);

/// Inverse-CDF pick: first index whose cumulative probability exceeds u.
std::size_t weighted_index(std::span<const double> probabilities, double u);

/// Argmax of uct + pi; ties go to the lowest node id.
NodeId select_greedy(std::span<const CandidateScore> scores);

/// Samples proportionally to uct * pi (non-negativized); the overloads taking
/// a raw uniform draw exist so callers can log the draw they consumed.
NodeId select_importance_sampling(std::span<const CandidateScore> scores, double u);
NodeId select_importance_sampling(std::span<const CandidateScore> scores, Rng& rng);

/// Samples an unordered pair proportionally to |uct_i - uct_j| * pi_i * pi_j
/// and returns the pair member with the higher uct. All-zero pair weights fall
/// back to select_greedy; a singleton list returns its only element.
NodeId select_pairwise(std::span<const CandidateScore> scores, double u);
NodeId select_pairwise(std::span<const CandidateScore> scores, Rng& rng);

}  // namespace mcnest
