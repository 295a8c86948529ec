#include "mcnest/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mcnest/errors.hpp"

namespace mcnest {

namespace {

constexpr double kWeightShiftDelta = 1e-9;

void require_nonempty(std::size_t size, const char* what) {
  if (size == 0) {
    throw_error(ErrorCode::invalid_argument, std::string(what) + " must be non-empty");
  }
}

}  // namespace

const char* to_string(SelectionPolicy policy) noexcept {
  switch (policy) {
    case SelectionPolicy::greedy:
      return "greedy";
    case SelectionPolicy::importance_sampling:
      return "is";
    case SelectionPolicy::pairwise_importance_sampling:
      return "pis";
  }
  return "?";
}

std::optional<SelectionPolicy> parse_policy(std::string_view text) noexcept {
  if (text == "greedy") return SelectionPolicy::greedy;
  if (text == "is" || text == "importance_sampling") return SelectionPolicy::importance_sampling;
  if (text == "pis" || text == "pairwise_importance_sampling") {
    return SelectionPolicy::pairwise_importance_sampling;
  }
  return std::nullopt;
}

std::vector<double> uniform_distribution(int n) {
  if (n < 1) {
    throw_error(ErrorCode::invalid_argument, "uniform_distribution requires n >= 1");
  }
  return std::vector<double>(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
}

double uct(double q, int node_visits, int parent_visits, const UctParams& params,
           int n_candidates) {
  if (!std::isfinite(q)) {
    throw_error(ErrorCode::invalid_argument, "uct: q must be finite");
  }
  if (!(params.exploration_c > 0.0) || !std::isfinite(params.exploration_c)) {
    throw_error(ErrorCode::invalid_argument, "uct: exploration_c must be positive");
  }
  if (!(params.epsilon > 0.0) || !std::isfinite(params.epsilon)) {
    throw_error(ErrorCode::invalid_argument, "uct: epsilon must be positive");
  }
  if (node_visits < 0) {
    throw_error(ErrorCode::invalid_argument, "uct: node_visits must be >= 0");
  }
  if (parent_visits < 1) {
    throw_error(ErrorCode::invalid_argument, "uct: parent_visits must be >= 1");
  }
  if (n_candidates < 1) {
    throw_error(ErrorCode::invalid_argument, "uct: n_candidates must be >= 1");
  }

  double score = q + params.exploration_c *
                         std::sqrt(std::log(static_cast<double>(parent_visits)) /
                                   (static_cast<double>(node_visits) + params.epsilon));
  if (params.uniform_bonus) {
    score += 1.0 / static_cast<double>(n_candidates);
  }
  return score;
}

std::vector<double> selection_probabilities(std::span<const double> weights) {
  require_nonempty(weights.size(), "weights");

  std::vector<double> adjusted(weights.begin(), weights.end());
  double lo = std::numeric_limits<double>::infinity();
  for (double w : adjusted) {
    if (!std::isfinite(w)) {
      throw_error(ErrorCode::invalid_argument, "selection weights must be finite");
    }
    lo = std::min(lo, w);
  }
  if (lo < 0.0) {
    for (double& w : adjusted) {
      w += -lo + kWeightShiftDelta;
    }
  }

  double total = 0.0;
  for (double w : adjusted) {
    total += w;
  }
  if (total <= 0.0) {
    return uniform_distribution(static_cast<int>(adjusted.size()));
  }
  for (double& w : adjusted) {
    w /= total;
  }
  return adjusted;
}

std::size_t weighted_index(std::span<const double> probabilities, double u) {
  require_nonempty(probabilities.size(), "probabilities");
  double cumulative = 0.0;
  for (std::size_t i = 0; i + 1 < probabilities.size(); ++i) {
    cumulative += probabilities[i];
    if (u < cumulative) {
      return i;
    }
  }
  return probabilities.size() - 1;
}

NodeId select_greedy(std::span<const CandidateScore> scores) {
  require_nonempty(scores.size(), "candidate scores");
  const CandidateScore* best = &scores[0];
  double best_score = best->uct + best->pi;
  for (const CandidateScore& s : scores.subspan(1)) {
    const double score = s.uct + s.pi;
    if (score > best_score || (score == best_score && s.node < best->node)) {
      best = &s;
      best_score = score;
    }
  }
  return best->node;
}

NodeId select_importance_sampling(std::span<const CandidateScore> scores, double u) {
  require_nonempty(scores.size(), "candidate scores");
  if (scores.size() == 1) {
    return scores[0].node;
  }
  std::vector<double> weights;
  weights.reserve(scores.size());
  for (const CandidateScore& s : scores) {
    weights.push_back(s.uct * s.pi);
  }
  const std::vector<double> probs = selection_probabilities(weights);
  return scores[weighted_index(probs, u)].node;
}

NodeId select_importance_sampling(std::span<const CandidateScore> scores, Rng& rng) {
  require_nonempty(scores.size(), "candidate scores");
  if (scores.size() == 1) {
    return scores[0].node;
  }
  return select_importance_sampling(scores, rng.next_uniform());
}

NodeId select_pairwise(std::span<const CandidateScore> scores, double u) {
  require_nonempty(scores.size(), "candidate scores");
  if (scores.size() == 1) {
    return scores[0].node;
  }

  struct Pair {
    std::size_t i;
    std::size_t j;
  };
  std::vector<Pair> pairs;
  std::vector<double> weights;
  pairs.reserve(scores.size() * (scores.size() - 1) / 2);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    for (std::size_t j = i + 1; j < scores.size(); ++j) {
      pairs.push_back({i, j});
      weights.push_back(std::abs(scores[i].uct - scores[j].uct) * scores[i].pi * scores[j].pi);
    }
  }

  const bool all_zero = std::all_of(weights.begin(), weights.end(),
                                    [](double w) { return w == 0.0; });
  if (all_zero) {
    return select_greedy(scores);
  }

  const std::vector<double> probs = selection_probabilities(weights);
  const Pair picked = pairs[weighted_index(probs, u)];
  const CandidateScore& a = scores[picked.i];
  const CandidateScore& b = scores[picked.j];
  if (a.uct > b.uct) {
    return a.node;
  }
  if (b.uct > a.uct) {
    return b.node;
  }
  return std::min(a.node, b.node);
}

NodeId select_pairwise(std::span<const CandidateScore> scores, Rng& rng) {
  require_nonempty(scores.size(), "candidate scores");
  if (scores.size() == 1) {
    return scores[0].node;
  }
  return select_pairwise(scores, rng.next_uniform());
}

}  // namespace mcnest
