#include "mcnest/policylab.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "mcnest/errors.hpp"

namespace mcnest {

namespace {

double draw_reward(const ArmSpec& arm, Rng& rng) {
  switch (arm.kind) {
    case ArmSpec::Kind::constant:
      return arm.a;
    case ArmSpec::Kind::uniform:
      return arm.a + (arm.b - arm.a) * rng.next_uniform();
    case ArmSpec::Kind::normal: {
      // Box-Muller, spelled out so the draw sequence is platform-stable.
      const double u1 = 1.0 - rng.next_uniform();  // (0, 1]
      const double u2 = rng.next_uniform();
      const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
      return arm.a + arm.b * z;
    }
    case ArmSpec::Kind::bernoulli:
      return rng.next_uniform() < arm.a ? arm.b : 0.0;
  }
  return 0.0;
}

std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) {
    ++begin;
  }
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) {
    --end;
  }
  return std::string(text.substr(begin, end - begin));
}

double parse_number(const std::string& text, const std::string& context) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw_error(ErrorCode::parse, "bad number '" + text + "' in arm spec '" + context + "'");
  }
  return value;
}

ArmSpec parse_one_arm(const std::string& token) {
  const std::size_t open = token.find('(');
  const std::size_t close = token.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw_error(ErrorCode::parse, "arm spec '" + token + "' must look like kind(args)");
  }
  const std::string kind = trim(token.substr(0, open));
  const std::string args = token.substr(open + 1, close - open - 1);

  std::vector<double> values;
  std::size_t start = 0;
  while (start <= args.size()) {
    const std::size_t comma = args.find(',', start);
    const std::string piece =
        trim(args.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!piece.empty()) {
      values.push_back(parse_number(piece, token));
    }
    if (comma == std::string::npos) {
      break;
    }
    start = comma + 1;
  }

  ArmSpec arm;
  if (kind == "const" || kind == "constant") {
    if (values.size() != 1) {
      throw_error(ErrorCode::parse, "const arm needs exactly one value: '" + token + "'");
    }
    arm.kind = ArmSpec::Kind::constant;
    arm.a = values[0];
  } else if (kind == "uniform") {
    if (values.size() != 2) {
      throw_error(ErrorCode::parse, "uniform arm needs (lo,hi): '" + token + "'");
    }
    arm.kind = ArmSpec::Kind::uniform;
    arm.a = values[0];
    arm.b = values[1];
  } else if (kind == "normal") {
    if (values.size() != 2 || values[1] < 0.0) {
      throw_error(ErrorCode::parse, "normal arm needs (mean,sd>=0): '" + token + "'");
    }
    arm.kind = ArmSpec::Kind::normal;
    arm.a = values[0];
    arm.b = values[1];
  } else if (kind == "bern" || kind == "bernoulli") {
    if (values.empty() || values.size() > 2 || values[0] < 0.0 || values[0] > 1.0) {
      throw_error(ErrorCode::parse, "bernoulli arm needs (p[,value]) with p in [0,1]: '" +
                                        token + "'");
    }
    arm.kind = ArmSpec::Kind::bernoulli;
    arm.a = values[0];
    arm.b = values.size() == 2 ? values[1] : 1.0;
  } else {
    throw_error(ErrorCode::parse, "unknown arm kind '" + kind + "'");
  }
  return arm;
}

struct SimRun {
  std::vector<double> cumulative;
  std::vector<int> selections;
  std::vector<double> rewards;
  std::vector<double> q;
  std::vector<int> visits;
};

int pick_arm(SimStrategy strategy, const SimRun& run, int total_visits, const LabParams& lab,
             const UctParams& uct_params, Rng& rng) {
  const int n = static_cast<int>(run.q.size());
  switch (strategy) {
    case SimStrategy::uct_baseline: {
      int best = 0;
      double best_score = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        const double score =
            run.q[static_cast<std::size_t>(i)] +
            uct_params.exploration_c *
                std::sqrt(std::log(static_cast<double>(std::max(1, total_visits))) /
                          (static_cast<double>(run.visits[static_cast<std::size_t>(i)]) +
                           uct_params.epsilon));
        if (score > best_score) {
          best_score = score;
          best = i;
        }
      }
      return best;
    }
    case SimStrategy::appendix_utility: {
      int best = 0;
      double best_score = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        const double score =
            appendix_utility(run.q[static_cast<std::size_t>(i)],
                             run.visits[static_cast<std::size_t>(i)],
                             std::max(1, total_visits), n, lab);
        if (score > best_score) {
          best_score = score;
          best = i;
        }
      }
      return best;
    }
    default:
      break;
  }

  // The main-loop policies score arms exactly like the tree engine scores
  // root-level candidates: parent visits = total visits so far.
  std::vector<CandidateScore> scores;
  scores.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    scores.push_back({static_cast<NodeId>(i),
                      uct(run.q[static_cast<std::size_t>(i)],
                          run.visits[static_cast<std::size_t>(i)], std::max(1, total_visits),
                          uct_params, n),
                      1.0 / static_cast<double>(n)});
  }
  switch (strategy) {
    case SimStrategy::greedy:
      return static_cast<int>(select_greedy(scores));
    case SimStrategy::is:
      return static_cast<int>(select_importance_sampling(scores, rng));
    case SimStrategy::pis:
      return static_cast<int>(select_pairwise(scores, rng));
    default:
      throw_error(ErrorCode::internal, "unhandled simulation strategy");
  }
}

SimRun run_once(std::span<const ArmSpec> arms, int steps, SimStrategy strategy,
                std::uint64_t seed, const LabParams& lab, const UctParams& uct_params) {
  SimRun run;
  run.q.assign(arms.size(), 0.0);
  run.visits.assign(arms.size(), 0);
  run.cumulative.reserve(static_cast<std::size_t>(steps));
  run.selections.reserve(static_cast<std::size_t>(steps));
  run.rewards.reserve(static_cast<std::size_t>(steps));

  Rng rng(seed);
  double total_reward = 0.0;
  int total_visits = 0;
  for (int step = 0; step < steps; ++step) {
    int arm;
    if (step < static_cast<int>(arms.size())) {
      arm = step;  // one forced visit per arm before any strategy runs
    } else {
      arm = pick_arm(strategy, run, total_visits, lab, uct_params, rng);
    }
    const double reward = draw_reward(arms[static_cast<std::size_t>(arm)], rng);
    auto& visits = run.visits[static_cast<std::size_t>(arm)];
    auto& q = run.q[static_cast<std::size_t>(arm)];
    visits += 1;
    total_visits += 1;
    q += (reward - q) / static_cast<double>(visits);
    total_reward += reward;
    run.selections.push_back(arm);
    run.rewards.push_back(reward);
    run.cumulative.push_back(total_reward);
  }
  return run;
}

}  // namespace

void validate(const LabParams& params) {
  if (params.lambda < 0.0 || params.alpha < 0.0 || params.gamma < 0.0) {
    throw_error(ErrorCode::config, "lambda, alpha and gamma must be >= 0");
  }
  if (params.beta < 0.0 || params.beta > 1.0) {
    throw_error(ErrorCode::config, "beta must lie in [0, 1]");
  }
}

double appendix_utility(double q, int visits_i, double total_visits, int n,
                        const LabParams& params) {
  if (visits_i < 1) {
    throw_error(ErrorCode::invalid_argument, "appendix_utility needs visits_i >= 1");
  }
  if (!(total_visits > 0.0)) {
    throw_error(ErrorCode::invalid_argument, "appendix_utility needs total_visits > 0");
  }
  if (n < 1) {
    throw_error(ErrorCode::invalid_argument, "appendix_utility needs n >= 1");
  }
  return q + params.lambda * std::log(total_visits) / static_cast<double>(visits_i) +
         params.alpha / static_cast<double>(n);
}

double appendix_utility(double q, int visits_i, int total_visits, int n,
                        const LabParams& params) {
  return appendix_utility(q, visits_i, static_cast<double>(total_visits), n, params);
}

std::vector<double> softmax_selection(std::span<const double> utilities) {
  if (utilities.empty()) {
    throw_error(ErrorCode::invalid_argument, "softmax of an empty utility list");
  }
  double hi = -std::numeric_limits<double>::infinity();
  for (double u : utilities) {
    if (!std::isfinite(u)) {
      throw_error(ErrorCode::invalid_argument, "softmax utilities must be finite");
    }
    hi = std::max(hi, u);
  }
  std::vector<double> probs(utilities.size());
  double total = 0.0;
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    probs[i] = std::exp(utilities[i] - hi);
    total += probs[i];
  }
  for (double& p : probs) {
    p /= total;
  }
  return probs;
}

double refine_adjustment(double action, double outcome, double beta) {
  return action + beta * (outcome - action);
}

double self_eval_utility(std::span<const double> q_children, double q_self, int visits, int v_max,
                         const LabParams& params) {
  if (visits < 1) {
    throw_error(ErrorCode::invalid_argument, "self_eval_utility needs visits >= 1");
  }
  if (v_max < visits) {
    throw_error(ErrorCode::invalid_argument, "self_eval_utility needs v_max >= visits");
  }
  double child_sum = 0.0;
  for (double q : q_children) {
    child_sum += q;
  }
  const double p = child_sum / static_cast<double>(visits) + params.lambda * q_self;
  return p + params.gamma * (1.0 - static_cast<double>(visits) / static_cast<double>(v_max));
}

std::vector<ArmSpec> parse_arms(std::string_view spec) {
  std::vector<ArmSpec> arms;
  std::size_t start = 0;
  int depth = 0;
  std::string token;
  for (std::size_t i = 0; i <= spec.size(); ++i) {
    const bool at_end = i == spec.size();
    const char c = at_end ? ',' : spec[i];
    if (c == '(') {
      ++depth;
    } else if (c == ')') {
      --depth;
    }
    if (c == ',' && depth == 0) {
      token = trim(spec.substr(start, i - start));
      if (!token.empty()) {
        arms.push_back(parse_one_arm(token));
      }
      start = i + 1;
      continue;
    }
  }
  if (arms.empty()) {
    throw_error(ErrorCode::parse, "arm spec is empty");
  }
  return arms;
}

const char* to_string(SimStrategy strategy) noexcept {
  switch (strategy) {
    case SimStrategy::uct_baseline:
      return "uct_baseline";
    case SimStrategy::appendix_utility:
      return "appendix_utility";
    case SimStrategy::greedy:
      return "greedy";
    case SimStrategy::is:
      return "is";
    case SimStrategy::pis:
      return "pis";
  }
  return "?";
}

std::optional<SimStrategy> parse_sim_strategy(std::string_view text) noexcept {
  if (text == "uct_baseline" || text == "uct") return SimStrategy::uct_baseline;
  if (text == "appendix_utility" || text == "utility") return SimStrategy::appendix_utility;
  if (text == "greedy") return SimStrategy::greedy;
  if (text == "is") return SimStrategy::is;
  if (text == "pis") return SimStrategy::pis;
  return std::nullopt;
}

SimResult simulate(std::span<const ArmSpec> arms, int steps, SimStrategy strategy,
                   std::uint64_t seed, const LabParams& lab, const UctParams& uct_params) {
  if (arms.empty()) {
    throw_error(ErrorCode::invalid_argument, "simulate needs at least one arm");
  }
  if (steps < 1) {
    throw_error(ErrorCode::invalid_argument, "simulate needs steps >= 1");
  }
  validate(lab);

  SimRun run = run_once(arms, steps, strategy, seed, lab, uct_params);
  SimResult result;
  result.cumulative_reward = std::move(run.cumulative);
  result.selections = std::move(run.selections);
  result.rewards = std::move(run.rewards);
  result.final_q = std::move(run.q);
  result.final_visits = std::move(run.visits);
  if (strategy == SimStrategy::uct_baseline) {
    result.baseline_cumulative = result.cumulative_reward;
  } else {
    result.baseline_cumulative =
        run_once(arms, steps, SimStrategy::uct_baseline, seed, lab, uct_params).cumulative;
  }
  return result;
}

std::string sim_csv(const SimResult& result, SimStrategy strategy) {
  std::string csv = "step,strategy,reward,cumulative\n";
  const char* name = to_string(strategy);
  for (std::size_t i = 0; i < result.rewards.size(); ++i) {
    csv += std::to_string(i + 1);
    csv += ',';
    csv += name;
    csv += ',';
    csv += nlohmann::json(result.rewards[i]).dump();
    csv += ',';
    csv += nlohmann::json(result.cumulative_reward[i]).dump();
    csv += '\n';
  }
  return csv;
}

nlohmann::ordered_json sim_result_json(const SimResult& result) {
  nlohmann::ordered_json doc;
  doc["cumulative_reward"] = result.cumulative_reward;
  doc["baseline_cumulative"] = result.baseline_cumulative;
  doc["selections"] = result.selections;
  doc["rewards"] = result.rewards;
  doc["final_q"] = result.final_q;
  doc["final_visits"] = result.final_visits;
  return doc;
}

}  // namespace mcnest
