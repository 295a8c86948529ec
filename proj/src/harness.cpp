#include "mcnest/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace mcnest {

namespace {

using nlohmann::json;

std::string normalize_label(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  while (!out.empty() && (out.back() == '.' || out.back() == '!')) {
    out.pop_back();
  }
  return out;
}

std::string field_as_string(const json& value, const char* key, const std::string& origin) {
  if (value.is_string()) {
    return value.get<std::string>();
  }
  if (value.is_number_integer()) {
    return std::to_string(value.get<long long>());
  }
  if (value.is_number()) {
    return value.dump();
  }
  throw_error(ErrorCode::parse,
              origin + ": field '" + key + "' must be a string or number");
}

Problem parse_problem_line(const json& doc, const std::string& origin) {
  if (!doc.is_object()) {
    throw_error(ErrorCode::parse, origin + ": expected a JSON object");
  }
  Problem p;
  if (!doc.contains("id")) {
    throw_error(ErrorCode::parse, origin + ": missing 'id'");
  }
  p.id = field_as_string(doc["id"], "id", origin);
  if (!doc.contains("statement") || !doc["statement"].is_string()) {
    throw_error(ErrorCode::parse, origin + ": missing string 'statement'");
  }
  p.statement = doc["statement"].get<std::string>();
  if (p.statement.empty()) {
    throw_error(ErrorCode::parse, origin + ": 'statement' must be non-empty");
  }
  if (!doc.contains("expected_answer")) {
    throw_error(ErrorCode::parse, origin + ": missing 'expected_answer'");
  }
  p.expected_answer = field_as_string(doc["expected_answer"], "expected_answer", origin);
  if (doc.contains("domain") && !doc["domain"].is_null()) {
    const std::string raw = field_as_string(doc["domain"], "domain", origin);
    p.domain = parse_domain(raw);
    if (!p.domain) {
      throw_error(ErrorCode::parse, origin + ": unknown domain '" + raw + "'");
    }
  }
  if (doc.contains("difficulty") && !doc["difficulty"].is_null()) {
    const std::string raw = field_as_string(doc["difficulty"], "difficulty", origin);
    p.difficulty = parse_difficulty(raw);
    if (!p.difficulty) {
      throw_error(ErrorCode::parse, origin + ": unknown difficulty '" + raw + "'");
    }
  }
  if (doc.contains("source") && doc["source"].is_string()) {
    p.source = doc["source"].get<std::string>();
  }
  return p;
}

/// Strips \boxed{...} (keeping the contents) and '$'.
std::string strip_latex(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  const std::string boxed = "\\boxed{";
  while (i < text.size()) {
    if (text.compare(i, boxed.size(), boxed) == 0) {
      std::size_t j = i + boxed.size();
      int depth = 1;
      std::string inner;
      while (j < text.size() && depth > 0) {
        if (text[j] == '{') {
          ++depth;
        } else if (text[j] == '}') {
          --depth;
          if (depth == 0) {
            break;
          }
        }
        inner.push_back(text[j]);
        ++j;
      }
      out += inner;
      i = j < text.size() ? j + 1 : j;
      continue;
    }
    if (text[i] != '$') {
      out.push_back(text[i]);
    }
    ++i;
  }
  return out;
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

/// Scans for numeric literals ([+-]?digits[.digits][e[+-]digits]) and returns
/// the last one.
std::optional<double> last_number_raw(const std::string& text) {
  std::optional<double> found;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t start = i;
    std::size_t cursor = i;
    if (text[cursor] == '+' || text[cursor] == '-') {
      ++cursor;
    }
    bool has_digits = false;
    while (cursor < text.size() && is_digit(text[cursor])) {
      ++cursor;
      has_digits = true;
    }
    if (cursor < text.size() && text[cursor] == '.') {
      std::size_t after_dot = cursor + 1;
      bool frac_digits = false;
      while (after_dot < text.size() && is_digit(text[after_dot])) {
        ++after_dot;
        frac_digits = true;
      }
      if (has_digits || frac_digits) {
        cursor = after_dot;
        has_digits = true;
      }
    }
    if (!has_digits) {
      ++i;
      continue;
    }
    if (cursor < text.size() && (text[cursor] == 'e' || text[cursor] == 'E')) {
      std::size_t exp_cursor = cursor + 1;
      if (exp_cursor < text.size() && (text[exp_cursor] == '+' || text[exp_cursor] == '-')) {
        ++exp_cursor;
      }
      std::size_t exp_digits = exp_cursor;
      while (exp_digits < text.size() && is_digit(text[exp_digits])) {
        ++exp_digits;
      }
      if (exp_digits > exp_cursor) {
        cursor = exp_digits;
      }
    }
    found = std::strtod(text.substr(start, cursor - start).c_str(), nullptr);
    i = cursor;
  }
  return found;
}

std::optional<double> whole_text_number(const std::string& text) {
  std::string trimmed = text;
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  trimmed.erase(trimmed.begin(), std::find_if(trimmed.begin(), trimmed.end(), not_space));
  trimmed.erase(std::find_if(trimmed.rbegin(), trimmed.rend(), not_space).base(), trimmed.end());
  if (trimmed.empty()) {
    return std::nullopt;
  }
  char* end = nullptr;
  const double value = std::strtod(trimmed.c_str(), &end);
  if (end == trimmed.c_str() + trimmed.size()) {
    return value;
  }
  return std::nullopt;
}

std::string render_exemplars(std::span<const Problem> exemplars, int count) {
  std::string out;
  for (int i = 0; i < count; ++i) {
    out += "Problem: " + exemplars[static_cast<std::size_t>(i)].statement + "\n";
    out += "Answer: " + exemplars[static_cast<std::size_t>(i)].expected_answer + "\n\n";
  }
  return out;
}

int parse_quality_score(const json& scores, const char* key) {
  if (!scores.contains(key)) {
    throw_error(ErrorCode::quality_parse, std::string("quality response missing '") + key + "'");
  }
  const json& value = scores[key];
  if (!value.is_number()) {
    throw_error(ErrorCode::quality_parse, std::string("quality score '") + key +
                                              "' must be a number, got " + value.dump());
  }
  const double score = value.get<double>();
  if (score < 0.0 || score > 100.0) {
    throw_error(ErrorCode::quality_parse, std::string("quality score '") + key +
                                              "' outside [0, 100]: " + value.dump());
  }
  return static_cast<int>(score);
}

double round2(double value) { return std::round(value * 100.0) / 100.0; }

}  // namespace

const char* to_string(Domain domain) noexcept {
  switch (domain) {
    case Domain::algebra:
      return "Algebra";
    case Domain::combinatorics:
      return "Combinatorics";
    case Domain::geometry:
      return "Geometry";
    case Domain::number_theory:
      return "Number Theory";
    case Domain::other:
      return "Other";
  }
  return "?";
}

const char* to_string(Difficulty difficulty) noexcept {
  switch (difficulty) {
    case Difficulty::easy:
      return "Easy";
    case Difficulty::medium:
      return "Medium";
    case Difficulty::hard:
      return "Hard";
  }
  return "?";
}

std::optional<Domain> parse_domain(std::string_view text) noexcept {
  const std::string label = normalize_label(text);
  if (label == "algebra") return Domain::algebra;
  if (label == "combinatorics") return Domain::combinatorics;
  if (label == "geometry") return Domain::geometry;
  if (label == "number theory") return Domain::number_theory;
  if (label == "other" || label == "others") return Domain::other;
  return std::nullopt;
}

std::optional<Difficulty> parse_difficulty(std::string_view text) noexcept {
  const std::string label = normalize_label(text);
  if (label == "easy") return Difficulty::easy;
  if (label == "medium") return Difficulty::medium;
  if (label == "hard") return Difficulty::hard;
  return std::nullopt;
}

std::vector<Problem> load_problems(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw_error(ErrorCode::io, "cannot open dataset file: " + path.string());
  }
  return parse_problems(in, path.string());
}

std::vector<Problem> parse_problems(std::istream& in, const std::string& origin) {
  std::vector<Problem> problems;
  std::set<std::string> seen;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) {
      continue;
    }
    const std::string where = origin + ":" + std::to_string(line_number);
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& ex) {
      throw_error(ErrorCode::parse, where + ": invalid JSON: " + ex.what());
    }
    Problem p = parse_problem_line(doc, where);
    if (!seen.insert(p.id).second) {
      throw_error(ErrorCode::validation, where + ": duplicate problem id '" + p.id + "'");
    }
    problems.push_back(std::move(p));
  }
  return problems;
}

std::optional<double> last_number(std::string_view text) {
  return last_number_raw(strip_latex(text));
}

bool match_answer(std::string_view predicted, std::string_view expected) {
  const std::string expected_clean = strip_latex(expected);
  if (const auto expected_value = whole_text_number(expected_clean)) {
    const auto predicted_value = last_number(predicted);
    if (!predicted_value) {
      return false;
    }
    const double tolerance = 1e-6 * std::max(1.0, std::abs(*expected_value));
    return std::abs(*predicted_value - *expected_value) <= tolerance;
  }
  return normalize_label(strip_latex(predicted)) == normalize_label(expected_clean);
}

const char* to_string(BaselineStyle style) noexcept {
  switch (style) {
    case BaselineStyle::zs:
      return "ZS";
    case BaselineStyle::fs3:
      return "FS3";
    case BaselineStyle::fs5:
      return "FS5";
    case BaselineStyle::fs10:
      return "FS10";
    case BaselineStyle::zscot:
      return "ZSCoT";
  }
  return "?";
}

std::optional<BaselineStyle> parse_baseline_style(std::string_view text) noexcept {
  if (text == "ZS") return BaselineStyle::zs;
  if (text == "FS3") return BaselineStyle::fs3;
  if (text == "FS5") return BaselineStyle::fs5;
  if (text == "FS10") return BaselineStyle::fs10;
  if (text == "ZSCoT") return BaselineStyle::zscot;
  return std::nullopt;
}

int exemplar_count(BaselineStyle style) noexcept {
  switch (style) {
    case BaselineStyle::fs3:
      return 3;
    case BaselineStyle::fs5:
      return 5;
    case BaselineStyle::fs10:
      return 10;
    default:
      return 0;
  }
}

void parallel_for_items(std::size_t count, int workers,
                        const std::function<void(std::size_t)>& fn) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) {
          return;
        }
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) {
            first_error = std::current_exception();
          }
        }
      }
    });
  }
  for (std::thread& t : pool) {
    t.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

nlohmann::ordered_json outcome_to_json(const EvalOutcome& outcome) {
  nlohmann::ordered_json doc;
  doc["problem_id"] = outcome.problem_id;
  doc["predicted"] = outcome.predicted;
  doc["correct"] = outcome.correct;
  doc["method"] = outcome.method;
  if (outcome.rollouts) {
    doc["rollouts"] = *outcome.rollouts;
  }
  if (outcome.policy) {
    doc["policy"] = to_string(*outcome.policy);
  }
  return doc;
}

double pass_at_1(std::span<const EvalOutcome> outcomes) {
  if (outcomes.empty()) {
    throw_error(ErrorCode::invalid_argument, "pass@1 of an empty outcome list");
  }
  std::size_t correct = 0;
  for (const EvalOutcome& o : outcomes) {
    correct += o.correct ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(outcomes.size());
}

EvalOutcome run_baseline(const Problem& problem, BaselineStyle style, ModelClient& model,
                         std::span<const Problem> exemplars, const PromptSet& prompts) {
  const int needed = exemplar_count(style);
  if (static_cast<int>(exemplars.size()) < needed) {
    throw_error(ErrorCode::config, std::string(to_string(style)) + " needs " +
                                       std::to_string(needed) + " exemplars, got " +
                                       std::to_string(exemplars.size()));
  }

  std::string user;
  switch (style) {
    case BaselineStyle::zs:
      user = problem.statement;
      break;
    case BaselineStyle::zscot:
      user = problem.statement + "\n\n" + prompts.zero_shot_cot_suffix;
      break;
    default:
      user = render_exemplars(exemplars, needed) + "Problem: " + problem.statement + "\nAnswer:";
      break;
  }

  const std::string predicted = model.complete({{{"user", user}}, 2048, 0.7, {}});
  EvalOutcome outcome;
  outcome.problem_id = problem.id;
  outcome.predicted = predicted;
  outcome.correct = match_answer(predicted, problem.expected_answer);
  outcome.method = to_string(style);
  return outcome;
}

SweepReport rollout_sweep(std::span<const Problem> problems, std::span<const int> rollout_values,
                          const SearchConfig& config, ModelClient& model, int workers,
                          const PromptSet& prompts) {
  if (rollout_values.empty()) {
    throw_error(ErrorCode::invalid_argument, "rollout_sweep needs at least one rollout value");
  }
  validate(config);

  SweepReport report;
  for (int rollouts : rollout_values) {
    SearchConfig run_config = config;
    run_config.rollouts = rollouts;
    validate(run_config);

    std::vector<std::optional<EvalOutcome>> outcomes(problems.size());
    std::vector<std::string> errors(problems.size());
    parallel_for_items(problems.size(), workers, [&](std::size_t i) {
      const Problem& problem = problems[i];
      try {
        const SearchResult result = run_search(problem.statement, run_config, model, prompts);
        EvalOutcome outcome;
        outcome.problem_id = problem.id;
        outcome.predicted = result.final_answer;
        outcome.correct = match_answer(result.final_answer, problem.expected_answer);
        outcome.method = "MCNEST";
        outcome.rollouts = rollouts;
        outcome.policy = run_config.policy;
        outcomes[i] = std::move(outcome);
      } catch (const Error& e) {
        errors[i] = problem.id + "@" + std::to_string(rollouts) + ": " + e.what();
      }
    });

    SweepCell cell;
    cell.rollout = rollouts;
    cell.policy = run_config.policy;
    cell.total = static_cast<int>(problems.size());
    for (std::size_t i = 0; i < problems.size(); ++i) {
      if (outcomes[i]) {
        cell.solved += outcomes[i]->correct ? 1 : 0;
        report.outcomes.push_back(std::move(*outcomes[i]));
      } else {
        report.errors.push_back(errors[i]);
      }
    }
    report.cells.push_back(cell);
  }
  return report;
}

std::string sweep_csv(std::span<const SweepCell> cells) {
  std::string csv = "rollout,policy,solved,total\n";
  for (const SweepCell& cell : cells) {
    csv += std::to_string(cell.rollout);
    csv += ',';
    csv += to_string(cell.policy);
    csv += ',';
    csv += std::to_string(cell.solved);
    csv += ',';
    csv += std::to_string(cell.total);
    csv += '\n';
  }
  return csv;
}

nlohmann::ordered_json sweep_json(const SweepReport& report) {
  nlohmann::ordered_json doc;
  doc["cells"] = nlohmann::ordered_json::array();
  for (const SweepCell& cell : report.cells) {
    doc["cells"].push_back({{"rollout", cell.rollout},
                            {"policy", to_string(cell.policy)},
                            {"solved", cell.solved},
                            {"total", cell.total}});
  }
  doc["errors"] = report.errors;
  return doc;
}

Classification classify_problem(ModelClient& model, const Problem& problem, bool strict,
                                const PromptSet& prompts) {
  const auto field_messages =
      render_messages(prompts.classify_field, {{"problem", problem.statement}});
  const std::string field_raw = model.complete({field_messages, 2048, 0.0, {}});

  Classification result;
  if (const auto domain = parse_domain(field_raw)) {
    result.domain = *domain;
  } else if (strict) {
    throw_error(ErrorCode::parse, "unrecognized field label: \"" + field_raw + "\"");
  } else {
    result.domain = Domain::other;
  }

  const auto difficulty_messages =
      render_messages(prompts.classify_difficulty, {{"problem", problem.statement}});
  const std::string difficulty_raw = model.complete({difficulty_messages, 2048, 0.0, {}});
  if (const auto difficulty = parse_difficulty(difficulty_raw)) {
    result.difficulty = *difficulty;
  } else if (strict) {
    throw_error(ErrorCode::parse, "unrecognized difficulty label: \"" + difficulty_raw + "\"");
  }
  return result;
}

QualityScores quality_check(ModelClient& model, const Problem& problem,
                            const std::string& human_solution,
                            const std::string& mcnest_solution, int repeats,
                            const PromptSet& prompts) {
  if (repeats < 1) {
    throw_error(ErrorCode::invalid_argument, "quality_check needs repeats >= 1");
  }

  std::string user = prompts.quality.user_pattern;
  const auto replace_marker = [&user](const std::string& marker, const std::string& value) {
    const std::size_t pos = user.find(marker);
    if (pos != std::string::npos) {
      user.replace(pos, marker.size(), value);
    }
  };
  replace_marker("Insert human-generated solution here.", human_solution);
  replace_marker("Insert LLM-generated MC-NEST solution here.", mcnest_solution);
  if (!problem.statement.empty()) {
    user = "<problem>\n" + problem.statement + "\n</problem>\n\n" + user;
  }

  const std::vector<Message> messages = {{"system", prompts.quality.system}, {"user", user}};

  double completeness = 0.0;
  double clarity = 0.0;
  double optimality = 0.0;
  double rigor = 0.0;
  for (int i = 0; i < repeats; ++i) {
    const std::string response = model.complete({messages, 1000, 0.7, {}});
    json doc;
    try {
      doc = json::parse(extract_json_payload(response));
    } catch (const json::exception& ex) {
      throw_error(ErrorCode::quality_parse,
                  std::string("quality response is not valid JSON: ") + ex.what());
    }
    if (!doc.contains("Scores") || !doc["Scores"].contains("MC-NEST Solution")) {
      throw_error(ErrorCode::quality_parse,
                  "quality response missing Scores -> 'MC-NEST Solution'");
    }
    const json& scores = doc["Scores"]["MC-NEST Solution"];
    completeness += parse_quality_score(scores, "Completeness");
    clarity += parse_quality_score(scores, "Clarity");
    optimality += parse_quality_score(scores, "Optimality");
    rigor += parse_quality_score(scores, "Mathematical Rigor");
  }

  QualityScores result;
  result.completeness = round2(completeness / repeats);
  result.clarity = round2(clarity / repeats);
  result.optimality = round2(optimality / repeats);
  result.rigor = round2(rigor / repeats);
  return result;
}

}  // namespace mcnest
