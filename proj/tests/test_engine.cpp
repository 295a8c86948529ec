#include <doctest.h>

#include <cmath>

#include "mcnest/engine.hpp"

using namespace mcnest;

namespace {

std::vector<TranscriptEntry> rollout_entries(const std::vector<std::pair<std::string, std::string>>&
                                                 answer_and_reward) {
  std::vector<TranscriptEntry> entries;
  for (const auto& [answer, reward] : answer_and_reward) {
    entries.push_back({std::nullopt, "critique of the current answer"});
    entries.push_back({std::nullopt, R"({"thought":"t","answer":")" + answer + R"("})"});
    entries.push_back({std::nullopt, reward});
  }
  return entries;
}

SearchConfig scripted_config(int rollouts, SelectionPolicy policy = SelectionPolicy::greedy) {
  SearchConfig config;
  config.rollouts = rollouts;
  config.policy = policy;
  return config;
}

}  // namespace

TEST_CASE("initialize_root dummy and zero-shot strategies") {
  SearchTree dummy = initialize_root("P", InitStrategy::dummy, nullptr);
  REQUIRE(dummy.size() == 1);
  CHECK(dummy.node(0).answer == "I don't know.");
  CHECK(dummy.node(0).q == 0.0);

  ScriptedClient model({{std::nullopt, "x = 649"}});
  SearchTree zscot = initialize_root("P", InitStrategy::zero_shot_cot, &model);
  CHECK(zscot.node(0).answer == "x = 649");
  const auto log = model.call_log();
  REQUIRE(log.size() == 1);
  CHECK(log[0].messages.back().content.find("Let's think step by step.") != std::string::npos);

  ScriptedClient failing({});
  try {
    initialize_root("P", InitStrategy::zero_shot_cot, &failing);
    FAIL("expected init failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::init_failure);
  }
  CHECK_THROWS_AS(initialize_root("P", InitStrategy::zero_shot_cot, nullptr), Error);
}

TEST_CASE("expand refines, evaluates and appends an evaluated child") {
  SearchTree tree = initialize_root("P", InitStrategy::dummy, nullptr);
  ScriptedClient model(rollout_entries({{"649", "80"}}));
  const SearchConfig config = scripted_config(1);

  const NodeId child = expand(tree, 0, "P", model, config);
  CHECK(child == 1);
  CHECK(tree.node(child).answer == "649");
  CHECK(tree.node(child).thought == "t");
  CHECK(tree.node(child).q == 80.0);
  CHECK(tree.node(child).visits == 0);
  CHECK(model.call_count() == 3);
}

TEST_CASE("expand applies the reward penalty to the child's q") {
  SearchTree tree = initialize_root("P", InitStrategy::dummy, nullptr);
  ScriptedClient model(rollout_entries({{"42", "97"}}));
  const NodeId child = expand(tree, 0, "P", model, scripted_config(1));
  CHECK(tree.node(child).q == 92.0);
}

TEST_CASE("expand refuses a fully expanded node") {
  SearchTree tree = initialize_root("P", InitStrategy::dummy, nullptr);
  tree.create_node("a", std::nullopt, 0);
  tree.create_node("b", std::nullopt, 0);
  ScriptedClient model({});
  try {
    expand(tree, 0, "P", model, scripted_config(1));
    FAIL("expected precondition error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::precondition);
  }
}

TEST_CASE("expand leaves the tree unchanged when refine or evaluate fails") {
  SearchTree tree = initialize_root("P", InitStrategy::dummy, nullptr);

  ScriptedClient bad_refine({{std::nullopt, "critique"}, {std::nullopt, "junk"},
                             {std::nullopt, "junk"}, {std::nullopt, "junk"}});
  CHECK_THROWS_AS(expand(tree, 0, "P", bad_refine, scripted_config(1)), Error);
  CHECK(tree.size() == 1);

  ScriptedClient bad_eval({{std::nullopt, "critique"},
                           {std::nullopt, R"({"thought":"t","answer":"1"})"},
                           {std::nullopt, "banana"}, {std::nullopt, "banana"},
                           {std::nullopt, "banana"}});
  CHECK_THROWS_AS(expand(tree, 0, "P", bad_eval, scripted_config(1)), Error);
  CHECK(tree.size() == 1);
}

TEST_CASE("backpropagate hand traces") {
  // chain root(40) -> A(50) -> C(70)
  SearchTree chain;
  chain.create_node("r", std::nullopt, std::nullopt);
  chain.create_node("A", std::nullopt, 0);
  chain.create_node("C", std::nullopt, 1);
  chain.node(0).q = 40.0;
  chain.node(1).q = 50.0;
  chain.node(2).q = 70.0;

  backpropagate(chain, 2);
  CHECK(chain.node(1).q == 60.0);  // (50+70)/2
  CHECK(chain.node(0).q == 50.0);  // (40+60)/2 with A's fresh value
  CHECK(chain.node(2).visits == 1);
  CHECK(chain.node(1).visits == 1);
  CHECK(chain.node(0).visits == 1);
  CHECK(chain.node(2).q == 70.0);  // the start node's q is untouched

  // root alone: only the visit count moves
  SearchTree single;
  single.create_node("r", std::nullopt, std::nullopt);
  single.node(0).q = 12.0;
  backpropagate(single, 0);
  CHECK(single.node(0).q == 12.0);
  CHECK(single.node(0).visits == 1);

  // parent with children {10, 90} and own q 30 -> (30+90)/2
  SearchTree wide;
  wide.create_node("r", std::nullopt, std::nullopt);
  wide.create_node("a", std::nullopt, 0);
  wide.create_node("b", std::nullopt, 0);
  wide.node(0).q = 30.0;
  wide.node(1).q = 10.0;
  wide.node(2).q = 90.0;
  backpropagate(wide, 1);
  CHECK(wide.node(0).q == 60.0);
  CHECK(wide.node(0).visits == 1);
  CHECK(wide.node(1).visits == 1);
  CHECK(wide.node(2).visits == 0);
}

TEST_CASE("backpropagation matches a reference recomputation on random trees") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    SearchTree tree;
    tree.create_node("r", std::nullopt, std::nullopt);
    const int nodes = 1 + static_cast<int>(rng.next_u64() % 30);
    for (int i = 0; i < nodes; ++i) {
      // Bias the parent choice towards recent nodes to get depth <= ~6.
      const NodeId parent = static_cast<NodeId>(
          rng.next_u64() % tree.size() == 0 ? 0 : tree.size() - 1 - rng.next_u64() % 2);
      if (tree.node(parent).depth >= 6) {
        continue;
      }
      const NodeId id = tree.create_node("n", std::nullopt, parent);
      tree.node(id).q = std::floor(rng.next_uniform() * 201.0) - 100.0;
      tree.node(id).visits = static_cast<int>(rng.next_u64() % 5);
    }
    const NodeId from = static_cast<NodeId>(rng.next_u64() % tree.size());

    // Reference: copy the tree, then replay the recurrence by hand.
    SearchTree reference = tree;
    {
      reference.node(from).visits += 1;
      std::optional<NodeId> cursor = reference.node(from).parent;
      while (cursor) {
        double best = -std::numeric_limits<double>::infinity();
        for (NodeId child : reference.node(*cursor).children) {
          best = std::max(best, reference.node(child).q);
        }
        reference.node(*cursor).q = (reference.node(*cursor).q + best) / 2.0;
        reference.node(*cursor).visits += 1;
        cursor = reference.node(*cursor).parent;
      }
    }

    backpropagate(tree, from);
    for (NodeId id = 0; id < static_cast<NodeId>(tree.size()); ++id) {
      CHECK(tree.node(id).q == reference.node(id).q);
      CHECK(tree.node(id).visits == reference.node(id).visits);
    }
  }
}

TEST_CASE("run_search single rollout golden") {
  ScriptedClient model(rollout_entries({{"649", "80"}}));
  const SearchResult result = run_search("P", scripted_config(1), model);
  CHECK(result.final_answer == "649");
  CHECK(result.final_node == 1);
  CHECK(result.tree.size() == 2);
  CHECK(result.tree.node(0).visits == 1);
  CHECK(result.tree.node(0).q == 40.0);  // (0+80)/2
  CHECK(result.tree.node(1).visits == 1);
  CHECK(result.trace.size() == 1);
  CHECK(result.trace[0].selected == 0);
  CHECK(result.trace[0].child == 1);
  CHECK(result.trace[0].reward == 80.0);
  CHECK(result.model_calls == 3);
}

TEST_CASE("run_search validates the config") {
  ScriptedClient model({});
  SearchConfig config = scripted_config(0);
  try {
    run_search("P", config, model);
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
  }
  config.rollouts = 1;
  config.max_children = 0;
  CHECK_THROWS_AS(run_search("P", config, model), Error);
}

TEST_CASE("one node per successful rollout; root visits track backprops") {
  for (auto policy : {SelectionPolicy::greedy, SelectionPolicy::importance_sampling,
                      SelectionPolicy::pairwise_importance_sampling}) {
    ScriptedClient model(rollout_entries(
        {{"1", "10"}, {"2", "35"}, {"3", "60"}, {"4", "20"}, {"5", "80"}, {"6", "5"}}));
    SearchConfig config = scripted_config(6, policy);
    config.seed = 13;
    const SearchResult result = run_search("P", config, model);
    CHECK(result.tree.size() == 7);  // dummy root + 6 children
    CHECK(result.tree.node(0).visits == 6);
    CHECK(result.trace.size() == 6);

    // every q stays in the reward range augmented by the initial 0
    for (NodeId id = 0; id < static_cast<NodeId>(result.tree.size()); ++id) {
      CHECK(result.tree.node(id).q >= -105.0);
      CHECK(result.tree.node(id).q <= 100.0);
    }
  }
}

TEST_CASE("run_search is deterministic given seed and transcript") {
  const auto entries = rollout_entries({{"1", "10"}, {"2", "35"}, {"3", "60"}, {"4", "20"}});
  SearchConfig config = scripted_config(4, SelectionPolicy::importance_sampling);
  config.seed = 7;

  ScriptedClient first(entries);
  ScriptedClient second(entries);
  const std::string a = run_search("P", config, first).tree.dump(2);
  const std::string b = run_search("P", config, second).tree.dump(2);
  CHECK(a == b);
}

TEST_CASE("rollout failures carry the cause code and a partial trace") {
  // Two good rollouts, then an evaluate that never parses.
  auto entries = rollout_entries({{"1", "10"}, {"2", "35"}});
  entries.push_back({std::nullopt, "critique"});
  entries.push_back({std::nullopt, R"({"thought":"t","answer":"3"})"});
  entries.push_back({std::nullopt, "banana"});
  entries.push_back({std::nullopt, "banana"});
  entries.push_back({std::nullopt, "banana"});
  ScriptedClient model(entries);

  try {
    run_search("P", scripted_config(5), model);
    FAIL("expected SearchError");
  } catch (const SearchError& e) {
    CHECK(e.code() == ErrorCode::reward_parse);
    REQUIRE(e.partial() != nullptr);
    CHECK(e.partial()->trace.size() == 2);
    CHECK(e.partial()->tree.size() == 3);
    CHECK(std::string(e.what()).find("rollout 3") != std::string::npos);
  }
}

TEST_CASE("strict_fully_expanded reopens nodes whose children only tie") {
  // With reward 0 everywhere, the child's q equals the root's. The default
  // rule closes the root after rollout 1; the strict rule keeps it open and
  // the greedy tie-break (lowest id) picks the root again.
  const auto entries = rollout_entries({{"1", "0"}, {"2", "0"}});

  ScriptedClient relaxed(entries);
  SearchConfig config = scripted_config(2);
  const SearchResult chain = run_search("P", config, relaxed);
  CHECK(chain.tree.node(2).parent == 1);

  ScriptedClient strict_client(entries);
  config.strict_fully_expanded = true;
  const SearchResult wide = run_search("P", config, strict_client);
  CHECK(wide.tree.node(2).parent == 0);
}

TEST_CASE("reeval_on_visit re-scores the selected node with a running mean") {
  // Rollout 1 expands the root (never re-evaluated: the dummy root carries no
  // evaluation). Rollout 2 selects child 1 (q=90 beats the root), re-evaluates
  // it (50), then expands it.
  std::vector<TranscriptEntry> entries = rollout_entries({{"1", "90"}});
  entries.push_back({std::nullopt, "50"});  // re-evaluation of node 1
  auto more = rollout_entries({{"2", "10"}});
  entries.insert(entries.end(), more.begin(), more.end());
  ScriptedClient model(entries);

  SearchConfig config = scripted_config(2);
  config.reeval_on_visit = true;
  const SearchResult result = run_search("P", config, model);
  // Node 1 q: first eval 90, re-eval 50 -> mean 70, then backprop from child 2
  // (q=10): q(1) = (70 + 10) / 2 = 40.
  CHECK(result.tree.node(1).q == 40.0);
  CHECK(model.call_count() == 7);
}

TEST_CASE("reeval_on_visit cannot abort a rollout by closing the selected node") {
  // Rollout 3 selects node 1 while it is open (child q 30 < own q 40); the
  // re-evaluation then drops node 1's running mean to 0, putting it below its
  // child and formally closing it. The rollout must still expand the node it
  // selected rather than die on the precondition.
  std::vector<TranscriptEntry> entries = rollout_entries({{"1", "50"}});
  entries.push_back({std::nullopt, "50"});  // rollout 2 re-evaluates node 1
  auto second = rollout_entries({{"2", "30"}});
  entries.insert(entries.end(), second.begin(), second.end());
  entries.push_back({std::nullopt, "-100"});  // rollout 3 re-evaluates node 1
  auto third = rollout_entries({{"3", "20"}});
  entries.insert(entries.end(), third.begin(), third.end());
  ScriptedClient model(entries);

  SearchConfig config = scripted_config(3);
  config.reeval_on_visit = true;
  const SearchResult result = run_search("P", config, model);
  CHECK(result.tree.size() == 4);
  CHECK(result.trace.size() == 3);
  CHECK(result.tree.node(3).parent == 1);
  CHECK(result.tree.node(1).eval_count == 3);
}
