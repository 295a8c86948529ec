#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mcnest {

using NodeId = std::int32_t;

/// One candidate solution in the search tree.
struct Node {
  NodeId id = 0;
  std::optional<NodeId> parent;
  std::vector<NodeId> children;
  std::string answer;
  std::optional<std::string> thought;
  double q = 0.0;
  int visits = 0;
  int depth = 0;

  // Evaluation bookkeeping for the accumulating re-evaluation variant.
  // Not part of the serialized dump.
  double eval_sum = 0.0;
  int eval_count = 0;
};

/// Append-only tree of candidate answers. Node ids are dense creation-order
/// indices; node 0 is the root. Owned by exactly one search at a time, but
/// freely movable between threads once the search is done.
class SearchTree {
 public:
  /// Appends a node with q = 0 and visits = 0 under `parent`. The first node
  /// must be created without a parent and becomes the root; every later node
  /// needs an existing parent.
  NodeId create_node(std::string answer, std::optional<std::string> thought,
                     std::optional<NodeId> parent);

  const Node& node(NodeId id) const;
  Node& node(NodeId id);
  bool contains(NodeId id) const noexcept;
  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }
  NodeId root_id() const;

  /// True iff the node has reached `max_children` children or some child has
  /// q >= its own q. With `strict_child_q` the comparison is q > own q.
  bool is_fully_expanded(NodeId id, int max_children, bool strict_child_q = false) const;

  /// BFS order from the root, keeping exactly the nodes that are not fully
  /// expanded. Falls back to {root} when every node is fully expanded.
  std::vector<NodeId> collect_candidates(int max_children, bool strict_child_q = false) const;

  /// Node with the highest q; ties go to the lowest id.
  NodeId best_final_node() const;

  /// {nodes: [{id, parent, children, answer, thought, q, visits, depth}],
  ///  root_id} with stable field order for golden-file comparisons.
  nlohmann::ordered_json to_json() const;
  std::string dump(int indent = 2) const;

 private:
  std::vector<Node> nodes_;
};

}  // namespace mcnest
