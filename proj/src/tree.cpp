#include "mcnest/tree.hpp"

#include <deque>
#include <utility>

#include "mcnest/errors.hpp"

namespace mcnest {

namespace {

void require_positive_cap(int max_children) {
  if (max_children < 1) {
    throw_error(ErrorCode::invalid_argument,
                "max_children must be >= 1, got " + std::to_string(max_children));
  }
}

}  // namespace

NodeId SearchTree::create_node(std::string answer, std::optional<std::string> thought,
                               std::optional<NodeId> parent) {
  if (!parent && !nodes_.empty()) {
    throw_error(ErrorCode::structure, "non-root node requires a parent");
  }
  if (parent && !contains(*parent)) {
    throw_error(ErrorCode::structure,
                "unknown parent id " + std::to_string(*parent) + " (tree has " +
                    std::to_string(nodes_.size()) + " nodes)");
  }

  Node n;
  n.id = static_cast<NodeId>(nodes_.size());
  n.parent = parent;
  n.answer = std::move(answer);
  n.thought = std::move(thought);
  n.depth = parent ? nodes_[static_cast<std::size_t>(*parent)].depth + 1 : 0;
  nodes_.push_back(std::move(n));
  if (parent) {
    nodes_[static_cast<std::size_t>(*parent)].children.push_back(nodes_.back().id);
  }
  return nodes_.back().id;
}

bool SearchTree::contains(NodeId id) const noexcept {
  return id >= 0 && static_cast<std::size_t>(id) < nodes_.size();
}

const Node& SearchTree::node(NodeId id) const {
  if (!contains(id)) {
    throw_error(ErrorCode::structure, "unknown node id " + std::to_string(id));
  }
  return nodes_[static_cast<std::size_t>(id)];
}

Node& SearchTree::node(NodeId id) {
  if (!contains(id)) {
    throw_error(ErrorCode::structure, "unknown node id " + std::to_string(id));
  }
  return nodes_[static_cast<std::size_t>(id)];
}

NodeId SearchTree::root_id() const {
  if (nodes_.empty()) {
    throw_error(ErrorCode::invalid_argument, "tree is empty");
  }
  return 0;
}

bool SearchTree::is_fully_expanded(NodeId id, int max_children, bool strict_child_q) const {
  require_positive_cap(max_children);
  const Node& n = node(id);
  if (n.children.size() >= static_cast<std::size_t>(max_children)) {
    return true;
  }
  for (NodeId child : n.children) {
    const double cq = node(child).q;
    if (strict_child_q ? cq > n.q : cq >= n.q) {
      return true;
    }
  }
  return false;
}

std::vector<NodeId> SearchTree::collect_candidates(int max_children, bool strict_child_q) const {
  require_positive_cap(max_children);
  const NodeId root = root_id();

  std::vector<NodeId> candidates;
  std::deque<NodeId> queue{root};
  while (!queue.empty()) {
    const NodeId id = queue.front();
    queue.pop_front();
    if (!is_fully_expanded(id, max_children, strict_child_q)) {
      candidates.push_back(id);
    }
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    queue.insert(queue.end(), n.children.begin(), n.children.end());
  }
  if (candidates.empty()) {
    candidates.push_back(root);
  }
  return candidates;
}

NodeId SearchTree::best_final_node() const {
  if (nodes_.empty()) {
    throw_error(ErrorCode::invalid_argument, "tree is empty");
  }
  NodeId best = 0;
  for (const Node& n : nodes_) {
    if (n.q > nodes_[static_cast<std::size_t>(best)].q) {
      best = n.id;
    }
  }
  return best;
}

nlohmann::ordered_json SearchTree::to_json() const {
  nlohmann::ordered_json doc;
  doc["nodes"] = nlohmann::ordered_json::array();
  for (const Node& n : nodes_) {
    nlohmann::ordered_json jn;
    jn["id"] = n.id;
    if (n.parent) {
      jn["parent"] = *n.parent;
    } else {
      jn["parent"] = nullptr;
    }
    jn["children"] = n.children;
    jn["answer"] = n.answer;
    if (n.thought) {
      jn["thought"] = *n.thought;
    } else {
      jn["thought"] = nullptr;
    }
    jn["q"] = n.q;
    jn["visits"] = n.visits;
    jn["depth"] = n.depth;
    doc["nodes"].push_back(std::move(jn));
  }
  if (nodes_.empty()) {
    doc["root_id"] = nullptr;
  } else {
    doc["root_id"] = 0;
  }
  return doc;
}

std::string SearchTree::dump(int indent) const { return to_json().dump(indent); }

}  // namespace mcnest
