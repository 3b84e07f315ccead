#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "argora/errors.hpp"

namespace argora {

/// Node identifiers are plain strings; their lexicographic order is the one
/// deterministic tie-breaking order used everywhere in the engine.
using NodeId = std::string;

enum class Polarity : int { Support = +1, Attack = -1 };

inline int sign(Polarity p) { return static_cast<int>(p); }

inline const char* to_string(Polarity p) {
  return p == Polarity::Support ? "support" : "attack";
}

inline Polarity polarity_from_string(const std::string& s) {
  if (s == "support") return Polarity::Support;
  if (s == "attack") return Polarity::Attack;
  fail(errc::parse_error, "unknown polarity '" + s + "'");
}

struct ArgumentNode {
  NodeId id;
  std::string statement;
  int level = 0;  // 0 = main argument (tree root), 1..3 = supplementary
  std::optional<std::string> author;

  bool operator==(const ArgumentNode&) const = default;
};

/// One entry handed to QbafTree::build: a node plus its signed edge to a parent.
struct TreeMember {
  ArgumentNode node;
  NodeId parent;
  Polarity polarity = Polarity::Support;
};

/// Rooted directed tree of arguments with child->parent signed edges and
/// per-node base scores. Immutable once built; structural edits happen only by
/// constructing a PrunedForest on top of it.
class QbafTree {
 public:
  /// Validates and assembles a tree. Base scores live strictly inside (0,1);
  /// pass relaxed_scores=true to admit the closed interval [0,1] for textbook
  /// fixtures. Children are stored sorted by NodeId.
  static QbafTree build(const ArgumentNode& root, std::vector<TreeMember> members,
                        std::map<NodeId, double> base_scores,
                        bool relaxed_scores = false) {
    QbafTree t;
    if (root.id.empty()) fail(errc::parse_error, "root id must be non-empty");
    if (root.level != 0) fail(errc::invalid_level, "root '" + root.id + "' must have level 0");
    t.root_ = root.id;
    t.nodes_.emplace(root.id, root);
    for (auto& m : members) {
      if (m.node.id.empty()) fail(errc::parse_error, "node id must be non-empty");
      if (!t.nodes_.emplace(m.node.id, m.node).second)
        fail(errc::duplicate_id, "duplicate node id '" + m.node.id + "'");
    }
    for (auto& m : members) {
      if (!t.nodes_.count(m.parent))
        fail(errc::missing_parent,
             "node '" + m.node.id + "' references missing parent '" + m.parent + "'");
      t.parent_.emplace(m.node.id, std::make_pair(m.parent, m.polarity));
    }
    // Walk each node to the root: bounds the depth and exposes parent cycles
    // among nodes that never reach the root.
    for (auto& [id, node] : t.nodes_) {
      int depth = 0;
      NodeId cur = id;
      while (cur != t.root_) {
        auto it = t.parent_.find(cur);
        if (it == t.parent_.end())
          fail(errc::missing_parent, "node '" + cur + "' is disconnected from the root");
        cur = it->second.first;
        if (++depth > static_cast<int>(t.nodes_.size()))
          fail(errc::cycle_detected, "parent chain from '" + id + "' never reaches the root");
      }
      if (depth > kMaxDepth)
        fail(errc::depth_exceeded, "node '" + id + "' sits at depth " + std::to_string(depth));
      if (node.level != depth)
        fail(errc::invalid_level, "node '" + id + "' has level " + std::to_string(node.level) +
                                      " but depth " + std::to_string(depth));
      if (node.level == 0 && id != t.root_)
        fail(errc::invalid_level, "non-root node '" + id + "' has level 0");
    }
    for (auto& [id, edge] : t.parent_) {
      if (t.nodes_.at(id).level == kMaxDepth && edge.second != Polarity::Attack)
        fail(errc::invalid_polarity, "level-3 node '" + id + "' must attack its parent");
      t.children_[edge.first].emplace_back(id, edge.second);
    }
    for (auto& [id, kids] : t.children_) std::sort(kids.begin(), kids.end());
    for (auto& [id, score] : base_scores) {
      if (!t.nodes_.count(id))
        fail(errc::unknown_node, "base score given for unknown node '" + id + "'");
      bool ok = relaxed_scores ? (score >= 0.0 && score <= 1.0) : (score > 0.0 && score < 1.0);
      if (!ok)
        fail(errc::score_out_of_range, "base score " + std::to_string(score) + " for node '" +
                                           id + "' is outside the admissible interval");
    }
    for (auto& [id, node] : t.nodes_)
      if (!base_scores.count(id))
        fail(errc::score_out_of_range, "no base score for node '" + id + "'");
    t.base_score_ = std::move(base_scores);
    return t;
  }

  static constexpr int kMaxDepth = 3;

  const NodeId& root() const { return root_; }

  bool contains(const NodeId& id) const { return nodes_.count(id) != 0; }

  const ArgumentNode& node(const NodeId& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) fail(errc::unknown_node, "unknown node '" + id + "'");
    return it->second;
  }

  const std::map<NodeId, ArgumentNode>& nodes() const { return nodes_; }

  double base_score(const NodeId& id) const {
    auto it = base_score_.find(id);
    if (it == base_score_.end()) fail(errc::unknown_node, "unknown node '" + id + "'");
    return it->second;
  }

  const std::map<NodeId, double>& base_scores() const { return base_score_; }

  bool is_root(const NodeId& id) const {
    if (!contains(id)) fail(errc::unknown_node, "unknown node '" + id + "'");
    return id == root_;
  }

  /// Parent edge of a non-root node.
  const std::pair<NodeId, Polarity>& parent_of(const NodeId& id) const {
    if (!contains(id)) fail(errc::unknown_node, "unknown node '" + id + "'");
    auto it = parent_.find(id);
    if (it == parent_.end()) fail(errc::root_has_no_edge, "root '" + id + "' has no parent edge");
    return it->second;
  }

  /// Children in NodeId order; empty for leaves.
  const std::vector<std::pair<NodeId, Polarity>>& children(const NodeId& id) const {
    if (!contains(id)) fail(errc::unknown_node, "unknown node '" + id + "'");
    auto it = children_.find(id);
    return it == children_.end() ? kNoChildren : it->second;
  }

  std::size_t size() const { return nodes_.size(); }
  std::size_t edge_count() const { return nodes_.size() - 1; }

  /// Ids of the subtree rooted at id (id included).
  std::set<NodeId> subtree(const NodeId& id) const {
    std::set<NodeId> out;
    collect_subtree(id, out);
    return out;
  }

  bool operator==(const QbafTree& other) const {
    return root_ == other.root_ && nodes_ == other.nodes_ && parent_ == other.parent_ &&
           base_score_ == other.base_score_;
  }

 private:
  void collect_subtree(const NodeId& id, std::set<NodeId>& out) const {
    out.insert(id);
    for (auto& [child, pol] : children(id)) collect_subtree(child, out);
  }

  inline static const std::vector<std::pair<NodeId, Polarity>> kNoChildren{};

  NodeId root_;
  std::map<NodeId, ArgumentNode> nodes_;
  std::map<NodeId, std::pair<NodeId, Polarity>> parent_;
  std::map<NodeId, double> base_score_;
  std::map<NodeId, std::vector<std::pair<NodeId, Polarity>>> children_;
};

/// A tree together with a set of deleted outgoing edges. Deleting the edge of
/// node x detaches x's subtree from the root while leaving every node, level,
/// author and base score untouched. Holds a pointer to the origin tree, which
/// must outlive the forest.
class PrunedForest {
 public:
  explicit PrunedForest(const QbafTree& origin) : origin_(&origin) {}

  const QbafTree& origin() const { return *origin_; }
  const std::set<NodeId>& deleted_edges() const { return deleted_; }

  bool edge_deleted(const NodeId& id) const { return deleted_.count(id) != 0; }

  /// Surviving children of id, in NodeId order.
  std::vector<std::pair<NodeId, Polarity>> children(const NodeId& id) const {
    std::vector<std::pair<NodeId, Polarity>> out;
    for (auto& c : origin_->children(id))
      if (!deleted_.count(c.first)) out.push_back(c);
    return out;
  }

  /// Returns a new forest with x's outgoing edge deleted as well.
  PrunedForest delete_edge(const NodeId& x) const {
    if (!origin_->contains(x)) fail(errc::unknown_node, "unknown node '" + x + "'");
    if (origin_->is_root(x)) fail(errc::root_has_no_edge, "cannot delete the root's edge");
    if (deleted_.count(x)) fail(errc::already_deleted, "edge of '" + x + "' already deleted");
    PrunedForest next(*this);
    next.deleted_.insert(x);
    return next;
  }

 private:
  const QbafTree* origin_;
  std::set<NodeId> deleted_;
};

inline PrunedForest delete_edge(const QbafTree& tree, const NodeId& x) {
  return PrunedForest(tree).delete_edge(x);
}

inline PrunedForest delete_edge(const PrunedForest& forest, const NodeId& x) {
  return forest.delete_edge(x);
}

/// Nodes with a surviving directed path to the root (root included).
inline std::set<NodeId> root_reachable_set(const PrunedForest& forest) {
  std::set<NodeId> out;
  const QbafTree& t = forest.origin();
  auto walk = [&](auto&& self, const NodeId& id) -> void {
    out.insert(id);
    for (auto& [child, pol] : forest.children(id)) self(self, child);
  };
  walk(walk, t.root());
  return out;
}

// --- JSON tree format ------------------------------------------------------
//
// { "root": id,
//   "nodes": [ {"id", "statement", "level", "author"?, "base_score"}, ... ],
//   "edges": [ {"child", "parent", "polarity"}, ... ] }

inline nlohmann::json to_json(const QbafTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (auto& [id, node] : tree.nodes()) {
    nlohmann::json n{{"id", id},
                     {"statement", node.statement},
                     {"level", node.level},
                     {"base_score", tree.base_score(id)}};
    if (node.author) n["author"] = *node.author;
    nodes.push_back(std::move(n));
  }
  nlohmann::json edges = nlohmann::json::array();
  for (auto& [id, node] : tree.nodes()) {
    if (tree.is_root(id)) continue;
    auto& [parent, pol] = tree.parent_of(id);
    edges.push_back({{"child", id}, {"parent", parent}, {"polarity", to_string(pol)}});
  }
  return nlohmann::json{{"root", tree.root()}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

inline QbafTree tree_from_json(const nlohmann::json& j, bool relaxed_scores = false) {
  if (!j.is_object() || !j.contains("root") || !j.contains("nodes") || !j.contains("edges"))
    fail(errc::parse_error, "tree JSON requires 'root', 'nodes' and 'edges'");
  const NodeId root_id = j.at("root").get<NodeId>();
  std::map<NodeId, ArgumentNode> nodes;
  std::map<NodeId, double> scores;
  for (auto& n : j.at("nodes")) {
    ArgumentNode node;
    node.id = n.at("id").get<NodeId>();
    node.statement = n.at("statement").get<std::string>();
    node.level = n.at("level").get<int>();
    if (n.contains("author")) node.author = n.at("author").get<std::string>();
    scores[node.id] = n.at("base_score").get<double>();
    if (!nodes.emplace(node.id, std::move(node)).second)
      fail(errc::duplicate_id, "duplicate node id in JSON");
  }
  auto root_it = nodes.find(root_id);
  if (root_it == nodes.end()) fail(errc::parse_error, "root node missing from 'nodes'");
  std::vector<TreeMember> members;
  for (auto& e : j.at("edges")) {
    const NodeId child = e.at("child").get<NodeId>();
    auto it = nodes.find(child);
    if (it == nodes.end()) fail(errc::parse_error, "edge references unknown child '" + child + "'");
    members.push_back(TreeMember{it->second, e.at("parent").get<NodeId>(),
                                 polarity_from_string(e.at("polarity").get<std::string>())});
  }
  if (members.size() + 1 != nodes.size())
    fail(errc::parse_error, "edge count must equal node count minus one");
  return QbafTree::build(root_it->second, std::move(members), std::move(scores), relaxed_scores);
}

}  // namespace argora
