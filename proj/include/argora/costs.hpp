#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>

#include "argora/errors.hpp"
#include "argora/qbaf.hpp"
#include "argora/semantics.hpp"

namespace argora {

using MainId = std::string;

/// A family of per-main QBAF trees; the map key doubles as the deterministic
/// tie-breaking order for winner selection.
using Family = std::map<MainId, QbafTree>;

/// Edge-deletion targets across main-argument trees. The empty configuration
/// is the null intervention.
struct InterventionConfig {
  std::map<MainId, std::set<NodeId>> deletions;

  bool empty() const { return deletions.empty(); }

  static InterventionConfig singleton(const MainId& main, const NodeId& node) {
    InterventionConfig c;
    c.deletions[main].insert(node);
    return c;
  }

  bool operator==(const InterventionConfig&) const = default;
};

/// Perturbation proxies charged to an intervention by the override objective.
///   State      - mean absolute strength change over all nodes of all mains
///   StateReach - mean absolute change over the nodes whose strength changed
///   Edge       - deleted edges / total edges
///   EdgeReach  - edges losing root-reachability / total edges
enum class CostKind { State, StateReach, Edge, EdgeReach };

inline const char* to_string(CostKind k) {
  switch (k) {
    case CostKind::State: return "state";
    case CostKind::StateReach: return "state-reach";
    case CostKind::Edge: return "edge";
    case CostKind::EdgeReach: return "edge-reach";
  }
  return "?";
}

inline CostKind cost_kind_from_string(const std::string& s) {
  if (s == "state") return CostKind::State;
  if (s == "state-reach") return CostKind::StateReach;
  if (s == "edge") return CostKind::Edge;
  if (s == "edge-reach") return CostKind::EdgeReach;
  fail(errc::config_error, "unknown cost kind '" + s + "'");
}

namespace detail {

inline PrunedForest apply_deletions(const QbafTree& tree, const std::set<NodeId>& targets) {
  PrunedForest forest(tree);
  for (const NodeId& x : targets) forest = forest.delete_edge(x);
  return forest;
}

}  // namespace detail

/// Cost of an intervention configuration. The null intervention costs 0 under
/// every kind.
inline double intervention_cost(CostKind kind, const Family& family, const SemanticsSpec& spec,
                                const InterventionConfig& config) {
  for (auto& [main, targets] : config.deletions) {
    auto it = family.find(main);
    if (it == family.end()) fail(errc::unknown_node, "intervention targets unknown main '" + main + "'");
    for (const NodeId& x : targets) {
      if (!it->second.contains(x))
        fail(errc::unknown_node, "intervention targets unknown node '" + x + "' in '" + main + "'");
      if (it->second.is_root(x)) fail(errc::root_has_no_edge, "cannot intervene on a root");
    }
  }
  if (config.empty()) return 0.0;

  switch (kind) {
    case CostKind::State:
    case CostKind::StateReach: {
      double total_change = 0.0;
      std::size_t total_nodes = 0, changed_nodes = 0;
      for (auto& [main, tree] : family) {
        total_nodes += tree.size();
        auto targets = config.deletions.find(main);
        if (targets == config.deletions.end()) continue;  // untouched mains keep their strengths
        const StrengthMap before = evaluate(tree, spec);
        const StrengthMap after = evaluate(detail::apply_deletions(tree, targets->second), spec);
        for (auto& [id, sigma] : before) {
          const double diff = std::fabs(sigma - after.at(id));
          total_change += diff;
          if (sigma != after.at(id)) ++changed_nodes;
        }
      }
      if (kind == CostKind::State) return total_change / static_cast<double>(total_nodes);
      return changed_nodes == 0 ? 0.0 : total_change / static_cast<double>(changed_nodes);
    }
    case CostKind::Edge: {
      std::size_t total_edges = 0, deleted = 0;
      for (auto& [main, tree] : family) total_edges += tree.edge_count();
      for (auto& [main, targets] : config.deletions) deleted += targets.size();
      return static_cast<double>(deleted) / static_cast<double>(total_edges);
    }
    case CostKind::EdgeReach: {
      std::size_t total_edges = 0, lost = 0;
      for (auto& [main, tree] : family) total_edges += tree.edge_count();
      for (auto& [main, targets] : config.deletions) {
        const QbafTree& tree = family.at(main);
        const auto reachable = root_reachable_set(detail::apply_deletions(tree, targets));
        // An edge is lost exactly when its child endpoint fell out of the
        // root-reachable set (the parent is then unreachable too or the edge
        // itself was deleted).
        for (auto& [id, node] : tree.nodes())
          if (!tree.is_root(id) && !reachable.count(id)) ++lost;
      }
      return static_cast<double>(lost) / static_cast<double>(total_edges);
    }
  }
  return 0.0;
}

}  // namespace argora
