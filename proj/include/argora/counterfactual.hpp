#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "argora/costs.hpp"
#include "argora/errors.hpp"
#include "argora/qbaf.hpp"
#include "argora/semantics.hpp"

namespace argora {

// Counterfactual layer: the modular update equations form a deterministic SCM
// over the tree, so deleting a node's outgoing edge is a well-posed
// intervention. Everything here compares factual and intervened evaluations.

/// Root-level impact of deleting x's outgoing edge:
/// delta = sigma(root) - sigma_without_x(root). Positive = net support.
struct EdgeImpact {
  NodeId node;
  double delta = 0.0;
  double intervention_root_strength = 0.0;
};

inline EdgeImpact edge_impact(const QbafTree& tree, const SemanticsSpec& spec, const NodeId& x) {
  if (!tree.contains(x)) fail(errc::unknown_node, "unknown node '" + x + "'");
  if (tree.is_root(x)) fail(errc::root_has_no_edge, "the root has no outgoing edge");
  const double factual = root_strength(tree, spec);
  const double intervened = root_strength(delete_edge(tree, x), spec);
  return {x, factual - intervened, intervened};
}

/// The three explanation queries plus the full impact ranking. All argmax ties
/// break toward the smaller NodeId.
struct ExplanationResult {
  EdgeImpact most_influential_direct_child;
  EdgeImpact most_influential_leaf;
  std::vector<NodeId> decisive_chain;  // winning leaf -> ... -> root
  EdgeImpact most_influential_node;
  std::vector<EdgeImpact> impacts;  // every non-root node, |delta| descending
};

inline ExplanationResult explanation_queries(const QbafTree& tree, const SemanticsSpec& spec) {
  if (tree.size() < 2)
    fail(errc::no_non_root_nodes, "tree '" + tree.root() + "' has no non-root nodes");

  std::map<NodeId, EdgeImpact> impacts;
  for (auto& [id, node] : tree.nodes())
    if (!tree.is_root(id)) impacts.emplace(id, edge_impact(tree, spec, id));

  // Iterating the id-ordered map and requiring a strictly larger |delta| to
  // replace the incumbent implements the NodeId tie-break.
  auto argmax = [&](auto&& include) {
    const EdgeImpact* best = nullptr;
    for (auto& [id, impact] : impacts) {
      if (!include(id)) continue;
      if (best == nullptr || std::fabs(impact.delta) > std::fabs(best->delta)) best = &impact;
    }
    return *best;
  };

  ExplanationResult out;
  out.most_influential_direct_child =
      argmax([&](const NodeId& id) { return tree.parent_of(id).first == tree.root(); });
  out.most_influential_leaf = argmax([&](const NodeId& id) { return tree.children(id).empty(); });
  out.most_influential_node = argmax([&](const NodeId&) { return true; });

  for (NodeId cur = out.most_influential_leaf.node;; cur = tree.parent_of(cur).first) {
    out.decisive_chain.push_back(cur);
    if (tree.is_root(cur)) break;
  }

  for (auto& [id, impact] : impacts) out.impacts.push_back(impact);
  std::stable_sort(out.impacts.begin(), out.impacts.end(), [](const EdgeImpact& a, const EdgeImpact& b) {
    return std::fabs(a.delta) > std::fabs(b.delta);
  });
  return out;
}

/// Root strengths for every main in the family.
inline std::map<MainId, double> family_root_strengths(const Family& family,
                                                      const SemanticsSpec& spec) {
  std::map<MainId, double> out;
  for (auto& [main, tree] : family) out.emplace(main, root_strength(tree, spec));
  return out;
}

inline std::map<MainId, StrengthMap> evaluate_family(const Family& family,
                                                     const SemanticsSpec& spec) {
  std::map<MainId, StrengthMap> out;
  for (auto& [main, tree] : family) out.emplace(main, evaluate(tree, spec));
  return out;
}

/// Baseline winner: argmax root strength, ties to the smaller main id.
inline MainId select_winner(const std::map<MainId, double>& root_strengths) {
  if (root_strengths.empty()) fail(errc::empty_family, "winner selection over an empty family");
  const MainId* best = nullptr;
  double best_strength = 0.0;
  for (auto& [main, strength] : root_strengths) {
    if (best == nullptr || strength > best_strength) {
      best = &main;
      best_strength = strength;
    }
  }
  return *best;
}

inline MainId select_winner(const Family& family, const SemanticsSpec& spec) {
  return select_winner(family_root_strengths(family, spec));
}

/// One edge deletion inside one main's tree; other trees are untouched.
struct SingletonIntervention {
  MainId main;
  NodeId node;

  auto operator<=>(const SingletonIntervention&) const = default;
};

struct WinnerCritical {
  SingletonIntervention intervention;
  MainId new_winner;
  double intervened_root_strength = 0.0;
};

/// All singleton interventions that flip the winner, in (main, node) order.
/// Only the intervened tree is re-evaluated; the remaining root strengths are
/// reused. An empty result certifies the decision robust to any single-edge
/// deletion.
inline std::vector<WinnerCritical> enumerate_winner_critical(const Family& family,
                                                             const SemanticsSpec& spec) {
  if (family.empty()) fail(errc::empty_family, "winner-critical search over an empty family");
  const auto baseline = family_root_strengths(family, spec);
  const MainId winner = select_winner(baseline);

  std::vector<WinnerCritical> out;
  if (family.size() < 2) return out;
  for (auto& [main, tree] : family) {
    for (auto& [id, node] : tree.nodes()) {
      if (tree.is_root(id)) continue;
      const double intervened = root_strength(delete_edge(tree, id), spec);
      auto adjusted = baseline;
      adjusted[main] = intervened;
      const MainId new_winner = select_winner(adjusted);
      if (new_winner != winner)
        out.push_back({SingletonIntervention{main, id}, new_winner, intervened});
    }
  }
  return out;
}

/// The cheapest winner-flipping singleton intervention under the given cost,
/// ties resolved by (main, node) order; absent when the winner is robust.
inline std::optional<std::pair<SingletonIntervention, double>> minimal_winner_flip(
    const Family& family, const SemanticsSpec& spec, CostKind cost_kind) {
  std::optional<std::pair<SingletonIntervention, double>> best;
  for (const WinnerCritical& wc : enumerate_winner_critical(family, spec)) {
    const double cost = intervention_cost(
        cost_kind, family, spec, InterventionConfig::singleton(wc.intervention.main, wc.intervention.node));
    if (!best || cost < best->second) best = {wc.intervention, cost};
  }
  return best;
}

enum class VictoryType {
  PriorDominated,          // prior margin >= 0 and argumentative margin >= 0
  ArgumentationReversed,   // prior margin < 0 and final margin > 0
  ArgumentationEroded,     // prior margin > 0 and argumentative margin < 0
  PriorDominatedByTie,     // none of the above; only reachable under ties
};

inline const char* to_string(VictoryType v) {
  switch (v) {
    case VictoryType::PriorDominated: return "prior-dominated";
    case VictoryType::ArgumentationReversed: return "argumentation-reversed";
    case VictoryType::ArgumentationEroded: return "argumentation-eroded";
    case VictoryType::PriorDominatedByTie: return "prior-dominated-by-tie";
  }
  return "?";
}

/// How much the debate moved a main argument off its prior: sigma(m) - w(m).
struct NetLift {
  MainId main;
  double lift = 0.0;
};

struct MarginDecomposition {
  MainId competitor;
  double prior_margin = 0.0;          // w(winner) - w(competitor)
  double argumentative_margin = 0.0;  // lift(winner) - lift(competitor)
  double final_margin = 0.0;          // sigma(winner) - sigma(competitor)
  VictoryType victory = VictoryType::PriorDominated;
};

struct MarginReport {
  MainId winner;
  std::vector<NetLift> net_lifts;                   // every main, id order
  std::vector<MarginDecomposition> competitors;     // id order
  std::optional<double> min_final_margin;           // absent for a lone main
  std::optional<MainId> closest_competitor;
};

inline VictoryType classify_victory(double prior, double argumentative, double final_margin) {
  if (prior >= 0.0 && argumentative >= 0.0) return VictoryType::PriorDominated;
  if (prior < 0.0 && final_margin > 0.0) return VictoryType::ArgumentationReversed;
  if (prior > 0.0 && argumentative < 0.0) return VictoryType::ArgumentationEroded;
  return VictoryType::PriorDominatedByTie;
}

/// Net lifts plus the pairwise decomposition of the winner's margin against
/// every competitor: final = prior + argumentative, exactly.
inline MarginReport margin_report(const Family& family, const SemanticsSpec& spec) {
  if (family.empty()) fail(errc::empty_family, "margin report over an empty family");
  const auto sigma = family_root_strengths(family, spec);
  const MainId winner = select_winner(sigma);

  MarginReport out;
  out.winner = winner;
  std::map<MainId, double> lift;
  for (auto& [main, tree] : family) {
    lift[main] = sigma.at(main) - tree.base_score(tree.root());
    out.net_lifts.push_back({main, lift[main]});
  }
  const double w_winner = family.at(winner).base_score(family.at(winner).root());
  for (auto& [main, tree] : family) {
    if (main == winner) continue;
    MarginDecomposition d;
    d.competitor = main;
    d.prior_margin = w_winner - tree.base_score(tree.root());
    d.argumentative_margin = lift.at(winner) - lift.at(main);
    d.final_margin = sigma.at(winner) - sigma.at(main);
    d.victory = classify_victory(d.prior_margin, d.argumentative_margin, d.final_margin);
    if (!out.min_final_margin || d.final_margin < *out.min_final_margin) {
      out.min_final_margin = d.final_margin;
      out.closest_competitor = main;
    }
    out.competitors.push_back(std::move(d));
  }
  return out;
}

}  // namespace argora
