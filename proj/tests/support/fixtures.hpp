#pragma once

// Shared test fixtures: compact tree construction and seeded random trees /
// families for the property suites. Random structure generation uses only
// integer draws from mt19937 so the suites are reproducible on this platform.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "argora/costs.hpp"
#include "argora/qbaf.hpp"
#include "argora/semantics.hpp"
#include "reference_eval.hpp"

namespace fixtures {

struct Spec {
  std::string id;
  std::string parent;  // empty = root
  argora::Polarity polarity = argora::Polarity::Support;
  double score = 0.5;
};

/// Builds a tree from (id, parent, polarity, score) rows; levels are derived
/// from the parent chain.
inline argora::QbafTree tree(const std::vector<Spec>& specs, bool relaxed = false) {
  std::map<std::string, std::string> parent_of;
  for (const Spec& s : specs)
    if (!s.parent.empty()) parent_of[s.id] = s.parent;
  auto depth = [&](const std::string& id) {
    int d = 0;
    for (std::string cur = id; parent_of.count(cur); cur = parent_of.at(cur)) ++d;
    return d;
  };
  argora::ArgumentNode root;
  std::vector<argora::TreeMember> members;
  std::map<argora::NodeId, double> scores;
  for (const Spec& s : specs) {
    argora::ArgumentNode node;
    node.id = s.id;
    node.statement = "statement " + s.id;
    node.level = depth(s.id);
    scores[s.id] = s.score;
    if (s.parent.empty())
      root = node;
    else
      members.push_back({node, s.parent, s.polarity});
  }
  return argora::QbafTree::build(root, members, scores, relaxed);
}

inline refeval::Graph to_ref(const argora::QbafTree& t) {
  refeval::Graph g;
  g.root = t.root();
  for (auto& [id, node] : t.nodes()) {
    g.weight[id] = t.base_score(id);
    if (!t.is_root(id)) {
      auto& [parent, pol] = t.parent_of(id);
      g.edges.push_back({id, parent, argora::sign(pol)});
    }
  }
  return g;
}

inline refeval::Sem to_ref(const argora::SemanticsSpec& s) {
  refeval::Sem sem;
  switch (s.aggregation) {
    case argora::AggregationKind::Sum: sem.agg = refeval::Agg::Sum; break;
    case argora::AggregationKind::Product: sem.agg = refeval::Agg::Product; break;
    case argora::AggregationKind::Top: sem.agg = refeval::Agg::Top; break;
  }
  switch (s.influence.family) {
    case argora::InfluenceKind::Family::Linear: sem.inf = refeval::Inf::Linear; break;
    case argora::InfluenceKind::Family::Euler: sem.inf = refeval::Inf::Euler; break;
    case argora::InfluenceKind::Family::PMax: sem.inf = refeval::Inf::PMax; break;
  }
  sem.kappa = s.influence.kappa;
  sem.p = s.influence.p;
  return sem;
}

inline const std::vector<argora::SemanticsSpec>& all_presets() {
  static const std::vector<argora::SemanticsSpec> presets{
      argora::SemanticsSpec::df_quad(), argora::SemanticsSpec::reb(), argora::SemanticsSpec::qe(),
      argora::SemanticsSpec::sd_df_quad(), argora::SemanticsSpec::ebt()};
  return presets;
}

/// Random tree with `size` nodes (depth <= 3) and base scores in (0.01, 0.99).
/// Returns the member rows so callers can reshuffle and rebuild.
struct RandomTree {
  argora::ArgumentNode root;
  std::vector<argora::TreeMember> members;
  std::map<argora::NodeId, double> scores;

  argora::QbafTree build() const { return argora::QbafTree::build(root, members, scores); }
};

inline RandomTree random_tree(std::mt19937& rng, int size, const std::string& root_id = "r") {
  RandomTree t;
  t.root.id = root_id;
  t.root.statement = "root";
  t.root.level = 0;
  t.scores[root_id] = 0.01 + 0.98 * (rng() % 1000) / 1000.0;
  std::vector<std::pair<std::string, int>> pool{{root_id, 0}};  // (id, level)
  for (int i = 1; i < size; ++i) {
    // Pick any parent below the depth cap.
    std::pair<std::string, int> parent;
    do {
      parent = pool[rng() % pool.size()];
    } while (parent.second >= argora::QbafTree::kMaxDepth);
    argora::ArgumentNode node;
    node.id = root_id + "n" + std::to_string(100 + i);
    node.statement = "node " + node.id;
    node.level = parent.second + 1;
    const bool attack = node.level == argora::QbafTree::kMaxDepth || rng() % 2 == 0;
    t.scores[node.id] = 0.01 + 0.98 * (rng() % 1000) / 1000.0;
    t.members.push_back(
        {node, parent.first, attack ? argora::Polarity::Attack : argora::Polarity::Support});
    pool.emplace_back(node.id, node.level);
  }
  return t;
}

/// Random family of `mains` trees, each with up to max_size nodes.
inline argora::Family random_family(std::mt19937& rng, int mains, int max_size) {
  argora::Family family;
  for (int i = 0; i < mains; ++i) {
    const std::string id = "m" + std::to_string(i + 1);
    family.emplace(id, random_tree(rng, 2 + static_cast<int>(rng() % (max_size - 1)), id).build());
  }
  return family;
}

}  // namespace fixtures
