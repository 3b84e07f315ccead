#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "argora/consensus.hpp"
#include "argora/counterfactual.hpp"
#include "argora/errors.hpp"
#include "argora/pipeline.hpp"

namespace argora {

// Deterministic Markdown consensus report. Every number is taken from the
// engine outputs carried in the bundle; rendering performs no model calls and
// no recomputation beyond formatting.

struct ReportConfigSnapshot {
  SemanticsSpec semantics;
  double rho_sim = 0.7;
  OverrideConfig override_cfg;
  std::string provider_kind = "synthetic";
  std::uint64_t seed = 0;
};

struct ReportBundle {
  DiscussionArtifacts artifacts;
  std::map<MainId, std::optional<ExplanationResult>> explanations;  // absent for lone roots
  std::vector<WinnerCritical> winner_critical;
  MarginReport margins;
  OverrideOutcome override_outcome;
  ReportConfigSnapshot config;
  std::optional<std::string> ground_truth;
};

/// Computes every analysis the report consumes from the artifacts.
inline ReportBundle build_report_bundle(const DiscussionArtifacts& artifacts,
                                        const OverrideConfig& override_cfg) {
  if (artifacts.family.empty()) fail(errc::incomplete_bundle, "artifacts carry no mains");
  ReportBundle bundle;
  bundle.artifacts = artifacts;
  bundle.config = {artifacts.semantics, artifacts.rho_sim, override_cfg, artifacts.provider_kind,
                   artifacts.seed};
  for (const auto& [main, tree] : artifacts.family) {
    bundle.explanations[main] =
        tree.size() > 1 ? std::optional(explanation_queries(tree, artifacts.semantics))
                        : std::nullopt;
  }
  bundle.winner_critical = enumerate_winner_critical(artifacts.family, artifacts.semantics);
  bundle.margins = margin_report(artifacts.family, artifacts.semantics);
  ObservationalScores obs;
  obs.sigma_hat = artifacts.sigma_hat;
  bundle.override_outcome = run_override(artifacts.family, artifacts.semantics, obs, override_cfg);
  return bundle;
}

namespace detail {

/// %g with a fixed number of significant digits; 4 for generic quantities,
/// 6 for probabilities.
inline std::string sig(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline std::string prob(double v) { return sig(v, 6); }

inline void render_subtree(std::ostringstream& out, const QbafTree& tree, const StrengthMap& sigma,
                           const NodeId& id, int depth) {
  for (int i = 0; i < depth; ++i) out << "  ";
  if (depth > 0) {
    const auto& [parent, polarity] = tree.parent_of(id);
    out << (polarity == Polarity::Support ? "(+) " : "(-) ");
  }
  const auto& node = tree.node(id);
  out << id << " [w=" << sig(tree.base_score(id)) << ", sigma=" << sig(sigma.at(id)) << "] "
      << node.statement << "\n";
  for (const auto& [child, polarity] : tree.children(id))
    render_subtree(out, tree, sigma, child, depth + 1);
}

inline const char* yes_no(bool b) { return b ? "yes" : "no"; }

}  // namespace detail

inline std::string render_report(const ReportBundle& bundle) {
  const DiscussionArtifacts& a = bundle.artifacts;
  if (a.family.empty()) fail(errc::incomplete_bundle, "bundle has no mains");
  for (const auto& [main, tree] : a.family) {
    if (!a.strengths.count(main) || !a.sigma_hat.count(main))
      fail(errc::incomplete_bundle, "bundle is missing data for main '" + main + "'");
    if (!bundle.explanations.count(main))
      fail(errc::incomplete_bundle, "bundle is missing the explanation entry for '" + main + "'");
  }
  if (!a.family.count(bundle.margins.winner) ||
      !a.family.count(bundle.override_outcome.baseline_winner))
    fail(errc::incomplete_bundle, "bundle references an unknown winner");

  const OverrideOutcome& ov = bundle.override_outcome;
  std::ostringstream out;

  auto label_of = [&](const MainId& m) -> std::string {
    auto it = a.labels.find(m);
    return it == a.labels.end() ? std::string("-") : it->second;
  };

  out << "# Technical Consensus Report\n\n";

  // --- Section 0 -----------------------------------------------------------
  out << "## 0. Configuration and Metadata\n\n";
  out << "### 0.1 Task Specification\n\n";
  out << "- Topic: " << a.task.topic << "\n";
  out << "- Main task: " << a.task.main_task << "\n";
  out << "- Key elements: ";
  for (std::size_t i = 0; i < a.task.key_elements.size(); ++i)
    out << (i ? "; " : "") << a.task.key_elements[i];
  out << "\n\n";

  out << "### 0.2 Framework Configuration\n\n";
  out << "- Experts (" << a.task.experts.size() << "): ";
  for (std::size_t i = 0; i < a.task.experts.size(); ++i) out << (i ? ", " : "") << a.task.experts[i];
  out << "\n- Rounds: 1\n";
  out << "- Provider: " << bundle.config.provider_kind << " (seed " << bundle.config.seed << ")\n";
  const SemanticsSpec& sem = bundle.config.semantics;
  out << "- Semantics: " << sem.name << " (aggregation " << to_string(sem.aggregation)
      << ", influence " << to_string(sem.influence.family) << ", kappa "
      << detail::sig(sem.influence.kappa) << ", p " << sem.influence.p << ")\n";
  out << "- Pruning threshold rho_sim: " << detail::sig(bundle.config.rho_sim) << "\n";
  const OverrideConfig& oc = bundle.config.override_cfg;
  out << "- Override: lambda " << detail::sig(oc.lambda) << ", tau " << detail::sig(oc.tau)
      << ", cost " << to_string(oc.cost) << ", " << (oc.gated ? "gated" : "ungated") << "\n\n";

  out << "### 0.3 Execution Summary\n\n";
  std::size_t nodes = 0, supports = 0, attacks = 0;
  for (const auto& [main, tree] : a.family) {
    nodes += tree.size();
    for (const auto& [id, node] : tree.nodes())
      if (!tree.is_root(id))
        (tree.parent_of(id).second == Polarity::Support ? supports : attacks) += 1;
  }
  out << "- Main arguments: " << a.family.size() << "\n";
  out << "- Argument nodes: " << nodes << "\n";
  out << "- Support edges: " << supports << "\n";
  out << "- Attack edges: " << attacks << "\n\n";

  out << "### 0.4 Evaluation Summary\n\n";
  out << "- Baseline winner: " << ov.baseline_winner << "\n";
  out << "- Observational winner: " << ov.observational_winner << "\n";
  out << "- Override applied: " << detail::yes_no(ov.applied.has_value()) << "\n";
  out << "- Final winner: " << ov.final_winner << "\n";
  if (!a.labels.empty()) {
    out << "- Answer mapping: ";
    bool first = true;
    for (const auto& [main, label] : a.labels) {
      out << (first ? "" : ", ") << main << " -> " << label;
      first = false;
    }
    out << "\n";
  }
  out << "\n";

  // --- Section 1 -----------------------------------------------------------
  out << "## 1. Main Argument Enumeration\n\n";
  out << "### 1.1 Main Arguments\n\n";
  for (const auto& [main, tree] : a.family) {
    out << "- " << main << " (sources: ";
    const auto& sources = a.sources.count(main) ? a.sources.at(main) : std::vector<std::string>{};
    for (std::size_t i = 0; i < sources.size(); ++i) out << (i ? ", " : "") << sources[i];
    if (!a.labels.empty()) out << "; answer: " << label_of(main);
    out << "): " << tree.node(main).statement << "\n";
  }
  out << "\n";

  // --- Section 2 -----------------------------------------------------------
  out << "## 2. QBAF Evaluation\n\n";
  out << "### 2.1 Base Scores\n\n";
  out << "| main | w(m) |\n|---|---|\n";
  for (const auto& [main, tree] : a.family)
    out << "| " << main << " | " << detail::sig(tree.base_score(main)) << " |\n";
  out << "\n";

  out << "### 2.2 QBAF Structure\n\n";
  for (const auto& [main, tree] : a.family) {
    out << "```\n";
    detail::render_subtree(out, tree, a.strengths.at(main), main, 0);
    out << "```\n\n";
  }

  out << "### 2.3 Final Strengths\n\n";
  out << "| main | sigma(m) |\n|---|---|\n";
  for (const auto& [main, sigma] : a.strengths)
    out << "| " << main << " | " << detail::sig(sigma.at(main)) << " |\n";
  out << "\n";

  out << "### 2.4 Consensus Distribution\n\n";
  out << "| main | p_qbaf(m) |\n|---|---|\n";
  for (const auto& [main, p] : ov.p_qbaf.p) out << "| " << main << " | " << detail::prob(p) << " |\n";
  if (ov.p_qbaf.floored) out << "\nNote: zero strengths were floored before normalization.\n";
  out << "\n";

  out << "### 2.5 Winner and Margin\n\n";
  out << "- Winner: " << bundle.margins.winner << "\n";
  if (bundle.margins.min_final_margin) {
    out << "- Margin to closest competitor (" << *bundle.margins.closest_competitor
        << "): " << detail::sig(*bundle.margins.min_final_margin) << "\n";
  } else {
    out << "- Margin: not defined (single main argument)\n";
  }
  out << "\n";

  out << "### 2.6 Margin Decomposition\n\n";
  out << "| main | net lift |\n|---|---|\n";
  for (const auto& lift : bundle.margins.net_lifts)
    out << "| " << lift.main << " | " << detail::sig(lift.lift) << " |\n";
  out << "\n";
  if (!bundle.margins.competitors.empty()) {
    out << "| vs | prior margin | argumentative margin | final margin | victory type |\n";
    out << "|---|---|---|---|---|\n";
    for (const auto& d : bundle.margins.competitors)
      out << "| " << d.competitor << " | " << detail::sig(d.prior_margin) << " | "
          << detail::sig(d.argumentative_margin) << " | " << detail::sig(d.final_margin) << " | "
          << to_string(d.victory) << " |\n";
    out << "\nMinimum final margin: " << detail::sig(*bundle.margins.min_final_margin) << " (vs "
        << *bundle.margins.closest_competitor << ")\n";
  } else {
    out << "No competitors: the sole main argument wins by default.\n";
  }
  out << "\n";

  // --- Section 3 -----------------------------------------------------------
  out << "## 3. Counterfactual Analysis\n\n";
  const MainId& winner = bundle.margins.winner;
  const auto& winner_explanation = bundle.explanations.at(winner);
  if (winner_explanation) {
    const ExplanationResult& ex = *winner_explanation;
    out << "### 3.1 Most Influential Direct Child\n\n";
    out << "- " << ex.most_influential_direct_child.node << " with impact "
        << detail::sig(ex.most_influential_direct_child.delta) << " (intervened root strength "
        << detail::sig(ex.most_influential_direct_child.intervention_root_strength) << ")\n\n";
    out << "### 3.2 Most Decisive Argument Chain\n\n";
    out << "- ";
    for (std::size_t i = 0; i < ex.decisive_chain.size(); ++i)
      out << (i ? " -> " : "") << ex.decisive_chain[i];
    out << " (leaf impact " << detail::sig(ex.most_influential_leaf.delta) << ")\n\n";
    out << "### 3.3 Most Influential Node\n\n";
    out << "| node | impact | intervened root strength |\n|---|---|---|\n";
    for (const auto& impact : ex.impacts)
      out << "| " << impact.node << " | " << detail::sig(impact.delta) << " | "
          << detail::sig(impact.intervention_root_strength) << " |\n";
    out << "\nTop node: " << ex.most_influential_node.node << "\n\n";
  } else {
    out << "### 3.1-3.3 Within-Graph Queries\n\n";
    out << "The winning tree has no non-root nodes; within-graph queries are empty.\n\n";
  }

  out << "### 3.4 Winner-Critical Interventions\n\n";
  if (bundle.winner_critical.empty()) {
    out << "None: no single edge deletion changes the winner, so the decision is robust to "
           "every single-edge perturbation.\n\n";
  } else {
    out << "| main | node | new winner | intervened root strength |\n|---|---|---|---|\n";
    for (const auto& wc : bundle.winner_critical)
      out << "| " << wc.intervention.main << " | " << wc.intervention.node << " | " << wc.new_winner
          << " | " << detail::sig(wc.intervened_root_strength) << " |\n";
    out << "\nTotal: " << bundle.winner_critical.size() << "\n\n";
  }

  // --- Section 4 -----------------------------------------------------------
  out << "## 4. Observational Override Analysis\n\n";
  out << "### 4.1 Observational Distribution\n\n";
  out << "| main | judge score | p_obs(m) |\n|---|---|---|\n";
  for (const auto& [main, p] : ov.p_obs.p)
    out << "| " << main << " | " << detail::sig(a.sigma_hat.at(main)) << " | " << detail::prob(p)
        << " |\n";
  out << "\n";

  out << "### 4.2 Observational Winner\n\n";
  out << "- " << ov.observational_winner;
  if (!a.labels.empty()) out << " (answer: " << label_of(ov.observational_winner) << ")";
  out << "\n\n";

  out << "### 4.3 Distribution Comparison\n\n";
  out << "| main | p_qbaf - p_obs |\n|---|---|\n";
  for (const auto& [main, p] : ov.p_qbaf.p)
    out << "| " << main << " | " << detail::sig(p - ov.p_obs.at(main)) << " |\n";
  out << "\nJS divergence (no intervention): " << detail::prob(ov.j_empty) << "\n\n";

  out << "### 4.4 Override Decision\n\n";
  out << "- Winner-confidence gate passed: " << detail::yes_no(ov.gate_passed) << "\n";
  if (ov.applied) {
    out << "- Override applied: deleting the edge of " << ov.applied->node << " in "
        << ov.applied->main << " realigns the winner to " << ov.final_winner << " with objective "
        << detail::prob(*ov.j_applied) << " < " << detail::prob(ov.j_empty) << "\n\n";
  } else if (ov.baseline_winner == ov.observational_winner) {
    out << "- No override: the argumentative and observational winners already agree.\n\n";
  } else if (!ov.gate_passed) {
    out << "- No override: the winner-confidence gate blocked the search.\n\n";
  } else {
    out << "- No override: no eligible intervention strictly improves the objective.\n\n";
  }

  out << "### 4.5 Override Search Details\n\n";
  if (ov.candidates.empty()) {
    out << "No singleton candidates exist (all trees are single nodes).\n\n";
  } else {
    out << "| intervention | post winner | JS | cost | objective | eligible |\n";
    out << "|---|---|---|---|---|---|\n";
    for (const auto& cand : ov.candidates)
      out << "| " << cand.intervention.main << " / " << cand.intervention.node << " | "
          << cand.post_winner << " | " << detail::prob(cand.js) << " | " << detail::sig(cand.cost)
          << " | " << detail::prob(cand.objective) << " | " << detail::yes_no(cand.eligible)
          << " |\n";
    out << "\nSelected: ";
    if (ov.applied)
      out << ov.applied->main << " / " << ov.applied->node << "\n\n";
    else
      out << "none (null intervention retained)\n\n";
  }

  // --- Section 5 -----------------------------------------------------------
  out << "## 5. Aggregation Method Comparison\n\n";
  out << "### 5.1 Method Comparison\n\n";
  out << "| method | winner | answer |\n|---|---|---|\n";
  out << "| QBAF consensus | " << ov.baseline_winner << " | " << label_of(ov.baseline_winner)
      << " |\n";
  out << "| Observational judge | " << ov.observational_winner << " | "
      << label_of(ov.observational_winner) << " |\n";
  out << "| Final (post-override) | " << ov.final_winner << " | " << label_of(ov.final_winner)
      << " |\n\n";

  out << "### 5.2 Winning Answer Analysis\n\n";
  out << "- Methods agree: " << detail::yes_no(ov.baseline_winner == ov.observational_winner)
      << "\n";
  if (bundle.ground_truth) {
    out << "- Ground truth: " << *bundle.ground_truth << "\n";
    out << "- Final answer correct: "
        << detail::yes_no(label_of(ov.final_winner) == *bundle.ground_truth) << "\n";
  }
  out << "\n";

  // --- Section 6 -----------------------------------------------------------
  out << "## 6. Final Decision\n\n";
  out << "- Decision: " << ov.final_winner << " - "
      << a.family.at(ov.final_winner).node(ov.final_winner).statement << "\n";
  out << "- Final strength: " << detail::sig(a.strengths.at(ov.final_winner).at(ov.final_winner))
      << "\n";
  if (bundle.margins.min_final_margin)
    out << "- Baseline margin over the field: " << detail::sig(*bundle.margins.min_final_margin)
        << "\n";
  out << "- Single-edge robustness: "
      << (bundle.winner_critical.empty() ? "no winner-critical interventions"
                                         : std::to_string(bundle.winner_critical.size()) +
                                               " winner-critical interventions")
      << "\n";
  out << "- Override: " << (ov.applied ? "applied" : "not applied") << "\n";
  return out.str();
}

}  // namespace argora
