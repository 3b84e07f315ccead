#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "argora/costs.hpp"
#include "argora/counterfactual.hpp"
#include "argora/errors.hpp"
#include "argora/semantics.hpp"

namespace argora {

/// Normalized consensus over main arguments: nonnegative, sums to one.
struct ConsensusDistribution {
  std::map<MainId, double> p;
  bool floored = false;  // set when any input mass had to be floored

  double at(const MainId& m) const {
    auto it = p.find(m);
    if (it == p.end()) fail(errc::unknown_node, "no mass for main '" + m + "'");
    return it->second;
  }
};

/// Divide every mass by the total. Top-style semantics can evaluate a root to
/// exactly 0, so masses are floored at floor_eps first; the flag records that
/// this happened.
inline ConsensusDistribution normalize(const std::map<MainId, double>& strengths,
                                       double floor_eps = 1e-9) {
  ConsensusDistribution out;
  double total = 0.0;
  for (auto& [main, value] : strengths) {
    double v = value;
    if (v < floor_eps) {
      v = floor_eps;
      out.floored = true;
    }
    out.p[main] = v;
    total += v;
  }
  if (!(total > 0.0)) fail(errc::non_positive_mass, "total mass is not positive");
  for (auto& [main, value] : out.p) value /= total;
  return out;
}

/// Jensen-Shannon divergence, base-2 by default so the value lives in [0,1].
/// Symmetric, zero iff the distributions coincide.
inline double js_divergence(const ConsensusDistribution& p, const ConsensusDistribution& q,
                            double log_base = 2.0) {
  if (p.p.size() != q.p.size()) fail(errc::support_mismatch, "distribution supports differ");
  auto qi = q.p.begin();
  const double log_norm = std::log(log_base);
  double acc = 0.0;
  for (auto pi = p.p.begin(); pi != p.p.end(); ++pi, ++qi) {
    if (pi->first != qi->first) fail(errc::support_mismatch, "distribution supports differ");
    const double m = 0.5 * (pi->second + qi->second);
    if (pi->second > 0.0) acc += 0.5 * pi->second * std::log(pi->second / m);
    if (qi->second > 0.0) acc += 0.5 * qi->second * std::log(qi->second / m);
  }
  return std::max(0.0, acc / log_norm);
}

/// Raw judge confidences, strictly positive per main.
struct ObservationalScores {
  std::map<MainId, double> sigma_hat;
};

struct OverrideConfig {
  double lambda = 0.05;
  double tau = 0.0;
  CostKind cost = CostKind::State;
  bool gated = true;      // false = ablation without the winner-confidence gate
  double floor_eps = 1e-9;
  double js_log_base = 2.0;
};

/// One evaluated candidate of the override search, kept for reporting.
struct OverrideCandidate {
  SingletonIntervention intervention;
  MainId post_winner;
  double js = 0.0;
  double cost = 0.0;
  double objective = 0.0;
  bool eligible = false;
};

struct OverrideOutcome {
  MainId baseline_winner;
  MainId observational_winner;
  MainId final_winner;
  std::optional<SingletonIntervention> applied;
  double j_empty = 0.0;
  std::optional<double> j_applied;
  bool gate_passed = false;
  ConsensusDistribution p_qbaf;
  ConsensusDistribution p_obs;
  std::optional<ConsensusDistribution> p_qbaf_final;  // set when an override applied
  std::vector<OverrideCandidate> candidates;          // (main, node) order
};

/// Observation-aligned override search over the null intervention plus all
/// singletons. A candidate is eligible when the winner-confidence gate
/// p_obs(obs winner) - p_qbaf(baseline winner) >= tau holds and its
/// post-intervention winner equals the observational winner. The applied
/// intervention is the eligible argmin of J = JS + lambda * cost, and only
/// when it strictly improves on J(null); ties prefer the null intervention,
/// then (main, node) order.
inline OverrideOutcome run_override(const Family& family, const SemanticsSpec& spec,
                                    const ObservationalScores& obs, const OverrideConfig& cfg) {
  if (family.empty()) fail(errc::empty_family, "override over an empty family");
  if (obs.sigma_hat.size() != family.size())
    fail(errc::support_mismatch, "family and observational scores differ in mains");
  for (auto& [main, tree] : family)
    if (!obs.sigma_hat.count(main))
      fail(errc::support_mismatch, "no observational score for main '" + main + "'");

  OverrideOutcome out;
  const auto baseline = family_root_strengths(family, spec);
  out.p_qbaf = normalize(baseline, cfg.floor_eps);
  out.p_obs = normalize(obs.sigma_hat, cfg.floor_eps);
  out.baseline_winner = select_winner(out.p_qbaf.p);
  out.observational_winner = select_winner(out.p_obs.p);
  out.final_winner = out.baseline_winner;
  out.j_empty = js_divergence(out.p_qbaf, out.p_obs, cfg.js_log_base);
  out.gate_passed =
      out.p_obs.at(out.observational_winner) - out.p_qbaf.at(out.baseline_winner) >= cfg.tau;

  const bool search_open = cfg.gated ? out.gate_passed : true;

  double best_j = out.j_empty;
  std::optional<std::size_t> best;
  for (auto& [main, tree] : family) {
    for (auto& [id, node] : tree.nodes()) {
      if (tree.is_root(id)) continue;
      OverrideCandidate cand;
      cand.intervention = {main, id};
      auto adjusted = baseline;
      adjusted[main] = root_strength(delete_edge(tree, id), spec);
      const auto p_after = normalize(adjusted, cfg.floor_eps);
      cand.post_winner = select_winner(p_after.p);
      cand.js = js_divergence(p_after, out.p_obs, cfg.js_log_base);
      cand.cost = intervention_cost(cfg.cost, family, spec, InterventionConfig::singleton(main, id));
      cand.objective = cand.js + cfg.lambda * cand.cost;
      cand.eligible = search_open && cand.post_winner == out.observational_winner;
      out.candidates.push_back(cand);
      if (cand.eligible && cand.objective < best_j) {
        best_j = cand.objective;
        best = out.candidates.size() - 1;
      }
    }
  }

  if (best) {
    const OverrideCandidate& chosen = out.candidates[*best];
    out.applied = chosen.intervention;
    out.j_applied = chosen.objective;
    out.final_winner = chosen.post_winner;
    auto adjusted = baseline;
    const QbafTree& tree = family.at(chosen.intervention.main);
    adjusted[chosen.intervention.main] =
        root_strength(delete_edge(tree, chosen.intervention.node), spec);
    out.p_qbaf_final = normalize(adjusted, cfg.floor_eps);
  }
  return out;
}

/// One row of the (cost kind, lambda, gated) sweep.
struct SweepRow {
  CostKind cost = CostKind::State;
  double lambda = 0.0;
  bool gated = true;
  bool applied = false;
  MainId final_winner;
  double j_empty = 0.0;
  std::optional<double> j_applied;
  std::optional<SingletonIntervention> intervention;
};

inline const std::vector<double>& default_lambda_grid() {
  static const std::vector<double> grid{0.0, 0.001, 0.002, 0.005, 0.01,
                                        0.02, 0.05, 0.1, 0.2, 0.5};
  return grid;
}

inline const std::vector<CostKind>& all_cost_kinds() {
  static const std::vector<CostKind> kinds{CostKind::State, CostKind::StateReach, CostKind::Edge,
                                           CostKind::EdgeReach};
  return kinds;
}

/// Full grid sweep, gated and ungated, for the evaluation machinery.
inline std::vector<SweepRow> override_sweep(
    const Family& family, const SemanticsSpec& spec, const ObservationalScores& obs,
    double tau = 0.0, const std::vector<double>& lambdas = default_lambda_grid(),
    const std::vector<CostKind>& kinds = all_cost_kinds()) {
  std::vector<SweepRow> rows;
  for (CostKind kind : kinds) {
    for (double lambda : lambdas) {
      for (bool gated : {true, false}) {
        OverrideConfig cfg;
        cfg.lambda = lambda;
        cfg.tau = tau;
        cfg.cost = kind;
        cfg.gated = gated;
        const OverrideOutcome outcome = run_override(family, spec, obs, cfg);
        SweepRow row;
        row.cost = kind;
        row.lambda = lambda;
        row.gated = gated;
        row.applied = outcome.applied.has_value();
        row.final_winner = outcome.final_winner;
        row.j_empty = outcome.j_empty;
        row.j_applied = outcome.j_applied;
        row.intervention = outcome.applied;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace argora
