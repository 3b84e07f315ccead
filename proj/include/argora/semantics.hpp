#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "argora/errors.hpp"
#include "argora/qbaf.hpp"

namespace argora {

// Modular semantics: a node's strength is influence(base score, aggregate of
// signed child strengths), with leaves pinned to their base score. On a finite
// tree the bottom-up solution exists and is unique, so evaluation is a single
// deterministic pass.

enum class AggregationKind { Sum, Product, Top };

struct InfluenceKind {
  enum class Family { Linear, Euler, PMax };

  Family family = Family::Linear;
  double kappa = 1.0;  // damping for Linear and PMax; larger stays closer to w
  int p = 1;           // exponent for PMax

  static InfluenceKind linear(double kappa = 1.0) { return {Family::Linear, kappa, 1}; }
  static InfluenceKind euler() { return {Family::Euler, 1.0, 1}; }
  static InfluenceKind pmax(int p, double kappa = 1.0) { return {Family::PMax, kappa, p}; }

  bool operator==(const InfluenceKind&) const = default;
};

struct SemanticsSpec {
  AggregationKind aggregation = AggregationKind::Product;
  InfluenceKind influence = InfluenceKind::linear();
  std::string name = "df-quad";

  static SemanticsSpec df_quad(double kappa = 1.0) {
    return {AggregationKind::Product, InfluenceKind::linear(kappa), "df-quad"};
  }
  static SemanticsSpec reb() { return {AggregationKind::Sum, InfluenceKind::euler(), "reb"}; }
  static SemanticsSpec qe(double kappa = 1.0) {
    return {AggregationKind::Sum, InfluenceKind::pmax(2, kappa), "qe"};
  }
  static SemanticsSpec sd_df_quad(double kappa = 1.0) {
    return {AggregationKind::Product, InfluenceKind::pmax(1, kappa), "sd-df-quad"};
  }
  static SemanticsSpec ebt() { return {AggregationKind::Top, InfluenceKind::euler(), "ebt"}; }

  static const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"df-quad", "reb", "qe", "sd-df-quad", "ebt"};
    return names;
  }

  /// Preset lookup; kappa applies to kappa-parameterized presets, p overrides
  /// the PMax exponent when given.
  static SemanticsSpec by_name(const std::string& name, double kappa = 1.0,
                               std::optional<int> p = std::nullopt) {
    SemanticsSpec spec;
    if (name == "df-quad")
      spec = df_quad(kappa);
    else if (name == "reb")
      spec = reb();
    else if (name == "qe")
      spec = qe(kappa);
    else if (name == "sd-df-quad")
      spec = sd_df_quad(kappa);
    else if (name == "ebt")
      spec = ebt();
    else
      fail(errc::config_error, "unknown semantics '" + name + "'");
    if (p) {
      if (*p < 1) fail(errc::config_error, "p must be a positive integer");
      if (spec.influence.family == InfluenceKind::Family::PMax) spec.influence.p = *p;
    }
    return spec;
  }

  bool operator==(const SemanticsSpec&) const = default;
};

/// Signed aggregation of child strengths. Empty input yields 0 for every kind.
inline double aggregate(AggregationKind kind, std::span<const Polarity> polarities,
                        std::span<const double> strengths) {
  if (polarities.size() != strengths.size())
    fail(errc::length_mismatch, "polarity and strength lists differ in length");
  switch (kind) {
    case AggregationKind::Sum: {
      double acc = 0.0;
      for (std::size_t i = 0; i < strengths.size(); ++i) acc += sign(polarities[i]) * strengths[i];
      return acc;
    }
    case AggregationKind::Product: {
      double attackers = 1.0, supporters = 1.0;
      for (std::size_t i = 0; i < strengths.size(); ++i) {
        if (polarities[i] == Polarity::Attack)
          attackers *= 1.0 - strengths[i];
        else
          supporters *= 1.0 - strengths[i];
      }
      return attackers - supporters;
    }
    case AggregationKind::Top: {
      // Strongest supporter minus strongest attacker, each 0 when absent.
      double top_support = 0.0, top_attack = 0.0;
      for (std::size_t i = 0; i < strengths.size(); ++i) {
        if (polarities[i] == Polarity::Support)
          top_support = std::max(top_support, strengths[i]);
        else
          top_attack = std::max(top_attack, strengths[i]);
      }
      return top_support - top_attack;
    }
  }
  return 0.0;
}

namespace detail {

inline double h_p(double x, int p) {
  const double m = std::max(0.0, x);
  const double mp = std::pow(m, p);
  return mp / (1.0 + mp);
}

}  // namespace detail

/// Maps an aggregated value back into [0,1] relative to the base score w.
/// Linear clips the aggregate to [-kappa, kappa]; Euler clamps the exponent
/// argument to [-60, 60] so exp never overflows.
inline double influence(const InfluenceKind& kind, double w, double s) {
  double v = w;
  switch (kind.family) {
    case InfluenceKind::Family::Linear: {
      const double c = std::clamp(s, -kind.kappa, kind.kappa);
      v = w - (w / kind.kappa) * std::max(0.0, -c) + ((1.0 - w) / kind.kappa) * std::max(0.0, c);
      break;
    }
    case InfluenceKind::Family::Euler: {
      const double c = std::clamp(s, -60.0, 60.0);
      v = 1.0 - (1.0 - w * w) / (1.0 + w * std::exp(c));
      break;
    }
    case InfluenceKind::Family::PMax:
      v = w - w * detail::h_p(-s / kind.kappa, kind.p) +
          (1.0 - w) * detail::h_p(s / kind.kappa, kind.p);
      break;
  }
  return std::clamp(v, 0.0, 1.0);
}

using StrengthMap = std::map<NodeId, double>;

namespace detail {

template <typename ChildrenFn>
double eval_node(const QbafTree& tree, const ChildrenFn& surviving_children,
                 const SemanticsSpec& spec, const NodeId& id, StrengthMap& out) {
  if (auto it = out.find(id); it != out.end()) return it->second;
  const auto kids = surviving_children(id);
  double value;
  if (kids.empty()) {
    value = tree.base_score(id);  // leaf normalization: sigma(a) = w(a) exactly
  } else {
    std::vector<Polarity> pol;
    std::vector<double> str;
    pol.reserve(kids.size());
    str.reserve(kids.size());
    for (const auto& [child, polarity] : kids) {
      pol.push_back(polarity);
      str.push_back(eval_node(tree, surviving_children, spec, child, out));
    }
    value = influence(spec.influence, tree.base_score(id), aggregate(spec.aggregation, pol, str));
  }
  out.emplace(id, value);
  return value;
}

}  // namespace detail

/// Bottom-up evaluation of every node. Children are always visited in NodeId
/// order, so the result is byte-reproducible regardless of construction order.
inline StrengthMap evaluate(const QbafTree& tree, const SemanticsSpec& spec) {
  StrengthMap out;
  auto surviving = [&](const NodeId& id) { return tree.children(id); };
  for (const auto& [id, node] : tree.nodes()) detail::eval_node(tree, surviving, spec, id, out);
  return out;
}

/// Forest evaluation: detached components are still evaluated (their strengths
/// stay well defined) but no longer feed into the root.
inline StrengthMap evaluate(const PrunedForest& forest, const SemanticsSpec& spec) {
  StrengthMap out;
  const QbafTree& tree = forest.origin();
  auto surviving = [&](const NodeId& id) { return forest.children(id); };
  for (const auto& [id, node] : tree.nodes()) detail::eval_node(tree, surviving, spec, id, out);
  return out;
}

inline double root_strength(const QbafTree& tree, const SemanticsSpec& spec) {
  StrengthMap out;
  auto surviving = [&](const NodeId& id) { return tree.children(id); };
  return detail::eval_node(tree, surviving, spec, tree.root(), out);
}

inline double root_strength(const PrunedForest& forest, const SemanticsSpec& spec) {
  StrengthMap out;
  auto surviving = [&](const NodeId& id) { return forest.children(id); };
  return detail::eval_node(forest.origin(), surviving, spec, forest.origin().root(), out);
}

inline const char* to_string(AggregationKind k) {
  switch (k) {
    case AggregationKind::Sum: return "sum";
    case AggregationKind::Product: return "product";
    case AggregationKind::Top: return "top";
  }
  return "?";
}

inline const char* to_string(InfluenceKind::Family f) {
  switch (f) {
    case InfluenceKind::Family::Linear: return "linear";
    case InfluenceKind::Family::Euler: return "euler";
    case InfluenceKind::Family::PMax: return "p-max";
  }
  return "?";
}

}  // namespace argora
