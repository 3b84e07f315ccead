#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "argora/costs.hpp"
#include "argora/errors.hpp"
#include "argora/provider.hpp"
#include "argora/pruning.hpp"
#include "argora/qbaf.hpp"
#include "argora/semantics.hpp"

namespace argora {

// One full discussion round: main-argument extraction, three levels of
// supplementary argument generation, base scoring, QBAF assembly, evaluation,
// and the observational judge call. All merging is order-deterministic, so a
// deterministic provider makes the whole round reproducible.

/// Which experts proposed each main; the first entry is the primary source.
using SourceMap = std::map<MainId, std::vector<std::string>>;

/// A tree being grown level by level before validation.
struct TreeDraft {
  MainId id;
  ArgumentNode root;
  std::vector<ArgumentNode> nodes;                          // attach order
  std::map<NodeId, std::pair<NodeId, Polarity>> edges;      // child -> (parent, polarity)

  const std::string& statement_of(const NodeId& node_id) const {
    if (node_id == root.id) return root.statement;
    for (const ArgumentNode& n : nodes)
      if (n.id == node_id) return n.statement;
    fail(errc::unknown_node, "draft has no node '" + node_id + "'");
  }

  std::vector<ArgumentNode> level_nodes(int level) const {
    std::vector<ArgumentNode> out;
    for (const ArgumentNode& n : nodes)
      if (n.level == level) out.push_back(n);
    return out;
  }
};

namespace detail {

inline std::string lowercase(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline NodeId make_node_id(const MainId& main, int level, std::size_t counter) {
  // Zero-padded counters keep lexicographic NodeId order equal to creation
  // order, which the tie-breaking rules rely on.
  if (counter > 999)
    fail(errc::config_error, "more than 999 nodes generated at level " + std::to_string(level) +
                                 " of '" + main + "'");
  char buf[8];
  std::snprintf(buf, sizeof buf, "%03zu", counter);
  return main + "." + std::to_string(level) + "." + buf;
}

/// Attach pruned candidates to the draft, assigning level-prefixed counter ids
/// in attach order (which therefore sort by creation).
inline void attach(TreeDraft& draft, const std::vector<PruneCandidate>& selected, int level) {
  std::size_t counter = draft.level_nodes(level).size();
  for (const PruneCandidate& c : selected) {
    ArgumentNode node;
    node.id = make_node_id(draft.id, level, ++counter);
    node.statement = c.text;
    node.level = level;
    node.author = c.author;
    draft.edges[node.id] = {c.parent, level == QbafTree::kMaxDepth ? Polarity::Attack : c.polarity};
    draft.nodes.push_back(std::move(node));
  }
}

template <typename Fn>
auto with_phase(const char* phase, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(phase) + ": " + e.what());
  }
}

}  // namespace detail

/// Phase 1: one proposal per expert; case-insensitive exact duplicates merge
/// into a single main node with several source experts. Main ids are assigned
/// in expert-id order of the first proposer.
inline std::pair<std::vector<ArgumentNode>, SourceMap> extract_main_arguments(
    const TaskSpec& task, ExpertProvider& provider) {
  return detail::with_phase("main-argument extraction", [&] {
    std::vector<ArgumentNode> mains;
    SourceMap sources;
    std::map<std::string, MainId> by_text;  // lowercased statement -> main id
    std::size_t counter = 0;
    for (const std::string& expert : task.experts) {
      const std::string statement = provider.propose_main(task, expert);
      if (statement.empty()) fail(errc::empty_proposal, "expert '" + expert + "' proposed nothing");
      const std::string key = detail::lowercase(statement);
      auto it = by_text.find(key);
      if (it == by_text.end()) {
        ArgumentNode node;
        node.id = "m" + std::to_string(++counter);
        node.statement = statement;
        node.level = 0;
        node.author = expert;  // primary source
        by_text.emplace(key, node.id);
        sources[node.id] = {expert};
        mains.push_back(std::move(node));
      } else {
        sources[it->second].push_back(expert);
      }
    }
    return std::make_pair(std::move(mains), std::move(sources));
  });
}

/// Phase 2: the primary source reviews its own main as author, everyone else
/// as peer; agree yields support children, disagree attack children. Pruning
/// context is the topic, the main task and the key elements.
inline void gen_first_level(TreeDraft& draft, const TaskSpec& task, ExpertProvider& provider,
                            const std::string& primary_source, double rho,
                            const SimilarityFunction& sim = tf_cosine) {
  detail::with_phase("first-level generation", [&] {
    std::vector<PruneCandidate> candidates;
    for (const std::string& expert : task.experts) {
      const ReviewRole role = expert == primary_source ? ReviewRole::Author : ReviewRole::Peer;
      const auto [stance, reasonings] = provider.review_main(task, expert, draft.root.statement, role);
      for (const std::string& text : reasonings) {
        if (text.empty()) continue;
        candidates.push_back({text, draft.root.id, expert,
                              stance == Stance::Agree ? Polarity::Support : Polarity::Attack});
      }
    }
    std::vector<std::string> context{task.topic, task.main_task};
    context.insert(context.end(), task.key_elements.begin(), task.key_elements.end());
    detail::attach(draft, prune(candidates, context, rho, sim), 1);
  });
}

/// Phase 3: every expert reviews the first-level nodes it did not author;
/// AGREE attaches support, DISAGREE attack, NONE nothing. Pruning context is
/// the set of first-level statements.
inline void gen_second_level(TreeDraft& draft, const TaskSpec& task, ExpertProvider& provider,
                             double rho, const SimilarityFunction& sim = tf_cosine) {
  detail::with_phase("second-level generation", [&] {
    const std::vector<ArgumentNode> level1 = draft.level_nodes(1);
    std::vector<PruneCandidate> candidates;
    for (const std::string& expert : task.experts) {
      std::vector<ReviewItem> items;
      for (const ArgumentNode& n : level1)
        if (n.author != expert)
          items.push_back({n.id, n.statement, draft.edges.at(n.id).second, *n.author});
      if (items.empty()) continue;
      for (const ReviewReply& reply :
           provider.review_first_level(task, expert, draft.root.statement, items)) {
        if (reply.index >= items.size())
          fail(errc::review_rejected, "review index " + std::to_string(reply.index) +
                                          " out of range for expert '" + expert + "'");
        if (reply.stance == ReviewStance::None || reply.justification.empty()) continue;
        candidates.push_back({reply.justification, items[reply.index].id, expert,
                              reply.stance == ReviewStance::Agree ? Polarity::Support
                                                                  : Polarity::Attack});
      }
    }
    std::vector<std::string> context;
    for (const ArgumentNode& n : level1) context.push_back(n.statement);
    detail::attach(draft, prune(candidates, context, rho, sim), 2);
  });
}

/// Phase 4: for every first-level node with second-level attacks, its original
/// author is asked for rebuttals; each non-empty rebuttal attacks the critique
/// it answers. Pruning context is the critiqued statements themselves.
inline void gen_third_level(TreeDraft& draft, const TaskSpec& task, ExpertProvider& provider,
                            double rho, const SimilarityFunction& sim = tf_cosine) {
  detail::with_phase("third-level generation", [&] {
    std::vector<PruneCandidate> candidates;
    for (const ArgumentNode& parent : draft.level_nodes(1)) {
      std::vector<ArgumentNode> critiques;
      for (const ArgumentNode& n : draft.level_nodes(2)) {
        const auto& [p, polarity] = draft.edges.at(n.id);
        if (p == parent.id && polarity == Polarity::Attack) critiques.push_back(n);
      }
      if (critiques.empty()) continue;
      std::vector<Critique> payload;
      for (const ArgumentNode& c : critiques) payload.push_back({c.statement, *c.author});
      const auto rebuttals = provider.rebut(task, *parent.author, draft.root.statement,
                                            parent.statement, payload);
      if (rebuttals.size() != critiques.size())
        fail(errc::provider_failure, "rebuttal list not aligned with critiques for '" +
                                         parent.id + "'");
      for (std::size_t i = 0; i < critiques.size(); ++i) {
        if (!rebuttals[i] || rebuttals[i]->empty()) continue;
        candidates.push_back({*rebuttals[i], critiques[i].id, *parent.author, Polarity::Attack});
      }
    }
    std::vector<std::string> context;
    std::set<NodeId> seen;
    for (const PruneCandidate& c : candidates)
      if (seen.insert(c.parent).second) context.push_back(draft.statement_of(c.parent));
    detail::attach(draft, prune(candidates, context, rho, sim), 3);
  });
}

/// Phase 5: base score = mean of the three criterion scores, each of which
/// must lie strictly in (0,1).
inline std::map<NodeId, double> assign_base_scores(const TreeDraft& draft, const TaskSpec& task,
                                                   ExpertProvider& provider) {
  return detail::with_phase("base-score assignment", [&] {
    std::map<NodeId, double> scores;
    auto score_one = [&](const ArgumentNode& node) {
      const CriterionScores s = provider.score_criteria(task, node.statement);
      for (double v : {s.task_relevance, s.evidence_support, s.logical_soundness})
        if (!(v > 0.0 && v < 1.0))
          fail(errc::score_out_of_range,
               "criterion score " + std::to_string(v) + " for '" + node.id + "' not in (0,1)");
      scores[node.id] = (s.task_relevance + s.evidence_support + s.logical_soundness) / 3.0;
    };
    score_one(draft.root);
    for (const ArgumentNode& node : draft.nodes) score_one(node);
    return scores;
  });
}

inline QbafTree build_tree(const TreeDraft& draft, std::map<NodeId, double> scores) {
  std::vector<TreeMember> members;
  for (const ArgumentNode& node : draft.nodes) {
    const auto& [parent, polarity] = draft.edges.at(node.id);
    members.push_back({node, parent, polarity});
  }
  return QbafTree::build(draft.root, std::move(members), std::move(scores));
}

/// The full record of one round.
struct DiscussionArtifacts {
  TaskSpec task;
  SemanticsSpec semantics;
  double rho_sim = 0.7;
  std::string provider_kind = "synthetic";
  std::uint64_t seed = 0;
  Family family;
  std::map<MainId, StrengthMap> strengths;
  SourceMap sources;
  std::map<MainId, double> sigma_hat;
  std::map<MainId, std::string> labels;  // optional answer labels
};

namespace detail {

inline std::string build_transcript(const std::vector<TreeDraft>& drafts) {
  std::string out;
  for (const TreeDraft& draft : drafts) {
    out += "main " + draft.id + ": " + draft.root.statement + "\n";
    for (const ArgumentNode& n : draft.level_nodes(1))
      out += "  [" + std::string(to_string(draft.edges.at(n.id).second)) + "] " + n.statement + "\n";
  }
  return out;
}

}  // namespace detail

/// Runs phases 1-6 plus the judge call. Deterministic under a deterministic
/// provider and fixed seed; the seed is recorded in the artifacts.
inline DiscussionArtifacts run_round(const TaskSpec& task, ExpertProvider& provider,
                                     const SemanticsSpec& semantics, double rho,
                                     const SimilarityFunction& sim, std::uint64_t seed) {
  if (task.experts.empty()) fail(errc::config_error, "a round needs at least one expert");
  if (task.topic.empty()) fail(errc::config_error, "topic must be non-empty");
  TaskSpec ordered = task;
  std::sort(ordered.experts.begin(), ordered.experts.end());
  ordered.experts.erase(std::unique(ordered.experts.begin(), ordered.experts.end()),
                        ordered.experts.end());

  auto [mains, sources] = extract_main_arguments(ordered, provider);

  std::vector<TreeDraft> drafts;
  for (const ArgumentNode& main : mains) {
    TreeDraft draft;
    draft.id = main.id;
    draft.root = main;
    gen_first_level(draft, ordered, provider, sources.at(main.id).front(), rho, sim);
    gen_second_level(draft, ordered, provider, rho, sim);
    gen_third_level(draft, ordered, provider, rho, sim);
    drafts.push_back(std::move(draft));
  }

  DiscussionArtifacts artifacts;
  artifacts.task = ordered;
  artifacts.semantics = semantics;
  artifacts.rho_sim = rho;
  artifacts.seed = seed;
  artifacts.sources = std::move(sources);
  for (const TreeDraft& draft : drafts) {
    QbafTree tree = build_tree(draft, assign_base_scores(draft, ordered, provider));
    artifacts.strengths.emplace(draft.id, evaluate(tree, semantics));
    artifacts.family.emplace(draft.id, std::move(tree));
  }

  std::vector<std::pair<std::string, std::string>> judged_mains;
  for (const ArgumentNode& main : mains) judged_mains.emplace_back(main.id, main.statement);
  artifacts.sigma_hat = detail::with_phase("judge", [&] {
    auto scores = provider.judge(ordered, judged_mains, detail::build_transcript(drafts));
    for (const auto& [id, statement] : judged_mains) {
      auto it = scores.find(id);
      if (it == scores.end() || !(it->second > 0.0))
        fail(errc::provider_failure, "judge returned no positive confidence for '" + id + "'");
    }
    return scores;
  });
  return artifacts;
}

inline DiscussionArtifacts run_round(const TaskSpec& task, ExpertProvider& provider,
                                     const SemanticsSpec& semantics, double rho = 0.7,
                                     std::uint64_t seed = 0) {
  return run_round(task, provider, semantics, rho, tf_cosine, seed);
}

// --- artifact JSON ----------------------------------------------------------

inline nlohmann::json to_json(const SemanticsSpec& spec) {
  return {{"name", spec.name},
          {"aggregation", to_string(spec.aggregation)},
          {"influence", to_string(spec.influence.family)},
          {"kappa", spec.influence.kappa},
          {"p", spec.influence.p}};
}

inline SemanticsSpec semantics_from_json(const nlohmann::json& j) {
  SemanticsSpec spec;
  spec.name = j.at("name").get<std::string>();
  const std::string agg = j.at("aggregation").get<std::string>();
  if (agg == "sum")
    spec.aggregation = AggregationKind::Sum;
  else if (agg == "product")
    spec.aggregation = AggregationKind::Product;
  else if (agg == "top")
    spec.aggregation = AggregationKind::Top;
  else
    fail(errc::parse_error, "unknown aggregation '" + agg + "'");
  const std::string inf = j.at("influence").get<std::string>();
  if (inf == "linear")
    spec.influence.family = InfluenceKind::Family::Linear;
  else if (inf == "euler")
    spec.influence.family = InfluenceKind::Family::Euler;
  else if (inf == "p-max")
    spec.influence.family = InfluenceKind::Family::PMax;
  else
    fail(errc::parse_error, "unknown influence '" + inf + "'");
  spec.influence.kappa = j.at("kappa").get<double>();
  spec.influence.p = j.at("p").get<int>();
  return spec;
}

inline nlohmann::json to_json(const DiscussionArtifacts& a) {
  nlohmann::json family = nlohmann::json::object();
  for (auto& [main, tree] : a.family) family[main] = to_json(tree);
  nlohmann::json j{{"task",
                    {{"topic", a.task.topic},
                     {"main_task", a.task.main_task},
                     {"key_elements", a.task.key_elements},
                     {"experts", a.task.experts}}},
                   {"semantics", to_json(a.semantics)},
                   {"rho_sim", a.rho_sim},
                   {"provider", a.provider_kind},
                   {"seed", a.seed},
                   {"family", std::move(family)},
                   {"strengths", a.strengths},
                   {"sources", a.sources},
                   {"sigma_hat", a.sigma_hat}};
  if (!a.labels.empty()) j["labels"] = a.labels;
  return j;
}

inline DiscussionArtifacts artifacts_from_json(const nlohmann::json& j) {
  DiscussionArtifacts a;
  const auto& task = j.at("task");
  a.task.topic = task.at("topic").get<std::string>();
  a.task.main_task = task.at("main_task").get<std::string>();
  a.task.key_elements = task.at("key_elements").get<std::vector<std::string>>();
  a.task.experts = task.at("experts").get<std::vector<std::string>>();
  a.semantics = semantics_from_json(j.at("semantics"));
  a.rho_sim = j.at("rho_sim").get<double>();
  a.provider_kind = j.at("provider").get<std::string>();
  a.seed = j.at("seed").get<std::uint64_t>();
  for (auto& [main, tree] : j.at("family").items()) a.family.emplace(main, tree_from_json(tree));
  a.strengths = j.at("strengths").get<std::map<MainId, StrengthMap>>();
  a.sources = j.at("sources").get<SourceMap>();
  a.sigma_hat = j.at("sigma_hat").get<std::map<MainId, double>>();
  if (j.contains("labels")) a.labels = j.at("labels").get<std::map<MainId, std::string>>();
  for (auto& [main, tree] : a.family) {
    if (!a.strengths.count(main) || !a.sigma_hat.count(main))
      fail(errc::parse_error, "artifact is missing strengths or sigma_hat for '" + main + "'");
  }
  return a;
}

}  // namespace argora
