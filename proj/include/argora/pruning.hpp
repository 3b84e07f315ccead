#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "argora/qbaf.hpp"

namespace argora {

// Contextual orthogonality pruning: Stage 1 drops candidates too similar to
// the parent-level context, Stage 2 greedily keeps only candidates that stay
// dissimilar to already-selected siblings under the same parent. If Stage 1
// rejects everything, the single least parent-similar candidate survives so an
// expansion is never empty.

/// Symmetric text similarity in [-1, 1] with self-similarity 1 for non-empty
/// texts; must be deterministic for fixed inputs.
using SimilarityFunction = std::function<double(const std::string&, const std::string&)>;

namespace detail {

inline std::map<std::string, int> term_frequencies(const std::string& text) {
  std::map<std::string, int> tf;
  std::string token;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!token.empty()) {
      ++tf[token];
      token.clear();
    }
  }
  if (!token.empty()) ++tf[token];
  return tf;
}

}  // namespace detail

/// Default similarity: cosine of term-frequency vectors over lowercased
/// alphanumeric tokens. Empty (tokenless) texts are similar only to
/// themselves.
inline double tf_cosine(const std::string& u, const std::string& v) {
  const auto tu = detail::term_frequencies(u);
  const auto tv = detail::term_frequencies(v);
  if (tu.empty() || tv.empty()) return (tu.empty() && tv.empty()) ? 1.0 : 0.0;
  if (tu == tv) return 1.0;  // exact self-similarity
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (auto& [token, count] : tu) {
    nu += static_cast<double>(count) * count;
    auto it = tv.find(token);
    if (it != tv.end()) dot += static_cast<double>(count) * it->second;
  }
  for (auto& [token, count] : tv) nv += static_cast<double>(count) * count;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

/// A not-yet-attached argument proposed for insertion at some level.
struct PruneCandidate {
  std::string text;
  NodeId parent;
  std::string author;
  Polarity polarity = Polarity::Support;
};

/// Two-stage pruning with threshold rho in [0,1]. Survivors are returned in
/// input order; Stage 2 considers them in ascending parent-similarity order
/// (ties keep input order). Non-empty input always yields non-empty output.
inline std::vector<PruneCandidate> prune(const std::vector<PruneCandidate>& candidates,
                                         const std::vector<std::string>& parent_context,
                                         double rho, const SimilarityFunction& sim = tf_cosine) {
  if (candidates.empty()) return {};

  std::vector<double> parent_sim(candidates.size(), 0.0);
  for (std::size_t i = 0; i < candidates.size(); ++i)
    for (const std::string& ctx : parent_context)
      parent_sim[i] = std::max(parent_sim[i], sim(candidates[i].text, ctx));

  std::vector<std::size_t> stage1;
  std::size_t fallback = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (parent_sim[i] < parent_sim[fallback]) fallback = i;  // first minimum wins ties
    if (parent_sim[i] <= rho) stage1.push_back(i);
  }
  if (stage1.empty()) return {candidates[fallback]};

  std::stable_sort(stage1.begin(), stage1.end(),
                   [&](std::size_t a, std::size_t b) { return parent_sim[a] < parent_sim[b]; });

  std::vector<bool> selected(candidates.size(), false);
  for (std::size_t i : stage1) {
    double sibling_sim = 0.0;
    for (std::size_t j = 0; j < candidates.size(); ++j)
      if (selected[j] && candidates[j].parent == candidates[i].parent)
        sibling_sim = std::max(sibling_sim, sim(candidates[i].text, candidates[j].text));
    if (sibling_sim <= rho) selected[i] = true;
  }

  std::vector<PruneCandidate> out;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (selected[i]) out.push_back(candidates[i]);
  return out;
}

}  // namespace argora
