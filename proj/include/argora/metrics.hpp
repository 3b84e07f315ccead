#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "argora/consensus.hpp"
#include "argora/errors.hpp"

namespace argora {

// Evaluation statistics over labeled instances: correctness transitions from
// the prior winner (argmax base score) to the final winner (argmax strength),
// the disagreement-conditioned net reversal efficiency, the exact one-sided
// McNemar test over reversal pairs, the correctness margin, and JS
// diagnostics.

struct MainOutcome {
  double base_score = 0.0;
  double final_strength = 0.0;
  std::string label;
};

struct LabeledInstance {
  std::map<MainId, MainOutcome> mains;
  std::string ground_truth;
};

struct TransitionCounts {
  long n_pp = 0;  // correct -> correct
  long n_pm = 0;  // correct -> wrong
  long n_mp = 0;  // wrong -> correct
  long n_mm = 0;  // wrong -> wrong

  long total() const { return n_pp + n_pm + n_mp + n_mm; }
};

struct TransitionRates {
  double trr = 0.0;  // truth retention
  double prr = 0.0;  // positive reversal
  double nrr = 0.0;  // negative reversal
  double epr = 0.0;  // error persistence
};

namespace detail {

/// argmax over mains by the given projection; ties go to the smaller main id.
template <typename Proj>
const std::pair<const MainId, MainOutcome>* winner_by(const LabeledInstance& instance, Proj proj) {
  const std::pair<const MainId, MainOutcome>* best = nullptr;
  for (const auto& entry : instance.mains)
    if (best == nullptr || proj(entry.second) > proj(best->second)) best = &entry;
  return best;
}

inline bool prior_correct(const LabeledInstance& i) {
  return detail::winner_by(i, [](const MainOutcome& m) { return m.base_score; })->second.label ==
         i.ground_truth;
}

inline bool final_correct(const LabeledInstance& i) {
  return detail::winner_by(i, [](const MainOutcome& m) { return m.final_strength; })->second.label ==
         i.ground_truth;
}

inline bool disagrees(const LabeledInstance& i) {
  const std::string& first = i.mains.begin()->second.label;
  for (const auto& [id, m] : i.mains)
    if (m.label != first) return true;
  return false;
}

}  // namespace detail

inline std::pair<TransitionCounts, TransitionRates> transitions(
    const std::vector<LabeledInstance>& instances) {
  if (instances.empty()) fail(errc::empty_dataset, "transition counts over an empty dataset");
  TransitionCounts counts;
  for (const LabeledInstance& i : instances) {
    if (i.mains.empty()) fail(errc::empty_dataset, "instance without mains");
    const bool p = detail::prior_correct(i);
    const bool q = detail::final_correct(i);
    if (p && q)
      ++counts.n_pp;
    else if (p && !q)
      ++counts.n_pm;
    else if (!p && q)
      ++counts.n_mp;
    else
      ++counts.n_mm;
  }
  const double n = static_cast<double>(counts.total());
  TransitionRates rates{counts.n_pp / n, counts.n_mp / n, counts.n_pm / n, counts.n_mm / n};
  return {counts, rates};
}

inline std::size_t disagreement_count(const std::vector<LabeledInstance>& instances) {
  std::size_t n = 0;
  for (const LabeledInstance& i : instances)
    if (detail::disagrees(i)) ++n;
  return n;
}

/// Net reversal efficiency: (positive - negative reversals) / |disagreement
/// set|. Instances whose mains all share a label cannot contribute reversals.
inline double nre(const std::vector<LabeledInstance>& instances) {
  if (instances.empty()) fail(errc::empty_dataset, "NRE over an empty dataset");
  const std::size_t disagree = disagreement_count(instances);
  if (disagree == 0) fail(errc::no_disagreement, "NRE undefined: the disagreement set is empty");
  const auto [counts, rates] = transitions(instances);
  return static_cast<double>(counts.n_mp - counts.n_pm) / static_cast<double>(disagree);
}

struct McNemarResult {
  long t = 0;     // reversal pairs
  double p = 1.0;  // one-sided upper-tail exact p-value
};

namespace detail {

/// Exact upper-tail Binomial(t, 1/2) at k. Integer binomials up to t = 64
/// (the tail sum fits unsigned __int128), log-space beyond.
inline double binomial_upper_tail(long k, long t) {
  if (t == 0 || k <= 0) return 1.0;
  if (k > t) return 0.0;
  if (t <= 64) {
    unsigned __int128 tail = 0;
    unsigned __int128 coeff = 1;  // C(t, 0)
    for (long i = 0; i <= t; ++i) {
      if (i >= k) tail += coeff;
      coeff = coeff * static_cast<unsigned __int128>(t - i) / static_cast<unsigned __int128>(i + 1);
    }
    long double denom = 1.0L;
    for (long i = 0; i < t; ++i) denom *= 2.0L;
    return static_cast<double>(static_cast<long double>(tail) / denom);
  }
  const long double log2v = std::log(2.0L);
  long double acc = 0.0L;
  for (long i = k; i <= t; ++i) {
    const long double log_term = std::lgamma(t + 1.0L) - std::lgamma(i + 1.0L) -
                                 std::lgamma(t - i + 1.0L) - t * log2v;
    acc += std::exp(log_term);
  }
  return static_cast<double>(std::min(acc, 1.0L));
}

}  // namespace detail

/// One-sided exact McNemar test of positive versus negative reversals:
/// p = P[Binomial(n_mp + n_pm, 1/2) >= n_mp], with p = 1 when there are no
/// reversal pairs.
inline McNemarResult mcnemar_exact(long n_mp, long n_pm) {
  if (n_mp < 0 || n_pm < 0) fail(errc::parse_error, "reversal counts must be non-negative");
  McNemarResult r;
  r.t = n_mp + n_pm;
  r.p = r.t == 0 ? 1.0 : detail::binomial_upper_tail(n_mp, r.t);
  return r;
}

/// Mean over instances that have both a correct-label and an incorrect-label
/// main of (strongest correct strength - strongest incorrect strength).
inline double correctness_margin(const std::vector<LabeledInstance>& instances) {
  double sum = 0.0;
  std::size_t valid = 0;
  for (const LabeledInstance& i : instances) {
    double best_correct = -1.0, best_wrong = -1.0;
    for (const auto& [id, m] : i.mains) {
      double& slot = m.label == i.ground_truth ? best_correct : best_wrong;
      slot = std::max(slot, m.final_strength);
    }
    if (best_correct < 0.0 || best_wrong < 0.0) continue;
    sum += best_correct - best_wrong;
    ++valid;
  }
  if (valid == 0)
    fail(errc::no_valid_instances, "no instance has both correct and incorrect mains");
  return sum / static_cast<double>(valid);
}

/// Summary of one sample: population standard deviation; median averages the
/// two middle order statistics; P90 linearly interpolates at rank 0.9*(n-1).
struct SummaryStats {
  double mean = 0.0;
  double stddev = 0.0;
  double median = 0.0;
  double p90 = 0.0;
  std::size_t count = 0;
};

inline SummaryStats summarize(std::vector<double> values) {
  SummaryStats s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  for (double v : values) s.stddev += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(s.stddev / static_cast<double>(values.size()));
  const std::size_t n = values.size();
  s.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  const double pos = 0.9 * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  s.p90 = lo + 1 < n ? values[lo] + frac * (values[lo + 1] - values[lo]) : values[lo];
  return s;
}

/// An instance's consensus pair plus the answer labels of its mains.
struct JsInstance {
  ConsensusDistribution p_qbaf;
  ConsensusDistribution p_obs;
  std::map<MainId, std::string> labels;
};

struct JsStats {
  SummaryStats overall;
  SummaryStats same_label;       // argumentative and observational winners agree on the label
  SummaryStats different_label;
};

inline JsStats js_stats(const std::vector<JsInstance>& instances, double log_base = 2.0) {
  std::vector<double> all, same, diff;
  for (const JsInstance& i : instances) {
    const double js = js_divergence(i.p_qbaf, i.p_obs, log_base);
    all.push_back(js);
    const MainId qbaf_winner = select_winner(i.p_qbaf.p);
    const MainId obs_winner = select_winner(i.p_obs.p);
    const bool same_answer = i.labels.at(qbaf_winner) == i.labels.at(obs_winner);
    (same_answer ? same : diff).push_back(js);
  }
  return {summarize(std::move(all)), summarize(std::move(same)), summarize(std::move(diff))};
}

}  // namespace argora
