#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "argora/provider.hpp"

namespace argora {

namespace detail {

// Counter-free randomness: every draw is a pure hash of (seed, tag strings),
// so call order and concurrency can never change an output.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::uint64_t h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  h ^= 0xff;  // separator so ("ab","c") and ("a","bc") hash apart
  h *= 0x100000001b3ULL;
  return h;
}

class HashDraw {
 public:
  explicit HashDraw(std::uint64_t seed) : h_(splitmix64(seed ^ 0xcbf29ce484222325ULL)) {}

  HashDraw& mix(const std::string& s) {
    h_ = fnv1a(h_, s);
    return *this;
  }
  HashDraw& mix(std::uint64_t v) {
    h_ = splitmix64(h_ ^ v);
    return *this;
  }

  std::uint64_t value() const { return splitmix64(h_); }
  double unit() const { return static_cast<double>(value() >> 11) * 0x1.0p-53; }  // [0,1)
  std::size_t pick(std::size_t n) const { return static_cast<std::size_t>(value() % n); }

 private:
  std::uint64_t h_;
};

}  // namespace detail

struct SyntheticConfig {
  std::uint64_t seed = 0;
  double agree_prob = 0.5;     // stance toward a main argument
  double none_prob = 0.25;     // second-level reviews withheld
  double rebuttal_prob = 0.7;  // third-level rebuttal offered per critique
  int max_reasonings = 2;      // 1..max reasonings per first-level stance
};

/// Deterministic stand-in for the LLM expert layer. Statements are templated
/// from small lexicons, stances and scores derive from a seeded hash, and
/// criterion scores fall in [0.30, 0.70]. Identical (task, seed) inputs yield
/// identical outputs, byte for byte.
class SyntheticProvider final : public ExpertProvider {
 public:
  explicit SyntheticProvider(SyntheticConfig config = {}) : cfg_(config) {}

  std::string propose_main(const TaskSpec& task, const std::string& expert) override {
    detail::HashDraw d = draw("main", expert, task.topic);
    return compose_claim(d, task);
  }

  std::pair<Stance, std::vector<std::string>> review_main(const TaskSpec& task,
                                                          const std::string& expert,
                                                          const std::string& main_statement,
                                                          ReviewRole role) override {
    detail::HashDraw d = draw("review-main", expert, main_statement);
    // Authors lean toward defending their own proposal.
    const double agree_prob = role == ReviewRole::Author
                                  ? 0.5 + 0.5 * cfg_.agree_prob
                                  : cfg_.agree_prob;
    const Stance stance = d.unit() < agree_prob ? Stance::Agree : Stance::Disagree;
    const int count = 1 + static_cast<int>(draw("reasoning-count", expert, main_statement)
                                               .pick(static_cast<std::size_t>(cfg_.max_reasonings)));
    std::vector<std::string> reasonings;
    for (int i = 0; i < count; ++i)
      reasonings.push_back(compose_reason(
          draw("reason", expert, main_statement).mix(static_cast<std::uint64_t>(i)), task,
          stance == Stance::Agree));
    return {stance, reasonings};
  }

  std::vector<ReviewReply> review_first_level(const TaskSpec& task, const std::string& expert,
                                              const std::string& /*main_statement*/,
                                              const std::vector<ReviewItem>& items) override {
    std::vector<ReviewReply> replies;
    for (std::size_t i = 0; i < items.size(); ++i) {
      detail::HashDraw d = draw("review-l1", expert, items[i].statement);
      const double u = d.unit();
      ReviewReply reply;
      reply.index = i;
      if (u < cfg_.none_prob) {
        reply.stance = ReviewStance::None;
      } else {
        const bool agree = u < cfg_.none_prob + (1.0 - cfg_.none_prob) * cfg_.agree_prob;
        reply.stance = agree ? ReviewStance::Agree : ReviewStance::Disagree;
        reply.justification = compose_reason(
            draw("justification", expert, items[i].statement).mix(task.topic), task, agree);
      }
      replies.push_back(std::move(reply));
    }
    return replies;
  }

  std::vector<std::optional<std::string>> rebut(const TaskSpec& task, const std::string& expert,
                                                const std::string& /*main_statement*/,
                                                const std::string& /*parent_statement*/,
                                                const std::vector<Critique>& critiques) override {
    std::vector<std::optional<std::string>> out;
    for (const Critique& critique : critiques) {
      detail::HashDraw d = draw("rebut", expert, critique.statement);
      if (d.unit() < cfg_.rebuttal_prob)
        out.push_back(compose_rebuttal(draw("rebuttal-text", expert, critique.statement), task));
      else
        out.push_back(std::nullopt);
    }
    return out;
  }

  CriterionScores score_criteria(const TaskSpec& /*task*/, const std::string& statement) override {
    CriterionScores s;
    s.task_relevance = criterion(statement, "task");
    s.evidence_support = criterion(statement, "evidence");
    s.logical_soundness = criterion(statement, "logic");
    return s;
  }

  std::map<std::string, double> judge(const TaskSpec& /*task*/,
                                      const std::vector<std::pair<std::string, std::string>>& mains,
                                      const std::string& transcript) override {
    std::map<std::string, double> out;
    for (const auto& [id, statement] : mains) {
      detail::HashDraw d = draw("judge", statement, transcript);
      out[id] = 0.05 + 0.9 * d.unit();  // strictly positive confidence
    }
    return out;
  }

 private:
  detail::HashDraw draw(const std::string& phase, const std::string& a, const std::string& b) const {
    detail::HashDraw d(cfg_.seed);
    d.mix(phase).mix(a).mix(b);
    return d;
  }

  double criterion(const std::string& statement, const std::string& which) const {
    detail::HashDraw d = draw("criterion", which, statement);
    return 0.30 + 0.40 * d.unit();  // the expected scoring range
  }

  std::string key_element(const detail::HashDraw& d, const TaskSpec& task) const {
    if (task.key_elements.empty()) return "the stated goal";
    return task.key_elements[d.pick(task.key_elements.size())];
  }

  std::string compose_claim(const detail::HashDraw& d, const TaskSpec& task) const {
    static const std::array<const char*, 6> actions{
        "Adopt the proposal",     "Reject the proposal",      "Defer the decision",
        "Pilot a limited rollout", "Adopt with safeguards",   "Escalate for external review"};
    static const std::array<const char*, 6> grounds{
        "the projected benefits outweigh the risks", "the operational risk remains unquantified",
        "the evidence base is still incomplete",     "early trials showed consistent gains",
        "the cost profile dominates alternatives",   "stakeholder requirements are not yet met"};
    detail::HashDraw a = d;
    a.mix("action");
    detail::HashDraw g = d;
    g.mix("ground");
    detail::HashDraw k = d;
    k.mix("element");
    return std::string(actions[a.pick(actions.size())]) + " because " +
           grounds[g.pick(grounds.size())] + ", judged against " + key_element(k, task) + ".";
  }

  std::string compose_reason(const detail::HashDraw& d, const TaskSpec& task, bool agree) const {
    static const std::array<const char*, 6> pro{
        "independent measurements corroborate the claim",
        "the mechanism generalizes across the reported settings",
        "the assumptions hold for the relevant workload",
        "prior deployments support this reading",
        "the quantitative trend is stable under resampling",
        "the causal chain is direct and observable"};
    static const std::array<const char*, 6> con{
        "the cited evidence does not isolate the claimed cause",
        "the argument overlooks a known failure mode",
        "the sample is too narrow to support the conclusion",
        "the reasoning conflates correlation with causation",
        "the claim contradicts the documented baseline",
        "the projection ignores second-order costs"};
    const auto& bank = agree ? pro : con;
    detail::HashDraw b = d;
    b.mix(agree ? "pro" : "con");
    detail::HashDraw k = d;
    k.mix("anchor");
    return std::string(bank[b.pick(bank.size())]) + " with respect to " + key_element(k, task) + ".";
  }

  std::string compose_rebuttal(const detail::HashDraw& d, const TaskSpec& task) const {
    static const std::array<const char*, 5> forms{
        "The critique misreads the scope of the original point",
        "The objection relies on an outdated measurement",
        "The counterexample falls outside the stated conditions",
        "The challenged step is justified by the shared evidence",
        "The alleged gap is covered by the accompanying analysis"};
    detail::HashDraw f = d;
    f.mix("form");
    detail::HashDraw k = d;
    k.mix("anchor");
    return std::string(forms[f.pick(forms.size())]) + ", particularly regarding " +
           key_element(k, task) + ".";
  }

  SyntheticConfig cfg_;
};

}  // namespace argora
