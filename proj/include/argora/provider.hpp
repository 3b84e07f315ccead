#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "argora/qbaf.hpp"

namespace argora {

/// Topic, extracted main task, key elements, and the participating experts.
/// The orchestration duties that produce these (task extraction, expert
/// selection) are accepted here as pre-supplied fields; an LLM-backed provider
/// may populate them.
struct TaskSpec {
  std::string topic;
  std::string main_task;
  std::vector<std::string> key_elements;
  std::vector<std::string> experts;

  bool operator==(const TaskSpec&) const = default;
};

enum class Stance { Agree, Disagree };
enum class ReviewStance { Agree, Disagree, None };
enum class ReviewRole { Author, Peer };

/// A first-level node as shown to a reviewing expert.
struct ReviewItem {
  NodeId id;
  std::string statement;
  Polarity polarity = Polarity::Support;
  std::string author;
};

/// One reviewed item: index into the presented review set (0-based).
struct ReviewReply {
  std::size_t index = 0;
  ReviewStance stance = ReviewStance::None;
  std::string justification;
};

struct Critique {
  std::string statement;
  std::string author;
};

struct CriterionScores {
  double task_relevance = 0.5;
  double evidence_support = 0.5;
  double logical_soundness = 0.5;
};

/// The expert-layer abstraction. All calls must be deterministic for fixed
/// inputs when the backing implementation claims determinism, and reentrant:
/// the pipeline may fan calls out concurrently within a phase.
class ExpertProvider {
 public:
  virtual ~ExpertProvider() = default;

  /// One proposed main-argument statement for the topic.
  virtual std::string propose_main(const TaskSpec& task, const std::string& expert) = 0;

  /// Stance toward a main argument plus free-form reasonings justifying it.
  virtual std::pair<Stance, std::vector<std::string>> review_main(const TaskSpec& task,
                                                                  const std::string& expert,
                                                                  const std::string& main_statement,
                                                                  ReviewRole role) = 0;

  /// Batched review of first-level nodes the expert did not author.
  virtual std::vector<ReviewReply> review_first_level(const TaskSpec& task,
                                                      const std::string& expert,
                                                      const std::string& main_statement,
                                                      const std::vector<ReviewItem>& items) = 0;

  /// Rebuttals aligned index-by-index with the critiques; nullopt = declined.
  virtual std::vector<std::optional<std::string>> rebut(const TaskSpec& task,
                                                        const std::string& expert,
                                                        const std::string& main_statement,
                                                        const std::string& parent_statement,
                                                        const std::vector<Critique>& critiques) = 0;

  /// Task relevance, evidence support and logical soundness, each strictly in (0,1).
  virtual CriterionScores score_criteria(const TaskSpec& task, const std::string& statement) = 0;

  /// Observational confidences per main, strictly positive, judged from the
  /// statements and a compressed transcript only (no graph access).
  virtual std::map<std::string, double> judge(
      const TaskSpec& task, const std::vector<std::pair<std::string, std::string>>& mains,
      const std::string& transcript) = 0;
};

}  // namespace argora
