#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "argora/errors.hpp"
#include "argora/provider.hpp"

namespace argora {

// Expert provider backed by an OpenAI-compatible chat-completions endpoint.
// Prompts are loaded from editable template files; placeholders in curly
// braces are substituted at call time. A malformed model reply is retried
// once before the call fails.

struct HttpProviderConfig {
  std::string base_url;  // e.g. https://api.example.com/v1
  std::string api_key;
  std::string model;
  std::string prompt_dir = "assets/prompts";
  double temperature = 0.0;
  int timeout_seconds = 120;

  /// Reads ARGORA_BASE_URL, ARGORA_API_KEY and ARGORA_MODEL.
  static HttpProviderConfig from_env() {
    HttpProviderConfig cfg;
    if (const char* v = std::getenv("ARGORA_BASE_URL")) cfg.base_url = v;
    if (const char* v = std::getenv("ARGORA_API_KEY")) cfg.api_key = v;
    if (const char* v = std::getenv("ARGORA_MODEL")) cfg.model = v;
    return cfg;
  }
};

namespace detail {

inline std::string substitute(std::string text,
                              const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    const std::string token = "{" + key + "}";
    for (std::size_t pos = text.find(token); pos != std::string::npos;
         pos = text.find(token, pos + value.size()))
      text.replace(pos, token.size(), value);
  }
  return text;
}

/// Extracts the first JSON object or array embedded in free-form text.
inline nlohmann::json extract_json(const std::string& content) {
  const std::size_t obj = content.find('{');
  const std::size_t arr = content.find('[');
  std::size_t start = std::min(obj, arr);
  if (start == std::string::npos)
    fail(errc::parse_error, "model reply carries no JSON payload");
  const char open = content[start];
  const char close = open == '{' ? '}' : ']';
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < content.size(); ++i) {
    const char c = content[i];
    if (in_string) {
      if (c == '\\')
        ++i;
      else if (c == '"')
        in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    if (c == open) ++depth;
    if (c == close && --depth == 0)
      return nlohmann::json::parse(content.substr(start, i - start + 1));
  }
  fail(errc::parse_error, "model reply carries unterminated JSON");
}

}  // namespace detail

/// Similarity backend that fetches sentence embeddings from an
/// OpenAI-compatible /embeddings endpoint and computes cosine locally.
/// Vectors are cached per text, so repeated comparisons reuse one request.
class HttpEmbedSimilarity {
 public:
  explicit HttpEmbedSimilarity(HttpProviderConfig config) : cfg_(std::move(config)) {
    if (cfg_.base_url.empty())
      fail(errc::config_error, "embedding backend needs a base URL (ARGORA_BASE_URL)");
    if (cfg_.model.empty()) fail(errc::config_error, "embedding backend needs a model");
  }

  double operator()(const std::string& u, const std::string& v) const {
    if (u == v) return 1.0;
    const auto& eu = embedding(u);
    const auto& ev = embedding(v);
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < eu.size() && i < ev.size(); ++i) {
      dot += eu[i] * ev[i];
      nu += eu[i] * eu[i];
      nv += ev[i] * ev[i];
    }
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return dot / (std::sqrt(nu) * std::sqrt(nv));
  }

 private:
  const std::vector<double>& embedding(const std::string& text) const {
    auto it = cache_.find(text);
    if (it != cache_.end()) return it->second;
    httplib::Client client(cfg_.base_url);
    client.set_read_timeout(cfg_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
    const nlohmann::json body{{"model", cfg_.model}, {"input", nlohmann::json::array({text})}};
    const auto res = client.Post("/embeddings", headers, body.dump(), "application/json");
    if (!res || res->status != 200)
      fail(errc::provider_failure, "embedding request to " + cfg_.base_url + " failed");
    const auto reply = nlohmann::json::parse(res->body);
    auto vec = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
    return cache_.emplace(text, std::move(vec)).first->second;
  }

  HttpProviderConfig cfg_;
  mutable std::map<std::string, std::vector<double>> cache_;
};

class HttpProvider final : public ExpertProvider {
 public:
  explicit HttpProvider(HttpProviderConfig config) : cfg_(std::move(config)) {
    if (cfg_.base_url.empty())
      fail(errc::config_error, "http provider needs a base URL (ARGORA_BASE_URL)");
    if (cfg_.model.empty()) fail(errc::config_error, "http provider needs a model (ARGORA_MODEL)");
    // Templates are loaded up front so calls stay reentrant afterwards.
    for (const char* name : {"main_task", "key_elements", "expert_system", "main_argument",
                             "first_level", "second_level", "third_level", "base_score", "judge"})
      load_template(name);
  }

  std::string propose_main(const TaskSpec& task, const std::string& expert) override {
    const auto reply = ask_json(expert_system(expert),
                                prompt("main_argument", {{"topic", task.topic},
                                                         {"orchestrator_custom_prompt", ""},
                                                         {"max_main_args", "1"}}));
    const auto& args = reply.at("main_args");
    if (!args.is_array() || args.empty()) fail(errc::provider_failure, "no main argument returned");
    return args.at(0).get<std::string>();
  }

  std::pair<Stance, std::vector<std::string>> review_main(const TaskSpec& task,
                                                          const std::string& expert,
                                                          const std::string& main_statement,
                                                          ReviewRole role) override {
    const std::string role_description =
        role == ReviewRole::Author
            ? "You are the original author of this main argument; defend or revise your position."
            : "You are reviewing a peer's main argument; assess it critically.";
    const auto reply = ask_json(
        expert_system(expert),
        prompt("first_level", {{"topic", task.topic},
                               {"main_task", task.main_task},
                               {"key_elements", join(task.key_elements)},
                               {"main_argument", main_statement},
                               {"role_description", role_description},
                               {"limit_instruction", "Provide at most 3 reasoning entries."}}));
    const std::string stance = reply.at("stance").get<std::string>();
    if (stance != "agree" && stance != "disagree")
      fail(errc::provider_failure, "unrecognized stance '" + stance + "'");
    std::vector<std::string> reasonings;
    for (const auto& r : reply.at("reasoning")) reasonings.push_back(r.get<std::string>());
    return {stance == "agree" ? Stance::Agree : Stance::Disagree, reasonings};
  }

  std::vector<ReviewReply> review_first_level(const TaskSpec& /*task*/, const std::string& expert,
                                              const std::string& main_statement,
                                              const std::vector<ReviewItem>& items) override {
    std::ostringstream listing;
    for (std::size_t i = 0; i < items.size(); ++i)
      listing << "(" << i + 1 << ") " << to_string(items[i].polarity) << " argument from "
              << items[i].author << ": " << items[i].statement << "\n";
    const auto reply = ask_json(expert_system(expert),
                                prompt("second_level", {{"expert", expert},
                                                        {"main_statement", main_statement},
                                                        {"items", listing.str()}}));
    std::vector<ReviewReply> out;
    if (!reply.is_array()) fail(errc::provider_failure, "review reply is not an array");
    for (const auto& entry : reply) {
      // Malformed entries (bad index, unknown stance) reject that item only.
      const long index = entry.at("index").get<long>();
      if (index < 1 || static_cast<std::size_t>(index) > items.size()) continue;
      const std::string stance = entry.at("stance").get<std::string>();
      ReviewReply r;
      r.index = static_cast<std::size_t>(index - 1);
      if (stance == "AGREE")
        r.stance = ReviewStance::Agree;
      else if (stance == "DISAGREE")
        r.stance = ReviewStance::Disagree;
      else if (stance == "NONE")
        r.stance = ReviewStance::None;
      else
        continue;
      if (entry.contains("justification")) r.justification = entry.at("justification").get<std::string>();
      out.push_back(std::move(r));
    }
    return out;
  }

  std::vector<std::optional<std::string>> rebut(const TaskSpec& /*task*/, const std::string& expert,
                                                const std::string& main_statement,
                                                const std::string& parent_statement,
                                                const std::vector<Critique>& critiques) override {
    std::ostringstream listing;
    for (std::size_t i = 0; i < critiques.size(); ++i)
      listing << "(" << i + 1 << ") " << critiques[i].author << " challenges your claim with: "
              << critiques[i].statement << "\n";
    const std::string content = ask(expert_system(expert),
                                    prompt("third_level", {{"expert", expert},
                                                           {"main_statement", main_statement},
                                                           {"parent_statement", parent_statement},
                                                           {"critiques", listing.str()}}));
    std::vector<std::optional<std::string>> out(critiques.size(), std::nullopt);
    if (content.find("NONE") != std::string::npos && content.find('{') == std::string::npos)
      return out;  // a bare NONE declines everything
    const auto reply = detail::extract_json(content);
    for (std::size_t i = 0; i < critiques.size(); ++i) {
      const std::string key = std::to_string(i + 1);
      if (!reply.contains(key)) continue;
      const std::string text = reply.at(key).at("rebuttal").get<std::string>();
      if (!text.empty() && text != "NONE") out[i] = text;
    }
    return out;
  }

  CriterionScores score_criteria(const TaskSpec& task, const std::string& statement) override {
    const auto reply = ask_json("", prompt("base_score", {{"statement", statement},
                                                          {"topic", task.topic},
                                                          {"main_task", task.main_task},
                                                          {"key_elements", join(task.key_elements)}}));
    CriterionScores s;
    s.task_relevance = reply.at("task_relevance").get<double>();
    s.evidence_support = reply.at("evidence_support").get<double>();
    s.logical_soundness = reply.at("logical_soundness").get<double>();
    return s;
  }

  std::map<std::string, double> judge(const TaskSpec& task,
                                      const std::vector<std::pair<std::string, std::string>>& mains,
                                      const std::string& transcript) override {
    std::ostringstream listing;
    for (const auto& [id, statement] : mains) listing << id << ": " << statement << "\n";
    const auto reply = ask_json("", prompt("judge", {{"topic", task.topic},
                                                     {"main_task", task.main_task},
                                                     {"key_elements", join(task.key_elements)},
                                                     {"mains", listing.str()},
                                                     {"transcript", transcript}}));
    std::map<std::string, double> out;
    for (const auto& [id, statement] : mains) out[id] = reply.at(id).get<double>();
    return out;
  }

  /// Orchestration helper: extract the main task and key elements for a topic.
  TaskSpec populate_task(const std::string& topic) {
    TaskSpec task;
    task.topic = topic;
    task.main_task =
        ask_json("", prompt("main_task", {{"topic", topic}})).at("main_task").get<std::string>();
    const auto elements =
        ask_json("", prompt("key_elements", {{"topic", topic}, {"main_task", task.main_task}}));
    for (const auto& e : elements.at("key_element")) task.key_elements.push_back(e.get<std::string>());
    return task;
  }

 private:
  std::string expert_system(const std::string& expert) {
    return prompt("expert_system", {{"expert_name", expert}, {"domain", expert}});
  }

  static std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
      if (!out.empty()) out += ", ";
      out += p;
    }
    return out;
  }

  void load_template(const std::string& name) {
    std::ifstream in(cfg_.prompt_dir + "/" + name + ".txt");
    if (!in) fail(errc::config_error, "missing prompt template '" + name + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    templates_.emplace(name, buffer.str());
  }

  std::string prompt(const std::string& name, const std::map<std::string, std::string>& values) const {
    return detail::substitute(templates_.at(name), values);
  }

  std::string ask(const std::string& system, const std::string& user) {
    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
      try {
        return chat_once(system, user);
      } catch (const Error& e) {
        last_error = e.what();
      }
    }
    fail(errc::provider_failure, "chat request failed after retry: " + last_error);
  }

  nlohmann::json ask_json(const std::string& system, const std::string& user) {
    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
      try {
        return detail::extract_json(chat_once(system, user));
      } catch (const Error& e) {
        last_error = e.what();
      }
    }
    fail(errc::provider_failure, "chat request failed after retry: " + last_error);
  }

  std::string chat_once(const std::string& system, const std::string& user) {
    nlohmann::json messages = nlohmann::json::array();
    if (!system.empty()) messages.push_back({{"role", "system"}, {"content", system}});
    messages.push_back({{"role", "user"}, {"content", user}});
    const nlohmann::json body{
        {"model", cfg_.model}, {"messages", std::move(messages)}, {"temperature", cfg_.temperature}};

    httplib::Client client(cfg_.base_url);
    client.set_read_timeout(cfg_.timeout_seconds, 0);
    client.set_connection_timeout(cfg_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
    const auto res = client.Post("/chat/completions", headers, body.dump(), "application/json");
    if (!res) fail(errc::provider_failure, "no response from " + cfg_.base_url);
    if (res->status != 200)
      fail(errc::provider_failure, "chat endpoint returned status " + std::to_string(res->status));
    const auto reply = nlohmann::json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  }

  HttpProviderConfig cfg_;
  std::map<std::string, std::string> templates_;
};

}  // namespace argora
