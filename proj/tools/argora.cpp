// Command-line front end: simulate | evaluate | explain | override | metrics
// | report. Every command is deterministic on identical inputs; only
// `simulate --provider http` performs network I/O.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "argora/consensus.hpp"
#include "argora/counterfactual.hpp"
#include "argora/http_provider.hpp"
#include "argora/metrics.hpp"
#include "argora/pipeline.hpp"
#include "argora/report.hpp"
#include "argora/synthetic_provider.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace argora;

namespace {

struct RunConfig {
  std::string semantics = "df-quad";
  std::optional<std::string> aggregation;  // explicit building-block overrides
  std::optional<std::string> influence;
  double kappa = 1.0;
  std::optional<int> p;
  double rho_sim = 0.7;
  double lambda = 0.05;
  double tau = 0.0;
  std::string cost = "state";
  bool ungated = false;
  std::uint64_t seed = 0;
  std::string provider = "synthetic";
  int experts = 3;
  double agree_prob = 0.5;
  std::string prompt_dir = "assets/prompts";
  std::string sim_backend = "tf-cosine";
  std::string embed_url;
  std::string embed_model;

  SemanticsSpec semantics_spec() const {
    SemanticsSpec spec = SemanticsSpec::by_name(semantics, kappa, p);
    if (aggregation) {
      if (*aggregation == "sum")
        spec.aggregation = AggregationKind::Sum;
      else if (*aggregation == "product")
        spec.aggregation = AggregationKind::Product;
      else if (*aggregation == "top")
        spec.aggregation = AggregationKind::Top;
      else
        fail(errc::config_error, "unknown aggregation '" + *aggregation + "'");
    }
    if (influence) {
      if (*influence == "linear")
        spec.influence = InfluenceKind::linear(kappa);
      else if (*influence == "euler")
        spec.influence = InfluenceKind::euler();
      else if (*influence == "p-max")
        spec.influence = InfluenceKind::pmax(p.value_or(2), kappa);
      else
        fail(errc::config_error, "unknown influence '" + *influence + "'");
    }
    if (aggregation || influence) spec.name = "custom";
    return spec;
  }

  SimilarityFunction similarity() const {
    if (sim_backend == "tf-cosine") return tf_cosine;
    if (sim_backend == "http-embed") {
      HttpProviderConfig hc = HttpProviderConfig::from_env();
      if (!embed_url.empty()) hc.base_url = embed_url;
      if (!embed_model.empty()) hc.model = embed_model;
      return HttpEmbedSimilarity(hc);
    }
    fail(errc::config_error, "unknown similarity backend '" + sim_backend + "'");
  }

  OverrideConfig override_config() const {
    OverrideConfig cfg;
    cfg.lambda = lambda;
    cfg.tau = tau;
    cfg.cost = cost_kind_from_string(cost);
    cfg.gated = !ungated;
    return cfg;
  }

  json provenance() const {
    json j{{"semantics", semantics}, {"kappa", kappa},     {"rho_sim", rho_sim},
           {"lambda", lambda},       {"tau", tau},         {"cost", cost},
           {"gated", !ungated},      {"seed", seed},       {"provider", provider},
           {"experts", experts}};
    if (p) j["p"] = *p;
    if (aggregation) j["aggregation"] = *aggregation;
    if (influence) j["influence"] = *influence;
    if (sim_backend != "tf-cosine") j["sim_backend"] = sim_backend;
    return j;
  }
};

void attach_common(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--semantics", cfg.semantics, "Semantics preset: df-quad, reb, qe, sd-df-quad, ebt")
      ->capture_default_str();
  cmd->add_option("--aggregation", cfg.aggregation, "Explicit aggregation: sum, product, top");
  cmd->add_option("--influence", cfg.influence, "Explicit influence: linear, euler, p-max");
  cmd->add_option("--kappa", cfg.kappa, "Damping parameter for kappa-parameterized presets")
      ->capture_default_str();
  cmd->add_option("--p", cfg.p, "p-Max exponent override");
}

void attach_override_opts(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--lambda", cfg.lambda, "Perturbation-cost tradeoff weight")->capture_default_str();
  cmd->add_option("--tau", cfg.tau, "Winner-confidence gate threshold")->capture_default_str();
  cmd->add_option("--cost", cfg.cost, "Cost proxy: state, state-reach, edge, edge-reach")
      ->capture_default_str();
  cmd->add_flag("--ungated", cfg.ungated, "Disable the winner-confidence gate");
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::config_error, "cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(errc::parse_error, "'" + path + "': " + e.what());
  }
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::config_error, "cannot write '" + path + "'");
  out << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

bool is_artifact(const json& j) { return j.contains("family"); }

json impact_json(const EdgeImpact& impact) {
  return {{"node", impact.node},
          {"delta", impact.delta},
          {"intervention_root_strength", impact.intervention_root_strength}};
}

json explanation_json(const ExplanationResult& ex) {
  json impacts = json::array();
  for (const auto& impact : ex.impacts) impacts.push_back(impact_json(impact));
  return {{"impacts", std::move(impacts)},
          {"most_influential_direct_child", impact_json(ex.most_influential_direct_child)},
          {"most_influential_leaf", impact_json(ex.most_influential_leaf)},
          {"most_influential_node", impact_json(ex.most_influential_node)},
          {"decisive_chain", ex.decisive_chain}};
}

json margin_json(const MarginReport& report) {
  json lifts = json::object();
  for (const auto& lift : report.net_lifts) lifts[lift.main] = lift.lift;
  json rows = json::array();
  for (const auto& d : report.competitors)
    rows.push_back({{"competitor", d.competitor},
                    {"prior_margin", d.prior_margin},
                    {"argumentative_margin", d.argumentative_margin},
                    {"final_margin", d.final_margin},
                    {"victory_type", to_string(d.victory)}});
  json j{{"winner", report.winner}, {"net_lifts", std::move(lifts)}, {"pairwise", std::move(rows)}};
  if (report.min_final_margin) {
    j["min_final_margin"] = *report.min_final_margin;
    j["closest_competitor"] = *report.closest_competitor;
  }
  return j;
}

json intervention_json(const SingletonIntervention& i) {
  return {{"main", i.main}, {"node", i.node}};
}

json outcome_json(const OverrideOutcome& o) {
  json j{{"baseline_winner", o.baseline_winner},
         {"observational_winner", o.observational_winner},
         {"final_winner", o.final_winner},
         {"gate_passed", o.gate_passed},
         {"j_empty", o.j_empty},
         {"p_qbaf", o.p_qbaf.p},
         {"p_obs", o.p_obs.p}};
  if (o.applied) {
    j["applied"] = intervention_json(*o.applied);
    j["j_applied"] = *o.j_applied;
    j["p_qbaf_final"] = o.p_qbaf_final->p;
  }
  json candidates = json::array();
  for (const auto& c : o.candidates)
    candidates.push_back({{"intervention", intervention_json(c.intervention)},
                          {"post_winner", c.post_winner},
                          {"js", c.js},
                          {"cost", c.cost},
                          {"objective", c.objective},
                          {"eligible", c.eligible}});
  j["candidates"] = std::move(candidates);
  return j;
}

std::unique_ptr<ExpertProvider> make_provider(const RunConfig& cfg) {
  if (cfg.provider == "synthetic") {
    SyntheticConfig sc;
    sc.seed = cfg.seed;
    sc.agree_prob = cfg.agree_prob;
    return std::make_unique<SyntheticProvider>(sc);
  }
  if (cfg.provider == "http") {
    HttpProviderConfig hc = HttpProviderConfig::from_env();
    hc.prompt_dir = cfg.prompt_dir;
    return std::make_unique<HttpProvider>(hc);
  }
  fail(errc::config_error, "unknown provider '" + cfg.provider + "'");
}

// --- simulate ---------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg, const TaskSpec& requested, const std::string& out_path) {
  if (cfg.experts < 1) fail(errc::config_error, "at least one expert is required");
  TaskSpec task = requested;
  auto provider = make_provider(cfg);
  if (cfg.provider == "http" && task.main_task.empty())
    task = static_cast<HttpProvider*>(provider.get())->populate_task(task.topic);
  if (task.experts.empty())
    for (int i = 1; i <= cfg.experts; ++i) task.experts.push_back("e" + std::to_string(i));

  auto artifacts =
      run_round(task, *provider, cfg.semantics_spec(), cfg.rho_sim, cfg.similarity(), cfg.seed);
  artifacts.provider_kind = cfg.provider;
  json j = to_json(artifacts);
  j["config"] = cfg.provenance();
  write_json(out_path, j);
  return 0;
}

// --- evaluate ---------------------------------------------------------------

int cmd_evaluate(const RunConfig& cfg, bool semantics_given, const std::string& in_path,
                 const std::string& out_path) {
  const json input = load_json(in_path);
  json out{{"config", cfg.provenance()}};
  if (is_artifact(input)) {
    const auto artifacts = artifacts_from_json(input);
    // The artifact's recorded semantics governs unless overridden explicitly.
    const SemanticsSpec spec = semantics_given ? cfg.semantics_spec() : artifacts.semantics;
    json strengths = json::object();
    json roots = json::object();
    for (const auto& [main, tree] : artifacts.family) {
      const auto sigma = evaluate(tree, spec);
      roots[main] = sigma.at(main);
      strengths[main] = sigma;
    }
    out["sigma"] = std::move(strengths);
    out["root_strengths"] = std::move(roots);
    out["winner"] = select_winner(artifacts.family, spec);
  } else {
    const QbafTree tree = tree_from_json(input);
    const auto sigma = evaluate(tree, cfg.semantics_spec());
    out["sigma"] = sigma;
    out["root_strength"] = sigma.at(tree.root());
  }
  write_json(out_path, out);
  return 0;
}

// --- explain ----------------------------------------------------------------

int cmd_explain(const RunConfig& cfg, const std::string& in_path, const std::string& out_path) {
  const json input = load_json(in_path);
  json out{{"config", cfg.provenance()}};
  if (is_artifact(input)) {
    const auto artifacts = artifacts_from_json(input);
    const SemanticsSpec spec = artifacts.semantics;
    json per_main = json::object();
    for (const auto& [main, tree] : artifacts.family)
      if (tree.size() > 1) per_main[main] = explanation_json(explanation_queries(tree, spec));
    out["explanations"] = std::move(per_main);
    json critical = json::array();
    for (const auto& wc : enumerate_winner_critical(artifacts.family, spec))
      critical.push_back({{"intervention", intervention_json(wc.intervention)},
                          {"new_winner", wc.new_winner},
                          {"intervened_root_strength", wc.intervened_root_strength}});
    out["winner_critical"] = std::move(critical);
    out["margin_report"] = margin_json(margin_report(artifacts.family, spec));
    if (const auto flip =
            minimal_winner_flip(artifacts.family, spec, cost_kind_from_string(cfg.cost))) {
      out["minimal_winner_flip"] = {{"intervention", intervention_json(flip->first)},
                                    {"cost", flip->second},
                                    {"cost_kind", cfg.cost}};
    }
  } else {
    const QbafTree tree = tree_from_json(input);
    out["explanations"] = {{tree.root(), explanation_json(explanation_queries(tree, cfg.semantics_spec()))}};
  }
  write_json(out_path, out);
  return 0;
}

// --- override ---------------------------------------------------------------

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "cost,lambda,gated,applied,final_winner,j_empty,j_applied,intervention\n";
  for (const auto& row : rows) {
    out << to_string(row.cost) << ',' << row.lambda << ',' << (row.gated ? 1 : 0) << ','
        << (row.applied ? 1 : 0) << ',' << row.final_winner << ',' << row.j_empty << ',';
    if (row.j_applied) out << *row.j_applied;
    out << ',';
    if (row.intervention) out << row.intervention->main << '/' << row.intervention->node;
    out << '\n';
  }
  return out.str();
}

int cmd_override(const RunConfig& cfg, const std::string& in_path, const std::string& out_path,
                 bool sweep) {
  const auto artifacts = artifacts_from_json(load_json(in_path));
  ObservationalScores obs;
  obs.sigma_hat = artifacts.sigma_hat;
  if (sweep) {
    write_text(out_path, sweep_csv(override_sweep(artifacts.family, artifacts.semantics, obs, cfg.tau)));
    return 0;
  }
  const auto outcome =
      run_override(artifacts.family, artifacts.semantics, obs, cfg.override_config());
  json out{{"config", cfg.provenance()}};
  out["outcome"] = outcome_json(outcome);
  write_json(out_path, out);
  return 0;
}

// --- metrics ----------------------------------------------------------------

struct Dataset {
  std::vector<LabeledInstance> instances;
  std::vector<JsInstance> js_instances;
};

Dataset load_dataset(const std::string& artifacts_dir, const std::string& labels_path) {
  const json labels = load_json(labels_path);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(artifacts_dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(errc::empty_dataset, "no artifact files in '" + artifacts_dir + "'");

  Dataset data;
  for (const auto& file : files) {
    const std::string stem = file.stem().string();
    if (!labels.contains(stem))
      fail(errc::config_error, "labels file has no entry for instance '" + stem + "'");
    const json& entry = labels.at(stem);
    const auto artifacts = artifacts_from_json(load_json(file.string()));

    LabeledInstance instance;
    instance.ground_truth = entry.at("ground_truth").get<std::string>();
    JsInstance js_instance;
    std::map<MainId, double> roots;
    for (const auto& [main, tree] : artifacts.family) {
      MainOutcome outcome;
      outcome.base_score = tree.base_score(main);
      outcome.final_strength = artifacts.strengths.at(main).at(main);
      outcome.label = entry.at("labels").at(main).get<std::string>();
      instance.mains[main] = outcome;
      roots[main] = outcome.final_strength;
      js_instance.labels[main] = outcome.label;
    }
    js_instance.p_qbaf = normalize(roots);
    js_instance.p_obs = normalize(artifacts.sigma_hat);
    data.instances.push_back(std::move(instance));
    data.js_instances.push_back(std::move(js_instance));
  }
  return data;
}

json metrics_json(const Dataset& data) {
  const auto [counts, rates] = transitions(data.instances);
  const std::size_t disagree = disagreement_count(data.instances);
  json j{{"n", counts.total()},
         {"n_disagree", disagree},
         {"transitions",
          {{"n_pp", counts.n_pp}, {"n_pm", counts.n_pm}, {"n_mp", counts.n_mp}, {"n_mm", counts.n_mm}}},
         {"rates", {{"trr", rates.trr}, {"prr", rates.prr}, {"nrr", rates.nrr}, {"epr", rates.epr}}},
         {"accuracy_prior", static_cast<double>(counts.n_pp + counts.n_pm) / counts.total()},
         {"accuracy_final", static_cast<double>(counts.n_pp + counts.n_mp) / counts.total()}};
  const auto mcnemar = mcnemar_exact(counts.n_mp, counts.n_pm);
  j["p_nre"] = mcnemar.p;
  j["reversal_pairs"] = mcnemar.t;
  if (disagree > 0) j["nre"] = nre(data.instances);
  try {
    j["correctness_margin"] = correctness_margin(data.instances);
  } catch (const Error&) {
    // no instance mixes correct and incorrect mains
  }
  const auto js = js_stats(data.js_instances);
  auto stats_json = [](const SummaryStats& s) {
    return json{{"count", s.count}, {"mean", s.mean}, {"std", s.stddev}, {"median", s.median},
                {"p90", s.p90}};
  };
  j["js"] = {{"overall", stats_json(js.overall)},
             {"same_label", stats_json(js.same_label)},
             {"different_label", stats_json(js.different_label)}};
  return j;
}

std::string metrics_table(const json& m, bool markdown) {
  auto num = [](const json& v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v.get<double>());
    return std::string(buf);
  };
  auto sig4 = [](const json& v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v.get<double>());
    return std::string(buf);
  };
  std::vector<std::pair<std::string, std::string>> columns{
      {"N", std::to_string(m.at("n").get<long>())},
      {"N_disagree", std::to_string(m.at("n_disagree").get<long>())},
      {"acc_prior", num(m.at("accuracy_prior"))},
      {"acc_final", num(m.at("accuracy_final"))},
      {"n_mp", std::to_string(m.at("transitions").at("n_mp").get<long>())},
      {"n_pm", std::to_string(m.at("transitions").at("n_pm").get<long>())},
      {"NRE", m.contains("nre") ? num(m.at("nre")) : "n/a"},
      {"p_NRE", sig4(m.at("p_nre"))},
      {"TRR", num(m.at("rates").at("trr"))},
      {"PRR", num(m.at("rates").at("prr"))},
      {"NRR", num(m.at("rates").at("nrr"))},
      {"EPR", num(m.at("rates").at("epr"))},
      {"margin", m.contains("correctness_margin") ? num(m.at("correctness_margin")) : "n/a"},
  };
  std::ostringstream out;
  if (markdown) {
    out << "|";
    for (const auto& [name, value] : columns) out << " " << name << " |";
    out << "\n|";
    for (std::size_t i = 0; i < columns.size(); ++i) out << "---|";
    out << "\n|";
    for (const auto& [name, value] : columns) out << " " << value << " |";
    out << "\n";
  } else {
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i].first;
    out << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i].second;
    out << "\n";
  }
  return out.str();
}

int cmd_metrics(const RunConfig& cfg, const std::string& artifacts_dir,
                const std::string& labels_path, const std::string& out_path,
                const std::string& format) {
  const Dataset data = load_dataset(artifacts_dir, labels_path);
  const json m = metrics_json(data);
  if (format == "json") {
    json out{{"config", cfg.provenance()}, {"metrics", m}};
    write_json(out_path, out);
  } else if (format == "md" || format == "csv") {
    write_text(out_path, metrics_table(m, format == "md"));
  } else {
    fail(errc::config_error, "unknown format '" + format + "'");
  }
  return 0;
}

// --- report -----------------------------------------------------------------

int cmd_report(const RunConfig& cfg, const std::string& in_path, const std::string& out_path,
               const std::optional<std::string>& ground_truth) {
  const auto artifacts = artifacts_from_json(load_json(in_path));
  auto bundle = build_report_bundle(artifacts, cfg.override_config());
  bundle.ground_truth = ground_truth;
  write_text(out_path, render_report(bundle));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-expert QBAF discussion engine with counterfactual explanations"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read defaults from a key-value config file");

  RunConfig cfg;
  TaskSpec task;
  task.topic = "Should the team adopt the proposed caching layer for the data pipeline?";
  task.main_task = "Decide whether to adopt the caching layer and justify the decision.";
  task.key_elements = {"latency budget", "operational cost", "data freshness", "rollback plan"};
  std::string in_path, out_path = "-";
  std::string artifacts_dir, labels_path, format = "md";
  std::optional<std::string> ground_truth;
  bool sweep = false;

  auto* simulate = app.add_subcommand("simulate", "Run one synthetic or LLM-backed discussion round");
  attach_common(simulate, cfg);
  simulate->add_option("--provider", cfg.provider, "Expert provider: synthetic or http")
      ->capture_default_str();
  simulate->add_option("--seed", cfg.seed, "Seed for the synthetic provider")->capture_default_str();
  simulate->add_option("--experts", cfg.experts, "Number of experts (synthetic ids e1..eN)")
      ->capture_default_str();
  simulate->add_option("--agree-prob", cfg.agree_prob, "Synthetic stance agreement probability")
      ->capture_default_str();
  simulate->add_option("--rho-sim", cfg.rho_sim, "Contextual orthogonality threshold")
      ->capture_default_str();
  simulate->add_option("--topic", task.topic, "Discussion topic")->capture_default_str();
  simulate->add_option("--main-task", task.main_task, "Main task imperative");
  simulate->add_option("--key-element", task.key_elements, "Key element (repeatable)");
  simulate->add_option("--expert", task.experts, "Explicit expert id (repeatable)");
  simulate->add_option("--prompt-dir", cfg.prompt_dir, "Prompt template directory (http provider)")
      ->capture_default_str();
  simulate->add_option("--sim-backend", cfg.sim_backend, "Similarity backend: tf-cosine, http-embed")
      ->capture_default_str();
  simulate->add_option("--embed-url", cfg.embed_url, "Embedding endpoint base URL (http-embed)");
  simulate->add_option("--embed-model", cfg.embed_model, "Embedding model name (http-embed)");
  simulate->add_option("--out", out_path, "Artifact output path")->required();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate strengths for a tree or artifact");
  attach_common(evaluate_cmd, cfg);
  evaluate_cmd->add_option("--in", in_path, "Tree or artifact JSON")->required();
  evaluate_cmd->add_option("--out", out_path, "Output path (- for stdout)");

  auto* explain = app.add_subcommand("explain", "Counterfactual explanation queries");
  attach_common(explain, cfg);
  explain->add_option("--cost", cfg.cost, "Cost proxy for the minimal winner flip")
      ->capture_default_str();
  explain->add_option("--in", in_path, "Tree or artifact JSON")->required();
  explain->add_option("--out", out_path, "Output path (- for stdout)");

  auto* override_cmd = app.add_subcommand("override", "Observation-aligned override search");
  attach_override_opts(override_cmd, cfg);
  override_cmd->add_flag("--sweep", sweep, "Emit the full (cost, lambda, gate) grid as CSV");
  override_cmd->add_option("--in", in_path, "Artifact JSON")->required();
  override_cmd->add_option("--out", out_path, "Output path (- for stdout)");

  auto* metrics_cmd = app.add_subcommand("metrics", "Evaluation statistics over labeled artifacts");
  metrics_cmd->add_option("--artifacts", artifacts_dir, "Directory of artifact JSON files")
      ->required();
  metrics_cmd->add_option("--labels", labels_path, "Labels JSON file")->required();
  metrics_cmd->add_option("--format", format, "Output format: md, csv, json")->capture_default_str();
  metrics_cmd->add_option("--out", out_path, "Output path (- for stdout)");

  auto* report_cmd = app.add_subcommand("report", "Render the Markdown consensus report");
  attach_override_opts(report_cmd, cfg);
  report_cmd->add_option("--in", in_path, "Artifact JSON")->required();
  report_cmd->add_option("--ground-truth", ground_truth, "Ground-truth answer label");
  report_cmd->add_option("--out", out_path, "Report output path (- for stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(cfg, task, out_path);
    if (evaluate_cmd->parsed())
      return cmd_evaluate(cfg, evaluate_cmd->count("--semantics") > 0, in_path, out_path);
    if (explain->parsed()) return cmd_explain(cfg, in_path, out_path);
    if (override_cmd->parsed()) return cmd_override(cfg, in_path, out_path, sweep);
    if (metrics_cmd->parsed()) return cmd_metrics(cfg, artifacts_dir, labels_path, out_path, format);
    if (report_cmd->parsed()) return cmd_report(cfg, in_path, out_path, ground_truth);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
