#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "argora/pipeline.hpp"

#include "support/fixtures.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace argora;

namespace {

const std::string kCli = ARGORA_CLI_PATH;

struct Sandbox {
  fs::path dir;
  explicit Sandbox(const std::string& name) {
    dir = fs::temp_directory_path() / ("argora_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  std::string path(const std::string& file) const { return (dir / file).string(); }
};

int run(const std::string& args) {
  const int status = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json slurp_json(const std::string& path) { return json::parse(slurp(path)); }

/// Two-main artifact realizing one correctness transition, written as a file.
void write_instance(const fs::path& dir, json& labels, int index, bool prior_correct,
                    bool final_correct) {
  DiscussionArtifacts a;
  a.task.topic = "instance topic";
  a.task.main_task = "decide";
  a.task.key_elements = {"k"};
  a.task.experts = {"e1", "e2"};
  a.semantics = SemanticsSpec::df_quad();
  a.seed = static_cast<std::uint64_t>(index);

  // Prior winner is always m1 (higher base score). For a reversal, m2 carries
  // a strong supporter and overtakes m1 after evaluation; otherwise m2 stays a
  // weak leaf and m1 wins both phases. Labels always disagree.
  auto m1 = fixtures::tree({{"m1", "", Polarity::Support, 0.6}});
  const bool reversal = prior_correct != final_correct;
  auto m2 = reversal ? fixtures::tree({{"m2", "", Polarity::Support, 0.55},
                                       {"m2s", "m2", Polarity::Support, 0.9}})
                     : fixtures::tree({{"m2", "", Polarity::Support, 0.4}});
  const std::string m1_label = prior_correct ? "A" : "B";
  const std::string m2_label =
      reversal ? (final_correct ? "A" : "B") : (m1_label == "A" ? "B" : "A");
  json entry{{"labels", {{"m1", m1_label}, {"m2", m2_label}}}, {"ground_truth", "A"}};
  if (!prior_correct && !final_correct) entry["ground_truth"] = "C";

  a.family.emplace("m1", m1);
  a.family.emplace("m2", m2);
  for (const auto& [main, tree] : a.family) {
    a.strengths.emplace(main, evaluate(tree, a.semantics));
    a.sigma_hat[main] = 0.5;
    a.sources[main] = {main == "m1" ? "e1" : "e2"};
  }

  char name[32];
  std::snprintf(name, sizeof name, "inst_%03d", index);
  std::ofstream out(dir / (std::string(name) + ".json"));
  out << to_json(a).dump(2);
  labels[name] = entry;
}

}  // namespace

TEST_CASE("simulate is deterministic and records its configuration") {
  Sandbox box("simulate");
  const std::string base = "simulate --provider synthetic --seed 7 --out ";
  REQUIRE(run(base + box.path("a.json")) == 0);
  REQUIRE(run(base + box.path("b.json")) == 0);
  CHECK(slurp(box.path("a.json")) == slurp(box.path("b.json")));

  const json artifact = slurp_json(box.path("a.json"));
  CHECK(artifact.at("seed") == 7);
  CHECK(artifact.at("provider") == "synthetic");
  CHECK(artifact.at("config").at("semantics") == "df-quad");
  // The file parses back through the library schema.
  const auto parsed = artifacts_from_json(artifact);
  CHECK(parsed.family.size() == 3);

  // A different seed changes the bytes.
  REQUIRE(run("simulate --provider synthetic --seed 8 --out " + box.path("c.json")) == 0);
  CHECK(slurp(box.path("a.json")) != slurp(box.path("c.json")));
}

TEST_CASE("simulate validates configuration") {
  Sandbox box("simcfg");
  CHECK(run("simulate --experts 0 --out " + box.path("x.json")) != 0);
  CHECK(run("simulate --provider nonesuch --out " + box.path("x.json")) != 0);

  REQUIRE(run("simulate --semantics qe --kappa 2 --seed 3 --out " + box.path("qe.json")) == 0);
  const json artifact = slurp_json(box.path("qe.json"));
  CHECK(artifact.at("semantics").at("name") == "qe");
  CHECK(artifact.at("semantics").at("kappa") == 2.0);
  CHECK(artifact.at("config").at("kappa") == 2.0);

  // Explicit aggregation/influence fields compose a custom semantics.
  REQUIRE(run("simulate --aggregation sum --influence linear --seed 3 --out " +
              box.path("custom.json")) == 0);
  const json custom = slurp_json(box.path("custom.json"));
  CHECK(custom.at("semantics").at("name") == "custom");
  CHECK(custom.at("semantics").at("aggregation") == "sum");
  CHECK(custom.at("semantics").at("influence") == "linear");
  CHECK(run("simulate --aggregation bogus --out " + box.path("x.json")) != 0);
  CHECK(run("simulate --sim-backend bogus --out " + box.path("x.json")) != 0);
}

TEST_CASE("evaluate reproduces the worked three-node strength") {
  Sandbox box("evaluate");
  const auto tree = fixtures::tree({{"m", "", Polarity::Support, 0.5},
                                    {"s1", "m", Polarity::Support, 0.8},
                                    {"a1", "m", Polarity::Attack, 0.4}});
  std::ofstream(box.path("tree.json")) << to_json(tree).dump();
  REQUIRE(run("evaluate --in " + box.path("tree.json") + " --out " + box.path("out.json")) == 0);
  const json out = slurp_json(box.path("out.json"));
  CHECK(out.at("root_strength").get<double>() == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(out.at("sigma").at("s1").get<double>() == 0.8);

  // Artifact input defaults to the artifact's recorded semantics.
  REQUIRE(run("simulate --semantics reb --seed 4 --out " + box.path("a.json")) == 0);
  REQUIRE(run("evaluate --in " + box.path("a.json") + " --out " + box.path("ev.json")) == 0);
  const json artifact = slurp_json(box.path("a.json"));
  const json ev = slurp_json(box.path("ev.json"));
  for (const auto& [main, sigma] : artifact.at("strengths").items())
    CHECK(ev.at("sigma").at(main) == sigma);
}

TEST_CASE("explain emits ranked impacts and fails on lone roots") {
  Sandbox box("explain");
  const auto tree = fixtures::tree({{"m", "", Polarity::Support, 0.5},
                                    {"s1", "m", Polarity::Support, 0.8},
                                    {"a1", "m", Polarity::Attack, 0.4}});
  std::ofstream(box.path("tree.json")) << to_json(tree).dump();
  REQUIRE(run("explain --in " + box.path("tree.json") + " --out " + box.path("ex.json")) == 0);
  const json ex = slurp_json(box.path("ex.json"));
  const json& e = ex.at("explanations").at("m");
  CHECK(e.at("impacts").at(0).at("node") == "s1");  // ranked by |delta|
  CHECK(e.at("decisive_chain") == json::array({"s1", "m"}));

  const auto lone = fixtures::tree({{"m", "", Polarity::Support, 0.5}});
  std::ofstream(box.path("lone.json")) << to_json(lone).dump();
  CHECK(run("explain --in " + box.path("lone.json") + " --out " + box.path("no.json")) != 0);

  // Family input carries winner-critical and margin sections.
  REQUIRE(run("simulate --seed 7 --out " + box.path("a.json")) == 0);
  REQUIRE(run("explain --in " + box.path("a.json") + " --out " + box.path("fam.json")) == 0);
  const json fam = slurp_json(box.path("fam.json"));
  CHECK(fam.contains("winner_critical"));
  CHECK(fam.at("margin_report").contains("net_lifts"));
}

TEST_CASE("override emits the outcome and the sweep grid") {
  Sandbox box("override");
  REQUIRE(run("simulate --seed 7 --out " + box.path("a.json")) == 0);
  REQUIRE(run("override --in " + box.path("a.json") + " --out " + box.path("ov.json")) == 0);
  const json ov = slurp_json(box.path("ov.json"));
  CHECK(ov.at("outcome").contains("baseline_winner"));
  CHECK(ov.at("config").at("lambda") == 0.05);

  REQUIRE(run("override --in " + box.path("a.json") + " --ungated --tau 0.3 --cost edge --out " +
              box.path("ov2.json")) == 0);
  const json ov2 = slurp_json(box.path("ov2.json"));
  CHECK(ov2.at("config").at("gated") == false);
  CHECK(ov2.at("config").at("cost") == "edge");

  REQUIRE(run("override --in " + box.path("a.json") + " --sweep --out " + box.path("sweep.csv")) ==
          0);
  const std::string csv = slurp(box.path("sweep.csv"));
  CHECK(csv.rfind("cost,lambda,gated,applied", 0) == 0);
  // Header plus 4 cost kinds x 10 lambdas x gated/ungated.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 * 10 * 2);
}

TEST_CASE("metrics reproduces the reference row over an engineered dataset") {
  Sandbox box("metrics");
  fs::create_directories(box.path("artifacts"));
  json labels = json::object();
  int index = 0;
  for (int i = 0; i < 20; ++i) write_instance(box.dir / "artifacts", labels, index++, false, true);
  for (int i = 0; i < 11; ++i) write_instance(box.dir / "artifacts", labels, index++, true, false);
  for (int i = 0; i < 149; ++i) write_instance(box.dir / "artifacts", labels, index++, true, true);
  std::ofstream(box.path("labels.json")) << labels.dump(2);

  const std::string common = "metrics --artifacts " + box.path("artifacts") + " --labels " +
                             box.path("labels.json");
  REQUIRE(run(common + " --format json --out " + box.path("m.json")) == 0);
  const json m = slurp_json(box.path("m.json")).at("metrics");
  CHECK(m.at("n") == 180);
  CHECK(m.at("n_disagree") == 180);
  CHECK(m.at("transitions").at("n_mp") == 20);
  CHECK(m.at("transitions").at("n_pm") == 11);
  CHECK(m.at("nre").get<double>() == 0.05);
  CHECK(m.at("p_nre").get<double>() == doctest::Approx(0.0748063921928406).epsilon(1e-12));
  CHECK(m.at("accuracy_final").get<double>() ==
        doctest::Approx((149.0 + 20.0) / 180.0).epsilon(1e-12));

  REQUIRE(run(common + " --format md --out " + box.path("m.md")) == 0);
  const std::string table = slurp(box.path("m.md"));
  CHECK(table.find("NRE") != std::string::npos);
  CHECK(table.find("0.050") != std::string::npos);
  CHECK(table.find("0.0748") != std::string::npos);

  REQUIRE(run(common + " --format csv --out " + box.path("m.csv")) == 0);
  CHECK(slurp(box.path("m.csv")).find("N,N_disagree") == 0);

  // A labels file missing an instance is a hard error.
  std::ofstream(box.path("short.json")) << "{}";
  CHECK(run("metrics --artifacts " + box.path("artifacts") + " --labels " + box.path("short.json") +
            " --out " + box.path("x.md")) != 0);
}

TEST_CASE("report renders deterministically through the CLI") {
  Sandbox box("report");
  REQUIRE(run("simulate --seed 7 --out " + box.path("a.json")) == 0);
  REQUIRE(run("report --in " + box.path("a.json") + " --out " + box.path("r1.md")) == 0);
  REQUIRE(run("report --in " + box.path("a.json") + " --out " + box.path("r2.md")) == 0);
  CHECK(slurp(box.path("r1.md")) == slurp(box.path("r2.md")));
  const std::string report = slurp(box.path("r1.md"));
  CHECK(report.rfind("# Technical Consensus Report", 0) == 0);
  CHECK(report.find("## 6. Final Decision") != std::string::npos);

  REQUIRE(run("report --in " + box.path("a.json") + " --ground-truth A --out " + box.path("gt.md")) ==
          0);
  CHECK(slurp(box.path("gt.md")).find("- Ground truth: A") != std::string::npos);
}

TEST_CASE("config file supplies defaults but flags win") {
  Sandbox box("config");
  std::ofstream(box.path("argora.ini")) << "[simulate]\nsemantics=reb\nseed=11\n";
  REQUIRE(run("--config " + box.path("argora.ini") + " simulate --out " + box.path("a.json")) == 0);
  const json a = slurp_json(box.path("a.json"));
  CHECK(a.at("semantics").at("name") == "reb");
  CHECK(a.at("seed") == 11);

  REQUIRE(run("--config " + box.path("argora.ini") + " simulate --semantics ebt --out " +
              box.path("b.json")) == 0);
  CHECK(slurp_json(box.path("b.json")).at("semantics").at("name") == "ebt");
}
