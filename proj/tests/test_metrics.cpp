#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "argora/metrics.hpp"

using namespace argora;

namespace {

/// Independent McNemar oracle: Pascal's triangle binomials in 128-bit
/// integers, tail summed and divided once. Valid for t <= 80.
double mcnemar_oracle(long k, long t) {
  if (t == 0) return 1.0;
  std::vector<std::vector<unsigned __int128>> pascal(t + 1);
  for (long n = 0; n <= t; ++n) {
    pascal[n].assign(n + 1, 1);
    for (long r = 1; r < n; ++r) pascal[n][r] = pascal[n - 1][r - 1] + pascal[n - 1][r];
  }
  unsigned __int128 tail = 0;
  for (long i = std::max(0L, k); i <= t; ++i) tail += pascal[t][i];
  long double denom = 1.0L;
  for (long i = 0; i < t; ++i) denom *= 2.0L;
  return static_cast<double>(static_cast<long double>(tail) / denom);
}

LabeledInstance instance(std::vector<std::tuple<std::string, double, double, std::string>> mains,
                         std::string truth) {
  LabeledInstance i;
  for (auto& [id, w, sigma, label] : mains) i.mains[id] = {w, sigma, label};
  i.ground_truth = std::move(truth);
  return i;
}

/// A two-main instance realizing one of the four correctness transitions.
LabeledInstance transition_case(bool prior_correct, bool final_correct) {
  // "A" is the ground truth; main x carries A, main y carries B.
  const double wx = prior_correct ? 0.6 : 0.4;
  const double sx = final_correct ? 0.9 : 0.1;
  return instance({{"x", wx, sx, "A"}, {"y", 1.0 - wx, 1.0 - sx, "B"}}, "A");
}

}  // namespace

TEST_CASE("transition counts and rates") {
  std::vector<LabeledInstance> data;
  for (int i = 0; i < 5; ++i) data.push_back(transition_case(true, true));
  auto [counts, rates] = transitions(data);
  CHECK(counts.n_pp == 5);
  CHECK(counts.total() == 5);
  CHECK(rates.trr == 1.0);
  CHECK(rates.prr == 0.0);
  CHECK(rates.nrr == 0.0);
  CHECK(rates.epr == 0.0);

  data.push_back(transition_case(false, true));   // one wrong -> correct
  data.push_back(transition_case(true, false));   // one correct -> wrong
  data.push_back(transition_case(false, false));  // one persistent error
  std::tie(counts, rates) = transitions(data);
  CHECK(counts.n_pp == 5);
  CHECK(counts.n_mp == 1);
  CHECK(counts.n_pm == 1);
  CHECK(counts.n_mm == 1);
  CHECK(counts.total() == 8);
  CHECK(rates.trr == doctest::Approx(5.0 / 8.0));
  CHECK(rates.prr == doctest::Approx(1.0 / 8.0));

  CHECK_THROWS_AS(transitions({}), Error);
}

TEST_CASE("prior and final winner ties break by main id") {
  // Equal scores everywhere: the smaller id ("a", labeled correct) wins both.
  auto tie = instance({{"a", 0.5, 0.5, "A"}, {"b", 0.5, 0.5, "B"}}, "A");
  auto [counts, rates] = transitions({tie});
  CHECK(counts.n_pp == 1);
}

TEST_CASE("NRE reproduces the reference rows") {
  // Counts (20, 11) over a disagreement set of 180: NRE = 0.050 exactly.
  std::vector<LabeledInstance> data;
  for (int i = 0; i < 20; ++i) data.push_back(transition_case(false, true));
  for (int i = 0; i < 11; ++i) data.push_back(transition_case(true, false));
  for (int i = 0; i < 149; ++i) data.push_back(transition_case(true, true));
  CHECK(disagreement_count(data) == 180);
  CHECK(nre(data) == 0.05);

  // (14, 5) over 86: 0.105 within rounding.
  std::vector<LabeledInstance> medqa;
  for (int i = 0; i < 14; ++i) medqa.push_back(transition_case(false, true));
  for (int i = 0; i < 5; ++i) medqa.push_back(transition_case(true, false));
  for (int i = 0; i < 67; ++i) medqa.push_back(transition_case(false, false));
  CHECK(nre(medqa) == doctest::Approx(0.105).epsilon(5e-3));
  CHECK(std::fabs(nre(medqa) - 0.105) < 0.0005);

  // Balanced reversals cancel.
  std::vector<LabeledInstance> balanced;
  for (int i = 0; i < 7; ++i) balanced.push_back(transition_case(false, true));
  for (int i = 0; i < 7; ++i) balanced.push_back(transition_case(true, false));
  CHECK(nre(balanced) == 0.0);
}

TEST_CASE("NRE is bounded and antisymmetric under count swaps") {
  std::mt19937 rng(271828);
  for (int round = 0; round < 100; ++round) {
    const int up = static_cast<int>(rng() % 20);
    const int down = static_cast<int>(rng() % 20);
    const int inert = 1 + static_cast<int>(rng() % 30);
    auto build = [&](int mp, int pm) {
      std::vector<LabeledInstance> data;
      for (int i = 0; i < mp; ++i) data.push_back(transition_case(false, true));
      for (int i = 0; i < pm; ++i) data.push_back(transition_case(true, false));
      for (int i = 0; i < inert; ++i) data.push_back(transition_case(true, true));
      return data;
    };
    const double forward = nre(build(up, down));
    CHECK(forward >= -1.0);
    CHECK(forward <= 1.0);
    CHECK(nre(build(down, up)) == -forward);
  }
}

TEST_CASE("unanimous instances are inert and make NRE undefined") {
  // All mains share the truth label: never a reversal, never a disagreement.
  std::vector<LabeledInstance> data;
  std::mt19937 rng(17);
  for (int i = 0; i < 50; ++i) {
    const double w1 = (1 + rng() % 99) / 100.0, w2 = (1 + rng() % 99) / 100.0;
    const double s1 = (1 + rng() % 99) / 100.0, s2 = (1 + rng() % 99) / 100.0;
    data.push_back(instance({{"a", w1, s1, "A"}, {"b", w2, s2, "A"}}, "A"));
  }
  auto [counts, rates] = transitions(data);
  CHECK(counts.n_pm == 0);
  CHECK(counts.n_mp == 0);
  CHECK(counts.n_pp == 50);
  CHECK(disagreement_count(data) == 0);
  CHECK_THROWS_AS(nre(data), Error);
}

TEST_CASE("exact one-sided McNemar") {
  CHECK(mcnemar_exact(0, 0).p == 1.0);
  CHECK(mcnemar_exact(0, 0).t == 0);

  const auto medqa = mcnemar_exact(14, 5);
  CHECK(medqa.t == 19);
  CHECK(medqa.p >= 0.0315);
  CHECK(medqa.p <= 0.0325);  // reported as 0.032

  // Exact rational value 160645504 / 2^31; truncates to the reported 0.074.
  const auto mmlu = mcnemar_exact(20, 11);
  CHECK(mmlu.p == doctest::Approx(0.0748063921928406).epsilon(1e-12));

  const auto team = mcnemar_exact(17, 3);
  CHECK(team.p <= 0.0015);  // reported as 0.001
  CHECK(team.p == doctest::Approx(0.00129).epsilon(1e-2));

  // p = 1 whenever no positive reversals occur.
  for (long t : {1L, 2L, 5L, 17L}) CHECK(mcnemar_exact(0, t).p == 1.0);
}

TEST_CASE("McNemar matches the big-integer oracle for all t <= 40") {
  for (long t = 0; t <= 40; ++t) {
    for (long k = 0; k <= t; ++k) {
      const auto r = mcnemar_exact(k, t - k);
      CHECK(r.p == doctest::Approx(mcnemar_oracle(k, t)).epsilon(1e-12));
    }
  }
  // Monotonicity: p is non-increasing in the positive count for fixed t.
  for (long t : {10L, 31L, 40L}) {
    double prev = 1.1;
    for (long k = 0; k <= t; ++k) {
      const double p = mcnemar_exact(k, t - k).p;
      CHECK(p <= prev + 1e-15);
      prev = p;
    }
  }
  // Large-t path (log-space) stays consistent at the exact/log boundary.
  const double exact64 = mcnemar_exact(40, 24).p;
  CHECK(exact64 == doctest::Approx(mcnemar_oracle(40, 64)).epsilon(1e-10));
  const double log_path = mcnemar_exact(41, 24).p;
  CHECK(log_path == doctest::Approx(mcnemar_oracle(41, 65)).epsilon(1e-9));
}

TEST_CASE("correctness margin") {
  // Every correct main stronger by exactly 0.1.
  std::vector<LabeledInstance> data;
  for (int i = 0; i < 4; ++i)
    data.push_back(instance({{"a", 0.5, 0.6, "A"}, {"b", 0.5, 0.5, "B"}}, "A"));
  CHECK(correctness_margin(data) == doctest::Approx(0.1).epsilon(1e-12));

  // Symmetric strengths give margin 0.
  CHECK(correctness_margin({instance({{"a", 0.5, 0.5, "A"}, {"b", 0.5, 0.5, "B"}}, "A")}) == 0.0);

  // Two instances with margins +0.3 and -0.1 average to 0.1.
  std::vector<LabeledInstance> mixed{
      instance({{"a", 0.5, 0.8, "A"}, {"b", 0.5, 0.5, "B"}}, "A"),
      instance({{"a", 0.5, 0.4, "A"}, {"b", 0.5, 0.5, "B"}}, "A"),
  };
  CHECK(correctness_margin(mixed) == doctest::Approx(0.1).epsilon(1e-12));

  // The strongest correct/incorrect mains are the ones compared.
  std::vector<LabeledInstance> multi{instance(
      {{"a", 0.5, 0.9, "A"}, {"b", 0.5, 0.3, "A"}, {"c", 0.5, 0.7, "B"}, {"d", 0.5, 0.1, "C"}},
      "A")};
  CHECK(correctness_margin(multi) == doctest::Approx(0.2).epsilon(1e-12));

  // Unanimous instances are excluded; all-unanimous data has no valid instance.
  CHECK_THROWS_AS(correctness_margin({instance({{"a", 0.5, 0.5, "A"}}, "A")}), Error);
}

TEST_CASE("JS diagnostics") {
  auto make = [](double p1, double q1, std::string la, std::string lb) {
    JsInstance i;
    i.p_qbaf = normalize({{"a", p1}, {"b", 1.0 - p1}});
    i.p_obs = normalize({{"a", q1}, {"b", 1.0 - q1}});
    i.labels = {{"a", std::move(la)}, {"b", std::move(lb)}};
    return i;
  };

  // Identical pairs: all statistics are zero.
  const auto zero = js_stats({make(0.6, 0.6, "A", "B"), make(0.7, 0.7, "A", "B")});
  CHECK(zero.overall.mean == 0.0);
  CHECK(zero.overall.stddev == 0.0);
  CHECK(zero.overall.median == 0.0);
  CHECK(zero.overall.p90 == 0.0);
  CHECK(zero.overall.count == 2);
  CHECK(zero.same_label.count == 2);
  CHECK(zero.different_label.count == 0);

  // Single instance: mean = median = that JS, std = 0.
  const auto one = js_stats({make(0.8, 0.3, "A", "B")});
  CHECK(one.overall.count == 1);
  CHECK(one.overall.stddev == 0.0);
  CHECK(one.overall.mean == one.overall.median);
  CHECK(one.overall.mean > 0.0);
  CHECK(one.different_label.count == 1);  // winners a vs b carry different labels

  // Three-instance fixture, hand-computed with the declared conventions.
  const auto a = make(0.9, 0.1, "A", "B");  // winners differ
  const auto b = make(0.6, 0.7, "A", "B");  // winners agree (both "a")
  const auto c = make(0.55, 0.65, "X", "X");  // winners differ but share a label
  const double ja = js_divergence(a.p_qbaf, a.p_obs);
  const double jb = js_divergence(b.p_qbaf, b.p_obs);
  const double jc = js_divergence(c.p_qbaf, c.p_obs);
  const auto stats = js_stats({a, b, c});
  CHECK(stats.overall.count == 3);
  CHECK(stats.overall.mean == doctest::Approx((ja + jb + jc) / 3.0).epsilon(1e-12));
  std::vector<double> sorted{ja, jb, jc};
  std::sort(sorted.begin(), sorted.end());
  CHECK(stats.overall.median == doctest::Approx(sorted[1]).epsilon(1e-12));
  CHECK(stats.overall.p90 ==
        doctest::Approx(sorted[1] + 0.8 * (sorted[2] - sorted[1])).epsilon(1e-12));
  const double mean = (ja + jb + jc) / 3.0;
  const double var = ((ja - mean) * (ja - mean) + (jb - mean) * (jb - mean) +
                      (jc - mean) * (jc - mean)) /
                     3.0;
  CHECK(stats.overall.stddev == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
  CHECK(stats.same_label.count == 2);  // b and c
  CHECK(stats.different_label.count == 1);
  CHECK(stats.different_label.mean == doctest::Approx(ja).epsilon(1e-12));
}
