#include <doctest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "veritas/evaluation.hpp"
#include "veritas/grbm.hpp"
#include "veritas/random.hpp"

using namespace veritas;
using doctest::Approx;

namespace {

EncodingManifest manifest_of(std::vector<StatementKey> keys) {
  EncodingManifest m;
  std::sort(keys.begin(), keys.end());
  m.statements = std::move(keys);
  return m;
}

GroundTruth truth_of(std::map<GroupKey, std::string> values) {
  GroundTruth t;
  t.values = std::move(values);
  return t;
}

std::size_t stratum_total(const EvalReport& r, const std::string& family) {
  std::size_t n = 0;
  for (const auto& s : r.strata) {
    if (s.family == family) n += s.n;
  }
  return n;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("majority vote examples") {
  const auto a = majority_vote(fixture::bundle("f", {1, 1, 0}));
  CHECK(a.plausibility == Approx(2.0 / 3.0));
  CHECK(a.decision == 1);
  const auto b = majority_vote(fixture::bundle("f", {0, 0}));
  CHECK(b.plausibility == 0.0);
  CHECK(b.decision == 0);
  const auto c = majority_vote(fixture::bundle("f", {1, 0}));
  CHECK(c.plausibility == 0.5);
  CHECK(c.decision == 1);
  CHECK_THROWS_AS(majority_vote("f", std::span<const ClaimRecord>{}), DataError);
}

TEST_CASE("per-attribute decision examples") {
  const auto m = manifest_of({{"e", "a", "x"}, {"e", "a", "y"}, {"g", "a", "only"}, {"h", "a", "p"}, {"h", "a", "q"}});
  const std::vector<TruthEstimate> est{TruthEstimate::from_plausibility("0", 0.9), TruthEstimate::from_plausibility("1", 0.3),
                                       TruthEstimate::from_plausibility("2", 0.1), TruthEstimate::from_plausibility("3", 0.4),
                                       TruthEstimate::from_plausibility("4", 0.4)};
  const auto d = per_attribute_decision(est, m);
  CHECK(d.at({"e", "a"}) == "x");
  CHECK(d.at({"g", "a"}) == "only");
  CHECK(d.at({"h", "a"}) == "p");
  const std::vector<TruthEstimate> partial{est[0]};
  CHECK_THROWS_AS(per_attribute_decision(partial, m), DataError);
}

TEST_CASE("evaluate examples") {
  const GroupDecisions d{{{"e1", "a"}, "x"}, {{"e2", "a"}, "y"}, {{"e3", "a"}, "z"}, {{"e4", "a"}, "w"}};
  const std::map<GroupKey, ItemStrata> strata;
  CHECK(evaluate(d, truth_of({{{"e1", "a"}, "x"}, {{"e2", "a"}, "y"}}), strata, "m").overall_accuracy == 1.0);
  const auto half = evaluate(d, truth_of({{{"e1", "a"}, "x"}, {{"e2", "a"}, "n"}, {{"e3", "a"}, "z"}, {{"e4", "a"}, "n"}}),
                             strata, "m");
  CHECK(half.overall_accuracy == 0.5);
  CHECK(half.n_labeled == 4);
  CHECK(half.n_correct == 2);
  CHECK(half.method == "m");
  CHECK_THROWS_WITH_AS(evaluate(d, GroundTruth{}, strata, "m"), "no labeled statements", DataError);
  CHECK_THROWS_AS(evaluate(d, truth_of({{{"zz", "a"}, "x"}}), strata, "m"), DataError);
}

TEST_CASE("statement-level evaluation") {
  const std::vector<TruthEstimate> est{TruthEstimate::from_plausibility("a", 0.8), TruthEstimate::from_plausibility("b", 0.2),
                                       TruthEstimate::from_plausibility("c", 0.6)};
  const std::map<std::string, Bit> labels{{"a", 1}, {"b", 1}, {"c", 1}};
  const auto r = evaluate_statements(est, labels, {}, "x");
  CHECK(r.n_correct == 2);
  CHECK_THROWS_AS(evaluate_statements(est, {}, {}, "x"), DataError);
}

TEST_CASE("claims buckets") {
  CHECK(claims_bucket(1) == "1");
  CHECK(claims_bucket(2) == "2");
  CHECK(claims_bucket(3) == "3-5");
  CHECK(claims_bucket(5) == "3-5");
  CHECK(claims_bucket(6) == "6+");
  CHECK(claims_bucket(100) == "6+");
}

TEST_CASE("property: strata counts add up to the labelled total") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    std::vector<StatementKey> keys;
    GroundTruth truth;
    GroupDecisions dec;
    std::vector<StatementBundle> bundles;
    for (int e = 0; e < 15; ++e) {
      const std::string ent = "e" + std::to_string(e);
      keys.push_back({ent, "a", "v"});
      truth.values[{ent, "a"}] = rng.bernoulli(0.5) ? "v" : "other";
      dec[{ent, "a"}] = "v";
    }
    const auto m = manifest_of(keys);
    for (std::size_t f = 0; f < m.statements.size(); ++f) {
      std::vector<ClaimRecord> claims;
      for (std::size_t s = 0; s < 10; ++s) {
        if (rng.bernoulli(0.3) || claims.empty()) {
          claims.push_back(fixture::claim(std::to_string(f), "s" + std::to_string(rng.index(12)), 1));
          if (claims.size() > 1 && claims.back().source_id == claims[claims.size() - 2].source_id) claims.pop_back();
        }
      }
      std::set<std::string> seen;
      std::vector<ClaimRecord> unique;
      for (auto& c : claims) {
        if (seen.insert(*c.source_id).second) unique.push_back(c);
      }
      bundles.emplace_back(std::to_string(f), unique);
    }
    Dataset d(bundles, {});
    const auto r = evaluate(dec, truth, group_strata(d, m), "m");
    CHECK(stratum_total(r, "claims_per_item") == r.n_labeled);
    CHECK(stratum_total(r, "source_claims") == r.n_labeled);
    std::size_t correct = 0;
    for (const auto& s : r.strata) {
      if (s.family == "claims_per_item") correct += s.correct;
    }
    CHECK(correct == r.n_correct);
  }
}

TEST_CASE("group strata flag one-claim sources") {
  const auto m = manifest_of({{"e1", "a", "x"}, {"e2", "a", "y"}});
  Dataset d({StatementBundle("0", {fixture::claim("0", "busy", 1), fixture::claim("0", "lonely", 1)}),
             StatementBundle("1", {fixture::claim("1", "busy", 1)})},
            {});
  const auto s = group_strata(d, m);
  CHECK(s.at({"e1", "a"}).claims == 2);
  CHECK(s.at({"e1", "a"}).has_single_claim_source);
  CHECK_FALSE(s.at({"e2", "a"}).has_single_claim_source);
  const auto st = statement_strata(d);
  CHECK(st.at("0").has_single_claim_source);
  CHECK(st.at("1").claims == 1);
}

TEST_CASE("property: argmax decisions are invariant under monotone transforms") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rng rng(seed + 500);
    std::vector<StatementKey> keys;
    for (int e = 0; e < 8; ++e) {
      for (std::size_t v = 0, n = 1 + rng.index(4); v < n; ++v) keys.push_back({"e" + std::to_string(e), "a", "v" + std::to_string(v)});
    }
    const auto m = manifest_of(keys);
    std::vector<TruthEstimate> est, warped;
    for (std::size_t f = 0; f < m.statements.size(); ++f) {
      // Coarse grid so ties actually occur.
      const double p = static_cast<double>(rng.index(5)) / 5.0 + 0.1;
      est.push_back(TruthEstimate::from_plausibility(std::to_string(f), p));
      warped.push_back(TruthEstimate::from_plausibility(std::to_string(f), std::pow(p, 3.0) / 7.0 + 0.01));
    }
    CHECK(per_attribute_decision(est, m) == per_attribute_decision(warped, m));
  }
}

TEST_CASE("a zero model is uninformative") {
  const GrbmModel zero{ReliabilityNetwork([] {
                         NetworkSpec s;
                         s.input_dim = 1;
                         return s;
                       }()),
                       0.0, {}};
  Rng rng(60);
  std::vector<StatementBundle> bundles;
  for (int f = 0; f < 20; ++f) {
    std::vector<ClaimRecord> claims;
    for (std::size_t s = 0, n = 1 + rng.index(6); s < n; ++s) {
      claims.push_back(fixture::claim("f" + std::to_string(f), "s" + std::to_string(s), rng.bernoulli(0.5) ? 1 : 0, {rng.normal()}));
    }
    bundles.emplace_back("f" + std::to_string(f), claims);
  }
  for (const auto& e : infer_grbm(zero, Dataset(bundles, {"x"}))) CHECK(e.plausibility == 0.5);
}

TEST_CASE("config digest is stable and sensitive") {
  const nlohmann::json a{{"lr", 0.1}, {"epochs", 3}};
  const nlohmann::json b{{"epochs", 3}, {"lr", 0.1}};
  CHECK(config_digest(a) == config_digest(b));
  CHECK(config_digest(a).size() == 16);
  CHECK(config_digest(a) != config_digest({{"lr", 0.2}, {"epochs", 3}}));
}

TEST_CASE("report rendering") {
  EvalReport r;
  r.method = "grbm";
  r.n_labeled = 4;
  r.n_correct = 3;
  r.overall_accuracy = 0.75;
  r.strata = {{"claims_per_item", "1", 4, 3}};
  const std::vector<EvalReport> reports{r};
  const auto j = to_json(r);
  CHECK(j["overall_accuracy"] == 0.75);
  CHECK(j["strata"][0]["bucket"] == "1");
  const auto table = to_text_table(reports);
  CHECK(table.find("75.00") != std::string::npos);
  CHECK(table.find("claims_per_item:1") != std::string::npos);
  const auto csv_text = to_csv(reports);
  CHECK(csv_text.rfind("method,family,bucket,n,correct,accuracy\n", 0) == 0);
  CHECK(r.stratum("claims_per_item", "1")->correct == 3);
  CHECK(r.stratum("claims_per_item", "2") == nullptr);
}

}
