#include <doctest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "veritas/core.hpp"
#include "veritas/random.hpp"

using namespace veritas;
using doctest::Approx;

TEST_SUITE("core") {

TEST_CASE("logistic reference values") {
  CHECK(logistic(0.0) == 0.5);
  CHECK(logistic(2.0) == Approx(0.880797077977882).epsilon(1e-14));
  CHECK(logistic(-2.0) == Approx(0.119202922022118).epsilon(1e-14));
  CHECK(logistic(2.0) + logistic(-2.0) == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("logistic stays finite and in range at the extremes") {
  for (double x : {-1000.0, -745.0, -40.0, 40.0, 745.0, 1000.0}) {
    const double y = logistic(x);
    CHECK(std::isfinite(y));
    CHECK(y >= 0.0);
    CHECK(y <= 1.0);
  }
  CHECK(logistic(-40.0) > 0.0);
  CHECK(logistic(40.0) == 1.0);
}

TEST_CASE("logit reference values") {
  CHECK(logit(0.5) == 0.0);
  CHECK(logit(0.2) == Approx(-1.38629436111989).epsilon(1e-14));
  CHECK(logit(0.9) == Approx(2.19722457733622).epsilon(1e-14));
}

TEST_CASE("logit rejects values outside (0, 1)") {
  for (double p : {0.0, 1.0, -0.1, 1.5, std::numeric_limits<double>::quiet_NaN()}) {
    CHECK_THROWS_AS(logit(p), DomainError);
  }
}

TEST_CASE("logistic inverts logit on 1000 random points") {
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double p = 1e-6 + (1.0 - 2e-6) * rng.uniform();
    worst = std::max(worst, std::abs(logistic(logit(p)) - p));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("decision threshold sends ties to 1") {
  CHECK(decide(0.5) == 1);
  CHECK(decide(std::nextafter(0.5, 0.0)) == 0);
  CHECK(decide(0.9) == 1);
  CHECK(TruthEstimate::from_plausibility("x", 0.25).decision == 0);
}

TEST_CASE("theta_from_rates inverts the rate formulas") {
  const Theta t = theta_from_rates(0.7, 0.3);
  CHECK(t.a == Approx(-0.847297860387204).epsilon(1e-14));
  CHECK(t.w == Approx(1.69459572077441).epsilon(1e-14));
  CHECK(t.b == 0.0);
  const Theta u = theta_from_rates(0.9, 0.2);
  CHECK(u.a == Approx(-1.38629436111989).epsilon(1e-14));
  CHECK(u.w == Approx(3.58351893845611).epsilon(1e-14));
  CHECK_THROWS_AS(theta_from_rates(1.0, 0.3), DomainError);
}

TEST_CASE("statement bundles validate their claims") {
  CHECK_THROWS_AS(StatementBundle("f", {}), DataError);
  CHECK_THROWS_AS(StatementBundle("f", {fixture::claim("f", "s", 2)}), DataError);
  CHECK_THROWS_AS(StatementBundle("f", {fixture::claim("g", "s", 1)}), DataError);
  CHECK_THROWS_AS(StatementBundle("f", {fixture::claim("f", "s", 1), fixture::claim("f", "s", 0)}), DataError);
  // Anonymous claims never collide with each other.
  const StatementBundle anon("f", {fixture::claim("f", std::nullopt, 1), fixture::claim("f", std::nullopt, 0)});
  CHECK(anon.size() == 2);
}

TEST_CASE("dataset indexes sources by first appearance") {
  Dataset d({fixture::bundle("f1", {1, 0}), StatementBundle("f2", {fixture::claim("f2", "s9", 1),
                                                                   fixture::claim("f2", "s0", 1)})},
            {});
  REQUIRE(d.source_count() == 3);
  CHECK(d.source_names()[0] == "s0");
  CHECK(d.source_names()[1] == "s1");
  CHECK(d.source_names()[2] == "s9");
  CHECK(d.source_index("s9") == 2u);
  CHECK_FALSE(d.source_index("nobody").has_value());
  CHECK(d.claim_count() == 4);
  CHECK_FALSE(d.has_anonymous_claims());
}

TEST_CASE("dataset rejects feature vectors of the wrong length") {
  std::vector<ClaimRecord> claims{fixture::claim("f", "s", 1, {1.0})};
  CHECK_THROWS_AS(Dataset({StatementBundle("f", claims)}, {"x", "y"}), DimensionError);
  CHECK_NOTHROW(Dataset({StatementBundle("f", claims)}, {"x"}));
}

TEST_CASE("training config validation") {
  TrainingConfig c;
  CHECK_NOTHROW(c.validate());
  c.epochs = 0;
  CHECK_NOTHROW(c.validate());
  c.epochs = -1;
  CHECK_THROWS_AS(c.validate(), DataError);
  c = {};
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), DataError);
  c = {};
  c.cd_steps = 0;
  CHECK_THROWS_AS(c.validate(), DataError);
  c = {};
  c.pretrain_tpr = 0.2;
  c.pretrain_fpr = 0.4;
  CHECK_THROWS_AS(c.validate(), DataError);
}

TEST_CASE("rng streams are reproducible and split seeds differ") {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  CHECK(split_seed(1, streams::kShuffle) != split_seed(1, streams::kGibbs));
  CHECK(split_seed(1, streams::kShuffle) != split_seed(2, streams::kShuffle));
  Rng c(9);
  for (int i = 0; i < 1000; ++i) {
    const auto k = c.index(7);
    CHECK(k < 7u);
  }
}

TEST_CASE("shuffle is a permutation") {
  Rng rng(3);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[static_cast<std::size_t>(i)] = i;
  shuffle(v, rng);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
}

}
