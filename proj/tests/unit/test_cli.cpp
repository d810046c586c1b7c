#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "veritas/cli.hpp"
#include "veritas/model_io.hpp"

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = veritas::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const char* kScenario = R"({"n_statements": 80, "n_sources": 12, "claim_density": 0.4, "seed": 3,
  "populations": [{"fraction": 0.5, "tpr": 0.9, "fpr": 0.1, "signature": [1, 0]},
                  {"fraction": 0.5, "tpr": 0.6, "fpr": 0.4, "signature": [0, 1]}]})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("synth, train and eval end to end") {
  fixture::TempDir dir("cli_e2e");
  const auto spec = dir.write("scenario.json", kScenario);
  const auto corpus = (dir / "corpus").string();
  auto r = run({"synth", "--spec", spec.string(), "--out", corpus});
  REQUIRE(r.code == 0);
  r = run({"train", "grbm", "--claims", corpus + "/claims.csv", "--out", (dir / "model.json").string(), "--epochs", "20"});
  REQUIRE(r.code == 0);
  r = run({"eval", "--model", (dir / "model.json").string(), "--claims", corpus + "/claims.csv", "--truth",
           corpus + "/truth.csv", "--out", (dir / "report").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("accuracy grbm: ") != std::string::npos);
  CHECK(r.out.find("majority_vote") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "report" / "report.json"));
  CHECK(std::filesystem::exists(dir / "report" / "report.txt"));
  CHECK(std::filesystem::exists(dir / "report" / "report.csv"));

  r = run({"infer", "--model", (dir / "model.json").string(), "--claims", corpus + "/claims.csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("entity,attribute,value,plausibility,decision\n", 0) == 0);

  r = run({"report", "--model", (dir / "model.json").string(), "--claims", corpus + "/claims.csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("source,claims,tpr,fpr\n", 0) == 0);
}

TEST_CASE("baseline training and majority-only evaluation") {
  fixture::TempDir dir("cli_base");
  const auto spec = dir.write("scenario.json", kScenario);
  const auto corpus = (dir / "c").string();
  REQUIRE(run({"synth", "--spec", spec.string(), "--out", corpus, "--format", "jsonl"}).code == 0);
  auto r = run({"train", "baseline", "--claims", corpus + "/claims.jsonl", "--out", (dir / "b.json").string(),
                "--manifest", (dir / "manifest.json").string()});
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  r = run({"eval", "--claims", corpus + "/claims.jsonl", "--truth", corpus + "/truth.csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("accuracy majority_vote: ") != std::string::npos);
  r = run({"report", "--model", (dir / "b.json").string(), "--claims", corpus + "/claims.jsonl"});
  CHECK(r.code == 0);
}

TEST_CASE("usage errors exit with 2 and print usage") {
  auto r = run({"train", "grbm", "--claims", "c.csv", "--out", "m.json", "--bogus"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--claims") != std::string::npos);
  CHECK(r.err.find("\"error\":\"usage\"") != std::string::npos);
  CHECK(run({}).code == 2);
  CHECK(run({"train", "neural", "--claims", "c.csv", "--out", "m.json"}).code == 2);
  CHECK(run({"train", "grbm", "--claims", "c.csv", "--out", "m.json", "--hidden", "8,x"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("missing features under grbm exit with 3 naming the claim") {
  fixture::TempDir dir("cli_missing");
  const auto claims = dir.write("claims.csv",
                                "entity,attribute,source,value,timestamp,score\n"
                                "e1,a,s1,x,1,0.5\n"
                                "e1,a,s2,y,2,\n"
                                "e2,a,s1,z,3,0.1\n");
  auto r = run({"train", "grbm", "--claims", claims.string(), "--out", (dir / "m.json").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK(r.err.find("s2") != std::string::npos);
  CHECK(r.err.find("\"exit_code\":3") != std::string::npos);

  r = run({"train", "grbm", "--claims", claims.string(), "--out", (dir / "m.json").string(), "--recipe", "none"});
  CHECK(r.code == 3);
  CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_CASE("data errors exit with 3") {
  fixture::TempDir dir("cli_data");
  CHECK(run({"train", "baseline", "--claims", (dir / "absent.csv").string(), "--out", (dir / "m.json").string()}).code == 3);
  const auto anon = dir.write("anon.csv", "entity,attribute,source,value\ne,a,,x\ne,a,s,y\n");
  const auto r = run({"train", "baseline", "--claims", anon.string(), "--out", (dir / "m.json").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("no source") != std::string::npos);
  CHECK(run({"train", "grbm", "--claims", anon.string(), "--out", (dir / "nodir" / "m.json").string()}).code == 3);
  CHECK(run({"train", "grbm", "--claims", anon.string(), "--out", (dir / "m.json").string(), "--policy", "odd"}).code == 3);
}

TEST_CASE("numeric divergence exits with 4") {
  fixture::TempDir dir("cli_numeric");
  const auto spec = dir.write("scenario.json", kScenario);
  REQUIRE(run({"synth", "--spec", spec.string(), "--out", (dir / "c").string()}).code == 0);
  const auto cfg = dir.write("cfg.json", R"({"max_grad_norm": 1e308})");
  const auto r = run({"train", "grbm", "--claims", (dir / "c" / "claims.csv").string(), "--out",
                      (dir / "m.json").string(), "--config", cfg.string(), "--lr", "1e308"});
  CHECK(r.code == 4);
  CHECK(r.err.find("\"error\":\"numeric\"") != std::string::npos);
}

TEST_CASE("flags override the config file") {
  fixture::TempDir dir("cli_config");
  const auto spec = dir.write("scenario.json", kScenario);
  REQUIRE(run({"synth", "--spec", spec.string(), "--out", (dir / "c").string()}).code == 0);
  const auto cfg = dir.write("cfg.json", R"({"epochs": 7, "learning_rate": 0.003, "hidden": [4], "seed": 99})");
  const auto model = (dir / "m.json").string();
  REQUIRE(run({"train", "grbm", "--claims", (dir / "c" / "claims.csv").string(), "--out", model, "--config",
               cfg.string(), "--epochs", "2"})
              .code == 0);
  const auto m = veritas::load_model(model);
  REQUIRE(m.grbm.has_value());
  CHECK(m.grbm->config.epochs == 2);
  CHECK(m.grbm->config.learning_rate == 0.003);
  CHECK(m.grbm->config.rng_seed == 99);
  CHECK(m.grbm->spec().hidden_layers == std::vector<std::size_t>{4});
}

TEST_CASE("identical invocations give identical files") {
  fixture::TempDir dir("cli_determinism");
  const auto spec = dir.write("scenario.json", kScenario);
  const auto claims = (dir / "c" / "claims.csv").string();
  REQUIRE(run({"synth", "--spec", spec.string(), "--out", (dir / "c").string()}).code == 0);
  for (const char* name : {"m1.json", "m2.json"}) {
    REQUIRE(run({"train", "grbm", "--claims", claims, "--out", (dir / name).string(), "--epochs", "10", "--seed", "5"}).code == 0);
  }
  CHECK(fixture::read_file(dir / "m1.json") == fixture::read_file(dir / "m2.json"));
  for (const char* name : {"r1", "r2"}) {
    REQUIRE(run({"eval", "--model", (dir / "m1.json").string(), "--claims", claims, "--truth",
                 (dir / "c" / "truth.csv").string(), "--out", (dir / name).string()})
                .code == 0);
  }
  CHECK(fixture::read_file(dir / "r1" / "report.json") == fixture::read_file(dir / "r2" / "report.json"));
  REQUIRE(run({"train", "grbm", "--claims", claims, "--out", (dir / "m3.json").string(), "--epochs", "10", "--seed", "6"}).code == 0);
  CHECK(fixture::read_file(dir / "m1.json") != fixture::read_file(dir / "m3.json"));
}

}
