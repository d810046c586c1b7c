#include "veritas/synthgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "veritas/csv.hpp"
#include "veritas/random.hpp"

namespace veritas {
namespace {

using nlohmann::json;

std::string padded(char prefix, std::size_t i, std::size_t n) {
  const std::size_t digits = std::to_string(n > 0 ? n - 1 : 0).size();
  std::string num = std::to_string(i);
  if (num.size() < digits) num.insert(0, digits - num.size(), '0');
  return prefix + num;
}

std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Population of each source: exact counts by largest remainder, then shuffled.
std::vector<std::size_t> assign_populations(const ScenarioSpec& spec, Rng& rng) {
  const std::size_t n = spec.n_sources;
  std::vector<std::size_t> counts(spec.populations.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t p = 0; p < counts.size(); ++p) {
    const double exact = spec.populations[p].fraction * static_cast<double>(n);
    counts[p] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[p];
    remainders.emplace_back(-(exact - std::floor(exact)), p);
  }
  std::sort(remainders.begin(), remainders.end());
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[remainders[k % counts.size()].second];

  std::vector<std::size_t> pop;
  pop.reserve(n);
  for (std::size_t p = 0; p < counts.size(); ++p) pop.insert(pop.end(), counts[p], p);
  shuffle(pop, rng);
  return pop;
}

// Statements claimed by one source under the power-law model.
std::vector<std::size_t> sample_power_law_targets(const std::vector<double>& cdf,
                                                  std::size_t n_statements, Rng& rng) {
  const double u = rng.uniform() * cdf.back();
  const std::size_t k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) -
                                                 cdf.begin()) + 1;
  std::vector<std::size_t> idx(n_statements);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const std::size_t take = std::min(k, n_statements);
  for (std::size_t i = 0; i < take; ++i) {
    std::swap(idx[i], idx[i + rng.index(n_statements - i)]);
  }
  idx.resize(take);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

void ScenarioSpec::validate() const {
  auto fail = [](const std::string& what) { throw DataError("invalid scenario: " + what); };
  if (n_statements == 0) fail("n_statements must be >= 1");
  if (n_sources == 0) fail("n_sources must be >= 1");
  if (!long_tail_exponent && !(claim_density > 0.0 && claim_density <= 1.0)) {
    fail("claim_density must lie in (0, 1]");
  }
  if (long_tail_exponent && !(*long_tail_exponent > 0.0)) fail("long_tail_exponent must be > 0");
  if (!(truth_prior > 0.0 && truth_prior < 1.0)) fail("truth_prior must lie in (0, 1)");
  if (populations.empty()) fail("at least one population is required");
  double total = 0.0;
  for (const auto& p : populations) {
    if (!(p.fraction >= 0.0)) fail("population fractions must be >= 0");
    // tpr = 1, fpr = 0 is accepted for noiseless scenarios.
    if (!(p.fpr >= 0.0 && p.fpr <= p.tpr && p.tpr <= 1.0)) fail("each population needs 0 <= fpr <= tpr <= 1");
    if (p.signature.size() != populations.front().signature.size()) {
      fail("population signatures must have equal length");
    }
    total += p.fraction;
  }
  if (std::abs(total - 1.0) > 1e-9) fail("population fractions must sum to 1");
}

ScenarioSpec scenario_from_json(const json& doc) {
  try {
    ScenarioSpec s;
    s.n_statements = doc.value("n_statements", s.n_statements);
    s.n_sources = doc.value("n_sources", s.n_sources);
    s.claim_density = doc.value("claim_density", s.claim_density);
    if (doc.contains("long_tail_exponent") && !doc["long_tail_exponent"].is_null()) {
      s.long_tail_exponent = doc["long_tail_exponent"].get<double>();
    }
    s.noise_features = doc.value("noise_features", s.noise_features);
    s.truth_prior = doc.value("truth_prior", s.truth_prior);
    s.seed = doc.value("seed", s.seed);
    if (doc.contains("populations")) {
      s.populations.clear();
      for (const auto& p : doc["populations"]) {
        s.populations.push_back({p.value("fraction", 1.0), p.at("tpr").get<double>(),
                                 p.at("fpr").get<double>(),
                                 p.value("signature", std::vector<double>{})});
      }
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed scenario: ") + e.what());
  }
}

json to_json(const ScenarioSpec& s) {
  json pops = json::array();
  for (const auto& p : s.populations) {
    pops.push_back({{"fraction", p.fraction}, {"tpr", p.tpr}, {"fpr", p.fpr}, {"signature", p.signature}});
  }
  return {{"n_statements", s.n_statements},
          {"n_sources", s.n_sources},
          {"claim_density", s.claim_density},
          {"long_tail_exponent", s.long_tail_exponent ? json(*s.long_tail_exponent) : json(nullptr)},
          {"noise_features", s.noise_features},
          {"truth_prior", s.truth_prior},
          {"seed", s.seed},
          {"populations", pops}};
}

SyntheticCorpus generate(const ScenarioSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  std::vector<Bit> truth(spec.n_statements);
  for (auto& t : truth) t = rng.bernoulli(spec.truth_prior) ? 1 : 0;

  const auto pop = assign_populations(spec, rng);
  const std::size_t sig_dim = spec.populations.front().signature.size();

  std::vector<std::string> feature_names;
  for (std::size_t k = 0; k < sig_dim; ++k) feature_names.push_back("sig" + std::to_string(k));
  for (std::size_t k = 0; k < spec.noise_features; ++k) feature_names.push_back("noise" + std::to_string(k));

  std::vector<double> cdf;
  if (spec.long_tail_exponent) {
    cdf.resize(spec.n_statements);
    double acc = 0.0;
    for (std::size_t k = 1; k <= spec.n_statements; ++k) {
      acc += std::pow(static_cast<double>(k), -*spec.long_tail_exponent);
      cdf[k - 1] = acc;
    }
  }

  SyntheticCorpus corpus;
  std::vector<std::vector<ClaimRecord>> claims(spec.n_statements);
  for (std::size_t s = 0; s < spec.n_sources; ++s) {
    const Population& p = spec.populations[pop[s]];
    const std::string source = padded('s', s, spec.n_sources);
    corpus.sources[source] = {pop[s], p.tpr, p.fpr};

    std::vector<std::size_t> targets;
    if (spec.long_tail_exponent) {
      targets = sample_power_law_targets(cdf, spec.n_statements, rng);
    } else {
      for (std::size_t f = 0; f < spec.n_statements; ++f) {
        if (rng.bernoulli(spec.claim_density)) targets.push_back(f);
      }
    }
    for (const std::size_t f : targets) {
      ClaimRecord c;
      c.statement_id = padded('f', f, spec.n_statements);
      c.source_id = source;
      c.value = rng.bernoulli(truth[f] ? p.tpr : p.fpr) ? 1 : 0;
      c.features = p.signature;
      for (std::size_t k = 0; k < spec.noise_features; ++k) c.features.push_back(rng.normal());
      claims[f].push_back(std::move(c));
    }
  }

  std::vector<StatementBundle> bundles;
  for (std::size_t f = 0; f < spec.n_statements; ++f) {
    if (claims[f].empty()) continue;
    const std::string id = padded('f', f, spec.n_statements);
    corpus.truth[id] = truth[f];
    bundles.emplace_back(id, std::move(claims[f]));
  }
  corpus.dataset = Dataset(std::move(bundles), std::move(feature_names));
  return corpus;
}

std::vector<RawClaimRow> to_raw_rows(const SyntheticCorpus& corpus) {
  std::vector<RawClaimRow> rows;
  std::int64_t clock = 0;
  const auto names = corpus.dataset.feature_names();
  for (const auto& b : corpus.dataset.bundles()) {
    for (const auto& c : b.claims()) {
      RawClaimRow r;
      r.entity_id = b.statement_id();
      r.attribute_id = kSyntheticAttribute;
      r.source_id = c.source_id;
      r.claimed_value = c.value ? "true" : "false";
      r.timestamp = clock++;
      for (std::size_t k = 0; k < names.size(); ++k) r.extra_columns[names[k]] = shortest(c.features[k]);
      r.line = rows.size() + 2;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir, ClaimFormat format) {
  std::filesystem::create_directories(dir);
  const auto rows = to_raw_rows(corpus);
  if (format == ClaimFormat::csv) {
    write_claims_csv(dir / "claims.csv", rows);
  } else {
    write_claims_jsonl(dir / "claims.jsonl", rows);
  }

  std::ofstream truth(dir / "truth.csv", std::ios::binary | std::ios::trunc);
  if (!truth) throw DataError("cannot write '" + (dir / "truth.csv").string() + "'");
  truth << "entity,attribute,value\n";
  for (const auto& [id, t] : corpus.truth) {
    truth << csv::join({id, kSyntheticAttribute, t ? "true" : "false"}) << '\n';
  }

  std::ofstream sources(dir / "sources.csv", std::ios::binary | std::ios::trunc);
  if (!sources) throw DataError("cannot write '" + (dir / "sources.csv").string() + "'");
  sources << "source,population,tpr,fpr\n";
  for (const auto& [id, s] : corpus.sources) {
    sources << csv::join({id, std::to_string(s.population), shortest(s.tpr), shortest(s.fpr)}) << '\n';
  }
}

}  // namespace veritas
