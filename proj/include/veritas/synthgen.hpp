#pragma once

// Synthetic claim corpora with planted truth and population-linked source
// reliabilities.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "veritas/core.hpp"
#include "veritas/data_pipeline.hpp"

namespace veritas {

struct Population {
  double fraction = 1.0;
  double tpr = 0.9;
  double fpr = 0.1;
  std::vector<double> signature;  // feature columns shared by the population
};

struct ScenarioSpec {
  std::size_t n_statements = 200;
  std::size_t n_sources = 30;
  double claim_density = 0.3;
  std::vector<Population> populations{Population{}};
  // When set, claims per source follow P(k) ∝ k^-exponent on 1..n_statements
  // and claim_density is ignored.
  std::optional<double> long_tail_exponent;
  std::size_t noise_features = 0;
  double truth_prior = 0.5;
  std::uint64_t seed = 1;

  /// Throws DataError on an invalid spec.
  void validate() const;
};

ScenarioSpec scenario_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ScenarioSpec& spec);

struct PlantedSource {
  std::size_t population = 0;
  double tpr = 0.0;
  double fpr = 0.0;
};

struct SyntheticCorpus {
  Dataset dataset;                           // statements with >= 1 claim only
  std::map<std::string, Bit> truth;          // per statement id
  std::map<std::string, PlantedSource> sources;
};

/// Deterministic for a given spec (including seed). Features are the
/// population signature followed by standard-normal noise columns.
SyntheticCorpus generate(const ScenarioSpec& spec);

/// Renders a corpus as raw claim rows: entity = statement id, attribute
/// "holds", value "true"/"false", features as extra columns.
std::vector<RawClaimRow> to_raw_rows(const SyntheticCorpus& corpus);

inline constexpr const char* kSyntheticAttribute = "holds";

/// Writes claims.<csv|jsonl>, truth.csv and sources.csv into `dir`.
void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir,
                  ClaimFormat format = ClaimFormat::csv);

}  // namespace veritas
