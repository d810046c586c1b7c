#pragma once

// Accuracy against ground truth, the majority-vote baseline and long-tail
// stratified reporting.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "veritas/core.hpp"
#include "veritas/data_pipeline.hpp"

namespace veritas {

struct StratumResult {
  std::string family;  // "claims_per_item" or "source_claims"
  std::string bucket;
  std::size_t n = 0;
  std::size_t correct = 0;

  double accuracy() const noexcept {
    return n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
  }
};

struct EvalReport {
  std::string method;
  std::string config_digest;
  std::size_t n_labeled = 0;
  std::size_t n_correct = 0;
  double overall_accuracy = 0.0;
  std::vector<StratumResult> strata;

  const StratumResult* stratum(const std::string& family, const std::string& bucket) const;
};

/// Per-item descriptors used to bucket results.
struct ItemStrata {
  std::size_t claims = 0;
  bool has_single_claim_source = false;
};

/// Fraction of 1-claims; decision by the shared threshold rule. Throws
/// DataError on an empty claim list.
TruthEstimate majority_vote(std::string statement_id, std::span<const ClaimRecord> claims);
TruthEstimate majority_vote(const StatementBundle& bundle);
std::vector<TruthEstimate> majority_vote_all(const Dataset& dataset);

using GroupDecisions = std::map<GroupKey, std::string>;

/// Highest-plausibility value per (entity, attribute); ties go to the
/// lexicographically smallest value. Throws DataError if a group has no
/// estimate.
GroupDecisions per_attribute_decision(std::span<const TruthEstimate> estimates,
                                      const EncodingManifest& manifest);

/// "1", "2", "3-5" or "6+".
std::string claims_bucket(std::size_t claims);

/// Group-level strata: positive claims per group and whether any claimant
/// made only one claim in the whole corpus. Anonymous claimants count as
/// one-claim sources.
std::map<GroupKey, ItemStrata> group_strata(const Dataset& dataset, const EncodingManifest& manifest);

/// Statement-level strata (claims on the statement, one-claim claimants).
std::map<std::string, ItemStrata> statement_strata(const Dataset& dataset);

/// Accuracy of group decisions on the labelled groups. Throws DataError when
/// there are no labels or no labelled group has a decision.
EvalReport evaluate(const GroupDecisions& decisions, const GroundTruth& truth,
                    const std::map<GroupKey, ItemStrata>& strata, std::string method);

/// Accuracy of binary statement decisions against per-statement labels.
EvalReport evaluate_statements(std::span<const TruthEstimate> estimates,
                               const std::map<std::string, Bit>& labels,
                               const std::map<std::string, ItemStrata>& strata, std::string method);

/// 16-hex-digit FNV-1a digest of a canonical JSON dump.
std::string config_digest(const nlohmann::json& config);

nlohmann::json to_json(const EvalReport& report);
/// Aligned-column table: one row per report, overall plus every stratum.
std::string to_text_table(std::span<const EvalReport> reports);
std::string to_csv(std::span<const EvalReport> reports);

}  // namespace veritas
