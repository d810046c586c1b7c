#pragma once

// Claim-corpus ingestion, one-hot encoding of multinomial claims into binary
// statements, per-claim feature computation and ground-truth loading.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "veritas/core.hpp"

namespace veritas {

// ---------------------------------------------------------------------------
// Raw claims
// ---------------------------------------------------------------------------

struct RawClaimRow {
  std::string entity_id;
  std::string attribute_id;
  std::optional<std::string> source_id;
  std::string claimed_value;
  std::optional<std::int64_t> timestamp;
  std::map<std::string, std::string> extra_columns;
  std::size_t line = 0;  // record position in the input file (1-based)

  bool operator==(const RawClaimRow&) const = default;
};

enum class ClaimFormat { csv, jsonl };

/// jsonl for *.jsonl / *.ndjson / *.json, csv otherwise.
ClaimFormat format_from_path(const std::filesystem::path& path);

struct IngestIssue {
  std::size_t line = 0;
  std::string message;
};

struct IngestResult {
  std::vector<RawClaimRow> rows;
  std::vector<IngestIssue> issues;  // malformed rows (only non-empty when lenient)
};

/// Reads a claims file. CSV needs a header containing at least entity,
/// attribute and value; source and timestamp are optional columns and every
/// other column becomes an extra column. Malformed rows abort the read with a
/// DataError listing them unless `lenient`, in which case they are skipped
/// and reported.
IngestResult ingest(const std::filesystem::path& path, ClaimFormat format, bool lenient = false);

void write_claims_csv(const std::filesystem::path& path, std::span<const RawClaimRow> rows);
void write_claims_jsonl(const std::filesystem::path& path, std::span<const RawClaimRow> rows);

// ---------------------------------------------------------------------------
// One-hot encoding
// ---------------------------------------------------------------------------

enum class NegativeClaimPolicy { implicit_negatives, positives_only };

std::string_view to_string(NegativeClaimPolicy policy) noexcept;
NegativeClaimPolicy parse_policy(std::string_view name);

struct GroupKey {
  std::string entity;
  std::string attribute;
  auto operator<=>(const GroupKey&) const = default;
};

struct StatementKey {
  std::string entity;
  std::string attribute;
  std::string value;
  auto operator<=>(const StatementKey&) const = default;
  GroupKey group() const { return {entity, attribute}; }
};

// ---------------------------------------------------------------------------
// Feature recipes
// ---------------------------------------------------------------------------

enum class FeatureKind {
  source_claim_count,     // log(1 + raw claims by the source)
  statement_claim_count,  // log(1 + claims on the statement)
  temporal_rank,          // rank of the claim within its statement by timestamp
  binary,                 // 0/1 pass-through column
  categorical,            // one-hot expansion of a column
  numeric,                // numeric pass-through column
};

std::string_view to_string(FeatureKind kind) noexcept;

struct FeatureDef {
  FeatureKind kind = FeatureKind::numeric;
  std::string column;  // for column-backed kinds
  bool standardize = true;
  // Fitted state, frozen once the recipe has been fitted.
  double mean = 0.0;
  double scale = 1.0;
  std::vector<std::string> categories;

  bool operator==(const FeatureDef&) const = default;
};

struct FeatureRecipe {
  std::string name;
  std::vector<FeatureDef> features;
  // "auto": append every extra column, typed from its values, at fit time.
  bool include_all_columns = false;
  bool fitted = false;

  /// "none", "basic" (count and rank statistics) or "auto" (basic plus every
  /// extra column). Throws DataError otherwise.
  static FeatureRecipe named(std::string_view name);

  std::vector<std::string> feature_names() const;
  std::size_t dim() const;

  bool operator==(const FeatureRecipe&) const = default;
};

nlohmann::json to_json(const FeatureRecipe& recipe);
FeatureRecipe recipe_from_json(const nlohmann::json& doc);

/// Bijection between (entity, attribute, value) and statement ids, plus the
/// policy and fitted feature recipe used to build the dataset.
struct EncodingManifest {
  static constexpr int kVersion = 1;

  std::vector<StatementKey> statements;  // statement id == position
  NegativeClaimPolicy policy = NegativeClaimPolicy::implicit_negatives;
  FeatureRecipe recipe;

  static std::string statement_id(std::size_t index) { return std::to_string(index); }
  std::optional<std::size_t> find(const StatementKey& key) const;
  /// Throws DataError for ids not produced by this manifest.
  const StatementKey& key_of(const std::string& statement_id) const;
  /// Statement indices of each (entity, attribute) group, in value order.
  std::map<GroupKey, std::vector<std::size_t>> groups() const;

  bool operator==(const EncodingManifest&) const = default;
};

nlohmann::json to_json(const EncodingManifest& manifest);
EncodingManifest manifest_from_json(const nlohmann::json& doc);

/// Output of one_hot_encode. `rows` are the deduplicated input rows and
/// provenance[f][i] is the row behind claim i of bundle f.
struct Encoding {
  Dataset dataset;
  EncodingManifest manifest;
  std::vector<RawClaimRow> rows;
  std::vector<std::vector<std::size_t>> provenance;
};

/// One statement per observed (entity, attribute, value); a source claiming A
/// for (entity, attribute) claims 1 on A and, under implicit negatives, 0 on
/// every other observed value of the group. Identical duplicates collapse;
/// a source giving different values for one group keeps the latest by
/// timestamp, and rows without an ordering raise DataError.
Encoding one_hot_encode(std::span<const RawClaimRow> rows, NegativeClaimPolicy policy);

struct PositiveClaim {
  StatementKey statement;
  std::optional<std::string> source;
  auto operator<=>(const PositiveClaim&) const = default;
};

/// Positive claims recovered from an encoded dataset, sorted.
std::vector<PositiveClaim> decode(const Dataset& dataset, const EncodingManifest& manifest);

struct FeatureResult {
  Dataset dataset;
  FeatureRecipe recipe;  // fitted
};

/// Attaches a feature vector to every claim. An unfitted recipe is fitted on
/// this corpus first (standardisation statistics, categories); a fitted one
/// is applied as-is.
FeatureResult compute_features(const Encoding& encoding, const FeatureRecipe& recipe);

// ---------------------------------------------------------------------------
// Ground truth and dataset serialization
// ---------------------------------------------------------------------------

/// Truth labels. Kept apart from Dataset so trainers can never receive them.
struct GroundTruth {
  std::map<GroupKey, std::string> values;     // true value per group
  std::map<std::string, Bit> statement_labels;  // per statement id

  bool empty() const noexcept { return values.empty(); }
};

/// Reads `entity,attribute,value` rows. Rows for a group without claims are
/// logged and skipped. A true value that no source claimed still labels its
/// group, so the group counts as a miss for every method.
GroundTruth load_ground_truth(const std::filesystem::path& path, const EncodingManifest& manifest);

nlohmann::json to_json(const Dataset& dataset);
Dataset dataset_from_json(const nlohmann::json& doc);

}  // namespace veritas
