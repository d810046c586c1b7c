#pragma once

// Versioned JSON model documents for both engines.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "veritas/core.hpp"
#include "veritas/data_pipeline.hpp"
#include "veritas/grbm.hpp"

namespace veritas {

struct BaselineModel {
  std::vector<std::string> sources;  // index -> source id
  RbmParameters params;
  TrainingConfig config;
};

/// Per-source parameters re-indexed to `dataset`'s source index. Sources the
/// model has never seen get the optimistic prior from the model's config.
RbmParameters align_parameters(const BaselineModel& model, const Dataset& dataset);

enum class ModelKind { baseline, grbm };

/// A trained model plus the encoding needed to featurise new claims.
struct ModelFile {
  ModelKind kind = ModelKind::grbm;
  std::optional<BaselineModel> baseline;
  std::optional<GrbmModel> grbm;
  NegativeClaimPolicy policy = NegativeClaimPolicy::implicit_negatives;
  FeatureRecipe recipe;  // fitted
};

nlohmann::json to_json(const GrbmModel& model);
GrbmModel grbm_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const ModelFile& model);
ModelFile model_from_json(const nlohmann::json& doc);

/// Writes the document with a trailing newline; output is byte-stable for
/// identical models.
void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace veritas
