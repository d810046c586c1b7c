#pragma once

// Generalized RBM: per-claim RBM parameters synthesised by the reliability
// network, trained by contrastive divergence backpropagated into ψ.

#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "veritas/core.hpp"
#include "veritas/rbm.hpp"
#include "veritas/reliability_net.hpp"

namespace veritas {

/// Training defaults for the generalized model. The ψ step sums over every
/// claim of a statement, so it needs a smaller learning rate than the
/// per-source baseline.
inline TrainingConfig grbm_default_config() {
  TrainingConfig c;
  c.learning_rate = 0.002;
  return c;
}

struct GrbmModel {
  ReliabilityNetwork net;
  double b0 = 0.0;
  TrainingConfig config;

  const NetworkSpec& spec() const noexcept { return net.spec(); }
  bool operator==(const GrbmModel&) const = default;
};

/// Evaluates g on every claim and assembles the statement's RBM view with
/// b = b0 + Σ_i g_b(x_i). Source ids are never consulted.
StatementRbmView synthesize_view(const GrbmModel& model, std::span<const ClaimRecord> claims);
StatementRbmView synthesize_view(const GrbmModel& model, const StatementBundle& bundle);

TruthEstimate plausibility_generalized(const GrbmModel& model, const StatementBundle& bundle);

/// (tpr, fpr) implied by g at feature vector x.
SourceReliability reliability_at(const GrbmModel& model, std::span<const double> x);

/// Target triple for supervised pretraining of g at a given feature vector.
/// The default yields theta_from_rates(pretrain_tpr, pretrain_fpr) everywhere.
using PretrainTarget = std::function<Theta(std::span<const double> x)>;

struct GrbmTrainOptions {
  PretrainTarget pretrain_target;  // empty: constant optimistic prior
  EpochCallback on_epoch;
};

/// Pretrains g on every claim's features, then runs CD + backprop SGD with
/// one ψ update per statement. Throws DataError on missing features and
/// NumericError (with epoch and statement) on divergence.
GrbmModel train_grbm(const Dataset& dataset, const NetworkSpec& spec, const TrainingConfig& config,
                     const GrbmTrainOptions& options = {});

std::vector<TruthEstimate> infer_grbm(const GrbmModel& model, const Dataset& dataset,
                                      unsigned threads = 1);

/// Builds the linear, hidden-layer-free network that reproduces per-source
/// parameters exactly when each claim's features are the one-hot encoding of
/// its source index. b0 carries over unchanged.
GrbmModel linear_model_from_baseline(const RbmParameters& params, const TrainingConfig& config = {});

nlohmann::json config_to_json(const TrainingConfig& config);
TrainingConfig config_from_json(const nlohmann::json& doc);

}  // namespace veritas
