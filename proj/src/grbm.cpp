#include "veritas/grbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "veritas/parallel.hpp"
#include "veritas/random.hpp"

namespace veritas {
namespace {

void require_features(const ClaimRecord& claim, std::size_t dim) {
  if (claim.features.size() != dim) {
    throw DimensionError("claim on statement '" + claim.statement_id + "' from source '" +
                    claim.source_id.value_or("<anonymous>") + "' has " +
                    std::to_string(claim.features.size()) + " features, model expects " +
                    std::to_string(dim));
  }
}

double norm2(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

StatementRbmView synthesize_view(const GrbmModel& model, std::span<const ClaimRecord> claims) {
  StatementRbmView view;
  view.b = model.b0;
  view.a.reserve(claims.size());
  view.w.reserve(claims.size());
  view.claims.reserve(claims.size());
  const std::size_t dim = model.spec().input_dim;
  for (const auto& claim : claims) {
    require_features(claim, dim);
    const Theta theta = forward(model.net, claim.features);
    view.a.push_back(theta.a);
    view.w.push_back(theta.w);
    view.b += theta.b;
    view.claims.push_back(claim.value);
  }
  return view;
}

StatementRbmView synthesize_view(const GrbmModel& model, const StatementBundle& bundle) {
  return synthesize_view(model, bundle.claims());
}

TruthEstimate plausibility_generalized(const GrbmModel& model, const StatementBundle& bundle) {
  return TruthEstimate::from_plausibility(bundle.statement_id(),
                                          plausibility(synthesize_view(model, bundle)));
}

SourceReliability reliability_at(const GrbmModel& model, std::span<const double> x) {
  const Theta theta = forward(model.net, x);
  return {logistic(theta.w + theta.a), logistic(theta.a)};
}

GrbmModel train_grbm(const Dataset& dataset, const NetworkSpec& spec, const TrainingConfig& config,
                     const GrbmTrainOptions& options) {
  config.validate();
  spec.validate();
  if (spec.input_dim != dataset.feature_dim()) {
    throw DimensionError("network input_dim " + std::to_string(spec.input_dim) +
                         " does not match dataset feature_dim " +
                         std::to_string(dataset.feature_dim()));
  }
  for (const auto& bundle : dataset.bundles()) {
    for (const auto& claim : bundle.claims()) require_features(claim, spec.input_dim);
  }

  GrbmModel model{ReliabilityNetwork::glorot(spec, split_seed(config.rng_seed, streams::kInit)),
                  0.0, config};

  // Supervised pretraining toward the optimistic prior.
  const Theta prior = theta_from_rates(config.pretrain_tpr, config.pretrain_fpr);
  std::vector<PretrainSample> samples;
  samples.reserve(dataset.claim_count());
  for (const auto& bundle : dataset.bundles()) {
    for (const auto& claim : bundle.claims()) {
      const Theta target = options.pretrain_target ? options.pretrain_target(claim.features) : prior;
      samples.push_back({claim.features, target});
    }
  }
  if (!samples.empty() && config.pretrain_epochs > 0) {
    model.net = pretrain(std::move(model.net), samples,
                         {config.pretrain_epochs, config.pretrain_learning_rate,
                          split_seed(config.rng_seed, streams::kPretrain)});
  }

  Rng order_rng(split_seed(config.rng_seed, streams::kShuffle));
  Rng gibbs_rng(split_seed(config.rng_seed, streams::kGibbs));
  const CdOptions cd{config.cd_steps, config.cd_final_hidden_probability};
  const double lr = config.learning_rate;

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(model.net.parameter_count());
  auto psi = model.net.parameters();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const std::vector<double> psi_before(psi.begin(), psi.end());
    const double b0_before = model.b0;
    shuffle(order, order_rng);

    for (const std::size_t f : order) {
      const auto& bundle = dataset.bundle(f);
      const auto view = synthesize_view(model, bundle);
      const auto g = contrastive_divergence(view, cd, gibbs_rng);

      std::fill(grad.begin(), grad.end(), 0.0);
      const auto claims = bundle.claims();
      for (std::size_t i = 0; i < claims.size(); ++i) {
        accumulate_backward(model.net, claims[i].features, {g.d_a[i], g.d_w[i], g.d_b_src[i]},
                            grad);
      }
      const double norm = norm2(grad);
      const double scale = norm > config.max_grad_norm ? config.max_grad_norm / norm : 1.0;
      for (std::size_t j = 0; j < psi.size(); ++j) {
        psi[j] += lr * (scale * grad[j] - config.weight_decay * psi[j]);
      }
      model.b0 = std::clamp(model.b0 + lr * g.d_b0, -config.param_clamp, config.param_clamp);

      if (!std::isfinite(model.b0) || !model.net.all_finite()) {
        throw NumericError("GRBM training diverged at epoch " + std::to_string(epoch) +
                           ", statement '" + bundle.statement_id() + "'");
      }
    }

    double change = std::abs(model.b0 - b0_before);
    for (std::size_t j = 0; j < psi.size(); ++j) change += std::abs(psi[j] - psi_before[j]);
    change /= static_cast<double>(psi.size() + 1);
    if (options.on_epoch) options.on_epoch({epoch, change});
    if (change < config.convergence_tol) break;
  }
  return model;
}

std::vector<TruthEstimate> infer_grbm(const GrbmModel& model, const Dataset& dataset,
                                      unsigned threads) {
  std::vector<TruthEstimate> out(dataset.size());
  parallel_for(dataset.size(), threads, [&](std::size_t f) {
    out[f] = plausibility_generalized(model, dataset.bundle(f));
  });
  return out;
}

GrbmModel linear_model_from_baseline(const RbmParameters& params, const TrainingConfig& config) {
  NetworkSpec spec;
  spec.input_dim = params.source_count();
  spec.hidden_layers = {};
  ReliabilityNetwork net(spec);
  auto w = net.weights(0);
  const std::size_t cols = spec.input_dim;
  for (std::size_t s = 0; s < cols; ++s) {
    w[0 * cols + s] = params.a[s];
    w[1 * cols + s] = params.w[s];
    w[2 * cols + s] = params.b_src[s];
  }
  return {std::move(net), params.b0, config};
}

nlohmann::json config_to_json(const TrainingConfig& c) {
  return {
      {"learning_rate", c.learning_rate},
      {"epochs", c.epochs},
      {"cd_steps", c.cd_steps},
      {"rng_seed", c.rng_seed},
      {"convergence_tol", c.convergence_tol},
      {"pretrain_tpr", c.pretrain_tpr},
      {"pretrain_fpr", c.pretrain_fpr},
      {"pretrain_epochs", c.pretrain_epochs},
      {"pretrain_learning_rate", c.pretrain_learning_rate},
      {"weight_decay", c.weight_decay},
      {"max_grad_norm", c.max_grad_norm},
      {"param_clamp", c.param_clamp},
      {"cd_final_hidden_probability", c.cd_final_hidden_probability},
  };
}

TrainingConfig config_from_json(const nlohmann::json& doc) {
  TrainingConfig c;
  try {
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.epochs = doc.value("epochs", c.epochs);
    c.cd_steps = doc.value("cd_steps", c.cd_steps);
    c.rng_seed = doc.value("rng_seed", c.rng_seed);
    c.convergence_tol = doc.value("convergence_tol", c.convergence_tol);
    c.pretrain_tpr = doc.value("pretrain_tpr", c.pretrain_tpr);
    c.pretrain_fpr = doc.value("pretrain_fpr", c.pretrain_fpr);
    c.pretrain_epochs = doc.value("pretrain_epochs", c.pretrain_epochs);
    c.pretrain_learning_rate = doc.value("pretrain_learning_rate", c.pretrain_learning_rate);
    c.weight_decay = doc.value("weight_decay", c.weight_decay);
    c.max_grad_norm = doc.value("max_grad_norm", c.max_grad_norm);
    c.param_clamp = doc.value("param_clamp", c.param_clamp);
    c.cd_final_hidden_probability =
        doc.value("cd_final_hidden_probability", c.cd_final_hidden_probability);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed training config: ") + e.what());
  }
  return c;
}

}  // namespace veritas
