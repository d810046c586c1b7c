#include "veritas/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace veritas {

double logistic(double x) noexcept {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("logit: argument must lie in (0, 1), got " + std::to_string(p));
  }
  return std::log(p) - std::log1p(-p);
}

Theta theta_from_rates(double tpr, double fpr) {
  const double a = logit(fpr);
  return {a, logit(tpr) - a, 0.0};
}

StatementBundle::StatementBundle(std::string statement_id, std::vector<ClaimRecord> claims)
    : statement_id_(std::move(statement_id)), claims_(std::move(claims)) {
  if (claims_.empty()) {
    throw DataError("statement '" + statement_id_ + "' has no claims");
  }
  std::set<std::string> seen;
  for (const auto& c : claims_) {
    if (c.value > 1) {
      throw DataError("statement '" + statement_id_ + "': claim value must be 0 or 1");
    }
    if (c.statement_id != statement_id_) {
      throw DataError("claim for '" + c.statement_id + "' placed in bundle '" +
                      statement_id_ + "'");
    }
    if (c.source_id && !seen.insert(*c.source_id).second) {
      throw DataError("source '" + *c.source_id + "' claims statement '" + statement_id_ +
                      "' more than once");
    }
  }
}

Dataset::Dataset(std::vector<StatementBundle> bundles, std::vector<std::string> feature_names)
    : bundles_(std::move(bundles)), feature_names_(std::move(feature_names)) {
  const std::size_t d = feature_names_.size();
  for (const auto& bundle : bundles_) {
    for (const auto& claim : bundle.claims()) {
      if (claim.features.size() != d) {
        throw DimensionError("statement '" + bundle.statement_id() + "': claim has " +
                             std::to_string(claim.features.size()) +
                             " features, dataset expects " + std::to_string(d));
      }
      if (claim.source_id && !source_index_.contains(*claim.source_id)) {
        source_index_.emplace(*claim.source_id, source_names_.size());
        source_names_.push_back(*claim.source_id);
      }
    }
  }
}

std::optional<std::size_t> Dataset::source_index(const std::string& id) const {
  if (auto it = source_index_.find(id); it != source_index_.end()) {
    return it->second;
  }
  return std::nullopt;
}

bool Dataset::has_anonymous_claims() const noexcept {
  return std::any_of(bundles_.begin(), bundles_.end(), [](const StatementBundle& b) {
    const auto claims = b.claims();
    return std::any_of(claims.begin(), claims.end(),
                       [](const ClaimRecord& c) { return !c.source_id.has_value(); });
  });
}

std::size_t Dataset::claim_count() const noexcept {
  std::size_t n = 0;
  for (const auto& b : bundles_) n += b.size();
  return n;
}

bool RbmParameters::all_finite() const noexcept {
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return finite(a) && finite(w) && finite(b_src) && std::isfinite(b0);
}

void TrainingConfig::validate() const {
  auto fail = [](const std::string& what) { throw DataError("invalid training config: " + what); };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be > 0");
  if (epochs < 0) fail("epochs must be >= 0");
  if (cd_steps < 1) fail("cd_steps must be >= 1");
  if (!(convergence_tol > 0.0)) fail("convergence_tol must be > 0");
  if (!(pretrain_tpr > 0.5 && pretrain_tpr < 1.0)) fail("pretrain_tpr must lie in (0.5, 1)");
  if (!(pretrain_fpr > 0.0 && pretrain_fpr < 0.5)) fail("pretrain_fpr must lie in (0, 0.5)");
  if (!(pretrain_tpr > pretrain_fpr)) fail("pretrain_tpr must exceed pretrain_fpr");
  if (pretrain_epochs < 0) fail("pretrain_epochs must be >= 0");
  if (!(pretrain_learning_rate > 0.0)) fail("pretrain_learning_rate must be > 0");
  if (weight_decay < 0.0) fail("weight_decay must be >= 0");
  if (!(max_grad_norm > 0.0)) fail("max_grad_norm must be > 0");
  if (!(param_clamp > 0.0)) fail("param_clamp must be > 0");
}

}  // namespace veritas
