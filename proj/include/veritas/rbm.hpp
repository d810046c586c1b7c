#pragma once

// Single-hidden-unit RBM over the claims of one statement, and the baseline
// per-source trainer built on it.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "veritas/core.hpp"
#include "veritas/random.hpp"

namespace veritas {

/// The RBM seen by one statement: one visible unit per claim (in claim order)
/// and a single hidden unit whose bias is already summed over the claimants.
struct StatementRbmView {
  std::vector<double> a;
  std::vector<double> w;
  double b = 0.0;
  std::vector<Bit> claims;

  std::size_t size() const noexcept { return claims.size(); }
  /// Throws DimensionError if a, w and claims differ in length.
  void check() const;
};

/// Log-likelihood gradient (exact or contrastive-divergence estimate) for one
/// statement. The hidden-bias components are all equal: d_b_src[i] == d_b0 == d_b.
struct GradientEstimate {
  std::vector<double> d_a;
  std::vector<double> d_w;
  double d_b = 0.0;
  std::vector<double> d_b_src;
  double d_b0 = 0.0;

  static GradientEstimate zeros(std::size_t n);
  /// Sets d_b and propagates it to d_b0 and every d_b_src entry.
  void set_hidden_bias(double db);
};

/// P(h = 1 | v) for the view's own claim vector.
double hidden_activation(const StatementRbmView& view);
/// P(h = 1 | v) for an arbitrary visible state of matching length.
double hidden_activation(const StatementRbmView& view, std::span<const Bit> v);

/// P(v_i = 1 | h) for every visible unit.
std::vector<double> visible_activation(const StatementRbmView& view, Bit h);

/// Plausibility p_f of the statement given its observed claims.
double plausibility(const StatementRbmView& view);

/// (tpr, fpr) = (σ(w_s + a_s), σ(a_s)). Throws DataError for an unknown index.
SourceReliability source_reliability(const RbmParameters& params, std::size_t source);

struct CdOptions {
  int steps = 1;
  bool final_hidden_probability = false;
};

/// k-step contrastive-divergence estimate of the log-likelihood gradient.
/// Deterministic for a given rng state.
GradientEstimate contrastive_divergence(const StatementRbmView& view, const CdOptions& options,
                                        Rng& rng);

inline constexpr std::size_t kMaxExactUnits = 20;

/// log P(v) with the partition function enumerated over all 2^n visible
/// states (hidden unit marginalised in closed form). Throws SizeError above
/// kMaxExactUnits claims.
double exact_log_likelihood(const StatementRbmView& view);

/// Exact gradient of exact_log_likelihood with respect to (a, w, b).
GradientEstimate exact_gradient(const StatementRbmView& view);

// ---------------------------------------------------------------------------
// Baseline per-source model
// ---------------------------------------------------------------------------

/// Parameters with every source set to the optimistic prior encoded by
/// (config.pretrain_tpr, config.pretrain_fpr), b_s = 0 and b0 = 0.
RbmParameters initial_parameters(std::size_t source_count, const TrainingConfig& config);

/// Builds the statement view from parameters indexed like the dataset's
/// source index. Throws DataError on anonymous claims.
StatementRbmView baseline_view(const RbmParameters& params, const Dataset& dataset,
                               const StatementBundle& bundle);

struct EpochStats {
  int epoch = 0;
  double mean_abs_change = 0.0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Trains the per-source model with contrastive divergence and constant-rate
/// SGD. Throws DataError on anonymous claims and NumericError on divergence.
RbmParameters train_baseline(const Dataset& dataset, const TrainingConfig& config,
                             const EpochCallback& on_epoch = {});

/// Plausibility of every statement under trained per-source parameters.
std::vector<TruthEstimate> infer_baseline(const RbmParameters& params, const Dataset& dataset,
                                          unsigned threads = 1);

}  // namespace veritas
