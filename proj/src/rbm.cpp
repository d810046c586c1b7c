#include "veritas/rbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "veritas/parallel.hpp"

namespace veritas {
namespace {

double softplus(double x) noexcept {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double hidden_input(const StatementRbmView& view, std::span<const Bit> v) {
  double z = view.b;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i]) z += view.w[i];
  }
  return z;
}

void check_exact_size(const StatementRbmView& view) {
  view.check();
  if (view.size() > kMaxExactUnits) {
    throw SizeError("exact RBM evaluation supports at most " + std::to_string(kMaxExactUnits) +
                    " claims, got " + std::to_string(view.size()));
  }
}

// Calls fn(v, log unnormalised marginal) for every visible state.
template <typename Fn>
void for_each_visible_state(const StatementRbmView& view, Fn&& fn) {
  const std::size_t n = view.size();
  std::vector<Bit> v(n, 0);
  const std::uint64_t states = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < states; ++mask) {
    double visible_energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = static_cast<Bit>((mask >> i) & 1U);
      if (v[i]) visible_energy += view.a[i];
    }
    fn(std::span<const Bit>(v), visible_energy + softplus(hidden_input(view, v)));
  }
}

double log_partition(const StatementRbmView& view) {
  double max_log = -INFINITY;
  for_each_visible_state(view, [&](std::span<const Bit>, double lw) { max_log = std::max(max_log, lw); });
  double sum = 0.0;
  for_each_visible_state(view, [&](std::span<const Bit>, double lw) { sum += std::exp(lw - max_log); });
  return max_log + std::log(sum);
}

}  // namespace

void StatementRbmView::check() const {
  if (a.size() != claims.size() || w.size() != claims.size()) {
    throw DimensionError("statement view: a, w and claims must have equal length (" +
                         std::to_string(a.size()) + ", " + std::to_string(w.size()) + ", " +
                         std::to_string(claims.size()) + ")");
  }
}

GradientEstimate GradientEstimate::zeros(std::size_t n) {
  GradientEstimate g;
  g.d_a.assign(n, 0.0);
  g.d_w.assign(n, 0.0);
  g.d_b_src.assign(n, 0.0);
  return g;
}

void GradientEstimate::set_hidden_bias(double db) {
  d_b = db;
  d_b0 = db;
  std::fill(d_b_src.begin(), d_b_src.end(), db);
}

double hidden_activation(const StatementRbmView& view) {
  return hidden_activation(view, view.claims);
}

double hidden_activation(const StatementRbmView& view, std::span<const Bit> v) {
  if (v.size() != view.w.size()) {
    throw DimensionError("hidden_activation: visible state length does not match view");
  }
  return logistic(hidden_input(view, v));
}

std::vector<double> visible_activation(const StatementRbmView& view, Bit h) {
  view.check();
  std::vector<double> p(view.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = logistic(view.a[i] + (h ? view.w[i] : 0.0));
  }
  return p;
}

double plausibility(const StatementRbmView& view) {
  return hidden_activation(view);
}

SourceReliability source_reliability(const RbmParameters& params, std::size_t source) {
  if (source >= params.source_count()) {
    throw DataError("source index " + std::to_string(source) + " out of range (" +
                    std::to_string(params.source_count()) + " sources)");
  }
  return {logistic(params.w[source] + params.a[source]), logistic(params.a[source])};
}

GradientEstimate contrastive_divergence(const StatementRbmView& view, const CdOptions& options,
                                        Rng& rng) {
  view.check();
  const std::size_t n = view.size();
  const std::span<const Bit> v0 = view.claims;
  const double h0 = rng.bernoulli(hidden_activation(view, v0)) ? 1.0 : 0.0;

  std::vector<Bit> v(n);
  double h = h0;
  for (int step = 0; step < std::max(options.steps, 1); ++step) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = logistic(view.a[i] + h * view.w[i]);
      v[i] = rng.bernoulli(p) ? Bit{1} : Bit{0};
    }
    const double ph = hidden_activation(view, v);
    const bool last = step + 1 >= options.steps;
    h = (last && options.final_hidden_probability) ? ph : (rng.bernoulli(ph) ? 1.0 : 0.0);
  }

  auto g = GradientEstimate::zeros(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.d_a[i] = static_cast<double>(v0[i]) - static_cast<double>(v[i]);
    g.d_w[i] = static_cast<double>(v0[i]) * h0 - static_cast<double>(v[i]) * h;
  }
  g.set_hidden_bias(h0 - h);
  return g;
}

double exact_log_likelihood(const StatementRbmView& view) {
  check_exact_size(view);
  double visible_energy = 0.0;
  for (std::size_t i = 0; i < view.size(); ++i) {
    if (view.claims[i]) visible_energy += view.a[i];
  }
  return visible_energy + softplus(hidden_input(view, view.claims)) - log_partition(view);
}

GradientEstimate exact_gradient(const StatementRbmView& view) {
  check_exact_size(view);
  const std::size_t n = view.size();
  const double log_z = log_partition(view);

  std::vector<double> mean_v(n, 0.0);
  std::vector<double> mean_hv(n, 0.0);
  double mean_h = 0.0;
  for_each_visible_state(view, [&](std::span<const Bit> v, double lw) {
    const double p = std::exp(lw - log_z);
    const double ph = logistic(hidden_input(view, v));
    mean_h += p * ph;
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i]) {
        mean_v[i] += p;
        mean_hv[i] += p * ph;
      }
    }
  });

  const double ph_data = hidden_activation(view);
  auto g = GradientEstimate::zeros(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double vi = view.claims[i];
    g.d_a[i] = vi - mean_v[i];
    g.d_w[i] = ph_data * vi - mean_hv[i];
  }
  g.set_hidden_bias(ph_data - mean_h);
  return g;
}

// ---------------------------------------------------------------------------
// Baseline trainer
// ---------------------------------------------------------------------------

RbmParameters initial_parameters(std::size_t source_count, const TrainingConfig& config) {
  const Theta prior = theta_from_rates(config.pretrain_tpr, config.pretrain_fpr);
  RbmParameters p;
  p.a.assign(source_count, prior.a);
  p.w.assign(source_count, prior.w);
  p.b_src.assign(source_count, 0.0);
  p.b0 = 0.0;
  return p;
}

namespace {

std::vector<std::size_t> claim_sources(const Dataset& dataset, const StatementBundle& bundle) {
  std::vector<std::size_t> idx;
  idx.reserve(bundle.size());
  for (const auto& c : bundle.claims()) {
    if (!c.source_id) {
      throw DataError("statement '" + bundle.statement_id() +
                      "' has an anonymous claim; the per-source model needs source ids");
    }
    auto s = dataset.source_index(*c.source_id);
    if (!s) throw DataError("source '" + *c.source_id + "' is not indexed");
    idx.push_back(*s);
  }
  return idx;
}

StatementRbmView view_from_indices(const RbmParameters& params, const StatementBundle& bundle,
                                   std::span<const std::size_t> sources) {
  StatementRbmView view;
  view.b = params.b0;
  view.a.reserve(sources.size());
  view.w.reserve(sources.size());
  view.claims.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::size_t s = sources[i];
    view.a.push_back(params.a.at(s));
    view.w.push_back(params.w.at(s));
    view.b += params.b_src.at(s);
    view.claims.push_back(bundle.claims()[i].value);
  }
  return view;
}

double mean_abs_difference(const RbmParameters& x, const RbmParameters& y) {
  double sum = std::abs(x.b0 - y.b0);
  for (std::size_t s = 0; s < x.source_count(); ++s) {
    sum += std::abs(x.a[s] - y.a[s]) + std::abs(x.w[s] - y.w[s]) +
           std::abs(x.b_src[s] - y.b_src[s]);
  }
  return sum / static_cast<double>(3 * x.source_count() + 1);
}

}  // namespace

StatementRbmView baseline_view(const RbmParameters& params, const Dataset& dataset,
                               const StatementBundle& bundle) {
  const auto sources = claim_sources(dataset, bundle);
  return view_from_indices(params, bundle, sources);
}

RbmParameters train_baseline(const Dataset& dataset, const TrainingConfig& config,
                             const EpochCallback& on_epoch) {
  config.validate();

  std::vector<std::vector<std::size_t>> sources;
  sources.reserve(dataset.size());
  for (const auto& bundle : dataset.bundles()) {
    sources.push_back(claim_sources(dataset, bundle));
  }

  RbmParameters params = initial_parameters(dataset.source_count(), config);
  Rng order_rng(split_seed(config.rng_seed, streams::kShuffle));
  Rng gibbs_rng(split_seed(config.rng_seed, streams::kGibbs));
  const CdOptions cd{config.cd_steps, config.cd_final_hidden_probability};
  const double lr = config.learning_rate;
  const double lim = config.param_clamp;
  auto step = [lim, lr](double& p, double g) { p = std::clamp(p + lr * g, -lim, lim); };

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const RbmParameters before = params;
    shuffle(order, order_rng);
    for (const std::size_t f : order) {
      const auto& bundle = dataset.bundle(f);
      const auto view = view_from_indices(params, bundle, sources[f]);
      const auto g = contrastive_divergence(view, cd, gibbs_rng);
      for (std::size_t i = 0; i < sources[f].size(); ++i) {
        const std::size_t s = sources[f][i];
        step(params.a[s], g.d_a[i]);
        step(params.w[s], g.d_w[i]);
        step(params.b_src[s], g.d_b_src[i]);
      }
      step(params.b0, g.d_b0);
      if (!params.all_finite()) {
        throw NumericError("baseline training diverged at epoch " + std::to_string(epoch) +
                           ", statement '" + bundle.statement_id() + "'");
      }
    }
    const double change = mean_abs_difference(params, before);
    if (on_epoch) on_epoch({epoch, change});
    if (change < config.convergence_tol) break;
  }
  return params;
}

std::vector<TruthEstimate> infer_baseline(const RbmParameters& params, const Dataset& dataset,
                                          unsigned threads) {
  std::vector<TruthEstimate> out(dataset.size());
  parallel_for(dataset.size(), threads, [&](std::size_t f) {
    const auto& bundle = dataset.bundle(f);
    out[f] = TruthEstimate::from_plausibility(bundle.statement_id(),
                                              plausibility(baseline_view(params, dataset, bundle)));
  });
  return out;
}

}  // namespace veritas
