#pragma once

// Domain types shared by the truth-discovery engines.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace veritas {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. logit(1)).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed, inconsistent or unsupported input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Vector length does not match the expected dimensionality.
class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

/// Problem too large for an enumeration-based routine.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Training produced a NaN or infinite parameter.
class NumericError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Scalar helpers
// ---------------------------------------------------------------------------

/// 1 / (1 + e^-x), evaluated without overflow for large |x|.
double logistic(double x) noexcept;

/// log(p) - log(1 - p). Throws DomainError unless 0 < p < 1.
double logit(double p);

/// Binary claim / unit state.
using Bit = std::uint8_t;

/// p >= 0.5 resolves to 1; exact ties go to the optimistic side.
inline constexpr double kDecisionThreshold = 0.5;

inline Bit decide(double plausibility) noexcept {
  return plausibility >= kDecisionThreshold ? Bit{1} : Bit{0};
}

// ---------------------------------------------------------------------------
// Claims and statements
// ---------------------------------------------------------------------------

struct ClaimRecord {
  std::string statement_id;
  std::optional<std::string> source_id;  // absent for anonymous claims
  Bit value = 0;
  std::vector<double> features;

  bool operator==(const ClaimRecord&) const = default;
};

/// One statement together with every claim made about it. Construction
/// enforces n_f >= 1 and at most one claim per identified source.
class StatementBundle {
 public:
  StatementBundle(std::string statement_id, std::vector<ClaimRecord> claims);

  const std::string& statement_id() const noexcept { return statement_id_; }
  std::span<const ClaimRecord> claims() const noexcept { return claims_; }
  std::size_t size() const noexcept { return claims_.size(); }

  bool operator==(const StatementBundle&) const = default;

 private:
  std::string statement_id_;
  std::vector<ClaimRecord> claims_;
};

/// Statements plus the source index and feature layout. Truth labels are
/// deliberately not part of this type: trainers only ever see a Dataset.
class Dataset {
 public:
  Dataset() = default;

  /// Validates feature dimensions and builds the source index in order of
  /// first appearance.
  Dataset(std::vector<StatementBundle> bundles,
          std::vector<std::string> feature_names);

  std::span<const StatementBundle> bundles() const noexcept { return bundles_; }
  std::size_t size() const noexcept { return bundles_.size(); }
  const StatementBundle& bundle(std::size_t i) const { return bundles_.at(i); }

  std::size_t source_count() const noexcept { return source_names_.size(); }
  std::span<const std::string> source_names() const noexcept { return source_names_; }
  std::optional<std::size_t> source_index(const std::string& id) const;

  std::size_t feature_dim() const noexcept { return feature_names_.size(); }
  std::span<const std::string> feature_names() const noexcept { return feature_names_; }

  bool has_anonymous_claims() const noexcept;
  std::size_t claim_count() const noexcept;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<StatementBundle> bundles_;
  std::vector<std::string> source_names_;
  std::map<std::string, std::size_t> source_index_;
  std::vector<std::string> feature_names_;
};

// ---------------------------------------------------------------------------
// Parameters and configuration
// ---------------------------------------------------------------------------

/// Per-source RBM parameters of the baseline model plus the global hidden bias.
struct RbmParameters {
  std::vector<double> a;      // visible bias per source
  std::vector<double> w;      // weight per source
  std::vector<double> b_src;  // hidden-bias contribution per source
  double b0 = 0.0;

  std::size_t source_count() const noexcept { return a.size(); }
  bool all_finite() const noexcept;
  bool operator==(const RbmParameters&) const = default;
};

struct TrainingConfig {
  double learning_rate = 0.05;
  int epochs = 200;
  int cd_steps = 1;
  std::uint64_t rng_seed = 20190;
  double convergence_tol = 1e-5;
  double pretrain_tpr = 0.7;
  double pretrain_fpr = 0.3;
  int pretrain_epochs = 60;
  double pretrain_learning_rate = 0.01;
  double weight_decay = 0.0;
  double max_grad_norm = 10.0;
  double param_clamp = 15.0;
  // Use P(h=1|v^(k)) instead of a sample for the final hidden state.
  bool cd_final_hidden_probability = false;

  /// Throws DataError describing the first violated constraint.
  void validate() const;
  bool operator==(const TrainingConfig&) const = default;
};

struct TruthEstimate {
  std::string statement_id;
  double plausibility = 0.5;
  Bit decision = 1;

  static TruthEstimate from_plausibility(std::string id, double p) {
    return {std::move(id), p, decide(p)};
  }
};

struct SourceReliability {
  double tpr = 0.5;
  double fpr = 0.5;
};

/// RBM parameter triple θ = (a, w, b) for one claim.
struct Theta {
  double a = 0.0;
  double w = 0.0;
  double b = 0.0;

  bool operator==(const Theta&) const = default;
};

/// Initial triple encoding the requested (tpr, fpr): a = logit(fpr),
/// w = logit(tpr) - a, b = 0.
Theta theta_from_rates(double tpr, double fpr);

}  // namespace veritas
