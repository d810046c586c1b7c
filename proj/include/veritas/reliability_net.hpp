#pragma once

// Feed-forward reliability function g(x; ψ) mapping a claim's feature vector
// to the RBM triple (a, w, b).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "veritas/core.hpp"

namespace veritas {

enum class Activation { tanh, relu };

std::string_view to_string(Activation act) noexcept;
/// Throws DataError for anything other than "tanh" or "relu".
Activation parse_activation(std::string_view name);

struct NetworkSpec {
  static constexpr std::size_t output_dim = 3;

  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_layers{16};
  Activation activation = Activation::tanh;

  void validate() const;
  bool operator==(const NetworkSpec&) const = default;
};

/// Shape of one dense layer inside the flat parameter vector. Weights are
/// stored row-major (rows = outputs, cols = inputs) followed by the bias.
struct LayerShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;

  std::size_t weight_count() const noexcept { return rows * cols; }
  std::size_t bias_offset() const noexcept { return offset + weight_count(); }
  std::size_t end() const noexcept { return bias_offset() + rows; }

  bool operator==(const LayerShape&) const = default;
};

/// Network architecture together with its parameters ψ, kept as one flat
/// vector so that updates, norms and finite-difference probes are uniform.
class ReliabilityNetwork {
 public:
  /// All-zero parameters.
  explicit ReliabilityNetwork(NetworkSpec spec);

  /// Uniform ±sqrt(6 / (fan_in + fan_out)) weights, zero biases.
  static ReliabilityNetwork glorot(NetworkSpec spec, std::uint64_t seed);

  const NetworkSpec& spec() const noexcept { return spec_; }
  std::span<const LayerShape> layers() const noexcept { return layers_; }

  std::span<double> parameters() noexcept { return psi_; }
  std::span<const double> parameters() const noexcept { return psi_; }
  std::size_t parameter_count() const noexcept { return psi_.size(); }

  /// Mutable view of layer l's weight matrix / bias (for constructing nets).
  std::span<double> weights(std::size_t layer);
  std::span<double> bias(std::size_t layer);

  bool all_finite() const noexcept;
  bool operator==(const ReliabilityNetwork&) const = default;

 private:
  NetworkSpec spec_;
  std::vector<LayerShape> layers_;
  std::vector<double> psi_;
};

/// θ = g(x; ψ). Throws DimensionError if x has the wrong length.
Theta forward(const ReliabilityNetwork& net, std::span<const double> x);

/// Adds Δa·∂g_a/∂ψ + Δw·∂g_w/∂ψ + Δb·∂g_b/∂ψ at x into `grad`, which must have
/// parameter_count() entries. Summing over claims is left to the caller.
void accumulate_backward(const ReliabilityNetwork& net, std::span<const double> x,
                         const Theta& upstream, std::span<double> grad);

/// Fresh gradient vector for a single input.
std::vector<double> backward(const ReliabilityNetwork& net, std::span<const double> x,
                             const Theta& upstream);

struct PretrainSample {
  std::vector<double> x;
  Theta target;
};

struct PretrainOptions {
  int epochs = 60;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
};

/// Mean over samples of the squared output error, averaged over the three
/// outputs.
double mean_squared_error(const ReliabilityNetwork& net, std::span<const PretrainSample> samples);

/// Supervised SGD on the squared error between g(x) and the target triple.
/// Samples are visited in a seeded shuffled order each epoch. Throws
/// DataError for an empty sample list.
ReliabilityNetwork pretrain(ReliabilityNetwork net, std::span<const PretrainSample> samples,
                            const PretrainOptions& options);

// Versioned JSON document: spec plus row-major layer arrays. Doubles are
// written in shortest round-trip form so save/load is bit-exact.
nlohmann::json to_json(const ReliabilityNetwork& net);
ReliabilityNetwork network_from_json(const nlohmann::json& doc);

}  // namespace veritas
