#include "veritas/reliability_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "veritas/random.hpp"

namespace veritas {
namespace {

constexpr int kFormatVersion = 1;
constexpr const char* kFormatName = "veritas-reliability-net";

double activate(Activation act, double z) noexcept {
  return act == Activation::tanh ? std::tanh(z) : std::max(z, 0.0);
}

// Derivative expressed through the pre-activation z.
double activate_grad(Activation act, double z) noexcept {
  if (act == Activation::tanh) {
    const double t = std::tanh(z);
    return 1.0 - t * t;
  }
  return z > 0.0 ? 1.0 : 0.0;
}

// Pre-activations of every layer for one input; the input itself is kept as
// the activation of "layer -1".
struct ForwardTrace {
  std::vector<std::vector<double>> inputs;  // input to layer l
  std::vector<std::vector<double>> pre;     // z of layer l
};

ForwardTrace trace_forward(const ReliabilityNetwork& net, std::span<const double> x) {
  if (x.size() != net.spec().input_dim) {
    throw DimensionError("reliability network expects " + std::to_string(net.spec().input_dim) +
                         " features, got " + std::to_string(x.size()));
  }
  const auto psi = net.parameters();
  const auto layers = net.layers();
  ForwardTrace t;
  t.inputs.reserve(layers.size());
  t.pre.reserve(layers.size());
  std::vector<double> in(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerShape& shape = layers[l];
    std::vector<double> z(shape.rows);
    for (std::size_t r = 0; r < shape.rows; ++r) {
      const double* row = psi.data() + shape.offset + r * shape.cols;
      z[r] = std::inner_product(in.begin(), in.end(), row, psi[shape.bias_offset() + r]);
    }
    t.inputs.push_back(std::move(in));
    const bool hidden = l + 1 < layers.size();
    in.resize(shape.rows);
    for (std::size_t r = 0; r < shape.rows; ++r) {
      in[r] = hidden ? activate(net.spec().activation, z[r]) : z[r];
    }
    t.pre.push_back(std::move(z));
  }
  return t;
}

}  // namespace

std::string_view to_string(Activation act) noexcept {
  return act == Activation::tanh ? "tanh" : "relu";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  throw DataError("unknown activation '" + std::string(name) + "' (expected tanh or relu)");
}

void NetworkSpec::validate() const {
  if (input_dim == 0) throw DataError("network input_dim must be >= 1");
  for (std::size_t width : hidden_layers) {
    if (width == 0) throw DataError("hidden layer widths must be >= 1");
  }
}

ReliabilityNetwork::ReliabilityNetwork(NetworkSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::size_t fan_in = spec_.input_dim;
  std::size_t offset = 0;
  auto add = [&](std::size_t rows) {
    layers_.push_back({rows, fan_in, offset});
    offset = layers_.back().end();
    fan_in = rows;
  };
  for (std::size_t width : spec_.hidden_layers) add(width);
  add(NetworkSpec::output_dim);
  psi_.assign(offset, 0.0);
}

ReliabilityNetwork ReliabilityNetwork::glorot(NetworkSpec spec, std::uint64_t seed) {
  ReliabilityNetwork net(std::move(spec));
  Rng rng(seed);
  for (const auto& shape : net.layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(shape.rows + shape.cols));
    for (std::size_t k = 0; k < shape.weight_count(); ++k) {
      net.psi_[shape.offset + k] = (2.0 * rng.uniform() - 1.0) * limit;
    }
  }
  return net;
}

std::span<double> ReliabilityNetwork::weights(std::size_t layer) {
  const auto& s = layers_.at(layer);
  return std::span<double>(psi_).subspan(s.offset, s.weight_count());
}

std::span<double> ReliabilityNetwork::bias(std::size_t layer) {
  const auto& s = layers_.at(layer);
  return std::span<double>(psi_).subspan(s.bias_offset(), s.rows);
}

bool ReliabilityNetwork::all_finite() const noexcept {
  return std::all_of(psi_.begin(), psi_.end(), [](double v) { return std::isfinite(v); });
}

Theta forward(const ReliabilityNetwork& net, std::span<const double> x) {
  const auto t = trace_forward(net, x);
  const auto& out = t.pre.back();
  return {out[0], out[1], out[2]};
}

void accumulate_backward(const ReliabilityNetwork& net, std::span<const double> x,
                         const Theta& upstream, std::span<double> grad) {
  if (grad.size() != net.parameter_count()) {
    throw DimensionError("gradient buffer has " + std::to_string(grad.size()) +
                         " entries, network has " + std::to_string(net.parameter_count()));
  }
  if (upstream == Theta{}) {
    if (x.size() != net.spec().input_dim) trace_forward(net, x);  // reports the mismatch
    return;
  }
  const auto t = trace_forward(net, x);
  const auto psi = net.parameters();
  const auto layers = net.layers();

  std::vector<double> delta{upstream.a, upstream.w, upstream.b};
  for (std::size_t l = layers.size(); l-- > 0;) {
    const LayerShape& shape = layers[l];
    const auto& in = t.inputs[l];
    for (std::size_t r = 0; r < shape.rows; ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      double* row = grad.data() + shape.offset + r * shape.cols;
      for (std::size_t c = 0; c < shape.cols; ++c) row[c] += d * in[c];
      grad[shape.bias_offset() + r] += d;
    }
    if (l == 0) break;
    std::vector<double> prev(shape.cols, 0.0);
    for (std::size_t r = 0; r < shape.rows; ++r) {
      const double* row = psi.data() + shape.offset + r * shape.cols;
      for (std::size_t c = 0; c < shape.cols; ++c) prev[c] += row[c] * delta[r];
    }
    const auto& z_prev = t.pre[l - 1];
    for (std::size_t c = 0; c < shape.cols; ++c) {
      prev[c] *= activate_grad(net.spec().activation, z_prev[c]);
    }
    delta = std::move(prev);
  }
}

std::vector<double> backward(const ReliabilityNetwork& net, std::span<const double> x,
                             const Theta& upstream) {
  std::vector<double> grad(net.parameter_count(), 0.0);
  accumulate_backward(net, x, upstream, grad);
  return grad;
}

double mean_squared_error(const ReliabilityNetwork& net, std::span<const PretrainSample> samples) {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : samples) {
    const Theta y = forward(net, s.x);
    const double da = y.a - s.target.a, dw = y.w - s.target.w, db = y.b - s.target.b;
    sum += (da * da + dw * dw + db * db) / 3.0;
  }
  return sum / static_cast<double>(samples.size());
}

ReliabilityNetwork pretrain(ReliabilityNetwork net, std::span<const PretrainSample> samples,
                            const PretrainOptions& options) {
  if (samples.empty()) throw DataError("pretraining needs at least one sample");
  Rng rng(options.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(net.parameter_count());
  auto psi = net.parameters();
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    shuffle(order, rng);
    for (const std::size_t k : order) {
      const auto& s = samples[k];
      const Theta y = forward(net, s.x);
      // Ascent on -1/2 |g(x) - target|^2.
      const Theta err{s.target.a - y.a, s.target.w - y.w, s.target.b - y.b};
      std::fill(grad.begin(), grad.end(), 0.0);
      accumulate_backward(net, s.x, err, grad);
      for (std::size_t j = 0; j < psi.size(); ++j) psi[j] += options.learning_rate * grad[j];
    }
    if (!net.all_finite()) {
      throw NumericError("pretraining diverged at epoch " + std::to_string(epoch));
    }
  }
  return net;
}

nlohmann::json to_json(const ReliabilityNetwork& net) {
  nlohmann::json layers = nlohmann::json::array();
  const auto psi = net.parameters();
  for (const auto& shape : net.layers()) {
    layers.push_back({
        {"rows", shape.rows},
        {"cols", shape.cols},
        {"weights", std::vector<double>(psi.begin() + shape.offset,
                                        psi.begin() + shape.bias_offset())},
        {"bias", std::vector<double>(psi.begin() + shape.bias_offset(),
                                     psi.begin() + shape.end())},
    });
  }
  return {
      {"format", kFormatName},
      {"version", kFormatVersion},
      {"input_dim", net.spec().input_dim},
      {"hidden_layers", net.spec().hidden_layers},
      {"activation", std::string(to_string(net.spec().activation))},
      {"output_dim", NetworkSpec::output_dim},
      {"layers", layers},
  };
}

ReliabilityNetwork network_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kFormatName) {
      throw DataError("not a reliability network document");
    }
    if (doc.at("version").get<int>() != kFormatVersion) {
      throw DataError("unsupported reliability network version " + doc.at("version").dump());
    }
    NetworkSpec spec;
    spec.input_dim = doc.at("input_dim").get<std::size_t>();
    spec.hidden_layers = doc.at("hidden_layers").get<std::vector<std::size_t>>();
    spec.activation = parse_activation(doc.at("activation").get<std::string>());
    ReliabilityNetwork net(spec);
    const auto& layers = doc.at("layers");
    if (layers.size() != net.layers().size()) {
      throw DataError("layer count does not match hidden_layers");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto weights = layers[l].at("weights").get<std::vector<double>>();
      const auto bias = layers[l].at("bias").get<std::vector<double>>();
      auto w_dst = net.weights(l);
      auto b_dst = net.bias(l);
      if (weights.size() != w_dst.size() || bias.size() != b_dst.size()) {
        throw DataError("layer " + std::to_string(l) + " has the wrong number of parameters");
      }
      std::copy(weights.begin(), weights.end(), w_dst.begin());
      std::copy(bias.begin(), bias.end(), b_dst.begin());
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed reliability network document: ") + e.what());
  }
}

}  // namespace veritas
