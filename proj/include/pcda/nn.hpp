#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "pcda/error.hpp"
#include "pcda/matrix.hpp"
#include "pcda/rng.hpp"

namespace pcda {

/// Fully connected layer y = x W + b with gradient and momentum buffers.
///
/// `forward` caches its input for `backward`; `apply` is the same map
/// without touching any state.
struct AffineLayer {
  Matrix weight;  // in_dim x out_dim
  std::vector<double> bias;
  Matrix grad_weight;
  std::vector<double> grad_bias;
  Matrix velocity_weight;
  std::vector<double> velocity_bias;
  std::optional<Matrix> cached_input;

  AffineLayer() = default;
  AffineLayer(std::size_t in_dim, std::size_t out_dim)
      : weight(in_dim, out_dim),
        bias(out_dim, 0.0),
        grad_weight(in_dim, out_dim),
        grad_bias(out_dim, 0.0),
        velocity_weight(in_dim, out_dim),
        velocity_bias(out_dim, 0.0) {}

  std::size_t in_dim() const { return weight.rows(); }
  std::size_t out_dim() const { return weight.cols(); }

  Matrix apply(const Matrix& input) const {
    if (input.cols() != in_dim()) {
      throw ShapeError("affine: input " + shape_string(input) + " vs weight " +
                       shape_string(weight));
    }
    Matrix out = matmul(input, weight);
    for (std::size_t i = 0; i < out.rows(); ++i) {
      auto r = out.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias[j];
    }
    return out;
  }

  Matrix forward(const Matrix& input) {
    Matrix out = apply(input);
    cached_input = input;
    return out;
  }

  /// Accumulates dL/dW = xᵀ g and dL/db = colsum(g); returns g Wᵀ.
  Matrix backward(const Matrix& grad_out) {
    if (!cached_input) throw StateError("affine: backward called before forward");
    const Matrix& x = *cached_input;
    if (grad_out.rows() != x.rows() || grad_out.cols() != out_dim()) {
      throw ShapeError("affine: grad_out " + shape_string(grad_out) + " vs output " +
                       std::to_string(x.rows()) + "x" + std::to_string(out_dim()));
    }
    add_inplace(grad_weight, matmul_tn(x, grad_out));
    for (std::size_t i = 0; i < grad_out.rows(); ++i) {
      auto g = grad_out.row(i);
      for (std::size_t j = 0; j < g.size(); ++j) grad_bias[j] += g[j];
    }
    return matmul_nt(grad_out, weight);
  }

  void zero_grads() {
    grad_weight.fill(0.0);
    std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
  }

  /// Uniform in [-a, a], a = sqrt(6 / (fan_in + fan_out)); bias zero.
  void init_uniform(Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(in_dim() + out_dim()));
    for (double& w : weight.data()) w = rng.uniform(-a, a);
    std::fill(bias.begin(), bias.end(), 0.0);
  }
};

struct ReluLayer {
  std::optional<Matrix> cached_input;

  Matrix apply(const Matrix& input) const {
    Matrix out = input;
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    return out;
  }

  Matrix forward(const Matrix& input) {
    cached_input = input;
    return apply(input);
  }

  /// The kink at x = 0 routes zero gradient.
  Matrix backward(const Matrix& grad_out) {
    if (!cached_input) throw StateError("relu: backward called before forward");
    const Matrix& x = *cached_input;
    if (grad_out.rows() != x.rows() || grad_out.cols() != x.cols()) {
      throw ShapeError("relu: grad_out " + shape_string(grad_out) + " vs input " +
                       shape_string(x));
    }
    Matrix g = grad_out;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(x.data()[i] > 0.0)) g.data()[i] = 0.0;
    }
    return g;
  }
};

/// Gradient reversal: identity forward, -lambda * g backward.
struct GradientReversal {
  double lambda = 1.0;

  const Matrix& forward(const Matrix& input) const { return input; }

  Matrix backward(const Matrix& grad_out) const {
    Matrix g = grad_out;
    for (double& v : g.data()) v *= -lambda;
    return g;
  }
};

using Layer = std::variant<AffineLayer, ReluLayer>;

/// Sequential stack of affine and ReLU layers.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {}

  /// Affine layers between consecutive widths with a ReLU after every
  /// affine layer except the last.
  static Mlp dense(const std::vector<std::size_t>& widths) {
    if (widths.size() < 2) throw ConfigError("Mlp::dense needs at least two widths");
    std::vector<Layer> layers;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
      if (widths[i] == 0 || widths[i + 1] == 0) throw ConfigError("Mlp::dense: zero width");
      layers.emplace_back(AffineLayer(widths[i], widths[i + 1]));
      if (i + 2 < widths.size()) layers.emplace_back(ReluLayer{});
    }
    return Mlp(std::move(layers));
  }

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  std::size_t in_dim() const { return first_affine().in_dim(); }
  std::size_t out_dim() const { return last_affine().out_dim(); }

  Matrix apply(const Matrix& input) const {
    Matrix x = input;
    for (const auto& layer : layers_) {
      x = std::visit([&](const auto& l) { return l.apply(x); }, layer);
    }
    return x;
  }

  Matrix forward(const Matrix& input) {
    Matrix x = input;
    for (auto& layer : layers_) {
      x = std::visit([&](auto& l) { return l.forward(x); }, layer);
    }
    return x;
  }

  Matrix backward(const Matrix& grad_out) {
    Matrix g = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
      g = std::visit([&](auto& l) { return l.backward(g); }, *it);
    }
    return g;
  }

  void zero_grads() {
    for_each_affine([](AffineLayer& l) { l.zero_grads(); });
  }

  void init_uniform(Rng& rng) {
    for_each_affine([&](AffineLayer& l) { l.init_uniform(rng); });
  }

  template <typename F>
  void for_each_affine(F&& f) {
    for (auto& layer : layers_) {
      if (auto* a = std::get_if<AffineLayer>(&layer)) f(*a);
    }
  }

  template <typename F>
  void for_each_affine(F&& f) const {
    for (const auto& layer : layers_) {
      if (const auto* a = std::get_if<AffineLayer>(&layer)) f(*a);
    }
  }

 private:
  const AffineLayer& first_affine() const {
    for (const auto& layer : layers_) {
      if (const auto* a = std::get_if<AffineLayer>(&layer)) return *a;
    }
    throw StateError("Mlp has no affine layer");
  }
  const AffineLayer& last_affine() const {
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
      if (const auto* a = std::get_if<AffineLayer>(&*it)) return *a;
    }
    throw StateError("Mlp has no affine layer");
  }

  std::vector<Layer> layers_;
};

/// Layer widths of the four sub-networks.
struct Architecture {
  std::size_t input_dim = 2;
  std::vector<std::size_t> feature_widths{64, 32};
  std::vector<std::size_t> discriminator_hidden{32};
  std::size_t num_classes = 2;

  std::size_t feature_dim() const { return feature_widths.back(); }
};

/// Feature extractor, the two classifiers and the domain discriminator.
struct NetworkParams {
  Mlp feature_extractor;
  Mlp source_classifier;
  Mlp target_classifier;
  Mlp discriminator;

  /// Throws ShapeError if the sub-network widths do not chain.
  void validate() const {
    const std::size_t f = feature_extractor.out_dim();
    if (source_classifier.in_dim() != f || target_classifier.in_dim() != f ||
        discriminator.in_dim() != f) {
      throw ShapeError("network: classifier/discriminator input widths must equal feature width");
    }
    if (source_classifier.out_dim() != target_classifier.out_dim()) {
      throw ShapeError("network: source and target classifiers differ in class count");
    }
    if (discriminator.out_dim() != 1) throw ShapeError("network: discriminator must output 1 unit");
  }

  std::size_t num_classes() const { return source_classifier.out_dim(); }

  void zero_grads() {
    feature_extractor.zero_grads();
    source_classifier.zero_grads();
    target_classifier.zero_grads();
    discriminator.zero_grads();
  }
};

/// Builds and initializes a network; affine layers are initialized in the
/// order feature extractor, source classifier, target classifier,
/// discriminator from one seeded stream.
inline NetworkParams make_network(const Architecture& arch, std::uint64_t seed) {
  if (arch.num_classes < 2) throw ConfigError("network: need at least 2 classes");
  if (arch.feature_widths.empty()) throw ConfigError("network: empty feature widths");
  std::vector<std::size_t> fw{arch.input_dim};
  fw.insert(fw.end(), arch.feature_widths.begin(), arch.feature_widths.end());
  std::vector<std::size_t> dw{arch.feature_dim()};
  dw.insert(dw.end(), arch.discriminator_hidden.begin(), arch.discriminator_hidden.end());
  dw.push_back(1);

  NetworkParams net{Mlp::dense(fw), Mlp::dense({arch.feature_dim(), arch.num_classes}),
                    Mlp::dense({arch.feature_dim(), arch.num_classes}), Mlp::dense(dw)};
  Rng rng(seed);
  net.feature_extractor.init_uniform(rng);
  net.source_classifier.init_uniform(rng);
  net.target_classifier.init_uniform(rng);
  net.discriminator.init_uniform(rng);
  return net;
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Row-wise softmax with max subtraction.
inline Matrix softmax_rows(const Matrix& logits) {
  Matrix out = logits;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    double mx = r[0];
    for (double v : r) mx = std::max(mx, v);
    double s = 0.0;
    for (double& v : r) {
      v = std::exp(v - mx);
      s += v;
    }
    for (double& v : r) v /= s;
  }
  return out;
}

/// Index of the largest entry; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < v.size(); ++j) {
    if (v[j] > v[best]) best = j;
  }
  return best;
}

struct NetworkOutputs {
  Matrix source_logits;
  Matrix target_logits;
  /// Discriminator probabilities, source rows first then target rows.
  std::vector<double> domain_prob;
};

/// Stateless evaluation of every head on a source and a target batch.
inline NetworkOutputs forward_full(const NetworkParams& net, const Matrix& source,
                                   const Matrix& target) {
  const std::size_t in = net.feature_extractor.in_dim();
  if ((source.rows() > 0 && source.cols() != in) || (target.rows() > 0 && target.cols() != in)) {
    throw ShapeError("forward_full: batch width does not match network input width " +
                     std::to_string(in));
  }
  const Matrix fs = source.rows() > 0 ? net.feature_extractor.apply(source) : Matrix(0, net.feature_extractor.out_dim());
  const Matrix ft = target.rows() > 0 ? net.feature_extractor.apply(target) : Matrix(0, net.feature_extractor.out_dim());
  NetworkOutputs out;
  out.source_logits = fs.rows() > 0 ? net.source_classifier.apply(fs) : Matrix(0, net.num_classes());
  out.target_logits = ft.rows() > 0 ? net.target_classifier.apply(ft) : Matrix(0, net.num_classes());
  const Matrix all = vstack(fs, ft);
  if (all.rows() > 0) {
    const GradientReversal grl;
    const Matrix z = net.discriminator.apply(grl.forward(all));
    out.domain_prob.reserve(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) out.domain_prob.push_back(sigmoid(z(i, 0)));
  }
  return out;
}

}  // namespace pcda
