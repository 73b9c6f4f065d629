#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "pcda/error.hpp"
#include "pcda/matrix.hpp"
#include "pcda/nn.hpp"

namespace pcda {

struct LossConfig {
  double lambda = 1.0;
  double beta = 2.0;
  double margin = 2.0;
  double ecl_weight = 1.0;

  void validate() const {
    if (!std::isfinite(lambda) || lambda < 0.0) throw ConfigError("lambda must be finite and >= 0");
    if (!std::isfinite(beta) || beta < 1.0) throw ConfigError("beta must be finite and >= 1");
    if (!std::isfinite(margin) || margin <= 0.0) throw ConfigError("margin must be finite and > 0");
    if (!std::isfinite(ecl_weight) || ecl_weight < 0.0) {
      throw ConfigError("ecl_weight must be finite and >= 0");
    }
  }
};

inline constexpr double kProbClamp = 1e-12;

/// Marks a target sample without a pseudo-label.
inline constexpr int kNoLabel = -1;

/// -log softmax(logits)[label]. Writes d/dlogits into `grad` when it is
/// non-empty.
inline double cross_entropy(std::span<const double> logits, std::size_t label,
                            std::span<double> grad = {}) {
  if (label >= logits.size()) throw ConfigError("cross_entropy: label out of range");
  for (double v : logits) {
    if (!std::isfinite(v)) throw NumericError("cross_entropy: non-finite logit");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - mx);
  const double log_z = mx + std::log(sum);
  if (!grad.empty()) {
    for (std::size_t j = 0; j < logits.size(); ++j) {
      grad[j] = std::exp(logits[j] - log_z) - (j == label ? 1.0 : 0.0);
    }
  }
  return log_z - logits[label];
}

/// -(d log p + (1 - d) log(1 - p)) with p clamped to [1e-12, 1 - 1e-12].
inline double binary_cross_entropy(double prob, int domain_label) {
  const double p = std::clamp(prob, kProbClamp, 1.0 - kProbClamp);
  return domain_label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

/// Scalar terms of the adversarial objectives. `total` is the objective
/// value; the gradients below are the ones each parameter group descends.
struct ObjectiveResult {
  double total = 0.0;
  double cls_source = 0.0;
  double cls_target = 0.0;
  /// Source mean plus (weighted) target mean of the domain loss, before lambda.
  double domain = 0.0;
  /// Set when a target batch was supplied but none of it was pseudo-labelled.
  bool missing_pseudo_labels = false;

  Matrix grad_source_logits;
  Matrix grad_target_logits;
  /// d(domain)/d(discriminator logit), one row per source then target
  /// sample. The discriminator descends this; the feature extractor receives
  /// it through the reversal layer scaled by -lambda.
  Matrix grad_domain_logits;
};

namespace detail {

inline void add_domain_terms(ObjectiveResult& r, const Matrix& domain_logits,
                             std::size_t n_source, std::span<const double> target_weights) {
  const std::size_t n_target = target_weights.size();
  if (domain_logits.rows() != n_source + n_target || domain_logits.cols() != 1) {
    throw ShapeError("domain logits " + shape_string(domain_logits) + " vs " +
                     std::to_string(n_source + n_target) + " samples");
  }
  r.grad_domain_logits = Matrix(n_source + n_target, 1);
  double src = 0.0;
  for (std::size_t i = 0; i < n_source; ++i) {
    const double p = sigmoid(domain_logits(i, 0));
    src += binary_cross_entropy(p, 1);
    r.grad_domain_logits(i, 0) = (p - 1.0) / static_cast<double>(n_source);
  }
  double tgt = 0.0;
  for (std::size_t k = 0; k < n_target; ++k) {
    const std::size_t i = n_source + k;
    const double p = sigmoid(domain_logits(i, 0));
    tgt += target_weights[k] * binary_cross_entropy(p, 0);
    r.grad_domain_logits(i, 0) = target_weights[k] * p / static_cast<double>(n_target);
  }
  r.domain = (n_source > 0 ? src / static_cast<double>(n_source) : 0.0) +
             (n_target > 0 ? tgt / static_cast<double>(n_target) : 0.0);
}

inline void add_source_terms(ObjectiveResult& r, const Matrix& source_logits,
                             std::span<const int> source_labels) {
  const std::size_t n = source_logits.rows();
  if (n == 0) throw ConfigError("objective: empty source batch");
  if (source_labels.size() != n) throw ShapeError("objective: source label count mismatch");
  r.grad_source_logits = Matrix(n, source_logits.cols());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (source_labels[i] < 0) throw ConfigError("objective: unlabeled source sample");
    auto g = r.grad_source_logits.row(i);
    sum += cross_entropy(source_logits.row(i), static_cast<std::size_t>(source_labels[i]), g);
    for (double& v : g) v /= static_cast<double>(n);
  }
  r.cls_source = sum / static_cast<double>(n);
}

}  // namespace detail

/// Warm-up objective: mean source cross-entropy + lambda * (mean source
/// domain loss + mean target domain loss). Source samples carry domain
/// label 1 and target samples 0; `domain_logits` holds the source rows first.
inline ObjectiveResult j1_loss(const Matrix& source_logits, std::span<const int> source_labels,
                               const Matrix& domain_logits, std::size_t n_target,
                               const LossConfig& cfg) {
  ObjectiveResult r;
  detail::add_source_terms(r, source_logits, source_labels);
  const std::vector<double> ones(n_target, 1.0);
  detail::add_domain_terms(r, domain_logits, source_logits.rows(), ones);
  r.total = r.cls_source + cfg.lambda * r.domain;
  return r;
}

/// Staged objective: j1 plus mean target cross-entropy on pseudo-labels, and
/// the target domain loss of newly added samples weighted by beta.
/// Samples with label kNoLabel are excluded from the classification term.
inline ObjectiveResult j2_loss(const Matrix& source_logits, std::span<const int> source_labels,
                               const Matrix& target_logits, std::span<const int> pseudo_labels,
                               const std::vector<bool>& newly_added,
                               const Matrix& domain_logits, const LossConfig& cfg) {
  const std::size_t nt = target_logits.rows();
  if (pseudo_labels.size() != nt || newly_added.size() != nt) {
    throw ShapeError("j2_loss: target label/flag count mismatch");
  }
  ObjectiveResult r;
  detail::add_source_terms(r, source_logits, source_labels);

  r.grad_target_logits = Matrix(nt, target_logits.cols());
  std::size_t labelled = 0;
  for (int y : pseudo_labels) labelled += (y != kNoLabel);
  if (labelled == 0) {
    r.missing_pseudo_labels = nt > 0;
  } else {
    double sum = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
      if (pseudo_labels[i] == kNoLabel) continue;
      if (pseudo_labels[i] < 0) throw ConfigError("j2_loss: negative pseudo-label");
      auto g = r.grad_target_logits.row(i);
      sum += cross_entropy(target_logits.row(i), static_cast<std::size_t>(pseudo_labels[i]), g);
      for (double& v : g) v /= static_cast<double>(labelled);
    }
    r.cls_target = sum / static_cast<double>(labelled);
  }

  std::vector<double> weights(nt);
  for (std::size_t i = 0; i < nt; ++i) weights[i] = newly_added[i] ? cfg.beta : 1.0;
  detail::add_domain_terms(r, domain_logits, source_logits.rows(), weights);
  r.total = r.cls_source + r.cls_target + cfg.lambda * r.domain;
  return r;
}

struct EclResult {
  double value = 0.0;
  /// d(value)/dh, same shape as h.
  Matrix grad;
  std::size_t pairs = 0;
};

/// Euclidean clustering loss over all unordered pairs of labelled rows of h:
/// same-label pairs add |h_i - h_j|^2, different-label pairs add
/// max(0, m - |h_i - h_j|)^2. Returns ecl_weight times the pair mean.
/// The gradient at the margin and at coincident cross-label pairs is 0.
inline EclResult ecl_loss(const Matrix& h, std::span<const int> labels, const LossConfig& cfg) {
  if (labels.size() != h.rows()) throw ShapeError("ecl_loss: label count mismatch");
  EclResult r;
  r.grad = Matrix(h.rows(), h.cols());
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < h.rows(); ++i) {
    if (labels[i] != kNoLabel) idx.push_back(i);
  }
  if (idx.size() < 2) return r;

  const std::size_t dim = h.cols();
  std::vector<double> diff(dim);
  double sum = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      const std::size_t i = idx[a];
      const std::size_t j = idx[b];
      double sq = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        diff[k] = h(i, k) - h(j, k);
        sq += diff[k] * diff[k];
      }
      double coeff = 0.0;  // d(pair loss)/d(h_i) = coeff * diff
      if (labels[i] == labels[j]) {
        sum += sq;
        coeff = 2.0;
      } else {
        const double dist = std::sqrt(sq);
        if (dist < cfg.margin) {
          const double gap = cfg.margin - dist;
          sum += gap * gap;
          if (dist > 0.0) coeff = -2.0 * gap / dist;
        }
      }
      if (coeff != 0.0) {
        for (std::size_t k = 0; k < dim; ++k) {
          r.grad(i, k) += coeff * diff[k];
          r.grad(j, k) -= coeff * diff[k];
        }
      }
      ++r.pairs;
    }
  }
  const double scale = cfg.ecl_weight / static_cast<double>(r.pairs);
  r.value = sum * scale;
  for (double& g : r.grad.data()) g *= scale;
  return r;
}

}  // namespace pcda
