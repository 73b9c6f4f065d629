#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "pcda/error.hpp"
#include "pcda/matrix.hpp"
#include "pcda/rng.hpp"

namespace pcda {

enum class Preset { blobs, moons };

inline std::string to_string(Preset p) { return p == Preset::blobs ? "blobs" : "moons"; }

inline Preset parse_preset(const std::string& s) {
  if (s == "blobs") return Preset::blobs;
  if (s == "moons") return Preset::moons;
  throw ConfigError("unknown preset '" + s + "' (expected blobs or moons)");
}

/// Parameters of a synthetic two-domain task. The target domain is a
/// fresh draw from the source distribution, rotated in the (f0, f1) plane
/// and then translated.
struct DatasetSpec {
  Preset preset = Preset::blobs;
  std::size_t classes = 4;
  std::size_t n_source = 800;
  std::size_t n_target = 800;
  std::size_t dim = 2;
  double rotation_deg = 0.0;
  /// Empty means no translation; otherwise one entry per feature.
  std::vector<double> translation;
  double noise_sigma = 0.6;
  std::uint64_t seed = 1;

  void validate() const {
    if (preset == Preset::moons && (classes != 2 || dim != 2)) {
      throw ConfigError("moons preset requires classes = 2 and dim = 2");
    }
    if (preset == Preset::blobs && classes < 2) throw ConfigError("blobs preset requires classes >= 2");
    if (dim < 2) throw ConfigError("dim must be >= 2");
    for (std::size_t n : {n_source, n_target}) {
      if (n < classes) throw ConfigError("sample count " + std::to_string(n) + " < classes");
      if (n % classes != 0) {
        throw ConfigError("sample count " + std::to_string(n) + " not divisible by classes");
      }
    }
    if (!translation.empty() && translation.size() != dim) {
      throw ConfigError("translation must have dim entries");
    }
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
      throw ConfigError("noise_sigma must be finite and >= 0");
    }
  }
};

struct LabeledSet {
  Matrix features;
  std::vector<int> labels;
};

/// Labelled source domain and target domain whose labels are kept for
/// evaluation only.
struct DatasetPair {
  LabeledSet source;
  LabeledSet target;
  std::size_t classes = 0;
};

inline constexpr double kBlobRadius = 4.0;

namespace detail {

inline void rotate_about(Matrix& x, double degrees, double cx, double cy) {
  const double t = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(t);
  const double s = std::sin(t);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double a = x(i, 0) - cx;
    const double b = x(i, 1) - cy;
    x(i, 0) = cx + c * a - s * b;
    x(i, 1) = cy + s * a + c * b;
  }
}

inline void translate(Matrix& x, const std::vector<double>& t) {
  if (t.empty()) return;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t k = 0; k < x.cols(); ++k) x(i, k) += t[k];
  }
}

/// Class-balanced label list in a shuffled order.
inline std::vector<int> balanced_labels(std::size_t n, std::size_t classes, Rng& rng) {
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i / (n / classes));
  rng.shuffle(labels);
  return labels;
}

inline LabeledSet draw_blobs(const DatasetSpec& spec, std::size_t n, Rng& rng) {
  LabeledSet set{Matrix(n, spec.dim), balanced_labels(n, spec.classes, rng)};
  for (std::size_t i = 0; i < n; ++i) {
    const double angle = 2.0 * std::numbers::pi * set.labels[i] / static_cast<double>(spec.classes);
    for (std::size_t k = 0; k < spec.dim; ++k) set.features(i, k) = spec.noise_sigma * rng.normal();
    set.features(i, 0) += kBlobRadius * std::cos(angle);
    set.features(i, 1) += kBlobRadius * std::sin(angle);
  }
  return set;
}

inline LabeledSet draw_moons(const DatasetSpec& spec, std::size_t n, Rng& rng) {
  LabeledSet set{Matrix(n, 2), balanced_labels(n, 2, rng)};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = rng.uniform(0.0, std::numbers::pi);
    if (set.labels[i] == 0) {
      set.features(i, 0) = std::cos(t);
      set.features(i, 1) = std::sin(t);
    } else {
      set.features(i, 0) = 1.0 - std::cos(t);
      set.features(i, 1) = 0.5 - std::sin(t);
    }
    set.features(i, 0) += spec.noise_sigma * rng.normal();
    set.features(i, 1) += spec.noise_sigma * rng.normal();
  }
  return set;
}

}  // namespace detail

/// C isotropic Gaussian blobs with means evenly spaced on a circle of
/// radius 4 in the (f0, f1) plane; the target is rotated about the origin.
inline DatasetPair gen_blobs(const DatasetSpec& spec) {
  spec.validate();
  if (spec.preset != Preset::blobs) throw ConfigError("gen_blobs: spec preset is not blobs");
  Rng rng(spec.seed);
  DatasetPair out;
  out.classes = spec.classes;
  out.source = detail::draw_blobs(spec, spec.n_source, rng);
  out.target = detail::draw_blobs(spec, spec.n_target, rng);
  detail::rotate_about(out.target.features, spec.rotation_deg, 0.0, 0.0);
  detail::translate(out.target.features, spec.translation);
  return out;
}

/// Two interleaved unit half-circles; the target is rotated about its own
/// centroid.
inline DatasetPair gen_moons(const DatasetSpec& spec) {
  spec.validate();
  if (spec.preset != Preset::moons) throw ConfigError("gen_moons: spec preset is not moons");
  Rng rng(spec.seed);
  DatasetPair out;
  out.classes = 2;
  out.source = detail::draw_moons(spec, spec.n_source, rng);
  out.target = detail::draw_moons(spec, spec.n_target, rng);
  double cx = 0.0;
  double cy = 0.0;
  for (std::size_t i = 0; i < out.target.features.rows(); ++i) {
    cx += out.target.features(i, 0);
    cy += out.target.features(i, 1);
  }
  cx /= static_cast<double>(spec.n_target);
  cy /= static_cast<double>(spec.n_target);
  detail::rotate_about(out.target.features, spec.rotation_deg, cx, cy);
  detail::translate(out.target.features, spec.translation);
  return out;
}

inline DatasetPair generate(const DatasetSpec& spec) {
  return spec.preset == Preset::blobs ? gen_blobs(spec) : gen_moons(spec);
}

}  // namespace pcda
