#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pcda/error.hpp"
#include "pcda/matrix.hpp"

// Density-based ranking of pseudo-labelled samples into curriculum tiers.
//
// Per pseudo-label category: squared pairwise distances E, a cutoff e_c
// taken at rank k% of the sorted upper triangle, local density
// rho_i = #{j != i : E_ij < e_c}, the densest sample as the category centre,
// and an optimal 1-D k-means over distances to that centre. Clusters ordered
// by ascending mean distance become tiers 0 (easy), 1 (moderate), 2 (hard).

namespace pcda {

/// Pseudo-labelled samples. Ids are unique; labels are in [0, C).
struct FeatureMatrix {
  std::vector<std::int64_t> ids;
  std::vector<int> labels;
  Matrix features;

  std::size_t size() const { return ids.size(); }

  void validate() const {
    if (labels.size() != ids.size() || features.rows() != ids.size()) {
      throw ShapeError("FeatureMatrix: ids/labels/features row counts differ");
    }
    std::set<std::int64_t> seen;
    for (auto id : ids) {
      if (!seen.insert(id).second) throw ConfigError("FeatureMatrix: duplicate id " + std::to_string(id));
    }
    for (int y : labels) {
      if (y < 0) throw ConfigError("FeatureMatrix: negative label");
    }
  }
};

/// Squared Euclidean distance between every pair of rows.
inline Matrix pairwise_sq_dist(const Matrix& features) {
  const std::size_t n = features.rows();
  Matrix e(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < features.cols(); ++k) {
        const double d = features(i, k) - features(j, k);
        s += d * d;
      }
      e(i, j) = s;
      e(j, i) = s;
    }
  }
  return e;
}

/// Entry at 1-based rank ceil(k/100 * n(n-1)/2) of the ascending upper
/// triangle of E. Empty when the category has fewer than two samples.
inline std::optional<double> cutoff_ec(const Matrix& e, double k_percent) {
  if (e.rows() != e.cols()) throw ShapeError("cutoff_ec: E must be square");
  if (!(k_percent > 0.0 && k_percent < 100.0)) throw ConfigError("cutoff_ec: k must be in (0, 100)");
  const std::size_t n = e.rows();
  if (n < 2) return std::nullopt;
  std::vector<double> upper;
  upper.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) upper.push_back(e(i, j));
  }
  const auto m = static_cast<double>(upper.size());
  auto rank = static_cast<std::size_t>(std::ceil(k_percent / 100.0 * m));
  rank = std::clamp<std::size_t>(rank, 1, upper.size());
  std::nth_element(upper.begin(), upper.begin() + static_cast<std::ptrdiff_t>(rank - 1), upper.end());
  return upper[rank - 1];
}

/// rho_i = #{ j != i : E_ij < e_c }.
inline std::vector<std::size_t> local_density(const Matrix& e, double ec) {
  const std::size_t n = e.rows();
  std::vector<std::size_t> rho(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && e(i, j) < ec) ++rho[i];
    }
  }
  return rho;
}

struct KMeans1D {
  /// Cluster per input value; clusters are numbered by ascending mean.
  std::vector<int> labels;
  std::vector<double> centers;
  double sse = 0.0;
};

/// Globally optimal 1-D k-means (minimum within-cluster SSE) by dynamic
/// programming over contiguous runs of the sorted values. Equal values are
/// never split between clusters, so fewer than `clusters` groups are
/// returned when there are fewer distinct values.
inline KMeans1D kmeans_1d(std::span<const double> values, std::size_t clusters) {
  if (clusters == 0) throw ConfigError("kmeans_1d: need at least one cluster");
  const std::size_t n = values.size();
  KMeans1D out;
  if (n == 0) return out;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = values[order[i]];

  // Admissible cut positions: a cluster may end at sorted index i only if
  // x[i] < x[i + 1].
  std::vector<std::size_t> ends;  // exclusive end indices of possible runs
  for (std::size_t i = 1; i < n; ++i) {
    if (x[i - 1] < x[i]) ends.push_back(i);
  }
  ends.push_back(n);
  const std::size_t groups = ends.size();  // distinct values
  const std::size_t p = std::min(clusters, groups);

  // sse[a][g]: SSE about its own mean of groups a..g (Welford accumulation).
  std::vector<std::vector<double>> sse(groups, std::vector<double>(groups, 0.0));
  for (std::size_t a = 0; a < groups; ++a) {
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t count = 0;
    std::size_t i = a == 0 ? 0 : ends[a - 1];
    for (std::size_t g = a; g < groups; ++g) {
      for (; i < ends[g]; ++i) {
        ++count;
        const double delta = x[i] - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x[i] - mean);
      }
      sse[a][g] = m2;
    }
  }

  // cost[c][g]: best SSE covering groups [0, g] with c + 1 clusters.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(p, std::vector<double>(groups, inf));
  std::vector<std::vector<std::size_t>> split(p, std::vector<std::size_t>(groups, 0));
  for (std::size_t g = 0; g < groups; ++g) cost[0][g] = sse[0][g];
  for (std::size_t c = 1; c < p; ++c) {
    for (std::size_t g = c; g < groups; ++g) {
      // last cluster spans groups (s, g]
      for (std::size_t s = c - 1; s < g; ++s) {
        const double v = cost[c - 1][s] + sse[s + 1][g];
        if (v < cost[c][g]) {
          cost[c][g] = v;
          split[c][g] = s;
        }
      }
    }
  }

  std::vector<std::size_t> bounds(p + 1, 0);  // sorted-index boundaries
  bounds[p] = n;
  std::size_t g = groups - 1;
  for (std::size_t c = p - 1; c >= 1; --c) {
    const std::size_t s = split[c][g];
    bounds[c] = ends[s];
    g = s;
  }

  out.labels.assign(n, 0);
  out.centers.assign(p, 0.0);
  for (std::size_t c = 0; c < p; ++c) {
    double mean = 0.0;
    for (std::size_t i = bounds[c]; i < bounds[c + 1]; ++i) {
      out.labels[order[i]] = static_cast<int>(c);
      mean += x[i];
    }
    out.centers[c] = mean / static_cast<double>(bounds[c + 1] - bounds[c]);
    for (std::size_t i = bounds[c]; i < bounds[c + 1]; ++i) {
      out.sse += (x[i] - out.centers[c]) * (x[i] - out.centers[c]);
    }
  }
  return out;
}

struct DensityProfile {
  int category = 0;
  double pair_cutoff = 0.0;
  std::vector<std::size_t> densities;
  std::size_t center_index = 0;
  double k_percent = 40.0;
};

struct CategorySplit {
  DensityProfile profile;
  /// Tier per sample, in input order.
  std::vector<int> tiers;
  /// Euclidean (not squared) distance of each sample to the centre.
  std::vector<double> center_distance;
};

/// Tiers one category. `ids` only break ties in the density maximum (lowest
/// id wins). Categories with fewer samples than `clusters` go entirely to
/// tier 0.
inline CategorySplit split_category(const Matrix& features, std::span<const std::int64_t> ids,
                                    std::size_t clusters, double k_percent, int category = 0) {
  const std::size_t n = features.rows();
  if (ids.size() != n) throw ShapeError("split_category: id count mismatch");
  if (clusters == 0) throw ConfigError("split_category: need at least one cluster");
  CategorySplit out;
  out.profile.category = category;
  out.profile.k_percent = k_percent;
  out.tiers.assign(n, 0);
  out.center_distance.assign(n, 0.0);
  if (n == 0) return out;

  const Matrix e = pairwise_sq_dist(features);
  const auto ec = cutoff_ec(e, k_percent);
  out.profile.pair_cutoff = ec.value_or(0.0);
  out.profile.densities = ec ? local_density(e, *ec) : std::vector<std::size_t>(n, 0);

  std::size_t center = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const auto& rho = out.profile.densities;
    if (rho[i] > rho[center] || (rho[i] == rho[center] && ids[i] < ids[center])) center = i;
  }
  out.profile.center_index = center;
  for (std::size_t i = 0; i < n; ++i) out.center_distance[i] = std::sqrt(e(i, center));

  if (n < clusters) return out;
  const KMeans1D km = kmeans_1d(out.center_distance, clusters);
  out.tiers = km.labels;
  return out;
}

struct TierStats {
  int category = 0;
  int tier = 0;
  std::size_t count = 0;
  double mean_distance = 0.0;
};

/// Tier of every sample plus per-category cluster statistics.
struct SubsetAssignment {
  std::size_t clusters = 3;
  double k_percent = 40.0;
  std::vector<std::int64_t> ids;
  std::vector<int> tiers;
  std::vector<TierStats> stats;

  std::size_t size() const { return ids.size(); }

  /// Positions (into `ids`) of samples in the given tier.
  std::vector<std::size_t> members(int tier) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < tiers.size(); ++i) {
      if (tiers[i] == tier) out.push_back(i);
    }
    return out;
  }

  std::size_t count(int tier) const {
    return static_cast<std::size_t>(std::count(tiers.begin(), tiers.end(), tier));
  }

  std::map<std::int64_t, int> by_id() const {
    std::map<std::int64_t, int> m;
    for (std::size_t i = 0; i < ids.size(); ++i) m.emplace(ids[i], tiers[i]);
    return m;
  }
};

/// Groups samples by label, tiers each category and unions the tiers.
inline SubsetAssignment build_curriculum(const FeatureMatrix& data, std::size_t clusters,
                                         double k_percent) {
  data.validate();
  if (clusters == 0) throw ConfigError("build_curriculum: need at least one cluster");
  SubsetAssignment out;
  out.clusters = clusters;
  out.k_percent = k_percent;
  out.ids = data.ids;
  out.tiers.assign(data.size(), 0);

  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < data.size(); ++i) by_label[data.labels[i]].push_back(i);

  for (const auto& [label, members] : by_label) {
    const Matrix feats = gather_rows(data.features, members);
    std::vector<std::int64_t> ids(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) ids[i] = data.ids[members[i]];
    const CategorySplit split = split_category(feats, ids, clusters, k_percent, label);

    std::map<int, std::pair<std::size_t, double>> per_tier;
    for (std::size_t i = 0; i < members.size(); ++i) {
      out.tiers[members[i]] = split.tiers[i];
      auto& [count, sum] = per_tier[split.tiers[i]];
      ++count;
      sum += split.center_distance[i];
    }
    for (const auto& [tier, cs] : per_tier) {
      out.stats.push_back({label, tier, cs.first, cs.second / static_cast<double>(cs.first)});
    }
  }
  return out;
}

}  // namespace pcda
