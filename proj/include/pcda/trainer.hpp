#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "pcda/datagen.hpp"
#include "pcda/density.hpp"
#include "pcda/error.hpp"
#include "pcda/losses.hpp"
#include "pcda/matrix.hpp"
#include "pcda/nn.hpp"
#include "pcda/optimizer.hpp"
#include "pcda/rng.hpp"

// Four-stage curriculum training.
//
// Stage 1 trains the feature extractor, source classifier and discriminator
// adversarially on all source and target data. Entering stage 2 the target
// set is pseudo-labelled by the source classifier and split into easy,
// moderate and hard subsets; stages 2, 3 and 4 then train every head with
// the target stream drawn from the first one, two and three subsets.

namespace pcda {

enum class LambdaMode { constant, dann_ramp };

inline std::string to_string(LambdaMode m) {
  return m == LambdaMode::constant ? "constant" : "dann_ramp";
}

inline LambdaMode parse_lambda_mode(const std::string& s) {
  if (s == "constant") return LambdaMode::constant;
  if (s == "dann_ramp") return LambdaMode::dann_ramp;
  throw ConfigError("unknown lambda mode '" + s + "' (expected constant or dann_ramp)");
}

enum class ClassifierHead { source, target };

inline constexpr std::size_t kStages = 4;
inline constexpr std::size_t kSubsets = 3;  // easy, moderate, hard

using Composition = std::array<std::size_t, kSubsets>;

struct StageSchedule {
  std::array<std::size_t, kStages> stage_epochs{20, 20, 20, 20};
  /// Target-stream (easy, moderate, hard) counts for stages 2, 3 and 4.
  std::array<Composition, kStages - 1> composition{{{64, 0, 0}, {32, 32, 0}, {32, 16, 16}}};
  std::size_t source_batch = 64;
  LambdaMode lambda_mode = LambdaMode::dann_ramp;
  /// Constant value, or the ceiling of the ramp.
  double lambda = 1.0;
  bool recluster_at_stage_start = true;
  /// Re-derive pseudo-labels from the target classifier at every epoch
  /// start, not only at stage boundaries.
  bool relabel_each_epoch = false;
  /// How many subsets the curriculum ever activates (1, 2 or 3).
  std::size_t curriculum_subsets = 3;

  std::size_t target_batch() const {
    return std::accumulate(composition[0].begin(), composition[0].end(), std::size_t{0});
  }

  std::size_t total_epochs() const {
    return std::accumulate(stage_epochs.begin(), stage_epochs.end(), std::size_t{0});
  }

  double lambda_at(double progress) const {
    if (lambda_mode == LambdaMode::constant) return lambda;
    return lambda * (2.0 / (1.0 + std::exp(-10.0 * progress)) - 1.0);
  }

  void validate() const {
    if (source_batch == 0) throw ConfigError("source_batch must be > 0");
    const std::size_t t = target_batch();
    if (t == 0) throw ConfigError("target batch must be > 0");
    for (const auto& c : composition) {
      if (std::accumulate(c.begin(), c.end(), std::size_t{0}) != t) {
        throw ConfigError("every stage composition must sum to the same target batch size");
      }
    }
    if (curriculum_subsets < 1 || curriculum_subsets > kSubsets) {
      throw ConfigError("curriculum_subsets must be 1, 2 or 3");
    }
    if (!std::isfinite(lambda) || lambda < 0.0) throw ConfigError("lambda must be finite and >= 0");
  }
};

struct TrainerConfig {
  std::vector<std::size_t> feature_widths{64, 32};
  std::vector<std::size_t> discriminator_hidden{32};
  OptimizerSchedule optimizer;
  StageSchedule schedule;
  LossConfig loss;
  std::size_t clusters = 3;
  double k_percent = 40.0;
  std::uint64_t seed = 1;

  void validate() const {
    schedule.validate();
    LossConfig l = loss;
    l.lambda = schedule.lambda;
    l.validate();
    if (clusters == 0) throw ConfigError("clusters must be >= 1");
    if (!(k_percent > 0.0 && k_percent < 100.0)) throw ConfigError("k_percent must be in (0, 100)");
    if (feature_widths.empty()) throw ConfigError("feature_widths must not be empty");
  }
};

/// Per-epoch training summary. Loss terms are means over the epoch's
/// iterations; accuracies are measured at the end of the epoch.
struct MetricsRecord {
  std::size_t epoch = 0;  // 1-based over the whole run
  std::size_t stage = 1;
  double j_total = 0.0;
  double j_cls_source = 0.0;
  double j_cls_target = 0.0;
  double j_domain = 0.0;
  double j_ecl = 0.0;
  double lambda = 0.0;
  double learning_rate = 0.0;
  std::size_t active_target = 0;
  double acc_source = 0.0;
  std::optional<double> acc_target;
  /// Accuracy of the pseudo-labels used during this epoch, per subset.
  std::array<std::optional<double>, kSubsets> pl_acc;
};

/// Thrown when a loss becomes non-finite. `record` describes the failing
/// iteration.
class TrainingAborted : public NumericError {
 public:
  TrainingAborted(const std::string& what, MetricsRecord record)
      : NumericError(what), record_(std::move(record)) {}
  const MetricsRecord& record() const { return record_; }

 private:
  MetricsRecord record_;
};

struct TrainHooks {
  std::function<void(const MetricsRecord&)> on_epoch;
  std::function<void(std::size_t stage, const NetworkParams&)> on_stage_end;
  std::function<void(std::size_t stage, const SubsetAssignment&)> on_assignment;
};

/// ŷ_i = argmax of the chosen classifier on G_f(x_i); ties go to the lowest class.
inline std::vector<int> assign_pseudo_labels(const NetworkParams& params, ClassifierHead head,
                                             const Matrix& inputs) {
  if (inputs.rows() == 0) return {};
  const Matrix f = params.feature_extractor.apply(inputs);
  const Matrix logits = head == ClassifierHead::source ? params.source_classifier.apply(f)
                                                       : params.target_classifier.apply(f);
  std::vector<int> labels(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    labels[i] = static_cast<int>(argmax(logits.row(i)));
  }
  return labels;
}

/// Fraction of argmax predictions equal to `labels`.
inline double evaluate(const NetworkParams& params, const Matrix& inputs,
                       std::span<const int> labels, ClassifierHead head) {
  if (inputs.rows() == 0) throw ConfigError("evaluate: empty set");
  if (labels.size() != inputs.rows()) throw ShapeError("evaluate: label count mismatch");
  const auto pred = assign_pseudo_labels(params, head, inputs);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

/// Per-subset draw counts for `stage` (2..4) given which subsets are active
/// and their sizes. Quota of an inactive or empty subset moves to the active
/// non-empty subsets in proportion to their own quotas (evenly when those
/// are all zero), with largest-remainder rounding; ties go to the lower
/// subset.
inline Composition stage_quotas(const StageSchedule& schedule, std::size_t stage,
                                std::size_t active_subsets,
                                const std::array<std::size_t, kSubsets>& subset_sizes) {
  if (stage < 2 || stage > kStages) throw ConfigError("stage_quotas: stage must be 2..4");
  Composition q = schedule.composition[stage - 2];
  std::array<bool, kSubsets> receives{};
  std::size_t freed = 0;
  for (std::size_t s = 0; s < kSubsets; ++s) {
    receives[s] = s < active_subsets && subset_sizes[s] > 0;
    if (!receives[s]) {
      freed += q[s];
      q[s] = 0;
    }
  }
  if (freed == 0) return q;
  std::size_t weight_sum = 0;
  std::size_t receivers = 0;
  for (std::size_t s = 0; s < kSubsets; ++s) {
    if (receives[s]) {
      weight_sum += q[s];
      ++receivers;
    }
  }
  if (receivers == 0) return q;
  std::array<double, kSubsets> share{};
  for (std::size_t s = 0; s < kSubsets; ++s) {
    if (!receives[s]) continue;
    share[s] = weight_sum > 0
                   ? static_cast<double>(freed) * static_cast<double>(q[s]) / static_cast<double>(weight_sum)
                   : static_cast<double>(freed) / static_cast<double>(receivers);
  }
  std::size_t given = 0;
  std::array<double, kSubsets> rem{};
  for (std::size_t s = 0; s < kSubsets; ++s) {
    const auto whole = static_cast<std::size_t>(std::floor(share[s]));
    q[s] += whole;
    given += whole;
    rem[s] = share[s] - static_cast<double>(whole);
  }
  while (given < freed) {
    std::size_t best = kSubsets;
    for (std::size_t s = 0; s < kSubsets; ++s) {
      if (receives[s] && (best == kSubsets || rem[s] > rem[best])) best = s;
    }
    ++q[best];
    rem[best] = -1.0;
    ++given;
  }
  return q;
}

/// Endless stream over a pool of indices: each pass is a fresh shuffle, so
/// a pool smaller than the request is drawn with replacement across passes.
class IndexStream {
 public:
  IndexStream() = default;
  explicit IndexStream(std::vector<std::size_t> pool) : pool_(std::move(pool)) {}

  std::size_t pool_size() const { return pool_.size(); }

  /// Forces a reshuffle before the next draw.
  void restart() { pos_ = order_.size(); }

  void draw(std::size_t count, Rng& rng, std::vector<std::size_t>& out) {
    if (pool_.empty()) return;
    for (std::size_t k = 0; k < count; ++k) {
      if (pos_ >= order_.size()) {
        order_ = pool_;
        rng.shuffle(order_);
        pos_ = 0;
      }
      out.push_back(order_[pos_++]);
    }
  }

 private:
  std::vector<std::size_t> pool_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

struct Batch {
  std::vector<std::size_t> source;
  std::vector<std::size_t> target;
  /// Subset (0 easy, 1 moderate, 2 hard) of each target row; -1 in stage 1.
  std::vector<int> target_subset;
};

/// Draws source and target index batches for each stage.
class BatchSampler {
 public:
  BatchSampler(std::size_t n_source, std::size_t n_target)
      : source_(iota(n_source)), all_target_(iota(n_target)) {}

  /// Installs the subset pools used from stage 2 on.
  void set_subsets(const std::array<std::vector<std::size_t>, kSubsets>& members) {
    for (std::size_t s = 0; s < kSubsets; ++s) subsets_[s] = IndexStream(members[s]);
  }

  std::array<std::size_t, kSubsets> subset_sizes() const {
    return {subsets_[0].pool_size(), subsets_[1].pool_size(), subsets_[2].pool_size()};
  }

  void start_epoch() {
    source_.restart();
    all_target_.restart();
    for (auto& s : subsets_) s.restart();
  }

  Batch sample(std::size_t stage, std::size_t active_subsets, const StageSchedule& schedule,
               Rng& rng) {
    Batch b;
    source_.draw(schedule.source_batch, rng, b.source);
    if (stage == 1) {
      all_target_.draw(schedule.target_batch(), rng, b.target);
      b.target_subset.assign(b.target.size(), -1);
      return b;
    }
    const Composition q = stage_quotas(schedule, stage, active_subsets, subset_sizes());
    for (std::size_t s = 0; s < kSubsets; ++s) {
      subsets_[s].draw(q[s], rng, b.target);
      b.target_subset.resize(b.target.size(), static_cast<int>(s));
    }
    return b;
  }

 private:
  static std::vector<std::size_t> iota(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
  }

  IndexStream source_;
  IndexStream all_target_;
  std::array<IndexStream, kSubsets> subsets_;
};

struct TrainingState {
  std::size_t stage = 1;
  std::size_t epoch = 0;
  std::size_t global_step = 0;
  std::optional<SubsetAssignment> assignment;
  /// Subset (0..2) of every target sample; empty before stage 2.
  std::vector<int> subset_of;
  std::vector<int> pseudo_labels;
  std::size_t active_subsets = 0;
  /// Subset whose samples get the beta weight this stage, or -1.
  int newly_added = -1;
};

/// Drives the four stages over one dataset.
class Trainer {
 public:
  Trainer(DatasetPair data, TrainerConfig config, TrainHooks hooks = {})
      : data_(std::move(data)),
        config_(std::move(config)),
        hooks_(std::move(hooks)),
        sampler_(data_.source.features.rows(), data_.target.features.rows()),
        rng_(config_.seed ^ 0xA5A5A5A5DEADBEEFULL) {
    config_.validate();
    if (data_.source.features.rows() == 0 || data_.target.features.rows() == 0) {
      throw ConfigError("trainer: source and target sets must be non-empty");
    }
    if (data_.source.features.cols() != data_.target.features.cols()) {
      throw ShapeError("trainer: source and target feature widths differ");
    }
    if (data_.source.labels.size() != data_.source.features.rows()) {
      throw ShapeError("trainer: source label count mismatch");
    }
    if (!data_.target.labels.empty() && data_.target.labels.size() != data_.target.features.rows()) {
      throw ShapeError("trainer: target evaluation label count mismatch");
    }
    for (int y : data_.source.labels) {
      if (y < 0 || static_cast<std::size_t>(y) >= data_.classes) {
        throw ConfigError("trainer: source label out of range");
      }
    }
    Architecture arch;
    arch.input_dim = data_.source.features.cols();
    arch.feature_widths = config_.feature_widths;
    arch.discriminator_hidden = config_.discriminator_hidden;
    arch.num_classes = data_.classes;
    params_ = make_network(arch, config_.seed);
    iters_per_epoch_ = (data_.source.features.rows() + config_.schedule.source_batch - 1) /
                       config_.schedule.source_batch;
    total_steps_ = iters_per_epoch_ * config_.schedule.total_epochs();
  }

  NetworkParams& params() { return params_; }
  const NetworkParams& params() const { return params_; }
  const TrainingState& state() const { return state_; }
  const TrainerConfig& config() const { return config_; }
  const DatasetPair& data() const { return data_; }
  std::size_t iterations_per_epoch() const { return iters_per_epoch_; }

  double progress() const {
    return total_steps_ == 0 ? 0.0
                             : static_cast<double>(state_.global_step) / static_cast<double>(total_steps_);
  }

  /// Runs every epoch planned for the current stage.
  void run_stage() {
    const std::size_t epochs = config_.schedule.stage_epochs[state_.stage - 1];
    if (state_.stage >= 2 && !state_.assignment) throw StateError("trainer: stage >= 2 without assignment");
    for (std::size_t e = 0; e < epochs; ++e) run_epoch(e == 0);
    if (hooks_.on_stage_end && epochs > 0) hooks_.on_stage_end(state_.stage, params_);
  }

  /// Moves to `next` (2..4): pseudo-labels all target samples (source
  /// classifier entering stage 2, target classifier afterwards), rebuilds
  /// the subsets when configured, and activates the next subset.
  void advance_stage(std::size_t next) {
    if (next < 2 || next > kStages || next <= state_.stage) {
      throw StateError("trainer: stage transitions must move forward to 2..4");
    }
    const ClassifierHead head = next == 2 ? ClassifierHead::source : ClassifierHead::target;
    const Matrix features = params_.feature_extractor.apply(data_.target.features);
    state_.pseudo_labels = labels_from(features, head);
    if (!state_.assignment || config_.schedule.recluster_at_stage_start) {
      FeatureMatrix fm;
      fm.ids.resize(features.rows());
      std::iota(fm.ids.begin(), fm.ids.end(), std::int64_t{0});
      fm.labels = state_.pseudo_labels;
      fm.features = features;
      state_.assignment = build_curriculum(fm, config_.clusters, config_.k_percent);
      std::array<std::vector<std::size_t>, kSubsets> members;
      state_.subset_of.assign(features.rows(), 0);
      for (std::size_t i = 0; i < features.rows(); ++i) {
        const int s = std::min<int>(state_.assignment->tiers[i], static_cast<int>(kSubsets) - 1);
        state_.subset_of[i] = s;
        members[static_cast<std::size_t>(s)].push_back(i);
      }
      sampler_.set_subsets(members);
    }
    if (hooks_.on_assignment) hooks_.on_assignment(next, *state_.assignment);

    const std::size_t limit = config_.schedule.curriculum_subsets;
    const std::size_t wanted = next - 1;
    state_.active_subsets = std::min(wanted, limit);
    state_.newly_added = wanted <= limit ? static_cast<int>(wanted - 1) : -1;
    state_.stage = next;
  }

  /// Executes all four stages; stages with zero epochs are skipped.
  void run() {
    run_stage();
    for (std::size_t s = 2; s <= kStages; ++s) {
      if (config_.schedule.stage_epochs[s - 1] == 0) continue;
      advance_stage(s);
      run_stage();
    }
  }

  const std::vector<MetricsRecord>& metrics() const { return metrics_; }

 private:
  std::vector<int> labels_from(const Matrix& features, ClassifierHead head) const {
    const Matrix logits = head == ClassifierHead::source ? params_.source_classifier.apply(features)
                                                         : params_.target_classifier.apply(features);
    std::vector<int> labels(logits.rows());
    for (std::size_t i = 0; i < logits.rows(); ++i) labels[i] = static_cast<int>(argmax(logits.row(i)));
    return labels;
  }

  struct StepTerms {
    double total = 0.0;
    double cls_source = 0.0;
    double cls_target = 0.0;
    double domain = 0.0;
    double ecl = 0.0;
    std::size_t active = 0;
  };

  void run_epoch(bool first_of_stage) {
    ++state_.epoch;
    const std::size_t stage = state_.stage;
    if (stage >= 2 && config_.schedule.relabel_each_epoch && !first_of_stage) {
      const Matrix features = params_.feature_extractor.apply(data_.target.features);
      state_.pseudo_labels = labels_from(features, ClassifierHead::target);
    }
    const std::vector<int> epoch_labels = state_.pseudo_labels;
    sampler_.start_epoch();

    MetricsRecord rec;
    rec.epoch = state_.epoch;
    rec.stage = stage;
    for (std::size_t it = 0; it < iters_per_epoch_; ++it) {
      const double p = progress();
      const double lambda = config_.schedule.lambda_at(p);
      StepTerms t;
      std::string failure;
      try {
        t = step(lambda, p);
      } catch (const NumericError& e) {
        failure = e.what();
        t.total = std::numeric_limits<double>::quiet_NaN();
      }
      if (!std::isfinite(t.total) || !std::isfinite(t.domain) || !std::isfinite(t.ecl)) {
        if (failure.empty()) failure = "non-finite loss";
        MetricsRecord diag = rec;
        diag.j_total = t.total;
        diag.j_cls_source = t.cls_source;
        diag.j_cls_target = t.cls_target;
        diag.j_domain = t.domain;
        diag.j_ecl = t.ecl;
        diag.lambda = lambda;
        throw TrainingAborted(failure + " at stage " + std::to_string(stage) + ", epoch " +
                                  std::to_string(state_.epoch) + ", step " +
                                  std::to_string(state_.global_step),
                              diag);
      }
      rec.j_total += t.total;
      rec.j_cls_source += t.cls_source;
      rec.j_cls_target += t.cls_target;
      rec.j_domain += t.domain;
      rec.j_ecl += t.ecl;
      rec.active_target = t.active;
      rec.lambda = lambda;
      rec.learning_rate = config_.optimizer.learning_rate(p);
      ++state_.global_step;
    }
    if (iters_per_epoch_ > 0) {
      const auto n = static_cast<double>(iters_per_epoch_);
      rec.j_total /= n;
      rec.j_cls_source /= n;
      rec.j_cls_target /= n;
      rec.j_domain /= n;
      rec.j_ecl /= n;
    }
    rec.acc_source = evaluate(params_, data_.source.features, data_.source.labels, ClassifierHead::source);
    if (!data_.target.labels.empty()) {
      rec.acc_target = evaluate(params_, data_.target.features, data_.target.labels,
                                stage == 1 ? ClassifierHead::source : ClassifierHead::target);
      if (stage >= 2) {
        std::array<std::size_t, kSubsets> hits{};
        std::array<std::size_t, kSubsets> counts{};
        for (std::size_t i = 0; i < state_.subset_of.size(); ++i) {
          const auto s = static_cast<std::size_t>(state_.subset_of[i]);
          ++counts[s];
          hits[s] += epoch_labels[i] == data_.target.labels[i];
        }
        for (std::size_t s = 0; s < kSubsets; ++s) {
          if (counts[s] > 0) rec.pl_acc[s] = static_cast<double>(hits[s]) / static_cast<double>(counts[s]);
        }
      }
    }
    metrics_.push_back(rec);
    if (hooks_.on_epoch) hooks_.on_epoch(rec);
  }

  StepTerms step(double lambda, double progress) {
    const std::size_t stage = state_.stage;
    const Batch batch = sampler_.sample(stage, state_.active_subsets, config_.schedule, rng_);
    const Matrix xs = gather_rows(data_.source.features, batch.source);
    const Matrix xt = gather_rows(data_.target.features, batch.target);
    std::vector<int> ys(batch.source.size());
    for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = data_.source.labels[batch.source[i]];

    params_.zero_grads();
    const Matrix features = params_.feature_extractor.forward(vstack(xs, xt));
    const std::size_t ns = xs.rows();
    const std::size_t nt = xt.rows();
    const Matrix fs = slice_rows(features, 0, ns);
    const Matrix ft = slice_rows(features, ns, ns + nt);
    const GradientReversal grl{lambda};
    const Matrix source_logits = params_.source_classifier.forward(fs);
    const Matrix domain_logits = params_.discriminator.forward(grl.forward(features));

    LossConfig loss = config_.loss;
    loss.lambda = lambda;
    StepTerms t;
    t.active = nt;
    Matrix grad_features(features.rows(), features.cols());
    if (stage == 1) {
      const ObjectiveResult r = j1_loss(source_logits, ys, domain_logits, nt, loss);
      t.total = r.total;
      t.cls_source = r.cls_source;
      t.domain = r.domain;
      const Matrix gs = params_.source_classifier.backward(r.grad_source_logits);
      std::copy(gs.data().begin(), gs.data().end(), grad_features.data().begin());
      add_inplace(grad_features, grl.backward(params_.discriminator.backward(r.grad_domain_logits)));
    } else {
      std::vector<int> pl(nt);
      std::vector<bool> fresh(nt);
      for (std::size_t i = 0; i < nt; ++i) {
        pl[i] = state_.pseudo_labels[batch.target[i]];
        fresh[i] = batch.target_subset[i] == state_.newly_added;
      }
      const Matrix target_logits = nt > 0 ? params_.target_classifier.forward(ft)
                                          : Matrix(0, params_.num_classes());
      const ObjectiveResult r =
          j2_loss(source_logits, ys, target_logits, pl, fresh, domain_logits, loss);
      const EclResult ecl = ecl_loss(target_logits, pl, loss);
      t.total = r.total + ecl.value;
      t.cls_source = r.cls_source;
      t.cls_target = r.cls_target;
      t.domain = r.domain;
      t.ecl = ecl.value;
      const Matrix gs = params_.source_classifier.backward(r.grad_source_logits);
      std::copy(gs.data().begin(), gs.data().end(), grad_features.data().begin());
      if (nt > 0) {
        Matrix gt = r.grad_target_logits;
        add_inplace(gt, ecl.grad);
        const Matrix gft = params_.target_classifier.backward(gt);
        std::copy(gft.data().begin(), gft.data().end(),
                  grad_features.data().begin() + static_cast<std::ptrdiff_t>(ns * features.cols()));
      }
      add_inplace(grad_features, grl.backward(params_.discriminator.backward(r.grad_domain_logits)));
    }
    params_.feature_extractor.backward(grad_features);

    const double lr = config_.optimizer.learning_rate(progress);
    const double mom = config_.optimizer.momentum;
    sgd_step(params_.feature_extractor, lr * config_.optimizer.feature_lr_scale, mom);
    sgd_step(params_.source_classifier, lr, mom);
    if (stage >= 2) sgd_step(params_.target_classifier, lr, mom);
    sgd_step(params_.discriminator, lr, mom);
    return t;
  }

  DatasetPair data_;
  TrainerConfig config_;
  TrainHooks hooks_;
  NetworkParams params_;
  BatchSampler sampler_;
  Rng rng_;
  TrainingState state_;
  std::vector<MetricsRecord> metrics_;
  std::size_t iters_per_epoch_ = 0;
  std::size_t total_steps_ = 0;
};

struct TrainResult {
  NetworkParams params;
  std::vector<MetricsRecord> metrics;
};

/// Full four-stage run.
inline TrainResult run_curriculum(const DatasetPair& data, const TrainerConfig& config,
                                  TrainHooks hooks = {}) {
  Trainer trainer(data, config, std::move(hooks));
  trainer.run();
  return {trainer.params(), trainer.metrics()};
}

}  // namespace pcda
