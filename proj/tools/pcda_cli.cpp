// pcda: synthetic data generation, curriculum splitting, training,
// evaluation and reporting.
//
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pcda/pcda.hpp"

namespace fs = std::filesystem;
using namespace pcda;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- gen-data

struct GenDataArgs {
  std::string preset = "blobs";
  std::size_t classes = 4;
  std::size_t n_source = 800;
  std::size_t n_target = 800;
  std::size_t dim = 2;
  double rotation = 0.0;
  std::vector<double> translation;
  double noise = 0.6;
  std::uint64_t seed = 1;
  std::string out;
};

void add_gen_data(CLI::App& app, GenDataArgs& a) {
  auto* cmd = app.add_subcommand("gen-data", "Generate a synthetic two-domain dataset");
  cmd->add_option("--preset", a.preset, "blobs or moons")->capture_default_str();
  cmd->add_option("--classes", a.classes, "Class count (moons: 2)")->capture_default_str();
  cmd->add_option("--n-source", a.n_source, "Source samples")->capture_default_str();
  cmd->add_option("--n-target", a.n_target, "Target samples")->capture_default_str();
  cmd->add_option("--dim", a.dim, "Feature width (moons: 2)")->capture_default_str();
  cmd->add_option("--rotation", a.rotation, "Target rotation in degrees")->capture_default_str();
  cmd->add_option("--translation", a.translation, "Target translation, one value per feature")
      ->delimiter(',');
  cmd->add_option("--noise", a.noise, "Gaussian noise sigma")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Generator seed")->capture_default_str();
  cmd->add_option("--out", a.out, "Output directory")->required();
}

int run_gen_data(const CLI::App& cmd, const GenDataArgs& a) {
  DatasetSpec spec;
  spec.preset = parse_preset(a.preset);
  spec.classes = a.classes;
  spec.dim = a.dim;
  if (spec.preset == Preset::moons) {
    if (cmd.count("--classes") == 0) spec.classes = 2;
    if (cmd.count("--dim") == 0) spec.dim = 2;
  }
  spec.n_source = a.n_source;
  spec.n_target = a.n_target;
  spec.rotation_deg = a.rotation;
  spec.translation = a.translation;
  spec.noise_sigma = a.noise;
  spec.seed = a.seed;
  write_dataset(a.out, spec, generate(spec));
  return 0;
}

// ------------------------------------------------------------------- split

struct SplitArgs {
  std::string features;
  std::size_t clusters = 3;
  double k_percent = 40.0;
  std::string out;
};

void add_split(CLI::App& app, SplitArgs& a) {
  auto* cmd = app.add_subcommand("split", "Rank pseudo-labelled samples into curriculum tiers");
  cmd->add_option("--features", a.features, "CSV with header id,label,f0,...")->required();
  cmd->add_option("--clusters", a.clusters, "Tiers per category (P)")->capture_default_str();
  cmd->add_option("--k", a.k_percent, "Cutoff rank in percent of sorted pair distances")
      ->capture_default_str();
  cmd->add_option("--out", a.out, "Assignment JSON path")->required();
}

int run_split(const SplitArgs& a) {
  const FeatureTable table = read_feature_csv(a.features);
  if (table.labels.empty()) throw ConfigError(a.features + ": split needs a label column");
  FeatureMatrix fm{table.ids, table.labels, table.features};
  const SubsetAssignment assignment = build_curriculum(fm, a.clusters, a.k_percent);
  write_text(a.out, to_json(assignment).dump(2) + "\n");

  std::cout << "category,tier,count,mean_distance\n";
  for (const auto& s : assignment.stats) {
    std::cout << s.category << ',' << s.tier << ',' << s.count << ','
              << format_double(s.mean_distance) << '\n';
  }
  std::cout << "# tier sizes:";
  for (std::size_t t = 0; t < std::max<std::size_t>(a.clusters, 1); ++t) {
    std::cout << ' ' << assignment.count(static_cast<int>(t));
  }
  std::cout << '\n';
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string config;
  std::string data;
  std::string source;
  std::string target;
  std::string target_eval;
  std::string out;
  std::uint64_t seed = 1;
  std::vector<std::size_t> stage_epochs;
  double ecl_weight = 1.0;
  double beta = 2.0;
  double margin = 2.0;
  double lambda = 1.0;
  std::string lambda_mode;
  double eta0 = 0.01;
  double k_percent = 40.0;
  std::size_t clusters = 3;
  std::size_t curriculum_subsets = 3;
  bool recluster = true;
  bool relabel_each_epoch = false;
};

void add_train(CLI::App& app, TrainArgs& a) {
  auto* cmd = app.add_subcommand("train", "Run the four-stage curriculum");
  cmd->add_option("--config", a.config, "RunConfig JSON; flags override its values");
  cmd->add_option("--data", a.data, "Directory with source.csv, target.csv, target_eval.csv");
  cmd->add_option("--source", a.source, "Labelled source CSV");
  cmd->add_option("--target", a.target, "Unlabelled target CSV");
  cmd->add_option("--target-eval", a.target_eval, "Target CSV with true labels (evaluation only)");
  cmd->add_option("--out", a.out, "Run directory");
  cmd->add_option("--seed", a.seed, "Seed for initialization and batching");
  cmd->add_option("--stage-epochs", a.stage_epochs, "Epochs of stages 1..4, e.g. 20,20,20,20")
      ->delimiter(',')
      ->expected(4);
  cmd->add_option("--ecl-weight", a.ecl_weight, "Clustering loss weight (0 disables)");
  cmd->add_option("--beta", a.beta, "Domain-loss weight of newly added samples");
  cmd->add_option("--margin", a.margin, "Clustering loss margin");
  cmd->add_option("--lambda", a.lambda, "Adversarial trade-off (ramp ceiling in dann_ramp mode)");
  cmd->add_option("--lambda-mode", a.lambda_mode, "constant or dann_ramp");
  cmd->add_option("--eta0", a.eta0, "Base learning rate");
  cmd->add_option("--k", a.k_percent, "Density cutoff rank in percent");
  cmd->add_option("--clusters", a.clusters, "Tiers per category (P)");
  cmd->add_option("--curriculum-subsets", a.curriculum_subsets,
                  "Subsets ever activated: 1 (Model-1), 2 (Model-2), 3 (full)");
  cmd->add_option("--recluster", a.recluster, "Rebuild subsets at every stage start (true/false)");
  cmd->add_option("--relabel-each-epoch", a.relabel_each_epoch,
                  "Refresh pseudo-labels at every epoch start (true/false)");
}

RunConfig resolve_run_config(const CLI::App& cmd, const TrainArgs& a) {
  RunConfig rc;
  if (!a.config.empty()) rc = run_config_from_json(read_json(a.config));
  auto given = [&](const char* flag) { return cmd.count(flag) > 0; };
  if (given("--data")) {
    const fs::path d(a.data);
    rc.source_csv = (d / "source.csv").string();
    rc.target_csv = (d / "target.csv").string();
    rc.target_eval_csv = fs::exists(d / "target_eval.csv") ? (d / "target_eval.csv").string() : "";
  }
  if (given("--source")) rc.source_csv = a.source;
  if (given("--target")) rc.target_csv = a.target;
  if (given("--target-eval")) rc.target_eval_csv = a.target_eval;
  if (given("--out")) rc.out_dir = a.out;
  auto& t = rc.trainer;
  if (given("--seed")) t.seed = a.seed;
  if (given("--stage-epochs")) {
    for (std::size_t i = 0; i < kStages; ++i) t.schedule.stage_epochs[i] = a.stage_epochs[i];
  }
  if (given("--ecl-weight")) t.loss.ecl_weight = a.ecl_weight;
  if (given("--beta")) t.loss.beta = a.beta;
  if (given("--margin")) t.loss.margin = a.margin;
  if (given("--lambda")) t.schedule.lambda = a.lambda;
  if (given("--lambda-mode")) t.schedule.lambda_mode = parse_lambda_mode(a.lambda_mode);
  if (given("--eta0")) t.optimizer.eta0 = a.eta0;
  if (given("--k")) t.k_percent = a.k_percent;
  if (given("--clusters")) t.clusters = a.clusters;
  if (given("--curriculum-subsets")) t.schedule.curriculum_subsets = a.curriculum_subsets;
  if (given("--recluster")) t.schedule.recluster_at_stage_start = a.recluster;
  if (given("--relabel-each-epoch")) t.schedule.relabel_each_epoch = a.relabel_each_epoch;

  if (rc.source_csv.empty() || rc.target_csv.empty()) {
    throw UsageError("train: source and target data are required (--data or --source/--target)");
  }
  if (rc.out_dir.empty()) throw UsageError("train: --out is required");
  t.validate();
  return rc;
}

/// Reorders `labels` of `table` to follow the ids of `order`.
std::vector<int> labels_by_id(const FeatureTable& table, const std::vector<std::int64_t>& order,
                              const std::string& name) {
  std::map<std::int64_t, int> by_id;
  for (std::size_t i = 0; i < table.ids.size(); ++i) by_id[table.ids[i]] = table.labels[i];
  std::vector<int> out;
  out.reserve(order.size());
  for (auto id : order) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ConfigError(name + ": no row for target id " + std::to_string(id));
    out.push_back(it->second);
  }
  return out;
}

DatasetPair load_dataset(const RunConfig& rc) {
  const FeatureTable src = read_feature_csv(rc.source_csv);
  if (src.labels.empty()) throw ConfigError(rc.source_csv + ": source CSV needs a label column");
  const FeatureTable tgt = read_feature_csv(rc.target_csv);
  DatasetPair data;
  data.source = {src.features, src.labels};
  data.target.features = tgt.features;
  int max_label = 0;
  for (int y : src.labels) max_label = std::max(max_label, y);
  data.classes = static_cast<std::size_t>(max_label) + 1;
  if (!rc.target_eval_csv.empty()) {
    const FeatureTable ev = read_feature_csv(rc.target_eval_csv);
    if (ev.labels.empty()) throw ConfigError(rc.target_eval_csv + ": needs a label column");
    data.target.labels = labels_by_id(ev, tgt.ids, rc.target_eval_csv);
  }
  return data;
}

int run_train(const CLI::App& cmd, const TrainArgs& a) {
  const RunConfig rc = resolve_run_config(cmd, a);
  const DatasetPair data = load_dataset(rc);
  const fs::path out(rc.out_dir);
  fs::create_directories(out);
  write_text(out / "config.json", to_json(rc).dump(2) + "\n");

  std::ofstream metrics(out / "metrics.jsonl", std::ios::binary | std::ios::trunc);
  if (!metrics) throw ConfigError("cannot write " + (out / "metrics.jsonl").string());
  TrainHooks hooks;
  hooks.on_epoch = [&](const MetricsRecord& r) { metrics << to_json(r).dump() << '\n' << std::flush; };
  hooks.on_stage_end = [&](std::size_t stage, const NetworkParams& p) {
    write_text(out / ("checkpoint_stage" + std::to_string(stage) + ".json"), to_json(p).dump() + "\n");
  };
  hooks.on_assignment = [&](std::size_t stage, const SubsetAssignment& s) {
    write_text(out / ("assignment_stage" + std::to_string(stage) + ".json"), to_json(s).dump(2) + "\n");
  };
  try {
    run_curriculum(data, rc.trainer, hooks);
  } catch (const TrainingAborted& e) {
    Json diag = to_json(e.record());
    diag["error"] = e.what();
    metrics << diag.dump() << '\n' << std::flush;
    throw;
  }
  return 0;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::string checkpoint;
  std::string features;
  std::string classifier = "target";
};

void add_eval(CLI::App& app, EvalArgs& a) {
  auto* cmd = app.add_subcommand("eval", "Accuracy of a checkpoint on a labelled CSV");
  cmd->add_option("--checkpoint", a.checkpoint, "checkpoint_stage{N}.json")->required();
  cmd->add_option("--features", a.features, "CSV with header id,label,f0,...")->required();
  cmd->add_option("--classifier", a.classifier, "source or target")->capture_default_str();
}

int run_eval(const EvalArgs& a) {
  ClassifierHead head;
  if (a.classifier == "source") head = ClassifierHead::source;
  else if (a.classifier == "target") head = ClassifierHead::target;
  else throw UsageError("eval: --classifier must be source or target");
  const NetworkParams params = network_from_json(read_json(a.checkpoint));
  const FeatureTable table = read_feature_csv(a.features);
  if (table.labels.empty()) throw ConfigError(a.features + ": eval needs a label column");
  const double acc = evaluate(params, table.features, table.labels, head);
  std::cout << Json{{"classifier", a.classifier}, {"n", table.ids.size()}, {"accuracy", acc}}.dump()
            << '\n';
  return 0;
}

// ------------------------------------------------------------------ report

struct ReportArgs {
  std::vector<std::string> runs;
  std::string format = "csv";
};

void add_report(CLI::App& app, ReportArgs& a) {
  auto* cmd = app.add_subcommand(
      "report", "Summarize run directories; writes pl_accuracy.csv into each run");
  cmd->add_option("--run", a.runs, "Run directory (repeat for a comparison table)")->required();
  cmd->add_option("--format", a.format, "csv or json")->capture_default_str();
}

int run_report(const ReportArgs& a) {
  if (a.format != "csv" && a.format != "json") throw UsageError("report: --format must be csv or json");
  std::vector<RunSummary> rows;
  for (const auto& run : a.runs) {
    const fs::path dir(run);
    const auto metrics = read_metrics_jsonl(dir / "metrics.jsonl");
    rows.push_back(summarize(run, metrics));
    write_text(dir / "pl_accuracy.csv", pl_curves_csv(metrics));
  }
  if (a.format == "csv") std::cout << summaries_csv(rows);
  else std::cout << summaries_json(rows).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcda: pseudo-labelling curriculum for domain adaptation"};
  app.require_subcommand(1);
  GenDataArgs gen;
  SplitArgs split;
  TrainArgs train;
  EvalArgs eval;
  ReportArgs report;
  add_gen_data(app, gen);
  add_split(app, split);
  add_train(app, train);
  add_eval(app, eval);
  add_report(app, report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (app.got_subcommand("gen-data")) return run_gen_data(*app.get_subcommand("gen-data"), gen);
    if (app.got_subcommand("split")) return run_split(split);
    if (app.got_subcommand("train")) return run_train(*app.get_subcommand("train"), train);
    if (app.got_subcommand("eval")) return run_eval(eval);
    if (app.got_subcommand("report")) return run_report(report);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
