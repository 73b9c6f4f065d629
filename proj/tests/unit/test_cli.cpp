#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "pcda/pcda.hpp"

using namespace pcda;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "pcda_cli_tests";

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome pcda_run(const std::string& args) {
  const fs::path out = kWork / "stdout.txt";
  const fs::path err = kWork / "stderr.txt";
  const std::string cmd = std::string(PCDA_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = slurp(out);
  o.err = slurp(err);
  return o;
}

std::string p(const fs::path& path) { return path.string(); }

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    ASSERT_EQ(pcda_run("gen-data --n-source 200 --n-target 200 --rotation 20 --out " + p(kWork / "data")).code, 0);
  }
  static void TearDownTestSuite() { fs::remove_all(kWork); }

  static std::string data_flags() { return "--data " + p(kWork / "data"); }
};

}  // namespace

TEST_F(Cli, HelpExitsZero) {
  EXPECT_EQ(pcda_run("--help").code, 0);
  for (const char* sub : {"gen-data", "split", "train", "eval", "report"}) {
    const auto o = pcda_run(std::string(sub) + " --help");
    EXPECT_EQ(o.code, 0) << sub;
    EXPECT_NE(o.out.find("--"), std::string::npos) << sub;
  }
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(pcda_run("").code, 1);
  EXPECT_EQ(pcda_run("frobnicate").code, 1);
  EXPECT_EQ(pcda_run("gen-data --bogus 3 --out " + p(kWork / "x")).code, 1);
  EXPECT_EQ(pcda_run("gen-data --seed 1").code, 1);
  EXPECT_EQ(pcda_run("train " + data_flags()).code, 1);
  EXPECT_EQ(pcda_run("train --stage-epochs 1,2 --out " + p(kWork / "r") + " " + data_flags()).code, 1);
}

TEST_F(Cli, BadPresetAndUnwritablePathFail) {
  EXPECT_NE(pcda_run("gen-data --preset spirals --out " + p(kWork / "sp")).code, 0);
  EXPECT_NE(pcda_run("gen-data --out /proc/no_such_dir/x").code, 0);
}

TEST_F(Cli, GenDataIsDeterministic) {
  ASSERT_EQ(pcda_run("gen-data --preset moons --seed 7 --out " + p(kWork / "m1")).code, 0);
  ASSERT_EQ(pcda_run("gen-data --preset moons --seed 7 --out " + p(kWork / "m2")).code, 0);
  for (const char* f : {"source.csv", "target.csv", "target_eval.csv", "spec.json"}) {
    EXPECT_EQ(slurp(kWork / "m1" / f), slurp(kWork / "m2" / f)) << f;
  }
  EXPECT_EQ(read_json(kWork / "m1" / "spec.json").at("classes"), 2);
}

TEST_F(Cli, GenDataBalancesClasses) {
  ASSERT_EQ(pcda_run("gen-data --preset blobs --classes 4 --n-source 400 --out " + p(kWork / "b")).code, 0);
  const auto t = read_feature_csv(kWork / "b" / "source.csv");
  std::map<int, int> counts;
  for (int y : t.labels) ++counts[y];
  ASSERT_EQ(counts.size(), 4u);
  for (const auto& [c, n] : counts) EXPECT_EQ(n, 100) << c;
  EXPECT_TRUE(read_feature_csv(kWork / "b" / "target.csv").labels.empty());
}

TEST_F(Cli, SplitFixtureAndDefaults) {
  const fs::path csv = kWork / "six.csv";
  std::ofstream(csv) << "id,label,f0,f1\n"
                        "0,0,0,0\n1,0,0.3,0\n2,0,-0.4,0\n3,0,0,4\n4,0,0,-4.2\n5,0,9,0\n"
                        "6,1,100,-50\n7,1,100.3,-50\n8,1,99.6,-50\n9,1,100,-46\n10,1,100,-54.2\n11,1,109,-50\n";
  const auto o = pcda_run("split --features " + p(csv) + " --out " + p(kWork / "a.json"));
  ASSERT_EQ(o.code, 0) << o.err;
  const auto a = assignment_from_json(read_json(kWork / "a.json"));
  EXPECT_EQ(a.count(0), 6u);
  EXPECT_EQ(a.count(1), 4u);
  EXPECT_EQ(a.count(2), 2u);
  EXPECT_NE(o.out.find("category,tier,count,mean_distance"), std::string::npos);

  ASSERT_EQ(pcda_run("split --features " + p(csv) + " --k 40 --out " + p(kWork / "a40.json")).code, 0);
  EXPECT_EQ(slurp(kWork / "a.json"), slurp(kWork / "a40.json"));

  ASSERT_EQ(pcda_run("split --features " + p(csv) + " --clusters 1 --out " + p(kWork / "a1.json")).code, 0);
  EXPECT_EQ(assignment_from_json(read_json(kWork / "a1.json")).count(0), 12u);
}

TEST_F(Cli, SplitMalformedRowNamesLine) {
  const fs::path csv = kWork / "bad.csv";
  std::ofstream(csv) << "id,label,f0\n0,0,1.0\n1,0,oops\n";
  const auto o = pcda_run("split --features " + p(csv) + " --out " + p(kWork / "bad.json"));
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("bad.csv:3"), std::string::npos) << o.err;
}

TEST_F(Cli, TrainDannOnlyWritesNoAssignments) {
  const fs::path run = kWork / "dann";
  const auto o = pcda_run("train " + data_flags() + " --stage-epochs 5,0,0,0 --out " + p(run));
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(fs::exists(run / "config.json"));
  EXPECT_TRUE(fs::exists(run / "checkpoint_stage1.json"));
  EXPECT_EQ(read_metrics_jsonl(run / "metrics.jsonl").size(), 5u);
  for (const auto& entry : fs::directory_iterator(run)) {
    EXPECT_EQ(entry.path().filename().string().rfind("assignment_", 0), std::string::npos);
  }
}

TEST_F(Cli, TrainFullRunArtifactsAndEval) {
  const fs::path run = kWork / "full";
  const auto o = pcda_run("train " + data_flags() + " --stage-epochs 2,1,1,1 --ecl-weight 0 --out " + p(run));
  ASSERT_EQ(o.code, 0) << o.err;
  for (int s = 1; s <= 4; ++s) EXPECT_TRUE(fs::exists(run / ("checkpoint_stage" + std::to_string(s) + ".json")));
  for (int s = 2; s <= 4; ++s) EXPECT_TRUE(fs::exists(run / ("assignment_stage" + std::to_string(s) + ".json")));
  EXPECT_EQ(read_json(run / "config.json").at("ecl_weight"), 0.0);

  const auto ev = pcda_run("eval --checkpoint " + p(run / "checkpoint_stage4.json") + " --features " +
                           p(kWork / "data" / "target_eval.csv") + " --classifier target");
  ASSERT_EQ(ev.code, 0) << ev.err;
  const Json j = Json::parse(ev.out);
  const auto metrics = read_metrics_jsonl(run / "metrics.jsonl");
  EXPECT_EQ(j.at("accuracy").get<double>(), *metrics.back().acc_target);
  EXPECT_NE(pcda_run("eval --checkpoint " + p(run / "checkpoint_stage4.json") + " --features " +
                     p(kWork / "data" / "target.csv"))
                .code,
            0);
}

TEST_F(Cli, TrainIsDeterministicAndConfigEchoReproduces) {
  const std::string flags = data_flags() + " --stage-epochs 2,1,1,1 --seed 4";
  ASSERT_EQ(pcda_run("train " + flags + " --out " + p(kWork / "d1")).code, 0);
  ASSERT_EQ(pcda_run("train " + flags + " --out " + p(kWork / "d2")).code, 0);
  const std::string m1 = slurp(kWork / "d1" / "metrics.jsonl");
  EXPECT_FALSE(m1.empty());
  EXPECT_EQ(m1, slurp(kWork / "d2" / "metrics.jsonl"));
  ASSERT_EQ(pcda_run("train --config " + p(kWork / "d1" / "config.json") + " --out " + p(kWork / "d3")).code, 0);
  EXPECT_EQ(m1, slurp(kWork / "d3" / "metrics.jsonl"));
}

TEST_F(Cli, DivergentTrainingExitsTwoWithDiagnostic) {
  const fs::path run = kWork / "boom";
  const auto o = pcda_run("train " + data_flags() + " --stage-epochs 3,0,0,0 --eta0 1e6 --out " + p(run));
  EXPECT_EQ(o.code, 2);
  const std::string metrics = slurp(run / "metrics.jsonl");
  ASSERT_FALSE(metrics.empty());
  const std::string last = metrics.substr(metrics.rfind('\n', metrics.size() - 2) + 1);
  EXPECT_TRUE(Json::parse(last).contains("error")) << last;
}

TEST_F(Cli, ReportRowsAndEncodings) {
  std::string runs;
  for (int m = 1; m <= 3; ++m) {
    const fs::path run = kWork / ("model" + std::to_string(m));
    ASSERT_EQ(pcda_run("train " + data_flags() + " --stage-epochs 2,1,1,1 --curriculum-subsets " +
                       std::to_string(m) + " --out " + p(run))
                  .code,
              0);
    runs += " --run " + p(run);
  }
  const auto one = pcda_run("report --run " + p(kWork / "model3"));
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_EQ(std::count(one.out.begin(), one.out.end(), '\n'), 2);
  EXPECT_TRUE(fs::exists(kWork / "model3" / "pl_accuracy.csv"));

  const auto csv = pcda_run("report" + runs + " --format csv");
  const auto json = pcda_run("report" + runs + " --format json");
  ASSERT_EQ(csv.code, 0);
  ASSERT_EQ(json.code, 0);
  EXPECT_EQ(std::count(csv.out.begin(), csv.out.end(), '\n'), 4);
  const Json rows = Json::parse(json.out);
  ASSERT_EQ(rows.size(), 3u);
  std::istringstream lines(csv.out);
  std::string line;
  std::getline(lines, line);
  for (const auto& row : rows) {
    std::getline(lines, line);
    const auto metrics = read_metrics_jsonl(row.at("run").get<std::string>() + "/metrics.jsonl");
    EXPECT_EQ(row.at("final_acc_target").get<double>(), *metrics.back().acc_target);
    EXPECT_NE(line.find(format_double(row.at("final_acc_target").get<double>())), std::string::npos);
  }
  EXPECT_EQ(pcda_run("report --run " + p(kWork / "nowhere")).code, 2);
  EXPECT_EQ(pcda_run("report --run " + p(kWork / "model1") + " --format xml").code, 1);
}
