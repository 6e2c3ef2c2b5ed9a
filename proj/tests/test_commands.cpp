#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "boxmon/commands.hpp"
#include "fixtures.hpp"

using namespace boxmon;
using namespace boxmon::cli;

namespace {

FeatureFile file_of(std::vector<FeatureRecord> records) {
  FeatureFile f;
  f.records = std::move(records);
  f.dim = f.records.empty() ? 0 : f.records.front().features.size();
  int max_label = -1;
  for (const auto& r : f.records) max_label = std::max({max_label, r.true_label, r.predicted_label});
  f.class_count = max_label + 1;
  return f;
}

FeatureFile toy_file() { return file_of(boxmon::testing::toy_network_records()); }

BuildOptions toy_build() {
  BuildOptions opt;
  opt.classes = {1};
  opt.layer = 2;
  opt.tau_correct = boxmon::testing::kToyTauCorrect;
  opt.tau_incorrect = boxmon::testing::kToyTauIncorrect;
  return opt;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<FeatureRecord> blob_records(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<FeatureRecord> out;
  const auto pts = boxmon::testing::blobs(gen, {{0, 0}, {3, 0}, {0, 3}}, 20, 0.4);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int y = static_cast<int>(i / 20);
    out.push_back({pts[i], y, (i % 9 == 4) ? (y + 1) % 3 : y});
  }
  return out;
}

}  // namespace

TEST(CmdBuild, ToyNetworkMonitor) {
  std::ostringstream log;
  const MonitorSet set = deserialize_monitor(cmd_build(toy_file(), toy_build(), log));
  ASSERT_EQ(set.classes.size(), 1u);
  const ClassMonitor& m = set.classes.at(1);
  ASSERT_EQ(m.correct_boxes.size(), 2u);
  EXPECT_EQ(m.correct_boxes[0], Box({{0.078, 0.222}, {0.062, 0.162}}));
  EXPECT_EQ(m.correct_boxes[1], Box({{0.69, 0.79}, {0.61, 0.71}}));
  ASSERT_EQ(m.incorrect_boxes.size(), 1u);
  EXPECT_EQ(m.incorrect_boxes[0], Box({{0.289, 0.389}, {0.281, 0.381}}));
  EXPECT_NE(log.str().find("class 1: 2 correct boxes, 1 incorrect boxes"), std::string::npos);
}

TEST(CmdBuild, OneRecordGivesDegenerateBox) {
  std::ostringstream log;
  BuildOptions opt;
  const MonitorSet set = deserialize_monitor(cmd_build(parse_feature_csv("0,0,0.5,0.25\n"), opt, log));
  ASSERT_EQ(set.classes.at(0).correct_boxes.size(), 1u);
  EXPECT_EQ(set.classes.at(0).correct_boxes[0], Box::point(Vector{0.5, 0.25}));
}

TEST(CmdBuild, RejectsBadTau) {
  std::ostringstream log;
  BuildOptions opt = toy_build();
  opt.tau_correct = 1.5;
  EXPECT_THROW(cmd_build(toy_file(), opt, log), Error);
}

TEST(CmdRun, ToyInputs) {
  std::ostringstream log;
  const MonitorSet set = deserialize_monitor(cmd_build(toy_file(), toy_build(), log));
  const FeatureFile test = file_of({{{0.14, 0.13}, 1, 1}, {{0.58, 0.56}, -1, 1}});
  RunSummary s;
  const auto lines = lines_of(cmd_run(set, test, log, &s));
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "# seed=42 resolution=default");
  EXPECT_EQ(lines[1], "row,predicted,verdict");
  EXPECT_EQ(lines[2], "1,1,accept");
  EXPECT_EQ(lines[3], "2,1,reject");
  EXPECT_EQ(s.accept, 1u);
  EXPECT_EQ(s.reject, 1u);
}

TEST(CmdRun, EmptyTestFile) {
  std::ostringstream log;
  const MonitorSet set = deserialize_monitor(cmd_build(toy_file(), toy_build(), log));
  RunSummary s;
  const auto lines = lines_of(cmd_run(set, parse_feature_csv(""), log, &s));
  EXPECT_EQ(lines.size(), 2u);
  EXPECT_EQ(s.accept + s.reject + s.uncertainty + s.unknown_class, 0u);
  EXPECT_NE(log.str().find("accept=0 reject=0 uncertainty=0 unknown_class=0"), std::string::npos);
}

TEST(CmdRun, PredictionWithoutMonitorWarns) {
  std::ostringstream log;
  const MonitorSet set = deserialize_monitor(cmd_build(toy_file(), toy_build(), log));
  RunSummary s;
  const auto lines = lines_of(cmd_run(set, file_of({{{0.14, 0.13}, 7, 7}}), log, &s));
  EXPECT_EQ(lines.back(), "1,7,unknown_class");
  EXPECT_EQ(s.unknown_class, 1u);
  EXPECT_NE(log.str().find("warning: row 1"), std::string::npos);
}

TEST(CmdRun, MatchesLibraryVerdicts) {
  const auto train = blob_records(3);
  const auto test = blob_records(4);
  BuildOptions opt;
  opt.tau_correct = 0.2;
  opt.tau_incorrect = 0.5;
  std::ostringstream log;
  const MonitorSet set = deserialize_monitor(cmd_build(file_of(train), opt, log));
  const std::vector<int> ids{0, 1, 2};
  const MonitorSet direct = build_monitor_set(train, ids, 0, 0.2, 0.5, ClusteringConfig{});
  const auto lines = lines_of(cmd_run(set, file_of(test), log));
  ASSERT_EQ(lines.size(), test.size() + 2);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const std::string expected = std::to_string(i + 1) + "," + std::to_string(test[i].predicted_label) + "," +
                                 std::string(to_string(run_monitor(direct, test[i])));
    EXPECT_EQ(lines[i + 2], expected);
  }
}

TEST(CmdCoverage, TauOneIsFull) {
  CoverageOptions opt;
  opt.class_id = 1;
  opt.taus = {1.0};
  const auto lines = lines_of(cmd_coverage(toy_file(), opt));
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[1], "tau,set,cov_lo,cov_hi,rel_diff");
  EXPECT_EQ(lines[2], "1,good,1,1,0");
  EXPECT_EQ(lines[3], "1,bad,1,1,0");
}

TEST(CmdCoverage, FivePointPartition) {
  std::vector<FeatureRecord> records;
  for (const auto& p : boxmon::testing::five_points()) records.push_back({p, 0, 0});
  CoverageOptions opt;
  opt.taus = {0.6};
  const auto lines = lines_of(cmd_coverage(file_of(records), opt));
  EXPECT_EQ(lines[2], "0.6,good,0.28,0.28,0");
  EXPECT_EQ(lines[3], "0.6,bad,,,");
}

TEST(CmdTune, TraceLengths) {
  const FeatureFile same = file_of(std::vector<FeatureRecord>(5, FeatureRecord{{0.3, 0.3}, 0, 0}));
  TuneOptions opt;
  opt.tune.eps_ival = 1.0 / 64.0;
  std::ostringstream log;
  const auto j = nlohmann::json::parse(cmd_tune(same, opt, log));
  EXPECT_EQ(j["trace_tau_max"].size(), 6u);
  EXPECT_EQ(j["trace_tau_min"].size(), 6u);
  EXPECT_GE(j["tau_min"].get<double>(), 0.0);
  EXPECT_LE(j["tau_max"].get<double>(), 1.0);
  opt.bad_set = true;
  EXPECT_THROW(cmd_tune(same, opt, log), Error);
}

TEST(CmdTune, SeparatedBlobsGiveOrderedBounds) {
  TuneOptions opt;
  std::ostringstream log;
  const auto j = nlohmann::json::parse(cmd_tune(file_of(blob_records(8)), opt, log));
  EXPECT_LE(j["tau_min"].get<double>(), j["tau_max"].get<double>());
  EXPECT_EQ(j["coverage_tau1"].get<double>(), 1.0);
}

TEST(CmdEval, SweepAndPrebuiltMonitor) {
  EvalOptions opt;
  opt.class_id = 1;
  opt.layer = 2;
  opt.taus = {1.0, 0.7};
  auto test = boxmon::testing::toy_network_records();
  const auto lines = lines_of(cmd_eval(toy_file(), file_of(test), opt));
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[1], kSweepCsvHeader);
  EXPECT_EQ(lines[2].substr(0, 2), "1,");

  std::ostringstream log;
  const MonitorSet set = deserialize_monitor(cmd_build(toy_file(), toy_build(), log));
  const auto single = lines_of(cmd_eval(set, file_of(test), 1));
  ASSERT_EQ(single.size(), 3u);
  EXPECT_EQ(single[2], "0.7,,,,,4,0,0,0,2,0,1,1,1,1");
  EXPECT_THROW(cmd_eval(set, file_of(test), 5), Error);
}

TEST(Commands, Deterministic) {
  const FeatureFile train = file_of(blob_records(11));
  const FeatureFile test = file_of(blob_records(12));
  EvalOptions opt;
  EXPECT_EQ(cmd_eval(train, test, opt), cmd_eval(train, test, opt));
  std::ostringstream log;
  BuildOptions b;
  b.tau_correct = b.tau_incorrect = 0.1;
  EXPECT_EQ(cmd_build(train, b, log), cmd_build(train, b, log));
}

TEST(Commands, ListParsing) {
  EXPECT_EQ(parse_tau_list("0.1,1,0.5,0.1"), (std::vector<double>{1.0, 0.5, 0.1}));
  EXPECT_EQ(parse_tau_list("0.1,1", false), (std::vector<double>{0.1, 1.0}));
  EXPECT_THROW(parse_tau_list("0.1,,0.2"), Error);
  EXPECT_THROW(parse_tau_list("1.1"), Error);
  EXPECT_EQ(parse_class_list("3,0,3"), (std::vector<int>{3, 0}));
  EXPECT_THROW(parse_class_list("-1"), Error);
}

TEST(Commands, AtomicWrite) {
  const auto dir = std::filesystem::temp_directory_path() / "boxmon_atomic_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "out.csv").string();
  write_atomic(path, "first\n");
  write_atomic(path, "second\n");
  EXPECT_EQ(read_text(path), "second\n");
  EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove_all(dir);
}

#ifdef BOXMON_CLI_PATH
namespace {

int run_cli(const std::string& args) {
  const int status = std::system((std::string(BOXMON_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(CliBinary, ExitCodes) {
  const auto dir = std::filesystem::temp_directory_path() / "boxmon_cli_test";
  std::filesystem::create_directories(dir);
  const std::string good = (dir / "good.csv").string();
  const std::string bad = (dir / "bad.csv").string();
  const std::string monitor = (dir / "m.json").string();
  write_atomic(good, "1,1,0.078,0.062\n1,1,0.222,0.162\n1,1,0.69,0.61\n1,1,0.79,0.71\n"
                     "2,1,0.289,0.281\n2,1,0.389,0.381\n2,2,0.566,0.614\n2,2,0.666,0.714\n");
  write_atomic(bad, "0,0,1,2\n0,0,1\n");
  EXPECT_EQ(run_cli("build --train " + good + " --class 1 --layer 2 --tau-correct 0.7 --tau-incorrect 1 --out " + monitor), 0);
  EXPECT_EQ(deserialize_monitor(read_text(monitor)).classes.at(1).correct_boxes.size(), 2u);
  EXPECT_EQ(run_cli("run --monitor " + monitor + " --test " + good), 0);
  EXPECT_EQ(run_cli("build --train " + bad + " --tau 1"), kExitInputError);
  EXPECT_EQ(run_cli("build --train " + good), kExitInputError);
  EXPECT_EQ(run_cli("coverage --train " + good + " --class 1 --tau 2"), kExitInputError);
  EXPECT_EQ(run_cli("no-such-command"), kExitInputError);
  std::filesystem::remove_all(dir);
}
#endif
