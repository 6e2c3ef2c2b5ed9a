// boxmon: build, run, tune and evaluate box-abstraction runtime monitors from feature CSV files.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "boxmon/commands.hpp"

namespace {

using namespace boxmon;
using namespace boxmon::cli;

struct Flags {
  std::string train, test, monitor, out;
  std::string classes;
  int layer = 0;
  std::string taus;
  std::optional<double> tau, tau_correct, tau_incorrect;
  std::optional<std::uint64_t> resolution;
  double eps_cov = 0.01;
  double eps_ival = 0.01;
  std::uint64_t seed = 42;
  int restarts = 10;
  int class_count = 0;
  bool keep_order = false;
  std::string set = "good";
};

ClusteringConfig clustering(const Flags& f) {
  ClusteringConfig c;
  c.seed = f.seed;
  c.restarts = f.restarts;
  return c;
}

std::vector<double> taus(const Flags& f) {
  return f.taus.empty() ? kDefaultTaus : parse_tau_list(f.taus, !f.keep_order);
}

int single_class(const Flags& f) {
  const auto ids = parse_class_list(f.classes);
  if (ids.size() != 1) throw Error(ErrorCode::InvalidArgument, "--class takes exactly one class id here");
  return ids.front();
}

void emit(const Flags& f, const std::string& text) {
  if (f.out.empty()) {
    std::cout << text;
  } else {
    write_atomic(f.out, text);
  }
}

int run_build(const Flags& f) {
  BuildOptions opt;
  if (!f.classes.empty()) opt.classes = parse_class_list(f.classes);
  opt.layer = f.layer;
  if (!f.tau && !f.tau_correct && !f.tau_incorrect) {
    throw Error(ErrorCode::InvalidArgument, "give --tau or --tau-correct/--tau-incorrect");
  }
  opt.tau_correct = f.tau_correct.value_or(f.tau.value_or(1.0));
  opt.tau_incorrect = f.tau_incorrect.value_or(f.tau.value_or(1.0));
  opt.resolution = f.resolution;
  opt.clustering = clustering(f);
  const FeatureFile train = read_feature_file(f.train, f.class_count);
  emit(f, cmd_build(train, opt, std::cerr));
  return kExitOk;
}

int run_run(const Flags& f) {
  const MonitorSet monitors = deserialize_monitor(read_text(f.monitor));
  const FeatureFile test = read_feature_file(f.test, f.class_count);
  emit(f, cmd_run(monitors, test, std::cerr));
  return kExitOk;
}

int run_coverage(const Flags& f) {
  CoverageOptions opt;
  opt.class_id = single_class(f);
  opt.taus = taus(f);
  opt.resolution = f.resolution;
  opt.clustering = clustering(f);
  const FeatureFile train = read_feature_file(f.train, f.class_count);
  emit(f, cmd_coverage(train, opt));
  return kExitOk;
}

int run_tune(const Flags& f) {
  TuneOptions opt;
  opt.class_id = single_class(f);
  opt.bad_set = f.set == "bad";
  opt.tune = {f.eps_cov, f.eps_ival};
  opt.resolution = f.resolution;
  opt.clustering = clustering(f);
  const FeatureFile train = read_feature_file(f.train, f.class_count);
  const std::string report = cmd_tune(train, opt, std::cerr);
  emit(f, report);
  return kExitOk;
}

int run_eval(const Flags& f) {
  const FeatureFile test = read_feature_file(f.test, f.class_count);
  const int y = single_class(f);
  if (!f.monitor.empty()) {
    emit(f, cmd_eval(deserialize_monitor(read_text(f.monitor)), test, y));
    return kExitOk;
  }
  if (f.train.empty()) throw Error(ErrorCode::InvalidArgument, "eval needs --monitor or --train");
  EvalOptions opt;
  opt.class_id = y;
  opt.layer = f.layer;
  opt.taus = taus(f);
  opt.resolution = f.resolution;
  opt.clustering = clustering(f);
  emit(f, cmd_eval(read_feature_file(f.train, f.class_count), test, opt));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Box-abstraction runtime monitors for classification networks"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", f.seed, "k-means seed")->capture_default_str();
    sub->add_option("--restarts", f.restarts, "k-means restarts per k")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--classes", f.class_count, "declared number of classes (0 = infer)");
    sub->add_option("--out", f.out, "output file (stdout when omitted)");
  };

  auto* build = app.add_subcommand("build", "build monitors from training features");
  build->add_option("--train", f.train, "training feature CSV")->required();
  build->add_option("--class", f.classes, "class id or comma list (default: all)");
  build->add_option("--layer", f.layer, "monitored layer id")->capture_default_str();
  build->add_option("--tau", f.tau, "tau for both feature sets")->check(CLI::Range(0.0, 1.0));
  build->add_option("--tau-correct", f.tau_correct, "tau for correctly classified features")->check(CLI::Range(0.0, 1.0));
  build->add_option("--tau-incorrect", f.tau_incorrect, "tau for misclassified features")->check(CLI::Range(0.0, 1.0));
  build->add_option("--resolution", f.resolution, "recorded grid resolution")->check(CLI::PositiveNumber);
  common(build);

  auto* run = app.add_subcommand("run", "run a monitor file over test features");
  run->add_option("--monitor", f.monitor, "monitor JSON")->required();
  run->add_option("--test", f.test, "test feature CSV")->required();
  common(run);

  auto* coverage = app.add_subcommand("coverage", "clustering coverage bounds over a tau list");
  coverage->add_option("--train", f.train, "training feature CSV")->required();
  coverage->add_option("--class", f.classes, "class id")->required();
  coverage->add_option("--tau", f.taus, "comma-separated tau list");
  coverage->add_option("--resolution", f.resolution, "cells per dimension (default: set size)")->check(CLI::PositiveNumber);
  coverage->add_flag("--keep-order", f.keep_order, "process taus in the given order");
  common(coverage);

  auto* tune = app.add_subcommand("tune", "bisection search for tau_min and tau_max");
  tune->add_option("--train", f.train, "training feature CSV")->required();
  tune->add_option("--class", f.classes, "class id")->required();
  tune->add_option("--eps-cov", f.eps_cov, "coverage difference threshold")->capture_default_str();
  tune->add_option("--eps-ival", f.eps_ival, "interval length threshold")->capture_default_str();
  tune->add_option("--resolution", f.resolution, "cells per dimension (default: set size)")->check(CLI::PositiveNumber);
  tune->add_option("--set", f.set, "feature set to tune on")->check(CLI::IsMember({"good", "bad"}))->capture_default_str();
  common(tune);

  auto* eval = app.add_subcommand("eval", "precision/recall sweep over a tau list");
  eval->add_option("--train", f.train, "training feature CSV (builds a monitor per tau)");
  eval->add_option("--monitor", f.monitor, "evaluate an existing monitor file instead");
  eval->add_option("--test", f.test, "test feature CSV")->required();
  eval->add_option("--class", f.classes, "class id")->required();
  eval->add_option("--layer", f.layer, "monitored layer id")->capture_default_str();
  eval->add_option("--tau", f.taus, "comma-separated tau list");
  eval->add_option("--resolution", f.resolution, "cells per dimension (default: set size)")->check(CLI::PositiveNumber);
  eval->add_flag("--keep-order", f.keep_order, "process taus in the given order");
  common(eval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*build) return run_build(f);
    if (*run) return run_run(f);
    if (*coverage) return run_coverage(f);
    if (*tune) return run_tune(f);
    if (*eval) return run_eval(f);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
  return kExitInternalError;
}
