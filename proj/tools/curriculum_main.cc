// curriculum: generate cohorts, train the outcome model, simulate policies and
// benchmark LinUCB regret. Every stochastic command requires --seed and is a
// pure function of (flags, input files, seed).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "curriculum/dataset.h"
#include "curriculum/regret_bench.h"
#include "curriculum/serialization.h"
#include "curriculum/simulator.h"
#include "curriculum/synthetic.h"
#include "curriculum/world_model.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace curriculum;

namespace {

constexpr const char* kToolVersion = "0.1.0";

// Files written by the current subcommand; removed again if it fails.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  fs::path Claim(const std::string& name) {
    written_.push_back(dir_ / name);
    return written_.back();
  }
  void Write(const std::string& name, std::string_view text) {
    WriteTextFile(Claim(name), text);
  }
  void RemoveAll() {
    std::error_code ec;
    for (const auto& p : written_) {
      fs::remove(p, ec);
      fs::remove(fs::path(p) += ".tmp", ec);
    }
  }
  const fs::path& dir() const { return dir_; }
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& p : written_) out.push_back(p.filename().string());
    return out;
  }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
};

struct Manifest {
  std::string subcommand;
  std::vector<std::string> args;
  nlohmann::ordered_json resolved;
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
};

void WriteManifest(OutputSet& out, const Manifest& m) {
  nlohmann::ordered_json doc;
  doc["tool"] = "curriculum";
  doc["version"] = kToolVersion;
  doc["subcommand"] = m.subcommand;
  doc["args"] = m.args;
  doc["seed"] = m.seed;
  doc["resolved"] = m.resolved;
  doc["inputs"] = m.inputs;
  doc["outputs"] = out.names();
  out.Write("manifest", doc.dump(2) + "\n");
}

RewardConfig ParseRewards(const std::string& text, double mcq_penalty) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw CLI::ValidationError("--rewards", "'" + item + "' is not a number");
    }
    v.push_back(x);
  }
  if (v.size() != 4) {
    throw CLI::ValidationError(
        "--rewards", "expected 4 values: instant_success,eventual_success,"
                     "eventual_failure,skip");
  }
  RewardConfig cfg{v[0], v[1], v[2], v[3], mcq_penalty};
  if (!cfg.IsFinite()) throw CLI::ValidationError("--rewards", "values must be finite");
  return cfg;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// --- gen-data -------------------------------------------------------------

struct GenDataFlags {
  int students = 200;
  int units = 4;
  int exercises_per_unit = 12;
  std::string model = "planted";
  double hard_fraction = 0.35;
  double attempt_min = 0.2;
  double attempt_max = 0.5;
  std::uint64_t seed = 0;
  std::string out;
};

void RunGenData(const GenDataFlags& f, Manifest& m, OutputSet& out) {
  SyntheticConfig cfg = StandardCohortConfig(f.seed);
  cfg.n_students = f.students;
  cfg.n_units = f.units;
  cfg.exercises_per_unit = f.exercises_per_unit;
  cfg.hard_exercise_fraction = f.hard_fraction;
  cfg.attempt_fraction_min = f.attempt_min;
  cfg.attempt_fraction_max = f.attempt_max;
  if (f.model == "prior") cfg.planted_weights.reset();
  const Dataset ds = GenerateSynthetic(cfg);

  SaveDataset(ds, out.Claim(kAttemptsFile), out.Claim(kCatalogFile),
              out.Claim(kUnitsFile));
  m.resolved = {{"students", f.students},
                {"units", f.units},
                {"exercises_per_unit", f.exercises_per_unit},
                {"model", f.model},
                {"hard_fraction", f.hard_fraction},
                {"attempt_fraction_min", f.attempt_min},
                {"attempt_fraction_max", f.attempt_max},
                {"attempts_written", ds.attempts.size()}};
  WriteManifest(out, m);
}

// --- train-world-model ----------------------------------------------------

struct TrainFlags {
  std::string data;
  int folds = 5;
  TrainingHyperparams hp;
  std::string out;
};

void RunTrain(const TrainFlags& f, Manifest& m, OutputSet& out) {
  const Dataset ds = LoadDatasetDir(f.data);
  const FeatureLayout layout = FeatureLayout::FromExercises(ds.catalog);
  const CrossValidationReport cv =
      CrossValidate(ds.attempts, ds.catalog, layout, f.hp, f.folds);
  const WorldModel model = Train(ds.attempts, ds.catalog, layout, f.hp);

  out.Write("world_model.json", WorldModelToJson(model));
  out.Write("cv_report.json", CrossValidationToJson(cv, f.hp, f.folds));
  m.inputs = {f.data};
  m.resolved = {{"data", f.data},
                {"folds", f.folds},
                {"l2", f.hp.l2},
                {"learning_rate", f.hp.learning_rate},
                {"epochs", f.hp.epochs},
                {"accuracy", cv.accuracy},
                {"majority_baseline", cv.majority_baseline}};
  WriteManifest(out, m);
  std::printf("cv accuracy %.4f, majority baseline %.4f over %d folds\n",
              cv.accuracy, cv.majority_baseline, f.folds);
}

// --- simulate / compare ---------------------------------------------------

struct SimulateFlags {
  std::string data;
  std::string model;
  std::string policies;
  int runs = 20;
  double alpha = 1.0;
  double lambda = 1.0;
  double mcq_penalty = 0.4;
  std::string rewards = "1.5,1.0,0.5,0.0";
  std::string outcomes = "live";
  int threads = 1;
  std::uint64_t seed = 0;
  std::string out;
};

void RunSimulate(const SimulateFlags& f, Manifest& m, OutputSet& out) {
  const std::vector<std::string> policies = SplitList(f.policies);
  if (policies.empty()) throw CLI::ValidationError("--policies", "no policy given");
  for (const auto& p : policies) CheckPolicyId(p);

  const Dataset ds = LoadDatasetDir(f.data);
  std::optional<WorldModel> model;
  if (!f.model.empty()) model = WorldModelFromJson(ReadTextFile(f.model));

  CohortOptions opt;
  opt.alpha = f.alpha;
  opt.lambda = f.lambda;
  opt.rewards = ParseRewards(f.rewards, f.mcq_penalty);
  opt.outcome_mode = f.outcomes == "static" ? OutcomeMode::kStatic : OutcomeMode::kLive;
  opt.threads = f.threads;

  std::vector<CohortReport> reports;
  std::optional<LinUcb> bandit;
  for (const auto& p : policies) {
    CohortResult r = RunCohort(ds, p, model ? &*model : nullptr, opt, f.runs, f.seed);
    if (r.final_bandit) bandit = std::move(r.final_bandit);
    std::printf("%-9s success %.4f  skip %.4f  fail %.4f  mcq %.4f  (max dev %.4f)\n",
                p.c_str(), r.report.mean.success_rate, r.report.mean.skip_rate,
                r.report.mean.fail_rate, r.report.mean.mcq_frequency,
                r.report.max_abs_deviation.success_rate);
    reports.push_back(std::move(r.report));
  }

  out.Write("report.csv", CohortReportsToCsv(reports));
  out.Write("report.json", CohortReportsToJson(reports));
  if (bandit) {
    const FeatureLayout layout =
        model ? model->layout : FeatureLayout::FromExercises(ds.catalog);
    out.Write("bandit.json", BanditToJson(*bandit, layout));
  }
  m.inputs = {f.data};
  if (!f.model.empty()) m.inputs.push_back(f.model);
  m.resolved = {{"data", f.data},         {"model", f.model},
                {"policies", policies},   {"runs", f.runs},
                {"alpha", f.alpha},       {"lambda", f.lambda},
                {"mcq_penalty", f.mcq_penalty}, {"rewards", f.rewards},
                {"outcomes", f.outcomes}};
  WriteManifest(out, m);
}

// --- bench-regret ---------------------------------------------------------

void RunBench(const RegretBenchConfig& cfg, Manifest& m, OutputSet& out) {
  const RegretBenchResult r = RunRegretBench(cfg);
  const auto half = r.linucb.size() / 2;
  const double first_half = half ? r.linucb[half - 1] : 0.0;
  const double second_half = r.linucb.back() - first_half;

  out.Write("regret.csv", RegretCurveCsv(r.linucb));
  out.Write("regret_uniform.csv", RegretCurveCsv(r.uniform_random));
  nlohmann::ordered_json summary;
  summary["final_regret"] = r.linucb.back();
  summary["uniform_random_final_regret"] = r.uniform_random.back();
  summary["ratio"] = r.uniform_random.back() > 0.0
                         ? r.linucb.back() / r.uniform_random.back()
                         : 0.0;
  summary["first_half_regret"] = first_half;
  summary["second_half_regret"] = second_half;
  out.Write("summary.json", summary.dump(2) + "\n");
  m.resolved = {{"d", cfg.d},         {"arms", cfg.arms},   {"horizon", cfg.horizon},
                {"noise", cfg.noise}, {"alpha", cfg.alpha}, {"lambda", cfg.lambda}};
  WriteManifest(out, m);
  std::printf("final regret %.4f (uniform random %.4f)\n", r.linucb.back(),
              r.uniform_random.back());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curriculum sequencing with a LinUCB contextual bandit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  GenDataFlags gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic cohort");
  gen_cmd->add_option("--students", gen.students)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--units", gen.units)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--exercises-per-unit", gen.exercises_per_unit)
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--model", gen.model, "Outcome source: planted or prior")
      ->check(CLI::IsMember({"planted", "prior"}));
  gen_cmd->add_option("--hard-fraction", gen.hard_fraction)->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--attempt-fraction-min", gen.attempt_min);
  gen_cmd->add_option("--attempt-fraction-max", gen.attempt_max);
  gen_cmd->add_option("--seed", gen.seed)->required();
  gen_cmd->add_option("--out", gen.out)->required();

  TrainFlags train;
  auto* train_cmd =
      app.add_subcommand("train-world-model", "Fit and cross-validate the outcome model");
  train_cmd->add_option("--data", train.data, "Dataset directory")->required();
  train_cmd->add_option("--folds", train.folds)->check(CLI::Range(2, 1 << 30));
  train_cmd->add_option("--l2", train.hp.l2)->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--learning-rate", train.hp.learning_rate)
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--epochs", train.hp.epochs)->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--seed", train.hp.seed)->required();
  train_cmd->add_option("--out", train.out)->required();

  SimulateFlags sim;
  auto add_sim_flags = [&](CLI::App* cmd) {
    cmd->add_option("--data", sim.data, "Dataset directory")->required();
    cmd->add_option("--model", sim.model, "World model checkpoint");
    cmd->add_option("--runs", sim.runs)->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", sim.alpha)->check(CLI::NonNegativeNumber);
    cmd->add_option("--lambda", sim.lambda)->check(CLI::PositiveNumber);
    cmd->add_option("--mcq-penalty", sim.mcq_penalty);
    cmd->add_option("--rewards", sim.rewards,
                    "instant_success,eventual_success,eventual_failure,skip");
    cmd->add_option("--outcomes", sim.outcomes, "live or static")
        ->check(CLI::IsMember({"live", "static"}));
    cmd->add_option("--threads", sim.threads)->check(CLI::PositiveNumber);
    cmd->add_option("--seed", sim.seed)->required();
    cmd->add_option("--out", sim.out)->required();
  };
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate one policy over the cohort");
  add_sim_flags(sim_cmd);
  sim_cmd->add_option("--policy", sim.policies, "random, heuristic or linucb")->required();
  auto* cmp_cmd = app.add_subcommand("compare", "Simulate several policies");
  add_sim_flags(cmp_cmd);
  sim.policies = "random,heuristic,linucb";
  cmp_cmd->add_option("--policies", sim.policies, "Comma-separated policy ids");

  RegretBenchConfig bench;
  std::string bench_out;
  auto* bench_cmd =
      app.add_subcommand("bench-regret", "LinUCB regret on a synthetic linear bandit");
  bench_cmd->add_option("--d", bench.d)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--arms", bench.arms)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--horizon", bench.horizon)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--noise", bench.noise)->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--alpha", bench.alpha)->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--lambda", bench.lambda)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench.seed)->required();
  bench_cmd->add_option("--out", bench_out)->required();

  CLI11_PARSE(app, argc, argv);

  CLI::App* cmd = app.get_subcommands().front();
  Manifest manifest;
  manifest.subcommand = cmd->get_name();
  for (int i = 2; i < argc; ++i) manifest.args.emplace_back(argv[i]);

  std::string out_dir;
  if (cmd == gen_cmd) out_dir = gen.out;
  if (cmd == train_cmd) out_dir = train.out;
  if (cmd == sim_cmd || cmd == cmp_cmd) out_dir = sim.out;
  if (cmd == bench_cmd) out_dir = bench_out;

  OutputSet out(out_dir);
  try {
    fs::create_directories(out_dir);
    if (cmd == gen_cmd) {
      manifest.seed = gen.seed;
      RunGenData(gen, manifest, out);
    } else if (cmd == train_cmd) {
      manifest.seed = train.hp.seed;
      RunTrain(train, manifest, out);
    } else if (cmd == sim_cmd || cmd == cmp_cmd) {
      manifest.seed = sim.seed;
      RunSimulate(sim, manifest, out);
    } else {
      manifest.seed = bench.seed;
      RunBench(bench, manifest, out);
    }
  } catch (const CLI::Error& e) {
    out.RemoveAll();
    return app.exit(e);
  } catch (const std::exception& e) {
    out.RemoveAll();
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
