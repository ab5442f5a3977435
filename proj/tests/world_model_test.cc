#include "curriculum/world_model.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <stdexcept>

#include "curriculum/rng.h"
#include "curriculum/synthetic.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace curriculum {
namespace {

using testing::MakeAttempt;
using testing::MakeExercise;

Dataset SmallPlanted(int students, std::uint64_t seed) {
  SyntheticConfig cfg = StandardCohortConfig(seed);
  cfg.n_students = students;
  return GenerateSynthetic(cfg);
}

FeatureLayout LayoutOf(const Dataset& ds) { return FeatureLayout::FromExercises(ds.catalog); }

// Straight-line softmax over w * x, written without Eigen reductions.
std::array<double, kNumOutcomes> SoftmaxOracle(const Eigen::MatrixXd& w,
                                               const Eigen::VectorXd& x) {
  std::array<double, kNumOutcomes> logits{};
  for (int k = 0; k < kNumOutcomes; ++k) {
    double z = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) z += w(k, j) * x[j];
    logits[k] = z;
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& z : logits) total += (z = std::exp(z - m));
  for (double& z : logits) z /= total;
  return logits;
}

TEST(SoftmaxObjectiveTest, GradientMatchesCentralDifferences) {
  const Dataset ds = SmallPlanted(30, 3);
  const FeatureLayout layout = LayoutOf(ds);
  const TrainingSet data = BuildTrainingSet(ds.attempts, ds.catalog, layout);
  const SoftmaxObjective objective(data, 1e-3);
  Rng rng(12345);
  const double h = 1e-5;
  for (int point = 0; point < 20; ++point) {
    Eigen::MatrixXd w(kNumOutcomes, static_cast<Eigen::Index>(layout.dimension()));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.Normal();
    const Eigen::MatrixXd analytic = objective.Gradient(w);
    Eigen::MatrixXd numeric(w.rows(), w.cols());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      Eigen::MatrixXd plus = w, minus = w;
      plus.data()[i] += h;
      minus.data()[i] -= h;
      numeric.data()[i] = (objective.Loss(plus) - objective.Loss(minus)) / (2 * h);
    }
    const double rel = (analytic - numeric).norm() / std::max(analytic.norm(), numeric.norm());
    EXPECT_LT(rel, 1e-5) << "point " << point;
  }
}

TEST(SoftmaxObjectiveTest, LossAtZeroIsLogFive) {
  const Dataset ds = SmallPlanted(10, 1);
  const FeatureLayout layout = LayoutOf(ds);
  const TrainingSet data = BuildTrainingSet(ds.attempts, ds.catalog, layout);
  const Eigen::MatrixXd zero =
      Eigen::MatrixXd::Zero(kNumOutcomes, static_cast<Eigen::Index>(layout.dimension()));
  EXPECT_NEAR(SoftmaxObjective(data, 0.5).Loss(zero), std::log(5.0), 1e-12);
}

TEST(TrainTest, LossNonIncreasingWithSmallStep) {
  const Dataset ds = SmallPlanted(60, 4);
  const FeatureLayout layout = LayoutOf(ds);
  const TrainingSet data = BuildTrainingSet(ds.attempts, ds.catalog, layout);
  TrainingHyperparams hp;
  hp.learning_rate = 0.01;
  hp.epochs = 300;
  std::vector<double> history;
  Fit(data, layout, hp, &history);
  ASSERT_EQ(history.size(), 300u);
  for (std::size_t i = 1; i < history.size(); ++i) {
    EXPECT_LE(history[i], history[i - 1]) << "epoch " << i;
  }
}

TEST(TrainTest, RowOrderDoesNotChangeWeights) {
  const Dataset ds = SmallPlanted(40, 5);
  const FeatureLayout layout = LayoutOf(ds);
  std::vector<AttemptRecord> shuffled = ds.attempts;
  Rng rng(77);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  TrainingHyperparams hp;
  hp.epochs = 100;
  const WorldModel a = Train(ds.attempts, ds.catalog, layout, hp);
  const WorldModel b = Train(shuffled, ds.catalog, layout, hp);
  EXPECT_EQ(a.weights, b.weights);
}

TEST(TrainTest, SameSeedGivesBitwiseIdenticalWeights) {
  const Dataset ds = SmallPlanted(40, 6);
  const FeatureLayout layout = LayoutOf(ds);
  TrainingHyperparams hp;
  hp.epochs = 100;
  hp.seed = 9;
  const WorldModel a = Train(ds.attempts, ds.catalog, layout, hp);
  const WorldModel b = Train(ds.attempts, ds.catalog, layout, hp);
  ASSERT_EQ(a.weights.size(), b.weights.size());
  EXPECT_EQ(0, std::memcmp(a.weights.data(), b.weights.data(),
                           sizeof(double) * static_cast<std::size_t>(a.weights.size())));
  EXPECT_EQ(a.final_loss, b.final_loss);
}

TEST(TrainTest, AllInstantSuccessLabelsDominatePredictions) {
  Dataset ds = SmallPlanted(40, 7);
  for (auto& a : ds.attempts) a.outcome = Outcome::kInstantSuccess;
  const FeatureLayout layout = LayoutOf(ds);
  const WorldModel model = Train(ds.attempts, ds.catalog, layout, {});
  const TrainingSet data = BuildTrainingSet(ds.attempts, ds.catalog, layout);
  for (std::size_t i = 0; i < data.size(); ++i) {
    ContextVector x{data.features.row(static_cast<Eigen::Index>(i)).transpose(),
                    layout.fingerprint()};
    EXPECT_GT(Predict(model, x)[Outcome::kInstantSuccess], 0.9);
  }
  const auto table = PredictMissing(model, ds);
  ASSERT_FALSE(table.empty());
  for (const auto& [key, dist] : table) EXPECT_GT(dist[Outcome::kInstantSuccess], 0.9);
}

TEST(TrainTest, RejectsEmptyAndDivergentTraining) {
  const Dataset ds = SmallPlanted(10, 8);
  const FeatureLayout layout = LayoutOf(ds);
  EXPECT_THROW(Train(std::span<const AttemptRecord>{}, ds.catalog, layout, {}),
               std::invalid_argument);
  TrainingHyperparams hp;
  hp.learning_rate = 1e200;
  hp.epochs = 5;
  try {
    Train(ds.attempts, ds.catalog, layout, hp);
    FAIL() << "expected divergence";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("non-finite at epoch"), std::string::npos);
  }
}

TEST(PredictTest, ZeroWeightsGiveUniform) {
  const FeatureLayout layout({"code"}, {"applied"});
  WorldModel model;
  model.layout = layout;
  model.weights = Eigen::MatrixXd::Zero(kNumOutcomes, static_cast<Eigen::Index>(layout.dimension()));
  const StudentUnitState state("s", "u", true);
  const auto x = BuildContext(state, MakeExercise("e", "u"), ExerciseFormat::kMcq, 0.3, layout);
  for (double p : Predict(model, x).probabilities) EXPECT_EQ(p, 0.2);
}

TEST(PredictTest, MatchesStraightLineSoftmaxOnHeldOutRows) {
  const Dataset ds = SmallPlanted(80, 9);
  const FeatureLayout layout = LayoutOf(ds);
  std::vector<AttemptRecord> train, held;
  for (const auto& a : ds.attempts) (a.student_id < "s0060" ? train : held).push_back(a);
  const WorldModel model = Train(train, ds.catalog, layout, {});
  const TrainingSet test = BuildEvaluationSet(held, ds.catalog, layout,
                                              ComputeDifficulties(train, ds.catalog));
  ASSERT_GT(test.size(), 0u);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Eigen::VectorXd x = test.features.row(static_cast<Eigen::Index>(i)).transpose();
    const auto p = Predict(model, {x, layout.fingerprint()});
    const auto oracle = SoftmaxOracle(model.weights, x);
    double total = 0.0;
    for (int k = 0; k < kNumOutcomes; ++k) {
      EXPECT_NEAR(p.probabilities[k], oracle[k], 1e-12);
      total += p.probabilities[k];
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
    const int argmax = static_cast<int>(
        std::max_element(oracle.begin(), oracle.end()) - oracle.begin());
    EXPECT_EQ(PredictLabel(model, x), argmax);
  }
}

TEST(PredictTest, RejectsForeignLayout) {
  const FeatureLayout a({"code"}, {"applied"});
  const FeatureLayout b({"numeric"}, {"applied"});
  WorldModel model;
  model.layout = a;
  model.weights = Eigen::MatrixXd::Zero(kNumOutcomes, static_cast<Eigen::Index>(a.dimension()));
  const auto x = BuildContext(StudentUnitState("s", "u", false),
                              MakeExercise("e", "u", "numeric"), ExerciseFormat::kFreeForm,
                              0.5, b);
  EXPECT_THROW(Predict(model, x), std::invalid_argument);
}

TEST(OutcomeDistributionTest, SamplingRespectsSupport) {
  OutcomeDistribution d;
  d.probabilities = {0.0, 0.0, 1.0, 0.0, 0.0};
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(d.Sample(rng), Outcome::kEventualFailure);
}

// Label is a deterministic function of the solution form; nothing else
// carries signal.
Dataset SeparableDataset() {
  const std::string forms[] = {"f0", "f1", "f2", "f3", "f4"};
  Dataset ds;
  LearningUnit unit{"u1", {}, false};
  for (int e = 0; e < 10; ++e) {
    const std::string id = "e" + std::to_string(e);
    ds.catalog.emplace(id, MakeExercise(id, "u1", forms[e % 5], "applied"));
    unit.exercise_ids.push_back(id);
  }
  ds.units.emplace("u1", unit);
  for (int s = 0; s < 40; ++s) {
    for (int e = 0; e < 10; ++e) {
      const int label = e % 5;
      ds.attempts.push_back(MakeAttempt("s" + std::to_string(100 + s), "e" + std::to_string(e),
                                        "u1", e, OutcomeFromIndex(label)));
    }
  }
  return ds;
}

TEST(CrossValidateTest, SeparableDataIsLearned) {
  const Dataset ds = SeparableDataset();
  // Oracle classifier: the generating rule itself is perfectly accurate.
  for (const auto& a : ds.attempts) {
    EXPECT_EQ(Index(a.outcome), ds.catalog.at(a.exercise_id).solution_form[1] - '0');
  }
  TrainingHyperparams hp;
  hp.epochs = 300;
  const auto report = CrossValidate(ds.attempts, ds.catalog, LayoutOf(ds), hp, 5);
  EXPECT_GE(report.accuracy, 0.95);
  EXPECT_NEAR(report.majority_baseline, 0.2, 0.05);
  ASSERT_EQ(report.per_fold.size(), 5u);
  std::size_t total = 0;
  for (const auto& f : report.per_fold) total += f.test_attempts;
  EXPECT_EQ(total, ds.attempts.size());
}

TEST(CrossValidateTest, ShuffledLabelsStayNearBaseline) {
  Dataset ds = SmallPlanted(200, 21);
  std::vector<Outcome> labels;
  for (const auto& a : ds.attempts) labels.push_back(a.outcome);
  Rng rng(5);
  std::shuffle(labels.begin(), labels.end(), rng);
  for (std::size_t i = 0; i < labels.size(); ++i) ds.attempts[i].outcome = labels[i];
  const auto report = CrossValidate(ds.attempts, ds.catalog, LayoutOf(ds), {}, 5);
  EXPECT_LE(std::abs(report.accuracy - report.majority_baseline), 0.03);
}

TEST(CrossValidateTest, PlantedDataBeatsMajority) {
  const Dataset ds = SmallPlanted(200, 22);
  const auto report = CrossValidate(ds.attempts, ds.catalog, LayoutOf(ds), {}, 5);
  EXPECT_GE(report.accuracy - report.majority_baseline, 0.05);
}

TEST(CrossValidateTest, LeaveOneStudentOut) {
  const Dataset ds = SmallPlanted(12, 23);
  std::set<std::string> students;
  for (const auto& a : ds.attempts) students.insert(a.student_id);
  const int k = static_cast<int>(students.size());
  TrainingHyperparams hp;
  hp.epochs = 50;
  const auto report = CrossValidate(ds.attempts, ds.catalog, LayoutOf(ds), hp, k);
  ASSERT_EQ(report.per_fold.size(), students.size());
  for (const auto& f : report.per_fold) EXPECT_EQ(f.test_students, 1u);
}

TEST(CrossValidateTest, RejectsBadFoldCounts) {
  const Dataset ds = SmallPlanted(5, 24);
  std::set<std::string> students;
  for (const auto& a : ds.attempts) students.insert(a.student_id);
  EXPECT_THROW(CrossValidate(ds.attempts, ds.catalog, LayoutOf(ds), {}, 1),
               std::invalid_argument);
  EXPECT_THROW(CrossValidate(ds.attempts, ds.catalog, LayoutOf(ds), {},
                             static_cast<int>(students.size()) + 1),
               std::invalid_argument);
}

TEST(PredictMissingTest, CountsMatchBruteForceEnumeration) {
  const Dataset ds = SmallPlanted(50, 25);
  const FeatureLayout layout = LayoutOf(ds);
  TrainingHyperparams hp;
  hp.epochs = 20;
  const WorldModel model = Train(ds.attempts, ds.catalog, layout, hp);
  const PredictionTable table = PredictMissing(model, ds);

  std::set<std::tuple<std::string, std::string, int>> expected;
  std::set<std::pair<std::string, std::string>> attempted, started;
  for (const auto& a : ds.attempts) {
    attempted.emplace(a.student_id, a.exercise_id);
    started.emplace(a.student_id, a.unit_id);
  }
  for (const auto& [student, unit] : started) {
    for (const auto& e : ds.units.at(unit).exercise_ids) {
      if (attempted.count({student, e})) continue;
      expected.emplace(student, e, 0);
      expected.emplace(student, e, 1);
    }
  }
  std::set<std::tuple<std::string, std::string, int>> actual;
  for (const auto& [key, dist] : table) {
    actual.emplace(key.student_id, key.exercise_id, static_cast<int>(key.format));
    double total = 0.0;
    for (double p : dist.probabilities) total += p;
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
  EXPECT_EQ(actual, expected);
}

TEST(PredictMissingTest, SmallFixtureCounts) {
  Dataset ds = testing::SingleUnitDataset({"e1", "e2", "e3"});
  ds.attempts = {MakeAttempt("full", "e1", "u1", 0, Outcome::kInstantSuccess),
                 MakeAttempt("full", "e2", "u1", 1, Outcome::kEventualFailure),
                 MakeAttempt("full", "e3", "u1", 2, Outcome::kInstantSkip),
                 MakeAttempt("one", "e2", "u1", 0, Outcome::kEventualSuccess)};
  const FeatureLayout layout = LayoutOf(ds);
  const WorldModel model = Train(ds.attempts, ds.catalog, layout, {});
  const PredictionTable table = PredictMissing(model, ds);
  EXPECT_EQ(table.size(), 4u);
  for (const auto& [key, dist] : table) {
    EXPECT_EQ(key.student_id, "one");
    EXPECT_NE(key.exercise_id, "e2");
  }
}

}  // namespace
}  // namespace curriculum
