#ifndef CURRICULUM_WORLD_MODEL_H_
#define CURRICULUM_WORLD_MODEL_H_

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "curriculum/dataset.h"
#include "curriculum/domain.h"
#include "curriculum/features.h"
#include "curriculum/rng.h"

namespace curriculum {

struct OutcomeDistribution {
  std::array<double, kNumOutcomes> probabilities{};

  double operator[](Outcome o) const { return probabilities[Index(o)]; }

  // Inverse-CDF categorical draw using one Uniform() from rng.
  Outcome Sample(Rng& rng) const;
};

struct TrainingHyperparams {
  double l2 = 1e-3;
  double learning_rate = 0.5;
  int epochs = 500;
  // Drives cross-validation fold assignment; training itself starts from
  // zero weights and is deterministic.
  std::uint64_t seed = 0;
};

struct WorldModel {
  Eigen::MatrixXd weights;  // kNumOutcomes x layout.dimension()
  FeatureLayout layout;
  TrainingHyperparams hyperparams;
  double final_loss = 0.0;
};

// Design matrix and labels for softmax regression.
struct TrainingSet {
  Eigen::MatrixXd features;  // one row per example
  std::vector<int> labels;   // outcome indices

  std::size_t size() const { return labels.size(); }
};

// One example per attempt. Each attempt is masked out of its own features:
// the student state comes from that student's earlier attempts in the same
// unit, and difficulty is the smoothed success rate of the exercise over
// every *other* attempt in `attempts`. Rows are emitted in (student_id, seq)
// order regardless of input order.
TrainingSet BuildTrainingSet(std::span<const AttemptRecord> attempts,
                             const std::map<std::string, Exercise>& catalog,
                             const FeatureLayout& layout);

// Same encoding, with difficulty taken from a fixed map (statistics of a
// separate training fold).
TrainingSet BuildEvaluationSet(std::span<const AttemptRecord> attempts,
                               const std::map<std::string, Exercise>& catalog,
                               const FeatureLayout& layout,
                               const DifficultyMap& difficulty);

// Mean multinomial cross-entropy plus (l2 / 2) * ||W||_F^2.
class SoftmaxObjective {
 public:
  SoftmaxObjective(const TrainingSet& data, double l2) : data_(data), l2_(l2) {}

  double Loss(const Eigen::MatrixXd& weights) const;
  Eigen::MatrixXd Gradient(const Eigen::MatrixXd& weights) const;
  // Single pass computing both.
  double LossAndGradient(const Eigen::MatrixXd& weights,
                         Eigen::MatrixXd& gradient) const;

 private:
  const TrainingSet& data_;
  double l2_;
};

// Full-batch gradient descent from zero weights. Throws std::invalid_argument
// on an empty set and std::runtime_error naming the epoch if the loss becomes
// non-finite. When loss_history is given it receives the loss before each
// update.
WorldModel Fit(const TrainingSet& data, const FeatureLayout& layout,
               const TrainingHyperparams& hyperparams,
               std::vector<double>* loss_history = nullptr);

WorldModel Train(std::span<const AttemptRecord> attempts,
                 const std::map<std::string, Exercise>& catalog,
                 const FeatureLayout& layout,
                 const TrainingHyperparams& hyperparams);

// Softmax of weights * context. Throws std::invalid_argument when the context
// was built against another layout.
OutcomeDistribution Predict(const WorldModel& model,
                            const ContextVector& context);

// Index of the largest predicted probability (lowest index on ties).
int PredictLabel(const WorldModel& model, const Eigen::VectorXd& features);

struct FoldResult {
  double accuracy = 0.0;
  double majority_baseline = 0.0;
  std::size_t train_attempts = 0;
  std::size_t test_attempts = 0;
  std::size_t test_students = 0;
};

struct CrossValidationReport {
  double accuracy = 0.0;           // mean over folds
  double majority_baseline = 0.0;  // mean over folds
  std::vector<FoldResult> per_fold;
};

// k-fold cross-validation with folds partitioning students. Fold assignment
// is a seeded shuffle of the sorted student ids. Throws std::invalid_argument
// for k < 2 or fewer students than folds.
CrossValidationReport CrossValidate(
    std::span<const AttemptRecord> attempts,
    const std::map<std::string, Exercise>& catalog, const FeatureLayout& layout,
    const TrainingHyperparams& hyperparams, int k);

struct PredictionKey {
  std::string student_id;
  std::string exercise_id;
  ExerciseFormat format = ExerciseFormat::kFreeForm;

  auto operator<=>(const PredictionKey&) const = default;
};

using PredictionTable = std::map<PredictionKey, OutcomeDistribution>;

// The state a student ends their observed history in for one unit. The
// watched-video flag is taken from their latest attempt in the unit.
StudentUnitState ObservedUnitState(const std::vector<AttemptRecord>& history,
                                   const std::string& student_id,
                                   const std::string& unit_id);

// Distributions for every (student, exercise, format) where the student has
// started the exercise's unit but never attempted the exercise.
PredictionTable PredictMissing(const WorldModel& model, const Dataset& dataset);

}  // namespace curriculum

#endif  // CURRICULUM_WORLD_MODEL_H_
