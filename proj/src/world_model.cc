#include "curriculum/world_model.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <unordered_map>

namespace curriculum {
namespace {

using DifficultyFn = std::function<double(const AttemptRecord&)>;

TrainingSet BuildExamples(std::span<const AttemptRecord> attempts,
                          const std::map<std::string, Exercise>& catalog,
                          const FeatureLayout& layout,
                          const DifficultyFn& difficulty_of) {
  const std::vector<AttemptRecord> copy(attempts.begin(), attempts.end());
  const auto by_student = GroupByStudent(copy);

  TrainingSet set;
  set.features.resize(static_cast<Eigen::Index>(attempts.size()),
                      static_cast<Eigen::Index>(layout.dimension()));
  set.labels.reserve(attempts.size());
  Eigen::Index row = 0;
  for (const auto& [student, history] : by_student) {
    std::map<std::string, StudentUnitState> states;
    for (const auto& a : history) {
      auto ex = catalog.find(a.exercise_id);
      if (ex == catalog.end()) {
        throw std::invalid_argument("attempt references unknown exercise '" +
                                    a.exercise_id + "'");
      }
      auto [it, inserted] =
          states.try_emplace(a.unit_id, student, a.unit_id, a.watched_video);
      StudentUnitState& state = it->second;
      state.set_watched_video(a.watched_video);
      const ContextVector x =
          BuildContext(state, ex->second, a.format, difficulty_of(a), layout);
      set.features.row(row++) = x.values.transpose();
      set.labels.push_back(Index(a.outcome));
      state.Record(a.outcome);
    }
  }
  return set;
}

// Row-wise softmax of logits, in place. Returns per-row log-sum-exp.
Eigen::VectorXd SoftmaxRows(Eigen::MatrixXd& logits) {
  Eigen::VectorXd lse(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - m).exp().matrix();
    const double z = logits.row(i).sum();
    logits.row(i) /= z;
    lse[i] = m + std::log(z);
  }
  return lse;
}

int MajorityLabel(const std::vector<int>& labels) {
  std::array<std::size_t, kNumOutcomes> counts{};
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) -
                          counts.begin());
}

}  // namespace

Outcome OutcomeDistribution::Sample(Rng& rng) const {
  const double u = rng.Uniform();
  double cumulative = 0.0;
  int last_positive = 0;
  for (int i = 0; i < kNumOutcomes; ++i) {
    if (probabilities[i] <= 0.0) continue;
    last_positive = i;
    cumulative += probabilities[i];
    if (u < cumulative) return OutcomeFromIndex(i);
  }
  // Rounding left u above the accumulated mass.
  return OutcomeFromIndex(last_positive);
}

TrainingSet BuildTrainingSet(std::span<const AttemptRecord> attempts,
                             const std::map<std::string, Exercise>& catalog,
                             const FeatureLayout& layout) {
  std::unordered_map<std::string, std::pair<int, int>> counts;
  for (const auto& a : attempts) {
    auto& [s, n] = counts[a.exercise_id];
    s += IsSuccess(a.outcome) ? 1 : 0;
    ++n;
  }
  return BuildExamples(attempts, catalog, layout, [&](const AttemptRecord& a) {
    const auto& [s, n] = counts.at(a.exercise_id);
    return ExerciseDifficulty(s - (IsSuccess(a.outcome) ? 1 : 0), n - 1);
  });
}

TrainingSet BuildEvaluationSet(std::span<const AttemptRecord> attempts,
                               const std::map<std::string, Exercise>& catalog,
                               const FeatureLayout& layout,
                               const DifficultyMap& difficulty) {
  return BuildExamples(attempts, catalog, layout, [&](const AttemptRecord& a) {
    auto it = difficulty.find(a.exercise_id);
    return it == difficulty.end() ? ExerciseDifficulty(0, 0) : it->second;
  });
}

double SoftmaxObjective::LossAndGradient(const Eigen::MatrixXd& weights,
                                         Eigen::MatrixXd& gradient) const {
  const auto n = static_cast<double>(data_.size());
  Eigen::MatrixXd probs = data_.features * weights.transpose();
  Eigen::VectorXd lse(probs.rows());
  double nll = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const int y = data_.labels[static_cast<std::size_t>(i)];
    nll -= probs(i, y);
  }
  lse = SoftmaxRows(probs);
  nll += lse.sum();
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    probs(i, data_.labels[static_cast<std::size_t>(i)]) -= 1.0;
  }
  gradient = probs.transpose() * data_.features / n + l2_ * weights;
  return nll / n + 0.5 * l2_ * weights.squaredNorm();
}

double SoftmaxObjective::Loss(const Eigen::MatrixXd& weights) const {
  Eigen::MatrixXd unused;
  return LossAndGradient(weights, unused);
}

Eigen::MatrixXd SoftmaxObjective::Gradient(const Eigen::MatrixXd& weights) const {
  Eigen::MatrixXd g;
  LossAndGradient(weights, g);
  return g;
}

WorldModel Fit(const TrainingSet& data, const FeatureLayout& layout,
               const TrainingHyperparams& hyperparams,
               std::vector<double>* loss_history) {
  if (data.size() == 0) {
    throw std::invalid_argument("cannot train a world model on an empty dataset");
  }
  if (static_cast<std::size_t>(data.features.cols()) != layout.dimension()) {
    throw std::invalid_argument("training features do not match the layout");
  }
  if (hyperparams.epochs < 0 || !(hyperparams.learning_rate > 0.0) ||
      !(hyperparams.l2 >= 0.0)) {
    throw std::invalid_argument(
        "world model hyperparameters need epochs >= 0, learning_rate > 0, "
        "l2 >= 0");
  }
  const SoftmaxObjective objective(data, hyperparams.l2);
  WorldModel model;
  model.layout = layout;
  model.hyperparams = hyperparams;
  model.weights = Eigen::MatrixXd::Zero(kNumOutcomes, data.features.cols());

  Eigen::MatrixXd gradient;
  for (int epoch = 0; epoch < hyperparams.epochs; ++epoch) {
    const double loss = objective.LossAndGradient(model.weights, gradient);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("world model training loss became non-finite at "
                               "epoch " + std::to_string(epoch));
    }
    if (loss_history) loss_history->push_back(loss);
    model.weights -= hyperparams.learning_rate * gradient;
  }
  model.final_loss = objective.Loss(model.weights);
  if (!std::isfinite(model.final_loss) || !model.weights.allFinite()) {
    throw std::runtime_error("world model training loss became non-finite at "
                             "epoch " + std::to_string(hyperparams.epochs));
  }
  return model;
}

WorldModel Train(std::span<const AttemptRecord> attempts,
                 const std::map<std::string, Exercise>& catalog,
                 const FeatureLayout& layout,
                 const TrainingHyperparams& hyperparams) {
  if (attempts.empty()) {
    throw std::invalid_argument("cannot train a world model on an empty dataset");
  }
  return Fit(BuildTrainingSet(attempts, catalog, layout), layout, hyperparams);
}

OutcomeDistribution Predict(const WorldModel& model,
                            const ContextVector& context) {
  if (context.layout_fingerprint != model.layout.fingerprint() ||
      static_cast<std::size_t>(context.values.size()) !=
          model.layout.dimension()) {
    throw std::invalid_argument(
        "context was built against a different feature layout than the model");
  }
  Eigen::Matrix<double, 1, Eigen::Dynamic> logits =
      (model.weights * context.values).transpose();
  Eigen::MatrixXd row = logits;
  SoftmaxRows(row);
  OutcomeDistribution out;
  for (int i = 0; i < kNumOutcomes; ++i) out.probabilities[i] = row(0, i);
  return out;
}

int PredictLabel(const WorldModel& model, const Eigen::VectorXd& features) {
  const Eigen::VectorXd logits = model.weights * features;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return static_cast<int>(best);
}

CrossValidationReport CrossValidate(
    std::span<const AttemptRecord> attempts,
    const std::map<std::string, Exercise>& catalog, const FeatureLayout& layout,
    const TrainingHyperparams& hyperparams, int k) {
  if (k < 2) throw std::invalid_argument("cross-validation needs k >= 2");
  std::vector<std::string> students;
  for (const auto& a : attempts) students.push_back(a.student_id);
  std::sort(students.begin(), students.end());
  students.erase(std::unique(students.begin(), students.end()), students.end());
  if (students.size() < static_cast<std::size_t>(k)) {
    throw std::invalid_argument("cross-validation needs at least " +
                                std::to_string(k) + " students, found " +
                                std::to_string(students.size()));
  }

  Rng rng(DeriveSeed(hyperparams.seed, {0xcf}));
  for (std::size_t i = students.size(); i > 1; --i) {
    std::swap(students[i - 1], students[rng.Below(i)]);
  }
  std::unordered_map<std::string, int> fold_of;
  for (std::size_t i = 0; i < students.size(); ++i) {
    fold_of[students[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  }

  CrossValidationReport report;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<AttemptRecord> train, test;
    std::size_t test_students = 0;
    for (const auto& [s, f] : fold_of) test_students += f == fold ? 1 : 0;
    for (const auto& a : attempts) {
      (fold_of.at(a.student_id) == fold ? test : train).push_back(a);
    }
    const WorldModel model = Train(train, catalog, layout, hyperparams);
    const TrainingSet train_set = BuildTrainingSet(train, catalog, layout);
    const TrainingSet test_set = BuildEvaluationSet(
        test, catalog, layout, ComputeDifficulties(train, catalog));

    const int majority = MajorityLabel(train_set.labels);
    std::size_t correct = 0, majority_hits = 0;
    for (std::size_t i = 0; i < test_set.size(); ++i) {
      const int y = test_set.labels[i];
      const Eigen::VectorXd x =
          test_set.features.row(static_cast<Eigen::Index>(i)).transpose();
      correct += PredictLabel(model, x) == y ? 1 : 0;
      majority_hits += majority == y ? 1 : 0;
    }
    FoldResult r;
    r.train_attempts = train.size();
    r.test_attempts = test.size();
    r.test_students = test_students;
    r.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    r.majority_baseline =
        static_cast<double>(majority_hits) / static_cast<double>(test.size());
    report.per_fold.push_back(r);
  }
  for (const auto& r : report.per_fold) {
    report.accuracy += r.accuracy;
    report.majority_baseline += r.majority_baseline;
  }
  report.accuracy /= k;
  report.majority_baseline /= k;
  return report;
}

StudentUnitState ObservedUnitState(const std::vector<AttemptRecord>& history,
                                   const std::string& student_id,
                                   const std::string& unit_id) {
  StudentUnitState state(student_id, unit_id, false);
  for (const auto& a : history) {
    if (a.unit_id != unit_id) continue;
    state.set_watched_video(a.watched_video);
    state.Record(a.outcome);
  }
  return state;
}

PredictionTable PredictMissing(const WorldModel& model, const Dataset& dataset) {
  const DifficultyMap difficulty =
      ComputeDifficulties(dataset.attempts, dataset.catalog);
  PredictionTable table;
  for (const auto& [student, history] : GroupByStudent(dataset.attempts)) {
    std::map<std::string, std::vector<std::string>> attempted_by_unit;
    for (const auto& a : history) attempted_by_unit[a.unit_id].push_back(a.exercise_id);
    for (const auto& [unit_id, attempted] : attempted_by_unit) {
      const StudentUnitState state = ObservedUnitState(history, student, unit_id);
      for (const auto& exercise_id : dataset.units.at(unit_id).exercise_ids) {
        if (std::find(attempted.begin(), attempted.end(), exercise_id) !=
            attempted.end()) {
          continue;
        }
        const Exercise& ex = dataset.catalog.at(exercise_id);
        for (ExerciseFormat f : kAllFormats) {
          const ContextVector x =
              BuildContext(state, ex, f, difficulty.at(exercise_id), model.layout);
          table.emplace(PredictionKey{student, exercise_id, f}, Predict(model, x));
        }
      }
    }
  }
  return table;
}

}  // namespace curriculum
