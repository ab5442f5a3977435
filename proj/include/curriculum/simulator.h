#ifndef CURRICULUM_SIMULATOR_H_
#define CURRICULUM_SIMULATOR_H_

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "curriculum/dataset.h"
#include "curriculum/domain.h"
#include "curriculum/features.h"
#include "curriculum/linucb.h"
#include "curriculum/policies.h"
#include "curriculum/rng.h"
#include "curriculum/world_model.h"

namespace curriculum {

// How unobserved (student, exercise) pairs are resolved.
enum class OutcomeMode {
  // Sample from the distribution stored in the prediction table, which was
  // computed once from the student's observed end state.
  kStatic,
  // Sample from the world model evaluated on the live simulated context, so
  // outcomes respond to the order in which exercises are presented. The pair
  // must still be present in the prediction table.
  kLive,
};

// Logged outcomes plus predictions for the pairs that were never attempted.
// Read-only once built; safe to share across concurrently simulated runs.
class OutcomeSource {
 public:
  // `model` is required for OutcomeMode::kLive and must outlive the source.
  OutcomeSource(const std::vector<AttemptRecord>& attempts,
                PredictionTable predictions,
                OutcomeMode mode = OutcomeMode::kStatic,
                const WorldModel* model = nullptr);

  const AttemptRecord* Observed(const std::string& student_id,
                                const std::string& exercise_id) const;
  const PredictionTable& predictions() const { return predictions_; }
  OutcomeMode mode() const { return mode_; }
  const WorldModel* model() const { return model_; }

 private:
  std::unordered_map<std::string, AttemptRecord> observed_;
  PredictionTable predictions_;
  OutcomeMode mode_;
  const WorldModel* model_;
};

struct ResolvedOutcome {
  Outcome outcome = Outcome::kInstantSuccess;
  bool replayed = false;
  // Replayed from a log entry whose format differs from the chosen one.
  bool format_mismatch = false;
};

// Observed pairs replay the logged outcome whatever the chosen format.
// Unobserved pairs draw one categorical sample from `rng`. Throws
// std::runtime_error when the pair is unobserved and has no prediction entry.
ResolvedOutcome ResolveOutcome(const OutcomeSource& source,
                               const std::string& student_id,
                               const std::string& exercise_id,
                               ExerciseFormat format,
                               const ContextVector& context, Rng& rng);

struct TrajectoryStep {
  ActionChoice choice;
  Outcome outcome = Outcome::kInstantSuccess;
  double reward = 0.0;
  bool replayed = false;
  bool format_mismatch = false;
};

struct Trajectory {
  std::string student_id;
  std::string unit_id;
  std::vector<TrajectoryStep> steps;
};

// Read-only simulation inputs shared by every episode.
struct Environment {
  const Dataset& dataset;
  const FeatureLayout& layout;
  const DifficultyMap& difficulty;
  const OutcomeSource& source;
  RewardConfig rewards;
};

// Runs one (student, unit) episode until every exercise of the unit has been
// resolved. Throws std::logic_error if the policy picks outside the candidate
// set.
Trajectory SimulateUnit(const Environment& env, const std::string& student_id,
                        const std::string& unit_id, bool watched_video,
                        Policy& policy, Rng& policy_rng, Rng& outcome_rng);

struct RunMetrics {
  double success_rate = 0.0;
  double skip_rate = 0.0;
  double fail_rate = 0.0;
  double mcq_frequency = 0.0;
  std::uint64_t steps = 0;

  bool operator==(const RunMetrics&) const = default;
};

RunMetrics Summarize(const std::vector<Trajectory>& trajectories);

struct CohortReport {
  std::string policy;
  int runs = 0;
  std::uint64_t master_seed = 0;
  std::vector<RunMetrics> per_run;
  RunMetrics mean;
  // Largest |run value - mean| per metric (steps unused).
  RunMetrics max_abs_deviation;

  bool operator==(const CohortReport&) const = default;
};

struct CohortOptions {
  double alpha = 1.0;
  double lambda = 1.0;
  RewardConfig rewards;
  OutcomeMode outcome_mode = OutcomeMode::kLive;
  // Runs are independent and may be simulated concurrently; results are
  // merged in run order so the report does not depend on this.
  int threads = 1;
};

struct CohortResult {
  CohortReport report;
  // Bandit state at the end of the last run (linucb only).
  std::optional<LinUcb> final_bandit;
};

// Simulates every (student, started unit) pair `runs` times. Students go in
// id order, units in ascending unit_id, candidates in catalog order. Run r
// draws from streams DeriveSeed(master_seed, {r, student_index, channel})
// with channel 0 for the policy and 1 for outcomes. The linucb bandit is
// fresh per run and learns online across the whole cohort.
//
// `model` may be null only when every exercise of every started unit was
// observed. Throws std::invalid_argument for an unknown policy id, runs < 1,
// or a missing model.
CohortResult RunCohort(const Dataset& dataset, const std::string& policy_id,
                       const WorldModel* model, const CohortOptions& options,
                       int runs, std::uint64_t master_seed);

}  // namespace curriculum

#endif  // CURRICULUM_SIMULATOR_H_
