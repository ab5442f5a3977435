#ifndef CURRICULUM_SYNTHETIC_H_
#define CURRICULUM_SYNTHETIC_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "curriculum/dataset.h"
#include "curriculum/features.h"

namespace curriculum {

struct SyntheticConfig {
  int n_students = 200;
  int n_units = 4;
  int exercises_per_unit = 12;

  // Each unit is started independently with this probability (every student
  // starts at least one).
  double unit_start_probability = 0.75;
  // Within a started unit the student attempts round(f * n) exercises in a
  // random order, f ~ U[min, max], at least one.
  double attempt_fraction_min = 0.2;
  double attempt_fraction_max = 0.5;
  double video_probability = 0.5;  // per student and unit with a video
  double unit_video_probability = 0.75;
  double mcq_probability = 0.15;   // format of logged attempts
  // Latent easiness is bimodal: this fraction of exercises draws from
  // U[0.05, 0.30], the rest from U[0.60, 0.95].
  double hard_exercise_fraction = 0.35;

  std::vector<std::string> solution_forms = {"code", "expression", "numeric",
                                             "short_text"};
  std::vector<std::string> application_contexts = {"applied", "conceptual",
                                                   "debugging"};

  // kNumOutcomes x d over SyntheticLayout(cfg). When absent, outcomes are
  // drawn i.i.d. from outcome_prior.
  std::optional<Eigen::MatrixXd> planted_weights;
  std::array<double, kNumOutcomes> outcome_prior = {0.45, 0.15, 0.10, 0.20, 0.10};

  std::uint64_t seed = 0;

  // Throws std::invalid_argument naming the first bad field.
  void Validate() const;
};

// Layout over the configured vocabularies. Planted weights are expressed in
// this layout; the difficulty column carries the exercise's latent easiness.
FeatureLayout SyntheticLayout(const SyntheticConfig& cfg);

// Ground-truth outcome model used by the standard synthetic cohort: easier
// exercises, watched videos and MCQs raise success; a high skip rate and a
// previous skip raise the chance of skipping again.
Eigen::MatrixXd DefaultPlantedWeights(const FeatureLayout& layout);

struct SyntheticCohort {
  Dataset dataset;
  // Latent easiness per exercise (see hard_exercise_fraction).
  std::map<std::string, double> easiness;
};

SyntheticCohort GenerateSyntheticCohort(const SyntheticConfig& cfg);
Dataset GenerateSynthetic(const SyntheticConfig& cfg);

// 200 students, 4 units of 12 exercises, planted default weights.
SyntheticConfig StandardCohortConfig(std::uint64_t seed);

}  // namespace curriculum

#endif  // CURRICULUM_SYNTHETIC_H_
