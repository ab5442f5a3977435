#ifndef CURRICULUM_DOMAIN_H_
#define CURRICULUM_DOMAIN_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace curriculum {

// Result of one student/exercise interaction. The numeric values index
// OutcomeDistribution entries and world-model weight rows.
enum class Outcome : std::uint8_t {
  kInstantSuccess = 0,
  kEventualSuccess = 1,
  kEventualFailure = 2,
  kInstantSkip = 3,
  kEventualSkip = 4,
};

inline constexpr int kNumOutcomes = 5;

inline constexpr std::array<Outcome, kNumOutcomes> kAllOutcomes = {
    Outcome::kInstantSuccess, Outcome::kEventualSuccess,
    Outcome::kEventualFailure, Outcome::kInstantSkip, Outcome::kEventualSkip};

enum class ExerciseFormat : std::uint8_t {
  kFreeForm = 0,
  kMcq = 1,
};

inline constexpr std::array<ExerciseFormat, 2> kAllFormats = {
    ExerciseFormat::kFreeForm, ExerciseFormat::kMcq};

constexpr int Index(Outcome o) { return static_cast<int>(o); }
constexpr Outcome OutcomeFromIndex(int i) { return static_cast<Outcome>(i); }

// True for both success variants. This is the numerator of every
// "success rate" reported by the simulator.
constexpr bool IsSuccess(Outcome o) {
  return o == Outcome::kInstantSuccess || o == Outcome::kEventualSuccess;
}

constexpr bool IsSkip(Outcome o) {
  return o == Outcome::kInstantSkip || o == Outcome::kEventualSkip;
}

// Lowercase snake_case wire names ("instant_success", "mcq", ...).
std::string_view ToString(Outcome o);
std::string_view ToString(ExerciseFormat f);

// Throw std::invalid_argument naming the unrecognized value.
Outcome ParseOutcome(std::string_view s);
ExerciseFormat ParseFormat(std::string_view s);

struct Exercise {
  std::string exercise_id;
  std::string unit_id;
  std::string solution_form;
  std::string application_context;

  bool operator==(const Exercise&) const = default;
};

struct LearningUnit {
  std::string unit_id;
  std::vector<std::string> exercise_ids;
  bool has_video = false;

  bool operator==(const LearningUnit&) const = default;
};

struct AttemptRecord {
  std::string student_id;
  std::string exercise_id;
  std::string unit_id;
  std::int64_t seq = 0;
  ExerciseFormat format = ExerciseFormat::kFreeForm;
  Outcome outcome = Outcome::kInstantSuccess;
  bool watched_video = false;
  // Optional student segment label (e.g. "free" or "customer"); empty when
  // absent. Carried through I/O, not used by any model.
  std::string cohort;

  bool operator==(const AttemptRecord&) const = default;
};

struct RewardConfig {
  double instant_success = 1.5;
  double eventual_success = 1.0;
  double eventual_failure = 0.5;
  double skip = 0.0;
  double mcq_penalty = 0.4;

  bool IsFinite() const;
};

// Base reward for the outcome, less mcq_penalty when the exercise was shown
// as a multiple-choice question. Not clamped: an MCQ skip is -mcq_penalty.
double Reward(Outcome outcome, ExerciseFormat format, const RewardConfig& cfg);

}  // namespace curriculum

#endif  // CURRICULUM_DOMAIN_H_
