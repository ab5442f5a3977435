#ifndef CURRICULUM_FEATURES_H_
#define CURRICULUM_FEATURES_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "curriculum/domain.h"

namespace curriculum {

// Column layout of the joint (student, action) context shared by the world
// model and the bandit:
//
//   [0, 6)    previous outcome in the unit, one-hot over the five outcomes
//             plus a trailing "none" slot
//   6         skip rate in the unit
//   7         watched unit video
//   8         exercise difficulty (smoothed historic success rate)
//   9 ...     solution_form one-hot, then application_context one-hot
//   d - 2     is_mcq
//   d - 1     bias (always 1)
class FeatureLayout {
 public:
  static constexpr std::size_t kPrevOutcomeOffset = 0;
  static constexpr std::size_t kPrevOutcomeSlots = kNumOutcomes + 1;
  static constexpr std::size_t kNoPrevOutcome = kNumOutcomes;
  static constexpr std::size_t kSkipRate = 6;
  static constexpr std::size_t kWatchedVideo = 7;
  static constexpr std::size_t kDifficulty = 8;
  static constexpr std::size_t kCategoricalOffset = 9;

  FeatureLayout() : FeatureLayout({}, {}) {}
  // Vocabularies are sorted and de-duplicated.
  FeatureLayout(std::vector<std::string> solution_forms,
                std::vector<std::string> application_contexts);

  template <typename ExerciseRange>
  static FeatureLayout FromExercises(const ExerciseRange& exercises) {
    std::vector<std::string> forms, contexts;
    for (const auto& entry : exercises) {
      const Exercise& e = ExerciseOf(entry);
      forms.push_back(e.solution_form);
      contexts.push_back(e.application_context);
    }
    return FeatureLayout(std::move(forms), std::move(contexts));
  }

  const std::vector<std::string>& solution_forms() const { return forms_; }
  const std::vector<std::string>& application_contexts() const {
    return contexts_;
  }
  std::size_t dimension() const { return bias_index() + 1; }
  std::size_t solution_form_offset() const { return kCategoricalOffset; }
  std::size_t application_context_offset() const {
    return kCategoricalOffset + forms_.size();
  }
  std::size_t mcq_index() const {
    return application_context_offset() + contexts_.size();
  }
  std::size_t bias_index() const { return mcq_index() + 1; }

  // Index within the respective vocabulary, or nullopt.
  std::optional<std::size_t> SolutionFormIndex(const std::string& label) const;
  std::optional<std::size_t> ApplicationContextIndex(
      const std::string& label) const;

  // Stable hash of both vocabularies; contexts carry it so consumers can
  // reject vectors built against a different layout.
  std::uint64_t fingerprint() const { return fingerprint_; }

  bool operator==(const FeatureLayout& other) const {
    return forms_ == other.forms_ && contexts_ == other.contexts_;
  }

 private:
  static const Exercise& ExerciseOf(const Exercise& e) { return e; }
  template <typename K>
  static const Exercise& ExerciseOf(const std::pair<const K, Exercise>& kv) {
    return kv.second;
  }

  std::vector<std::string> forms_;
  std::vector<std::string> contexts_;
  std::uint64_t fingerprint_ = 0;
};

// A student's progress through one learning unit.
class StudentUnitState {
 public:
  StudentUnitState() = default;
  StudentUnitState(std::string student_id, std::string unit_id,
                   bool watched_video)
      : student_id_(std::move(student_id)),
        unit_id_(std::move(unit_id)),
        watched_video_(watched_video) {}

  void Record(Outcome outcome);
  void set_watched_video(bool watched) { watched_video_ = watched; }

  const std::string& student_id() const { return student_id_; }
  const std::string& unit_id() const { return unit_id_; }
  const std::vector<Outcome>& history() const { return history_; }
  int skip_count() const { return skip_count_; }
  int attempt_count() const { return static_cast<int>(history_.size()); }
  bool watched_video() const { return watched_video_; }
  std::optional<Outcome> last_outcome() const {
    if (history_.empty()) return std::nullopt;
    return history_.back();
  }

 private:
  std::string student_id_;
  std::string unit_id_;
  std::vector<Outcome> history_;
  int skip_count_ = 0;
  bool watched_video_ = false;
};

struct ContextVector {
  Eigen::VectorXd values;
  std::uint64_t layout_fingerprint = 0;
};

// skip_count / attempt_count, or 0 for an empty history.
double SkipRate(const StudentUnitState& state);

// Laplace-smoothed success rate (successes + 1) / (attempts + 2).
double ExerciseDifficulty(int successes, int attempts);
double ExerciseDifficulty(std::span<const AttemptRecord> attempts);

using DifficultyMap = std::unordered_map<std::string, double>;

// Smoothed success rate for every exercise in the catalog (0.5 for
// exercises with no attempts).
DifficultyMap ComputeDifficulties(std::span<const AttemptRecord> attempts,
                                  const std::map<std::string, Exercise>& catalog);

// Throws std::invalid_argument naming the label when the exercise's
// solution_form or application_context is not in the layout.
ContextVector BuildContext(const StudentUnitState& state,
                           const Exercise& exercise, ExerciseFormat format,
                           double difficulty, const FeatureLayout& layout);

}  // namespace curriculum

#endif  // CURRICULUM_FEATURES_H_
