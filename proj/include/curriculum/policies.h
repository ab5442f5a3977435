#ifndef CURRICULUM_POLICIES_H_
#define CURRICULUM_POLICIES_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "curriculum/domain.h"
#include "curriculum/features.h"
#include "curriculum/linucb.h"
#include "curriculum/rng.h"

namespace curriculum {

struct ActionChoice {
  std::string exercise_id;
  ExerciseFormat format = ExerciseFormat::kFreeForm;

  bool operator==(const ActionChoice&) const = default;
};

// Candidates are the unit's unresolved exercises in catalog order.
using Candidates = std::span<const Exercise* const>;

class Policy {
 public:
  virtual ~Policy() = default;

  // "random", "heuristic" or "linucb".
  virtual std::string_view id() const = 0;

  // Called before the first action of every (student, unit) episode.
  virtual void BeginEpisode() {}

  virtual ActionChoice NextAction(const StudentUnitState& state,
                                  Candidates candidates,
                                  const DifficultyMap& difficulty, Rng& rng) = 0;

  virtual void Observe(const ActionChoice& choice, Outcome outcome,
                       double reward) = 0;
};

inline constexpr std::string_view kRandomPolicy = "random";
inline constexpr std::string_view kHeuristicPolicy = "heuristic";
inline constexpr std::string_view kLinUcbPolicy = "linucb";

// Throws std::invalid_argument for anything but the three policy ids.
void CheckPolicyId(std::string_view id);

// Uniform draw over candidates, always free-form.
ActionChoice RandomPolicyNext(Candidates candidates, Rng& rng);

class RandomPolicy : public Policy {
 public:
  std::string_view id() const override { return kRandomPolicy; }
  ActionChoice NextAction(const StudentUnitState& state, Candidates candidates,
                          const DifficultyMap& difficulty, Rng& rng) override;
  void Observe(const ActionChoice&, Outcome, double) override {}
};

// Easiest (highest smoothed success rate) first; ties by exercise_id.
std::vector<const Exercise*> SortEasiestFirst(Candidates candidates,
                                              const DifficultyMap& difficulty);

// Difficulty ladder walk. The ladder is fixed from the candidates seen on the
// first call of an episode; `rung` is a ladder position.
struct HeuristicState {
  std::vector<std::string> ladder;
  std::size_t rung = 0;
  int consecutive_failures = 0;
  bool mcq_mode = false;
  // Result of the last observed action; nullopt before the first one.
  std::optional<bool> last_success;
};

inline constexpr int kHeuristicMcqThreshold = 2;

// `sorted` must be ordered easiest to hardest. The first call offers the
// lower median; afterwards the walk moves one remaining rung harder after a
// success and one easier after a skip or failure, clamped to the ladder.
ActionChoice HeuristicPolicyNext(HeuristicState& state, Candidates sorted);

// Updates failure streak and MCQ mode. A success resets both; any other
// outcome extends the streak, and a streak of kHeuristicMcqThreshold turns
// MCQ mode on.
void HeuristicObserve(HeuristicState& state, Outcome outcome);

class HeuristicPolicy : public Policy {
 public:
  std::string_view id() const override { return kHeuristicPolicy; }
  void BeginEpisode() override { state_ = {}; }
  ActionChoice NextAction(const StudentUnitState& state, Candidates candidates,
                          const DifficultyMap& difficulty, Rng& rng) override;
  void Observe(const ActionChoice& choice, Outcome outcome,
               double reward) override;

  const HeuristicState& state() const { return state_; }

 private:
  HeuristicState state_;
};

// Scores every candidate in both formats, ordered (candidate 0 free-form,
// candidate 0 MCQ, candidate 1 free-form, ...), and returns the argmax with
// ties to the earliest. The winning context is written to *chosen when given.
ActionChoice LinUcbPolicyNext(const LinUcb& bandit,
                              const StudentUnitState& state,
                              Candidates candidates, const FeatureLayout& layout,
                              const DifficultyMap& difficulty,
                              ContextVector* chosen = nullptr);

// Feeds observed rewards into a bandit it does not own. Observe() is the only
// writer of the bandit while an episode runs.
class LinUcbPolicy : public Policy {
 public:
  // Throws std::invalid_argument when the bandit dimension differs from the
  // layout dimension.
  LinUcbPolicy(LinUcb& bandit, const FeatureLayout& layout);

  std::string_view id() const override { return kLinUcbPolicy; }
  ActionChoice NextAction(const StudentUnitState& state, Candidates candidates,
                          const DifficultyMap& difficulty, Rng& rng) override;
  void Observe(const ActionChoice& choice, Outcome outcome,
               double reward) override;

 private:
  LinUcb& bandit_;
  const FeatureLayout& layout_;
  std::optional<ActionChoice> pending_choice_;
  ContextVector pending_context_;
};

}  // namespace curriculum

#endif  // CURRICULUM_POLICIES_H_
