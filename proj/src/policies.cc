#include "curriculum/policies.h"

#include <algorithm>
#include <stdexcept>

namespace curriculum {
namespace {

void RequireCandidates(Candidates candidates) {
  if (candidates.empty()) throw std::invalid_argument("policy: no candidates");
}

double DifficultyOf(const DifficultyMap& difficulty, const std::string& id) {
  auto it = difficulty.find(id);
  return it == difficulty.end() ? ExerciseDifficulty(0, 0) : it->second;
}

}  // namespace

void CheckPolicyId(std::string_view id) {
  if (id != kRandomPolicy && id != kHeuristicPolicy && id != kLinUcbPolicy) {
    throw std::invalid_argument("unknown policy '" + std::string(id) +
                                "' (expected random, heuristic or linucb)");
  }
}

ActionChoice RandomPolicyNext(Candidates candidates, Rng& rng) {
  RequireCandidates(candidates);
  const Exercise* pick = candidates[rng.Below(candidates.size())];
  return {pick->exercise_id, ExerciseFormat::kFreeForm};
}

ActionChoice RandomPolicy::NextAction(const StudentUnitState&,
                                      Candidates candidates,
                                      const DifficultyMap&, Rng& rng) {
  return RandomPolicyNext(candidates, rng);
}

std::vector<const Exercise*> SortEasiestFirst(Candidates candidates,
                                              const DifficultyMap& difficulty) {
  std::vector<const Exercise*> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end(),
            [&](const Exercise* x, const Exercise* y) {
              const double dx = DifficultyOf(difficulty, x->exercise_id);
              const double dy = DifficultyOf(difficulty, y->exercise_id);
              if (dx != dy) return dx > dy;
              return x->exercise_id < y->exercise_id;
            });
  return sorted;
}

ActionChoice HeuristicPolicyNext(HeuristicState& state, Candidates sorted) {
  RequireCandidates(sorted);
  const ExerciseFormat format =
      state.mcq_mode ? ExerciseFormat::kMcq : ExerciseFormat::kFreeForm;

  if (state.ladder.empty()) {
    for (const Exercise* e : sorted) state.ladder.push_back(e->exercise_id);
    state.rung = (sorted.size() - 1) / 2;
    return {state.ladder[state.rung], format};
  }

  // Ladder position of each remaining candidate. Anything unseen at episode
  // start joins the top of the ladder.
  std::vector<bool> available(state.ladder.size(), false);
  for (const Exercise* e : sorted) {
    auto it = std::find(state.ladder.begin(), state.ladder.end(), e->exercise_id);
    if (it == state.ladder.end()) {
      state.ladder.push_back(e->exercise_id);
      available.push_back(true);
    } else {
      available[static_cast<std::size_t>(it - state.ladder.begin())] = true;
    }
  }

  const long top = static_cast<long>(state.ladder.size()) - 1;
  long direction = 1;
  if (state.last_success.has_value()) direction = *state.last_success ? 1 : -1;
  const long step = state.last_success.has_value() ? direction : 0;
  const long desired = std::clamp(static_cast<long>(state.rung) + step, 0L, top);

  // Nearest remaining rung, preferring the direction of travel.
  for (long dist = 0; dist <= top; ++dist) {
    for (long pos : {desired + dist * direction, desired - dist * direction}) {
      if (pos < 0 || pos > top || !available[static_cast<std::size_t>(pos)]) {
        continue;
      }
      state.rung = static_cast<std::size_t>(pos);
      return {state.ladder[state.rung], format};
    }
  }
  throw std::logic_error("heuristic policy: no available rung");
}

void HeuristicObserve(HeuristicState& state, Outcome outcome) {
  const bool success = IsSuccess(outcome);
  state.last_success = success;
  if (success) {
    state.consecutive_failures = 0;
    state.mcq_mode = false;
  } else if (++state.consecutive_failures >= kHeuristicMcqThreshold) {
    state.mcq_mode = true;
  }
}

ActionChoice HeuristicPolicy::NextAction(const StudentUnitState&,
                                         Candidates candidates,
                                         const DifficultyMap& difficulty, Rng&) {
  RequireCandidates(candidates);
  const auto sorted = SortEasiestFirst(candidates, difficulty);
  return HeuristicPolicyNext(state_, sorted);
}

void HeuristicPolicy::Observe(const ActionChoice&, Outcome outcome, double) {
  HeuristicObserve(state_, outcome);
}

ActionChoice LinUcbPolicyNext(const LinUcb& bandit,
                              const StudentUnitState& state,
                              Candidates candidates, const FeatureLayout& layout,
                              const DifficultyMap& difficulty,
                              ContextVector* chosen) {
  RequireCandidates(candidates);
  if (static_cast<std::size_t>(bandit.dimension()) != layout.dimension()) {
    throw std::invalid_argument("linucb policy: bandit dimension " +
                                std::to_string(bandit.dimension()) +
                                " does not match layout dimension " +
                                std::to_string(layout.dimension()));
  }
  std::vector<ContextVector> contexts;
  std::vector<Eigen::VectorXd> vectors;
  contexts.reserve(2 * candidates.size());
  vectors.reserve(2 * candidates.size());
  for (const Exercise* e : candidates) {
    const double d = DifficultyOf(difficulty, e->exercise_id);
    for (ExerciseFormat f : kAllFormats) {
      contexts.push_back(BuildContext(state, *e, f, d, layout));
      vectors.push_back(contexts.back().values);
    }
  }
  const std::size_t best = bandit.Select(vectors);
  if (chosen) *chosen = contexts[best];
  return {candidates[best / 2]->exercise_id, kAllFormats[best % 2]};
}

LinUcbPolicy::LinUcbPolicy(LinUcb& bandit, const FeatureLayout& layout)
    : bandit_(bandit), layout_(layout) {
  if (static_cast<std::size_t>(bandit.dimension()) != layout.dimension()) {
    throw std::invalid_argument("linucb policy: bandit dimension " +
                                std::to_string(bandit.dimension()) +
                                " does not match layout dimension " +
                                std::to_string(layout.dimension()));
  }
}

ActionChoice LinUcbPolicy::NextAction(const StudentUnitState& state,
                                      Candidates candidates,
                                      const DifficultyMap& difficulty, Rng&) {
  pending_choice_ = LinUcbPolicyNext(bandit_, state, candidates, layout_,
                                     difficulty, &pending_context_);
  return *pending_choice_;
}

void LinUcbPolicy::Observe(const ActionChoice& choice, Outcome, double reward) {
  if (!pending_choice_ || !(*pending_choice_ == choice)) {
    throw std::logic_error("linucb policy: observed an action it did not choose");
  }
  bandit_.Update(pending_context_.values, reward);
  pending_choice_.reset();
}

}  // namespace curriculum
