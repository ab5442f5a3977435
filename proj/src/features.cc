#include "curriculum/features.h"

#include <algorithm>
#include <stdexcept>

#include "curriculum/rng.h"

namespace curriculum {
namespace {

void SortUnique(std::vector<std::string>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::uint64_t HashString(std::uint64_t h, const std::string& s) {
  // FNV-1a folded through the mixer.
  std::uint64_t f = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    f ^= c;
    f *= 0x100000001b3ULL;
  }
  return Mix64(h ^ f);
}

std::optional<std::size_t> Find(const std::vector<std::string>& vocab,
                                 const std::string& label) {
  auto it = std::lower_bound(vocab.begin(), vocab.end(), label);
  if (it == vocab.end() || *it != label) return std::nullopt;
  return static_cast<std::size_t>(it - vocab.begin());
}

}  // namespace

FeatureLayout::FeatureLayout(std::vector<std::string> solution_forms,
                             std::vector<std::string> application_contexts)
    : forms_(std::move(solution_forms)),
      contexts_(std::move(application_contexts)) {
  SortUnique(forms_);
  SortUnique(contexts_);
  std::uint64_t h = Mix64(forms_.size() * 0x100000001ULL + contexts_.size());
  for (const auto& s : forms_) h = HashString(h, s);
  h = Mix64(h + 1);
  for (const auto& s : contexts_) h = HashString(h, s);
  fingerprint_ = h;
}

std::optional<std::size_t> FeatureLayout::SolutionFormIndex(
    const std::string& label) const {
  return Find(forms_, label);
}

std::optional<std::size_t> FeatureLayout::ApplicationContextIndex(
    const std::string& label) const {
  return Find(contexts_, label);
}

void StudentUnitState::Record(Outcome outcome) {
  history_.push_back(outcome);
  if (IsSkip(outcome)) ++skip_count_;
}

double SkipRate(const StudentUnitState& state) {
  if (state.attempt_count() == 0) return 0.0;
  return static_cast<double>(state.skip_count()) / state.attempt_count();
}

double ExerciseDifficulty(int successes, int attempts) {
  return (successes + 1.0) / (attempts + 2.0);
}

double ExerciseDifficulty(std::span<const AttemptRecord> attempts) {
  int successes = 0;
  for (const auto& a : attempts) successes += IsSuccess(a.outcome) ? 1 : 0;
  return ExerciseDifficulty(successes, static_cast<int>(attempts.size()));
}

DifficultyMap ComputeDifficulties(
    std::span<const AttemptRecord> attempts,
    const std::map<std::string, Exercise>& catalog) {
  std::unordered_map<std::string, std::pair<int, int>> counts;
  for (const auto& a : attempts) {
    auto& [s, n] = counts[a.exercise_id];
    s += IsSuccess(a.outcome) ? 1 : 0;
    ++n;
  }
  DifficultyMap out;
  out.reserve(catalog.size());
  for (const auto& [id, ex] : catalog) {
    auto it = counts.find(id);
    out[id] = it == counts.end()
                  ? ExerciseDifficulty(0, 0)
                  : ExerciseDifficulty(it->second.first, it->second.second);
  }
  return out;
}

ContextVector BuildContext(const StudentUnitState& state,
                           const Exercise& exercise, ExerciseFormat format,
                           double difficulty, const FeatureLayout& layout) {
  const auto form = layout.SolutionFormIndex(exercise.solution_form);
  if (!form) {
    throw std::invalid_argument("exercise '" + exercise.exercise_id +
                                "': solution_form '" + exercise.solution_form +
                                "' is not in the feature layout");
  }
  const auto context = layout.ApplicationContextIndex(exercise.application_context);
  if (!context) {
    throw std::invalid_argument(
        "exercise '" + exercise.exercise_id + "': application_context '" +
        exercise.application_context + "' is not in the feature layout");
  }

  if (!(difficulty >= 0.0 && difficulty <= 1.0)) {
    throw std::invalid_argument("exercise '" + exercise.exercise_id +
                                "': difficulty must lie in [0, 1]");
  }

  ContextVector out;
  out.layout_fingerprint = layout.fingerprint();
  out.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.dimension()));
  auto& v = out.values;

  const auto last = state.last_outcome();
  const std::size_t prev_slot =
      last ? static_cast<std::size_t>(Index(*last)) : FeatureLayout::kNoPrevOutcome;
  v[FeatureLayout::kPrevOutcomeOffset + prev_slot] = 1.0;
  v[FeatureLayout::kSkipRate] = SkipRate(state);
  v[FeatureLayout::kWatchedVideo] = state.watched_video() ? 1.0 : 0.0;
  v[FeatureLayout::kDifficulty] = difficulty;
  v[layout.solution_form_offset() + *form] = 1.0;
  v[layout.application_context_offset() + *context] = 1.0;
  v[layout.mcq_index()] = format == ExerciseFormat::kMcq ? 1.0 : 0.0;
  v[layout.bias_index()] = 1.0;
  return out;
}

}  // namespace curriculum
