#include "curriculum/simulator.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <thread>

namespace curriculum {
namespace {

std::string PairKey(const std::string& student_id, const std::string& exercise_id) {
  std::string key;
  key.reserve(student_id.size() + exercise_id.size() + 1);
  key += student_id;
  key += '\x1f';
  key += exercise_id;
  return key;
}

struct Episode {
  std::string unit_id;
  bool watched_video = false;
};

struct StudentPlan {
  std::string student_id;
  std::vector<Episode> episodes;  // ascending unit_id
};

std::vector<StudentPlan> PlanCohort(const Dataset& dataset) {
  std::vector<StudentPlan> plans;
  for (const auto& [student, history] : GroupByStudent(dataset.attempts)) {
    std::map<std::string, bool> watched;  // last attempt's flag per unit
    for (const auto& a : history) watched[a.unit_id] = a.watched_video;
    StudentPlan plan{student, {}};
    for (const auto& [unit, flag] : watched) plan.episodes.push_back({unit, flag});
    plans.push_back(std::move(plan));
  }
  return plans;
}

std::size_t CountUnobserved(const Dataset& dataset,
                            const std::vector<StudentPlan>& plans,
                            const OutcomeSource& source) {
  std::size_t n = 0;
  for (const auto& plan : plans) {
    for (const auto& ep : plan.episodes) {
      for (const auto& e : dataset.units.at(ep.unit_id).exercise_ids) {
        n += source.Observed(plan.student_id, e) == nullptr ? 1 : 0;
      }
    }
  }
  return n;
}

std::unique_ptr<Policy> MakePolicy(const std::string& id, LinUcb* bandit,
                                   const FeatureLayout& layout) {
  if (id == kRandomPolicy) return std::make_unique<RandomPolicy>();
  if (id == kHeuristicPolicy) return std::make_unique<HeuristicPolicy>();
  return std::make_unique<LinUcbPolicy>(*bandit, layout);
}

}  // namespace

OutcomeSource::OutcomeSource(const std::vector<AttemptRecord>& attempts,
                             PredictionTable predictions, OutcomeMode mode,
                             const WorldModel* model)
    : predictions_(std::move(predictions)), mode_(mode), model_(model) {
  if (mode == OutcomeMode::kLive && model == nullptr) {
    throw std::invalid_argument("live outcome mode needs a world model");
  }
  observed_.reserve(attempts.size());
  for (const auto& a : attempts) {
    observed_.emplace(PairKey(a.student_id, a.exercise_id), a);
  }
}

const AttemptRecord* OutcomeSource::Observed(const std::string& student_id,
                                             const std::string& exercise_id) const {
  auto it = observed_.find(PairKey(student_id, exercise_id));
  return it == observed_.end() ? nullptr : &it->second;
}

ResolvedOutcome ResolveOutcome(const OutcomeSource& source,
                               const std::string& student_id,
                               const std::string& exercise_id,
                               ExerciseFormat format,
                               const ContextVector& context, Rng& rng) {
  if (const AttemptRecord* logged = source.Observed(student_id, exercise_id)) {
    return {logged->outcome, true, logged->format != format};
  }
  auto it = source.predictions().find(PredictionKey{student_id, exercise_id, format});
  if (it == source.predictions().end()) {
    throw std::runtime_error("no observed attempt or prediction for student '" +
                             student_id + "' on exercise '" + exercise_id +
                             "' (" + std::string(ToString(format)) + ")");
  }
  const OutcomeDistribution dist = source.mode() == OutcomeMode::kLive
                                       ? Predict(*source.model(), context)
                                       : it->second;
  return {dist.Sample(rng), false, false};
}

Trajectory SimulateUnit(const Environment& env, const std::string& student_id,
                        const std::string& unit_id, bool watched_video,
                        Policy& policy, Rng& policy_rng, Rng& outcome_rng) {
  const LearningUnit& unit = env.dataset.units.at(unit_id);
  std::vector<const Exercise*> candidates;
  candidates.reserve(unit.exercise_ids.size());
  for (const auto& id : unit.exercise_ids) {
    candidates.push_back(&env.dataset.catalog.at(id));
  }

  Trajectory trajectory{student_id, unit_id, {}};
  trajectory.steps.reserve(candidates.size());
  StudentUnitState state(student_id, unit_id, watched_video);
  policy.BeginEpisode();
  while (!candidates.empty()) {
    const ActionChoice choice =
        policy.NextAction(state, candidates, env.difficulty, policy_rng);
    auto picked = std::find_if(candidates.begin(), candidates.end(),
                               [&](const Exercise* e) {
                                 return e->exercise_id == choice.exercise_id;
                               });
    if (picked == candidates.end()) {
      throw std::logic_error("policy '" + std::string(policy.id()) +
                             "' chose exercise '" + choice.exercise_id +
                             "' outside the candidate set");
    }
    const double difficulty = env.difficulty.at(choice.exercise_id);
    const ContextVector context =
        BuildContext(state, **picked, choice.format, difficulty, env.layout);
    const ResolvedOutcome resolved =
        ResolveOutcome(env.source, student_id, choice.exercise_id, choice.format,
                       context, outcome_rng);
    const double reward = Reward(resolved.outcome, choice.format, env.rewards);
    policy.Observe(choice, resolved.outcome, reward);
    state.Record(resolved.outcome);
    candidates.erase(picked);
    trajectory.steps.push_back({choice, resolved.outcome, reward,
                                resolved.replayed, resolved.format_mismatch});
  }
  return trajectory;
}

RunMetrics Summarize(const std::vector<Trajectory>& trajectories) {
  std::uint64_t steps = 0, success = 0, skip = 0, fail = 0, mcq = 0;
  for (const auto& t : trajectories) {
    for (const auto& s : t.steps) {
      ++steps;
      success += IsSuccess(s.outcome) ? 1 : 0;
      skip += IsSkip(s.outcome) ? 1 : 0;
      fail += s.outcome == Outcome::kEventualFailure ? 1 : 0;
      mcq += s.choice.format == ExerciseFormat::kMcq ? 1 : 0;
    }
  }
  RunMetrics m;
  m.steps = steps;
  if (steps == 0) return m;
  const auto n = static_cast<double>(steps);
  m.success_rate = static_cast<double>(success) / n;
  m.skip_rate = static_cast<double>(skip) / n;
  m.fail_rate = static_cast<double>(fail) / n;
  m.mcq_frequency = static_cast<double>(mcq) / n;
  return m;
}

CohortResult RunCohort(const Dataset& dataset, const std::string& policy_id,
                       const WorldModel* model, const CohortOptions& options,
                       int runs, std::uint64_t master_seed) {
  CheckPolicyId(policy_id);
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (!options.rewards.IsFinite()) {
    throw std::invalid_argument("reward configuration must be finite");
  }

  const FeatureLayout layout =
      model ? model->layout : FeatureLayout::FromExercises(dataset.catalog);
  const DifficultyMap difficulty =
      ComputeDifficulties(dataset.attempts, dataset.catalog);
  const std::vector<StudentPlan> plans = PlanCohort(dataset);

  PredictionTable predictions;
  if (model) predictions = PredictMissing(*model, dataset);
  const OutcomeMode mode = model ? options.outcome_mode : OutcomeMode::kStatic;
  const OutcomeSource source(dataset.attempts, std::move(predictions), mode, model);
  if (!model) {
    if (const std::size_t missing = CountUnobserved(dataset, plans, source)) {
      throw std::invalid_argument(
          "a world model is required: " + std::to_string(missing) +
          " (student, exercise) pairs in started units have no observed attempt");
    }
  }
  const Environment env{dataset, layout, difficulty, source, options.rewards};

  std::vector<RunMetrics> per_run(static_cast<std::size_t>(runs));
  std::optional<LinUcb> final_bandit;
  auto simulate_run = [&](int run) {
    std::optional<LinUcb> bandit;
    if (policy_id == kLinUcbPolicy) {
      bandit.emplace(static_cast<int>(layout.dimension()), options.alpha,
                     options.lambda);
    }
    auto policy = MakePolicy(policy_id, bandit ? &*bandit : nullptr, layout);
    std::vector<Trajectory> trajectories;
    for (std::size_t s = 0; s < plans.size(); ++s) {
      const auto r = static_cast<std::uint64_t>(run);
      Rng policy_rng(DeriveSeed(master_seed, {r, s, 0}));
      Rng outcome_rng(DeriveSeed(master_seed, {r, s, 1}));
      for (const auto& ep : plans[s].episodes) {
        trajectories.push_back(SimulateUnit(env, plans[s].student_id, ep.unit_id,
                                            ep.watched_video, *policy,
                                            policy_rng, outcome_rng));
      }
    }
    per_run[static_cast<std::size_t>(run)] = Summarize(trajectories);
    if (run == runs - 1) final_bandit = std::move(bandit);
  };

  const int threads = std::clamp(options.threads, 1, runs);
  if (threads == 1) {
    for (int run = 0; run < runs; ++run) simulate_run(run);
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    std::vector<std::thread> workers;
    for (int t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        try {
          for (int run = next++; run < runs; run = next++) simulate_run(run);
        } catch (...) {
          errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  CohortResult result;
  CohortReport& report = result.report;
  report.policy = policy_id;
  report.runs = runs;
  report.master_seed = master_seed;
  report.per_run = std::move(per_run);
  for (const auto& m : report.per_run) {
    report.mean.success_rate += m.success_rate / runs;
    report.mean.skip_rate += m.skip_rate / runs;
    report.mean.fail_rate += m.fail_rate / runs;
    report.mean.mcq_frequency += m.mcq_frequency / runs;
    report.mean.steps += m.steps;
  }
  report.mean.steps /= static_cast<std::uint64_t>(runs);
  auto widen = [](double& slot, double v) { slot = std::max(slot, std::abs(v)); };
  for (const auto& m : report.per_run) {
    widen(report.max_abs_deviation.success_rate,
          m.success_rate - report.mean.success_rate);
    widen(report.max_abs_deviation.skip_rate, m.skip_rate - report.mean.skip_rate);
    widen(report.max_abs_deviation.fail_rate, m.fail_rate - report.mean.fail_rate);
    widen(report.max_abs_deviation.mcq_frequency,
          m.mcq_frequency - report.mean.mcq_frequency);
  }
  result.final_bandit = std::move(final_bandit);
  return result;
}

}  // namespace curriculum
