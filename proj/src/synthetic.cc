#include "curriculum/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "curriculum/rng.h"
#include "curriculum/world_model.h"

namespace curriculum {
namespace {

std::string Id(char prefix, int width, int n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*d", prefix, width, n);
  return buf;
}

// Rows in outcome order: instant success, eventual success, eventual failure,
// instant skip, eventual skip.
void Set(Eigen::MatrixXd& w, std::size_t col, std::array<double, kNumOutcomes> v) {
  for (int k = 0; k < kNumOutcomes; ++k) w(k, static_cast<Eigen::Index>(col)) = v[k];
}

}  // namespace

void SyntheticConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("synthetic config: ") + what);
  };
  require(n_students >= 1, "n_students must be >= 1");
  require(n_units >= 1, "n_units must be >= 1");
  require(exercises_per_unit >= 1, "exercises_per_unit must be >= 1");
  require(unit_start_probability > 0.0 && unit_start_probability <= 1.0,
          "unit_start_probability must lie in (0, 1]");
  require(attempt_fraction_min > 0.0 && attempt_fraction_min <= attempt_fraction_max &&
              attempt_fraction_max <= 1.0,
          "attempt fractions must satisfy 0 < min <= max <= 1");
  require(video_probability >= 0.0 && video_probability <= 1.0,
          "video_probability must lie in [0, 1]");
  require(unit_video_probability >= 0.0 && unit_video_probability <= 1.0,
          "unit_video_probability must lie in [0, 1]");
  require(mcq_probability >= 0.0 && mcq_probability <= 1.0,
          "mcq_probability must lie in [0, 1]");
  require(hard_exercise_fraction >= 0.0 && hard_exercise_fraction <= 1.0,
          "hard_exercise_fraction must lie in [0, 1]");
  require(!solution_forms.empty(), "solution_forms must not be empty");
  require(!application_contexts.empty(), "application_contexts must not be empty");
  double total = 0.0;
  for (double p : outcome_prior) {
    require(p >= 0.0 && std::isfinite(p), "outcome_prior entries must be >= 0");
    total += p;
  }
  require(std::abs(total - 1.0) < 1e-9, "outcome_prior must sum to 1");
  if (planted_weights) {
    const auto d = static_cast<Eigen::Index>(SyntheticLayout(*this).dimension());
    require(planted_weights->rows() == kNumOutcomes && planted_weights->cols() == d,
            "planted_weights must be kNumOutcomes x layout dimension");
    require(planted_weights->allFinite(), "planted_weights must be finite");
  }
}

FeatureLayout SyntheticLayout(const SyntheticConfig& cfg) {
  return FeatureLayout(cfg.solution_forms, cfg.application_contexts);
}

Eigen::MatrixXd DefaultPlantedWeights(const FeatureLayout& layout) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(
      kNumOutcomes, static_cast<Eigen::Index>(layout.dimension()));
  using L = FeatureLayout;
  const std::size_t prev = L::kPrevOutcomeOffset;
  //                                               IS    ES    EF    ISk   ESk
  Set(w, prev + Index(Outcome::kInstantSuccess),  {1.5,  0.0,  0.0, -0.5, -0.5});
  Set(w, prev + Index(Outcome::kEventualSuccess), {0.8,  0.8,  0.0, -0.3, -0.3});
  Set(w, prev + Index(Outcome::kEventualFailure), {-0.5, 0.0,  1.0,  0.5,  0.3});
  Set(w, prev + Index(Outcome::kInstantSkip),     {-1.0, -0.5, 0.0,  2.0,  1.0});
  Set(w, prev + Index(Outcome::kEventualSkip),    {-1.0, -0.3, 0.2,  1.0,  2.0});
  Set(w, L::kSkipRate,                            {-2.0, -1.0, 0.0,  4.0,  3.0});
  Set(w, L::kWatchedVideo,                        {0.8,  0.3, -0.2, -0.5, -0.3});
  Set(w, L::kDifficulty,                          {6.0,  2.25, -1.5, -3.0, -2.25});
  for (std::size_t i = 0; i < layout.solution_forms().size(); ++i) {
    const double s = 0.3 * (static_cast<double>(i % 3) - 1.0);
    Set(w, layout.solution_form_offset() + i, {s, 0.0, -s, 0.0, 0.0});
  }
  for (std::size_t i = 0; i < layout.application_contexts().size(); ++i) {
    const double s = 0.2 * (static_cast<double>(i % 2) * 2.0 - 1.0);
    Set(w, layout.application_context_offset() + i, {s, 0.0, 0.0, -s, 0.0});
  }
  Set(w, layout.mcq_index(),                      {0.5,  0.1, -0.2, -0.2, -0.2});
  Set(w, layout.bias_index(),                     {-2.6, -1.3, -1.0, -0.3, -0.9});
  return w;
}

SyntheticCohort GenerateSyntheticCohort(const SyntheticConfig& cfg) {
  cfg.Validate();
  const FeatureLayout layout = SyntheticLayout(cfg);
  Rng catalog_rng(DeriveSeed(cfg.seed, {0}));

  SyntheticCohort out;
  Dataset& ds = out.dataset;
  std::vector<std::string> unit_ids;
  for (int u = 0; u < cfg.n_units; ++u) {
    LearningUnit unit;
    unit.unit_id = Id('u', 2, u);
    unit.has_video = catalog_rng.Bernoulli(cfg.unit_video_probability);
    for (int e = 0; e < cfg.exercises_per_unit; ++e) {
      Exercise ex;
      ex.exercise_id = unit.unit_id + "_" + Id('e', 2, e);
      ex.unit_id = unit.unit_id;
      ex.solution_form =
          cfg.solution_forms[catalog_rng.Below(cfg.solution_forms.size())];
      ex.application_context =
          cfg.application_contexts[catalog_rng.Below(cfg.application_contexts.size())];
      const bool hard = catalog_rng.Bernoulli(cfg.hard_exercise_fraction);
      const double u = catalog_rng.Uniform();
      out.easiness[ex.exercise_id] = hard ? 0.05 + 0.25 * u : 0.60 + 0.35 * u;
      unit.exercise_ids.push_back(ex.exercise_id);
      ds.catalog.emplace(ex.exercise_id, std::move(ex));
    }
    unit_ids.push_back(unit.unit_id);
    ds.units.emplace(unit.unit_id, std::move(unit));
  }

  std::optional<WorldModel> truth;
  if (cfg.planted_weights) truth = WorldModel{*cfg.planted_weights, layout, {}, 0.0};

  const int width = cfg.n_students > 9999 ? 6 : 4;
  for (int s = 0; s < cfg.n_students; ++s) {
    Rng rng(DeriveSeed(cfg.seed, {1, static_cast<std::uint64_t>(s)}));
    const std::string student_id = Id('s', width, s);

    std::vector<std::string> started;
    for (const auto& u : unit_ids) {
      if (rng.Bernoulli(cfg.unit_start_probability)) started.push_back(u);
    }
    if (started.empty()) started.push_back(unit_ids[rng.Below(unit_ids.size())]);

    std::int64_t seq = 0;
    for (const auto& unit_id : started) {
      const LearningUnit& unit = ds.units.at(unit_id);
      const bool watched = unit.has_video && rng.Bernoulli(cfg.video_probability);
      const double fraction =
          cfg.attempt_fraction_min +
          (cfg.attempt_fraction_max - cfg.attempt_fraction_min) * rng.Uniform();
      const auto n = unit.exercise_ids.size();
      const auto k = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n))),
          1, n);
      std::vector<std::string> order = unit.exercise_ids;
      for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.Below(i)]);

      StudentUnitState state(student_id, unit_id, watched);
      for (std::size_t i = 0; i < k; ++i) {
        const Exercise& ex = ds.catalog.at(order[i]);
        AttemptRecord a;
        a.student_id = student_id;
        a.exercise_id = ex.exercise_id;
        a.unit_id = unit_id;
        a.seq = seq++;
        a.format = rng.Bernoulli(cfg.mcq_probability) ? ExerciseFormat::kMcq
                                                      : ExerciseFormat::kFreeForm;
        a.watched_video = watched;

        OutcomeDistribution dist;
        if (truth) {
          dist = Predict(*truth, BuildContext(state, ex, a.format,
                                             out.easiness.at(ex.exercise_id), layout));
        } else {
          dist.probabilities = cfg.outcome_prior;
        }
        a.outcome = dist.Sample(rng);
        state.Record(a.outcome);
        ds.attempts.push_back(std::move(a));
      }
    }
  }
  return out;
}

Dataset GenerateSynthetic(const SyntheticConfig& cfg) {
  return GenerateSyntheticCohort(cfg).dataset;
}

SyntheticConfig StandardCohortConfig(std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.seed = seed;
  cfg.planted_weights = DefaultPlantedWeights(SyntheticLayout(cfg));
  return cfg;
}

}  // namespace curriculum
