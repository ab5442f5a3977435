#include "curriculum/domain.h"

#include <cmath>
#include <stdexcept>

namespace curriculum {

std::string_view ToString(Outcome o) {
  switch (o) {
    case Outcome::kInstantSuccess:
      return "instant_success";
    case Outcome::kEventualSuccess:
      return "eventual_success";
    case Outcome::kEventualFailure:
      return "eventual_failure";
    case Outcome::kInstantSkip:
      return "instant_skip";
    case Outcome::kEventualSkip:
      return "eventual_skip";
  }
  return "unknown";
}

std::string_view ToString(ExerciseFormat f) {
  return f == ExerciseFormat::kMcq ? "mcq" : "free_form";
}

Outcome ParseOutcome(std::string_view s) {
  for (Outcome o : kAllOutcomes) {
    if (ToString(o) == s) return o;
  }
  throw std::invalid_argument("unknown outcome '" + std::string(s) + "'");
}

ExerciseFormat ParseFormat(std::string_view s) {
  if (s == "free_form") return ExerciseFormat::kFreeForm;
  if (s == "mcq") return ExerciseFormat::kMcq;
  throw std::invalid_argument("unknown format '" + std::string(s) + "'");
}

bool RewardConfig::IsFinite() const {
  return std::isfinite(instant_success) && std::isfinite(eventual_success) &&
         std::isfinite(eventual_failure) && std::isfinite(skip) &&
         std::isfinite(mcq_penalty);
}

double Reward(Outcome outcome, ExerciseFormat format, const RewardConfig& cfg) {
  double base = 0.0;
  switch (outcome) {
    case Outcome::kInstantSuccess:
      base = cfg.instant_success;
      break;
    case Outcome::kEventualSuccess:
      base = cfg.eventual_success;
      break;
    case Outcome::kEventualFailure:
      base = cfg.eventual_failure;
      break;
    case Outcome::kInstantSkip:
    case Outcome::kEventualSkip:
      base = cfg.skip;
      break;
  }
  return format == ExerciseFormat::kMcq ? base - cfg.mcq_penalty : base;
}

}  // namespace curriculum
