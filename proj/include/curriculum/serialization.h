#ifndef CURRICULUM_SERIALIZATION_H_
#define CURRICULUM_SERIALIZATION_H_

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "curriculum/features.h"
#include "curriculum/linucb.h"
#include "curriculum/simulator.h"
#include "curriculum/world_model.h"

namespace curriculum {

// Every checkpoint and report is a JSON document with a "kind" and a
// "format_version"; documents of another kind or version are rejected.
inline constexpr int kFormatVersion = 1;

class SerializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string WorldModelToJson(const WorldModel& model);
WorldModel WorldModelFromJson(std::string_view text);

struct BanditCheckpoint {
  LinUcb bandit;
  // Layout the bandit's contexts were built with; absent for raw-vector
  // benchmarks.
  std::optional<FeatureLayout> layout;
};

// A_inv is stored next to A so a restored bandit scores bit-identically.
std::string BanditToJson(const LinUcb& bandit,
                         const std::optional<FeatureLayout>& layout);
BanditCheckpoint BanditFromJson(std::string_view text);

std::string CrossValidationToJson(const CrossValidationReport& report,
                                  const TrainingHyperparams& hyperparams, int folds);

std::string CohortReportsToJson(const std::vector<CohortReport>& reports);
std::vector<CohortReport> CohortReportsFromJson(std::string_view text);

inline constexpr std::string_view kReportCsvHeader =
    "policy,run,success_rate,skip_rate,fail_rate,mcq_frequency";

// Header plus one row per policy per run.
std::string CohortReportsToCsv(const std::vector<CohortReport>& reports);

// Whole-file helpers. Writes are all-or-nothing: the text goes to a sibling
// temporary that is renamed into place.
std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, std::string_view text);

}  // namespace curriculum

#endif  // CURRICULUM_SERIALIZATION_H_
