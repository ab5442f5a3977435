#ifndef CURRICULUM_DATASET_H_
#define CURRICULUM_DATASET_H_

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "curriculum/domain.h"

namespace curriculum {

// Validation or parse failure. Carries the file and 1-based line when the
// problem came from a record on disk.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& message, std::string file = {}, int line = 0)
      : std::runtime_error(Format(message, file, line)),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  static std::string Format(const std::string& message, const std::string& file,
                            int line) {
    if (file.empty()) return message;
    if (line <= 0) return file + ": " + message;
    return file + ":" + std::to_string(line) + ": " + message;
  }

  std::string file_;
  int line_;
};

struct Dataset {
  std::vector<AttemptRecord> attempts;
  std::map<std::string, Exercise> catalog;
  std::map<std::string, LearningUnit> units;

  bool operator==(const Dataset&) const = default;

  // Referential integrity, per-student seq uniqueness, and (student,
  // exercise) uniqueness. Throws DataError.
  void Validate() const;
};

// Default file names inside a dataset directory.
inline constexpr const char* kAttemptsFile = "attempts.jsonl";
inline constexpr const char* kCatalogFile = "catalog.jsonl";
inline constexpr const char* kUnitsFile = "units.jsonl";

// Line-delimited JSON records. Blank lines are ignored. Every failure is a
// DataError naming the file and line.
Dataset LoadDataset(const std::filesystem::path& attempts_path,
                    const std::filesystem::path& catalog_path,
                    const std::filesystem::path& units_path);
Dataset LoadDatasetDir(const std::filesystem::path& dir);

void SaveDataset(const Dataset& dataset,
                 const std::filesystem::path& attempts_path,
                 const std::filesystem::path& catalog_path,
                 const std::filesystem::path& units_path);
void SaveDatasetDir(const Dataset& dataset, const std::filesystem::path& dir);

// Attempts grouped by student and sorted by seq; students in id order.
std::map<std::string, std::vector<AttemptRecord>> GroupByStudent(
    const std::vector<AttemptRecord>& attempts);

}  // namespace curriculum

#endif  // CURRICULUM_DATASET_H_
