#include "curriculum/dataset.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "curriculum/synthetic.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace curriculum {
namespace {

namespace fs = std::filesystem;

class DatasetFilesTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("curriculum_dataset_" + std::string(::testing::UnitTest::GetInstance()
                                                     ->current_test_info()
                                                     ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    Write(kCatalogFile,
          R"({"exercise_id":"e1","unit_id":"u1","solution_form":"code","application_context":"applied"})"
          "\n"
          R"({"exercise_id":"e2","unit_id":"u1","solution_form":"numeric","application_context":"applied"})"
          "\n");
    Write(kUnitsFile, R"({"unit_id":"u1","exercise_ids":["e1","e2"],"has_video":true})"
                      "\n");
  }
  void TearDown() override { fs::remove_all(dir_); }

  void Write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
  }
  Dataset Load() { return LoadDatasetDir(dir_); }

  // Loads expecting failure; returns the error.
  DataError LoadError() {
    try {
      Load();
    } catch (const DataError& e) {
      return e;
    }
    ADD_FAILURE() << "expected DataError";
    return DataError("none");
  }

  fs::path dir_;
};

std::string AttemptLine(const std::string& student, const std::string& exercise, int seq,
                        const std::string& extra = "") {
  return R"({"student_id":")" + student + R"(","exercise_id":")" + exercise +
         R"(","unit_id":"u1","seq":)" + std::to_string(seq) +
         R"(,"format":"free_form","outcome":"instant_success","watched_video":false)" + extra +
         "}\n";
}

TEST_F(DatasetFilesTest, EmptyAttemptsGivesEmptyDataset) {
  Write(kAttemptsFile, "");
  const Dataset ds = Load();
  EXPECT_TRUE(ds.attempts.empty());
  EXPECT_EQ(ds.catalog.size(), 2u);
  EXPECT_EQ(ds.units.at("u1").exercise_ids, (std::vector<std::string>{"e1", "e2"}));
  EXPECT_TRUE(ds.units.at("u1").has_video);
}

TEST_F(DatasetFilesTest, ParsesRecordsAndOptionalCohort) {
  Write(kAttemptsFile, AttemptLine("s1", "e1", 0) + "\n" +
                           AttemptLine("s1", "e2", 1, R"(,"cohort":"customer")"));
  const Dataset ds = Load();
  ASSERT_EQ(ds.attempts.size(), 2u);
  EXPECT_EQ(ds.attempts[1].cohort, "customer");
  EXPECT_EQ(ds.attempts[0].outcome, Outcome::kInstantSuccess);
  EXPECT_EQ(ds.attempts[0].seq, 0);
}

TEST_F(DatasetFilesTest, UnknownExerciseReportsLineNumber) {
  Write(kAttemptsFile, AttemptLine("s1", "e1", 0) + AttemptLine("s1", "e2", 1) +
                           AttemptLine("s2", "e7", 0));
  const DataError e = LoadError();
  EXPECT_EQ(e.line(), 3);
  EXPECT_NE(std::string(e.what()).find("attempts.jsonl:3:"), std::string::npos);
  EXPECT_NE(std::string(e.what()).find("e7"), std::string::npos);
}

TEST_F(DatasetFilesTest, RejectsMalformedRecords) {
  const std::pair<std::string, int> cases[] = {
      {AttemptLine("s1", "e1", 0) + "{not json\n", 2},
      {R"({"student_id":"s1","exercise_id":"e1","unit_id":"u1","seq":0,"format":"free_form","outcome":"instant_success"})"
       "\n",
       1},
      {AttemptLine("s1", "e1", 0) + AttemptLine("s1", "e1", 1), 2},
      {AttemptLine("s1", "e1", 0) + AttemptLine("s1", "e2", 0), 2},
      {R"({"student_id":"s1","exercise_id":"e1","unit_id":"u1","seq":"0","format":"free_form","outcome":"instant_success","watched_video":false})"
       "\n",
       1},
      {R"({"student_id":"s1","exercise_id":"e1","unit_id":"u1","seq":0,"format":"oral","outcome":"instant_success","watched_video":false})"
       "\n",
       1},
      {R"({"student_id":"s1","exercise_id":"e1","unit_id":"u2","seq":0,"format":"mcq","outcome":"instant_success","watched_video":false})"
       "\n",
       1},
      {"[1,2,3]\n", 1},
  };
  for (const auto& [text, line] : cases) {
    Write(kAttemptsFile, text);
    EXPECT_EQ(LoadError().line(), line) << text;
  }
}

TEST_F(DatasetFilesTest, RejectsInconsistentCatalog) {
  Write(kAttemptsFile, "");
  Write(kUnitsFile, R"({"unit_id":"u1","exercise_ids":["e1","e9"],"has_video":true})"
                    "\n");
  const DataError e = LoadError();
  EXPECT_EQ(e.line(), 1);
  EXPECT_NE(std::string(e.what()).find("units.jsonl"), std::string::npos);
}

TEST_F(DatasetFilesTest, MissingFileNamesThePath) {
  fs::remove(dir_ / kAttemptsFile);
  const DataError e = LoadError();
  EXPECT_NE(std::string(e.what()).find("attempts.jsonl"), std::string::npos);
}

TEST(SyntheticTest, SameConfigSameDataset) {
  SyntheticConfig cfg = StandardCohortConfig(7);
  cfg.n_students = 10;
  cfg.n_units = 2;
  cfg.exercises_per_unit = 5;
  const Dataset a = GenerateSynthetic(cfg);
  const Dataset b = GenerateSynthetic(cfg);
  EXPECT_EQ(a, b);
  EXPECT_NO_THROW(a.Validate());
  cfg.seed = 8;
  EXPECT_NE(GenerateSynthetic(cfg), a);
}

TEST(SyntheticTest, RoundTripsThroughFiles) {
  SyntheticConfig cfg = StandardCohortConfig(3);
  cfg.n_students = 30;
  const Dataset ds = GenerateSynthetic(cfg);
  const fs::path dir = fs::temp_directory_path() / "curriculum_roundtrip";
  fs::remove_all(dir);
  SaveDatasetDir(ds, dir);
  EXPECT_EQ(LoadDatasetDir(dir), ds);
  fs::remove_all(dir);
}

TEST(SyntheticTest, PlantedVideoEffectShowsInData) {
  SyntheticConfig cfg;
  cfg.seed = 11;
  cfg.n_students = 300;
  cfg.unit_video_probability = 1.0;
  cfg.video_probability = 0.5;
  const FeatureLayout layout = SyntheticLayout(cfg);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(kNumOutcomes, static_cast<Eigen::Index>(layout.dimension()));
  w(Index(Outcome::kInstantSuccess), FeatureLayout::kWatchedVideo) = 3.0;
  cfg.planted_weights = w;
  const Dataset ds = GenerateSynthetic(cfg);

  // Point-biserial correlation between watched_video and instant success.
  double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (const auto& a : ds.attempts) {
    const double x = a.watched_video ? 1.0 : 0.0;
    const double y = a.outcome == Outcome::kInstantSuccess ? 1.0 : 0.0;
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double r = cov / std::sqrt((sxx / n - sx * sx / (n * n)) * (syy / n - sy * sy / (n * n)));
  EXPECT_GT(r, 0.3);
}

TEST(SyntheticTest, MinimalDataset) {
  SyntheticConfig cfg;
  cfg.n_students = 1;
  cfg.n_units = 1;
  cfg.exercises_per_unit = 1;
  const Dataset ds = GenerateSynthetic(cfg);
  ASSERT_EQ(ds.attempts.size(), 1u);
  EXPECT_EQ(ds.catalog.size(), 1u);
  EXPECT_NO_THROW(ds.Validate());
}

TEST(SyntheticTest, ShapeFollowsConfig) {
  SyntheticConfig cfg = StandardCohortConfig(1);
  const auto cohort = GenerateSyntheticCohort(cfg);
  EXPECT_EQ(cohort.dataset.units.size(), 4u);
  EXPECT_EQ(cohort.dataset.catalog.size(), 48u);
  EXPECT_EQ(cohort.easiness.size(), 48u);
  std::set<std::string> students;
  std::size_t mcq = 0;
  for (const auto& a : cohort.dataset.attempts) {
    students.insert(a.student_id);
    mcq += a.format == ExerciseFormat::kMcq;
  }
  EXPECT_EQ(students.size(), 200u);
  EXPECT_NEAR(static_cast<double>(mcq) / cohort.dataset.attempts.size(), 0.15, 0.03);
  for (const auto& [id, e] : cohort.easiness) {
    EXPECT_TRUE((e >= 0.05 && e <= 0.30) || (e >= 0.60 && e <= 0.95)) << id;
  }
}

TEST(SyntheticTest, RejectsInvalidConfig) {
  SyntheticConfig cfg;
  cfg.n_students = 0;
  EXPECT_THROW(GenerateSynthetic(cfg), std::invalid_argument);
  cfg = {};
  cfg.outcome_prior = {0.5, 0.5, 0.5, 0, 0};
  EXPECT_THROW(GenerateSynthetic(cfg), std::invalid_argument);
  cfg = {};
  cfg.planted_weights = Eigen::MatrixXd::Zero(5, 3);
  EXPECT_THROW(GenerateSynthetic(cfg), std::invalid_argument);
}

TEST(GroupByStudentTest, OrdersBySeq) {
  using testing::MakeAttempt;
  const std::vector<AttemptRecord> rows = {
      MakeAttempt("b", "e1", "u1", 5, Outcome::kInstantSkip),
      MakeAttempt("a", "e2", "u1", 2, Outcome::kInstantSkip),
      MakeAttempt("b", "e2", "u1", 1, Outcome::kInstantSkip),
  };
  const auto groups = GroupByStudent(rows);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups.at("b")[0].seq, 1);
  EXPECT_EQ(groups.at("b")[1].seq, 5);
}

}  // namespace
}  // namespace curriculum
