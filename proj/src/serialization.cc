#include "curriculum/serialization.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace curriculum {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json Header(const char* kind) {
  ordered_json doc;
  doc["kind"] = kind;
  doc["format_version"] = kFormatVersion;
  return doc;
}

json ParseDocument(std::string_view text, const char* kind) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SerializationError(std::string(kind) + ": malformed or truncated document: " +
                             e.what());
  }
  if (!doc.is_object()) throw SerializationError(std::string(kind) + ": expected object");
  if (!doc.contains("kind") || doc["kind"] != kind) {
    throw SerializationError(std::string("expected a '") + kind + "' document");
  }
  if (!doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
    throw SerializationError(std::string(kind) + ": missing format_version");
  }
  const int version = doc["format_version"].get<int>();
  if (version != kFormatVersion) {
    throw SerializationError(std::string(kind) + ": unsupported format_version " +
                             std::to_string(version));
  }
  return doc;
}

// Runs fn, turning nlohmann type/key errors into SerializationError.
template <typename Fn>
auto Guard(const char* kind, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw SerializationError(std::string(kind) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw SerializationError(std::string(kind) + ": " + e.what());
  }
}

ordered_json MatrixRowMajor(const Eigen::MatrixXd& m) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  }
  return out;
}

Eigen::MatrixXd MatrixFrom(const json& values, Eigen::Index rows, Eigen::Index cols,
                           const char* what) {
  if (!values.is_array() || static_cast<Eigen::Index>(values.size()) != rows * cols) {
    throw SerializationError(std::string(what) + ": expected " +
                             std::to_string(rows * cols) + " values");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = values.at(static_cast<std::size_t>(i * cols + j)).get<double>();
    }
  }
  return m;
}

ordered_json LayoutJson(const FeatureLayout& layout) {
  ordered_json out;
  out["solution_forms"] = layout.solution_forms();
  out["application_contexts"] = layout.application_contexts();
  out["dimension"] = layout.dimension();
  return out;
}

FeatureLayout LayoutFrom(const json& j) {
  FeatureLayout layout(j.at("solution_forms").get<std::vector<std::string>>(),
                       j.at("application_contexts").get<std::vector<std::string>>());
  if (j.at("dimension").get<std::size_t>() != layout.dimension()) {
    throw SerializationError("layout: dimension does not match vocabularies");
  }
  return layout;
}

ordered_json MetricsJson(const RunMetrics& m) {
  ordered_json out;
  out["success_rate"] = m.success_rate;
  out["skip_rate"] = m.skip_rate;
  out["fail_rate"] = m.fail_rate;
  out["mcq_frequency"] = m.mcq_frequency;
  out["steps"] = m.steps;
  return out;
}

RunMetrics MetricsFrom(const json& j) {
  RunMetrics m;
  m.success_rate = j.at("success_rate").get<double>();
  m.skip_rate = j.at("skip_rate").get<double>();
  m.fail_rate = j.at("fail_rate").get<double>();
  m.mcq_frequency = j.at("mcq_frequency").get<double>();
  m.steps = j.at("steps").get<std::uint64_t>();
  return m;
}

void AppendNumber(std::string& out, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

}  // namespace

std::string WorldModelToJson(const WorldModel& model) {
  ordered_json doc = Header("world_model");
  doc["layout"] = LayoutJson(model.layout);
  doc["outcomes"] = ordered_json::array();
  for (Outcome o : kAllOutcomes) doc["outcomes"].push_back(ToString(o));
  doc["rows"] = model.weights.rows();
  doc["cols"] = model.weights.cols();
  doc["weights"] = MatrixRowMajor(model.weights);
  ordered_json hp;
  hp["l2"] = model.hyperparams.l2;
  hp["learning_rate"] = model.hyperparams.learning_rate;
  hp["epochs"] = model.hyperparams.epochs;
  hp["seed"] = model.hyperparams.seed;
  doc["hyperparams"] = hp;
  doc["final_loss"] = model.final_loss;
  return doc.dump(2) + "\n";
}

WorldModel WorldModelFromJson(std::string_view text) {
  const json doc = ParseDocument(text, "world_model");
  return Guard("world_model", [&] {
    WorldModel model;
    model.layout = LayoutFrom(doc.at("layout"));
    const auto rows = doc.at("rows").get<Eigen::Index>();
    const auto cols = doc.at("cols").get<Eigen::Index>();
    if (rows != kNumOutcomes ||
        cols != static_cast<Eigen::Index>(model.layout.dimension())) {
      throw SerializationError("world_model: weight shape does not match layout");
    }
    model.weights = MatrixFrom(doc.at("weights"), rows, cols, "world_model weights");
    if (!model.weights.allFinite()) {
      throw SerializationError("world_model: non-finite weights");
    }
    const json& hp = doc.at("hyperparams");
    model.hyperparams.l2 = hp.at("l2").get<double>();
    model.hyperparams.learning_rate = hp.at("learning_rate").get<double>();
    model.hyperparams.epochs = hp.at("epochs").get<int>();
    model.hyperparams.seed = hp.at("seed").get<std::uint64_t>();
    model.final_loss = doc.at("final_loss").get<double>();
    return model;
  });
}

std::string BanditToJson(const LinUcb& bandit,
                         const std::optional<FeatureLayout>& layout) {
  ordered_json doc = Header("linucb_bandit");
  doc["d"] = bandit.dimension();
  doc["alpha"] = bandit.alpha();
  doc["lambda"] = bandit.lambda();
  doc["update_count"] = bandit.update_count();
  doc["refresh_interval"] = bandit.refresh_interval();
  doc["A"] = MatrixRowMajor(bandit.a());
  doc["A_inv"] = MatrixRowMajor(bandit.a_inv());
  doc["b"] = MatrixRowMajor(bandit.b());
  doc["layout"] = layout ? LayoutJson(*layout) : ordered_json();
  return doc.dump(2) + "\n";
}

BanditCheckpoint BanditFromJson(std::string_view text) {
  const json doc = ParseDocument(text, "linucb_bandit");
  return Guard("linucb_bandit", [&] {
    const auto d = doc.at("d").get<Eigen::Index>();
    if (d < 1) throw SerializationError("linucb_bandit: d must be >= 1");
    std::optional<FeatureLayout> layout;
    if (!doc.at("layout").is_null()) {
      layout = LayoutFrom(doc.at("layout"));
      if (static_cast<Eigen::Index>(layout->dimension()) != d) {
        throw SerializationError("linucb_bandit: layout dimension differs from d");
      }
    }
    LinUcb bandit = LinUcb::Restore(
        doc.at("alpha").get<double>(), doc.at("lambda").get<double>(),
        doc.at("update_count").get<std::uint64_t>(),
        MatrixFrom(doc.at("A"), d, d, "A"), MatrixFrom(doc.at("A_inv"), d, d, "A_inv"),
        MatrixFrom(doc.at("b"), d, 1, "b"),
        doc.at("refresh_interval").get<std::uint64_t>());
    return BanditCheckpoint{std::move(bandit), std::move(layout)};
  });
}

std::string CrossValidationToJson(const CrossValidationReport& report,
                                  const TrainingHyperparams& hyperparams,
                                  int folds) {
  ordered_json doc = Header("cv_report");
  doc["folds"] = folds;
  doc["seed"] = hyperparams.seed;
  doc["accuracy"] = report.accuracy;
  doc["majority_baseline"] = report.majority_baseline;
  doc["per_fold"] = ordered_json::array();
  for (const auto& f : report.per_fold) {
    ordered_json row;
    row["accuracy"] = f.accuracy;
    row["majority_baseline"] = f.majority_baseline;
    row["train_attempts"] = f.train_attempts;
    row["test_attempts"] = f.test_attempts;
    row["test_students"] = f.test_students;
    doc["per_fold"].push_back(row);
  }
  return doc.dump(2) + "\n";
}

std::string CohortReportsToJson(const std::vector<CohortReport>& reports) {
  ordered_json doc = Header("cohort_report");
  doc["policies"] = ordered_json::array();
  for (const auto& r : reports) {
    ordered_json p;
    p["policy"] = r.policy;
    p["runs"] = r.runs;
    p["master_seed"] = r.master_seed;
    p["mean"] = MetricsJson(r.mean);
    p["max_abs_deviation"] = MetricsJson(r.max_abs_deviation);
    p["per_run"] = ordered_json::array();
    for (const auto& m : r.per_run) p["per_run"].push_back(MetricsJson(m));
    doc["policies"].push_back(p);
  }
  return doc.dump(2) + "\n";
}

std::vector<CohortReport> CohortReportsFromJson(std::string_view text) {
  const json doc = ParseDocument(text, "cohort_report");
  return Guard("cohort_report", [&] {
    std::vector<CohortReport> out;
    for (const auto& p : doc.at("policies")) {
      CohortReport r;
      r.policy = p.at("policy").get<std::string>();
      r.runs = p.at("runs").get<int>();
      r.master_seed = p.at("master_seed").get<std::uint64_t>();
      r.mean = MetricsFrom(p.at("mean"));
      r.max_abs_deviation = MetricsFrom(p.at("max_abs_deviation"));
      for (const auto& m : p.at("per_run")) r.per_run.push_back(MetricsFrom(m));
      if (static_cast<int>(r.per_run.size()) != r.runs) {
        throw SerializationError("cohort_report: per_run length differs from runs");
      }
      out.push_back(std::move(r));
    }
    return out;
  });
}

std::string CohortReportsToCsv(const std::vector<CohortReport>& reports) {
  std::string out(kReportCsvHeader);
  out += '\n';
  for (const auto& r : reports) {
    for (std::size_t run = 0; run < r.per_run.size(); ++run) {
      const RunMetrics& m = r.per_run[run];
      out += r.policy;
      out += ',';
      out += std::to_string(run);
      for (double v : {m.success_rate, m.skip_rate, m.fail_rate, m.mcq_frequency}) {
        out += ',';
        AppendNumber(out, v);
      }
      out += '\n';
    }
  }
  return out;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SerializationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const std::filesystem::path& path, std::string_view text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SerializationError("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw SerializationError("write failed for " + path.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace curriculum
