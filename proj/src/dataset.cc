#include "curriculum/dataset.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace curriculum {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct LineContext {
  std::string file;
  int line = 0;

  [[noreturn]] void Fail(const std::string& message) const {
    throw DataError(message, file, line);
  }
};

const json& Field(const json& record, const char* name, const LineContext& at) {
  auto it = record.find(name);
  if (it == record.end()) at.Fail(std::string("missing field '") + name + "'");
  return *it;
}

std::string StringField(const json& record, const char* name,
                        const LineContext& at) {
  const json& v = Field(record, name, at);
  if (!v.is_string()) at.Fail(std::string("field '") + name + "': expected string");
  std::string s = v.get<std::string>();
  if (s.empty()) at.Fail(std::string("field '") + name + "': must not be empty");
  return s;
}

bool BoolField(const json& record, const char* name, const LineContext& at) {
  const json& v = Field(record, name, at);
  if (!v.is_boolean()) at.Fail(std::string("field '") + name + "': expected boolean");
  return v.get<bool>();
}

std::int64_t IntField(const json& record, const char* name,
                      const LineContext& at) {
  const json& v = Field(record, name, at);
  if (!v.is_number_integer()) {
    at.Fail(std::string("field '") + name + "': expected integer");
  }
  return v.get<std::int64_t>();
}

// Calls fn(record, line_context) for each non-blank line.
template <typename Fn>
void ForEachRecord(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file", path.string());
  LineContext at{path.string(), 0};
  std::string line;
  while (std::getline(in, line)) {
    ++at.line;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      at.Fail(std::string("malformed JSON: ") + e.what());
    }
    if (!record.is_object()) at.Fail("expected a JSON object");
    fn(record, at);
  }
  if (in.bad()) throw DataError("read error", path.string());
}

void WriteLines(const std::filesystem::path& path,
                const std::vector<ordered_json>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open file for writing", path.string());
  for (const auto& r : records) out << r.dump() << '\n';
  if (!out) throw DataError("write error", path.string());
}

}  // namespace

void Dataset::Validate() const {
  for (const auto& [id, ex] : catalog) {
    if (id != ex.exercise_id) {
      throw DataError("catalog key '" + id + "' does not match exercise_id '" +
                      ex.exercise_id + "'");
    }
    auto unit = units.find(ex.unit_id);
    if (unit == units.end()) {
      throw DataError("exercise '" + id + "' references unknown unit '" +
                      ex.unit_id + "'");
    }
    const auto& ids = unit->second.exercise_ids;
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
      throw DataError("exercise '" + id + "' is not listed by unit '" +
                      ex.unit_id + "'");
    }
  }
  for (const auto& [id, unit] : units) {
    if (id != unit.unit_id) {
      throw DataError("unit key '" + id + "' does not match unit_id '" +
                      unit.unit_id + "'");
    }
    if (unit.exercise_ids.empty()) {
      throw DataError("unit '" + id + "' has no exercises");
    }
    std::unordered_set<std::string> seen;
    for (const auto& e : unit.exercise_ids) {
      if (!seen.insert(e).second) {
        throw DataError("unit '" + id + "' lists exercise '" + e + "' twice");
      }
      auto ex = catalog.find(e);
      if (ex == catalog.end()) {
        throw DataError("unit '" + id + "' lists unknown exercise '" + e + "'");
      }
      if (ex->second.unit_id != id) {
        throw DataError("unit '" + id + "' lists exercise '" + e +
                        "' which belongs to unit '" + ex->second.unit_id + "'");
      }
    }
  }
  std::set<std::pair<std::string, std::string>> pairs;
  std::set<std::pair<std::string, std::int64_t>> seqs;
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    const auto& a = attempts[i];
    const std::string where = "attempt #" + std::to_string(i) + ": ";
    auto ex = catalog.find(a.exercise_id);
    if (ex == catalog.end()) {
      throw DataError(where + "unknown exercise '" + a.exercise_id + "'");
    }
    if (ex->second.unit_id != a.unit_id) {
      throw DataError(where + "exercise '" + a.exercise_id +
                      "' belongs to unit '" + ex->second.unit_id + "', not '" +
                      a.unit_id + "'");
    }
    if (!pairs.emplace(a.student_id, a.exercise_id).second) {
      throw DataError(where + "duplicate attempt for student '" + a.student_id +
                      "' on exercise '" + a.exercise_id + "'");
    }
    if (!seqs.emplace(a.student_id, a.seq).second) {
      throw DataError(where + "duplicate seq " + std::to_string(a.seq) +
                      " for student '" + a.student_id + "'");
    }
  }
}

Dataset LoadDataset(const std::filesystem::path& attempts_path,
                    const std::filesystem::path& catalog_path,
                    const std::filesystem::path& units_path) {
  Dataset ds;

  ForEachRecord(catalog_path, [&](const json& r, const LineContext& at) {
    Exercise e;
    e.exercise_id = StringField(r, "exercise_id", at);
    e.unit_id = StringField(r, "unit_id", at);
    e.solution_form = StringField(r, "solution_form", at);
    e.application_context = StringField(r, "application_context", at);
    if (ds.catalog.contains(e.exercise_id)) {
      at.Fail("duplicate exercise_id '" + e.exercise_id + "'");
    }
    ds.catalog.emplace(e.exercise_id, std::move(e));
  });

  ForEachRecord(units_path, [&](const json& r, const LineContext& at) {
    LearningUnit u;
    u.unit_id = StringField(r, "unit_id", at);
    const json& ids = Field(r, "exercise_ids", at);
    if (!ids.is_array()) at.Fail("field 'exercise_ids': expected array");
    for (const auto& id : ids) {
      if (!id.is_string()) at.Fail("field 'exercise_ids': expected strings");
      u.exercise_ids.push_back(id.get<std::string>());
    }
    u.has_video = BoolField(r, "has_video", at);
    if (u.exercise_ids.empty()) at.Fail("field 'exercise_ids': must not be empty");
    std::unordered_set<std::string> seen;
    for (const auto& id : u.exercise_ids) {
      if (!seen.insert(id).second) {
        at.Fail("field 'exercise_ids': duplicate exercise '" + id + "'");
      }
      auto ex = ds.catalog.find(id);
      if (ex == ds.catalog.end()) {
        at.Fail("field 'exercise_ids': unknown exercise '" + id + "'");
      }
      if (ex->second.unit_id != u.unit_id) {
        at.Fail("field 'exercise_ids': exercise '" + id +
                "' belongs to unit '" + ex->second.unit_id + "'");
      }
    }
    if (ds.units.contains(u.unit_id)) {
      at.Fail("duplicate unit_id '" + u.unit_id + "'");
    }
    ds.units.emplace(u.unit_id, std::move(u));
  });

  std::set<std::pair<std::string, std::string>> pairs;
  std::set<std::pair<std::string, std::int64_t>> seqs;
  ForEachRecord(attempts_path, [&](const json& r, const LineContext& at) {
    AttemptRecord a;
    a.student_id = StringField(r, "student_id", at);
    a.exercise_id = StringField(r, "exercise_id", at);
    a.unit_id = StringField(r, "unit_id", at);
    a.seq = IntField(r, "seq", at);
    try {
      a.format = ParseFormat(StringField(r, "format", at));
    } catch (const std::invalid_argument& e) {
      at.Fail(std::string("field 'format': ") + e.what());
    }
    try {
      a.outcome = ParseOutcome(StringField(r, "outcome", at));
    } catch (const std::invalid_argument& e) {
      at.Fail(std::string("field 'outcome': ") + e.what());
    }
    a.watched_video = BoolField(r, "watched_video", at);
    if (r.contains("cohort")) a.cohort = StringField(r, "cohort", at);

    auto ex = ds.catalog.find(a.exercise_id);
    if (ex == ds.catalog.end()) {
      at.Fail("field 'exercise_id': unknown exercise '" + a.exercise_id + "'");
    }
    if (ex->second.unit_id != a.unit_id) {
      at.Fail("field 'unit_id': exercise '" + a.exercise_id +
              "' belongs to unit '" + ex->second.unit_id + "'");
    }
    if (!pairs.emplace(a.student_id, a.exercise_id).second) {
      at.Fail("duplicate attempt for student '" + a.student_id +
              "' on exercise '" + a.exercise_id + "'");
    }
    if (!seqs.emplace(a.student_id, a.seq).second) {
      at.Fail("field 'seq': duplicate seq " + std::to_string(a.seq) +
              " for student '" + a.student_id + "'");
    }
    ds.attempts.push_back(std::move(a));
  });

  // Catalog entries whose unit never appeared.
  for (const auto& [id, ex] : ds.catalog) {
    auto unit = ds.units.find(ex.unit_id);
    if (unit == ds.units.end()) {
      throw DataError("exercise '" + id + "' references unknown unit '" +
                          ex.unit_id + "'",
                      catalog_path.string());
    }
    const auto& ids = unit->second.exercise_ids;
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
      throw DataError("exercise '" + id + "' is not listed by unit '" +
                          ex.unit_id + "'",
                      catalog_path.string());
    }
  }
  return ds;
}

Dataset LoadDatasetDir(const std::filesystem::path& dir) {
  return LoadDataset(dir / kAttemptsFile, dir / kCatalogFile, dir / kUnitsFile);
}

void SaveDataset(const Dataset& dataset,
                 const std::filesystem::path& attempts_path,
                 const std::filesystem::path& catalog_path,
                 const std::filesystem::path& units_path) {
  std::vector<ordered_json> rows;
  rows.reserve(dataset.attempts.size());
  for (const auto& a : dataset.attempts) {
    ordered_json r;
    r["student_id"] = a.student_id;
    r["exercise_id"] = a.exercise_id;
    r["unit_id"] = a.unit_id;
    r["seq"] = a.seq;
    r["format"] = ToString(a.format);
    r["outcome"] = ToString(a.outcome);
    r["watched_video"] = a.watched_video;
    if (!a.cohort.empty()) r["cohort"] = a.cohort;
    rows.push_back(std::move(r));
  }
  WriteLines(attempts_path, rows);

  rows.clear();
  for (const auto& [id, e] : dataset.catalog) {
    ordered_json r;
    r["exercise_id"] = e.exercise_id;
    r["unit_id"] = e.unit_id;
    r["solution_form"] = e.solution_form;
    r["application_context"] = e.application_context;
    rows.push_back(std::move(r));
  }
  WriteLines(catalog_path, rows);

  rows.clear();
  for (const auto& [id, u] : dataset.units) {
    ordered_json r;
    r["unit_id"] = u.unit_id;
    r["exercise_ids"] = u.exercise_ids;
    r["has_video"] = u.has_video;
    rows.push_back(std::move(r));
  }
  WriteLines(units_path, rows);
}

void SaveDatasetDir(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  SaveDataset(dataset, dir / kAttemptsFile, dir / kCatalogFile, dir / kUnitsFile);
}

std::map<std::string, std::vector<AttemptRecord>> GroupByStudent(
    const std::vector<AttemptRecord>& attempts) {
  std::map<std::string, std::vector<AttemptRecord>> out;
  for (const auto& a : attempts) out[a.student_id].push_back(a);
  for (auto& [id, list] : out) {
    std::sort(list.begin(), list.end(),
              [](const AttemptRecord& x, const AttemptRecord& y) {
                return x.seq < y.seq;
              });
  }
  return out;
}

}  // namespace curriculum
