#include "agesig/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "agesig/textio.hpp"

namespace agesig {

Icd10Category normalize_code(std::string_view raw) {
  std::string_view s = trim(raw);
  if (s.empty()) throw CodeFormatError(std::string(raw));
  if (auto dot = s.find('.'); dot != std::string_view::npos) s = s.substr(0, dot);
  std::string up;
  up.reserve(s.size());
  for (char c : s) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return Icd10Category(up);
}

namespace {

struct ColumnIndices {
  std::size_t patient = 0;
  std::size_t code = 0;
  std::size_t age = 0;        // valid when !derives_age
  std::size_t birthdate = 0;  // valid when derives_age
  std::ptrdiff_t visit_date = -1;  // -1 when absent
};

ColumnIndices resolve_columns(std::string_view header, const ParseSchema& schema) {
  auto names = split_fields(header, schema.delimiter);
  auto find = [&](const std::string& want) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (trim(names[i]) == want) return static_cast<std::ptrdiff_t>(i);
    }
    return -1;
  };
  auto require = [&](const std::string& want, const char* role) -> std::size_t {
    auto idx = find(want);
    if (idx < 0) {
      throw SchemaError(std::string("column \"") + want + "\" (" + role +
                        ") not found in header");
    }
    return static_cast<std::size_t>(idx);
  };

  ColumnIndices cols;
  cols.patient = require(schema.patient_column, "patient");
  cols.code = require(schema.code_column, "code");
  if (schema.derives_age()) {
    cols.birthdate = require(schema.birthdate_column, "birthdate");
    cols.visit_date = static_cast<std::ptrdiff_t>(
        require(schema.visit_date_column, "visit date"));
  } else {
    cols.age = require(schema.age_column, "age");
    cols.visit_date = find(schema.visit_date_column);  // optional
  }
  return cols;
}

// Completed years between birth and visit.
int derived_age(const Date& birth, const Date& visit) {
  int age = visit.year - birth.year;
  if (visit.month < birth.month ||
      (visit.month == birth.month && visit.day < birth.day)) {
    --age;
  }
  return age;
}

struct RawFields {
  std::string patient;
  std::string code;
  std::string age;
  std::string birthdate;
  std::string visit_date;
  bool has_visit_date = false;
};

// Shared per-row validation; returns either a record or an error reason.
bool make_record(const RawFields& f, const ParseSchema& schema,
                 VisitRecord& out, std::string& reason) {
  std::string patient(trim(f.patient));
  if (patient.empty()) {
    reason = "empty patient id";
    return false;
  }

  std::optional<Date> visit;
  if (f.has_visit_date) {
    std::string_view dv = trim(f.visit_date);
    if (!dv.empty()) {
      visit = Date::parse(dv);
      if (!visit) {
        reason = "bad visit date";
        return false;
      }
    }
  }

  int age = 0;
  if (schema.derives_age()) {
    auto birth = Date::parse(f.birthdate);
    if (!birth) {
      reason = "bad birthdate";
      return false;
    }
    if (!visit) {
      reason = "bad visit date";
      return false;
    }
    age = derived_age(*birth, *visit);
  } else if (!parse_int(f.age, age)) {
    reason = "bad age";
    return false;
  }
  if (age < 0) {
    reason = "negative age";
    return false;
  }

  try {
    out = VisitRecord{std::move(patient), age, normalize_code(f.code), visit};
  } catch (const CodeFormatError& e) {
    reason = "bad code: " + e.offending();
    return false;
  }
  return true;
}

void parse_delimited(std::istream& input, const ParseSchema& schema,
                     ParseResult& result) {
  std::string line;
  if (!std::getline(input, line)) {
    throw IoError("input is empty: header row required");
  }
  while (!line.empty() && line.back() == '\r') line.pop_back();
  ColumnIndices cols = resolve_columns(line, schema);
  std::size_t max_col = std::max({cols.patient, cols.code,
                                  schema.derives_age() ? cols.birthdate : cols.age,
                                  cols.visit_date < 0 ? std::size_t{0}
                                                      : static_cast<std::size_t>(cols.visit_date)});

  std::size_t line_no = 1;
  while (std::getline(input, line)) {
    ++line_no;
    while (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++result.rows_total;

    auto fields = split_fields(line, schema.delimiter);
    if (fields.size() <= max_col) {
      result.errors.push_back({line_no, "too few fields"});
      continue;
    }
    RawFields raw;
    raw.patient = std::string(fields[cols.patient]);
    raw.code = std::string(fields[cols.code]);
    if (schema.derives_age()) {
      raw.birthdate = std::string(fields[cols.birthdate]);
    } else {
      raw.age = std::string(fields[cols.age]);
    }
    if (cols.visit_date >= 0) {
      raw.visit_date = std::string(fields[static_cast<std::size_t>(cols.visit_date)]);
      raw.has_visit_date = true;
    }

    VisitRecord rec{std::string(), 0, Icd10Category("A00"), std::nullopt};
    std::string reason;
    if (make_record(raw, schema, rec, reason)) {
      result.records.push_back(std::move(rec));
    } else {
      result.errors.push_back({line_no, std::move(reason)});
    }
  }
}

std::string json_field_as_string(const nlohmann::json& obj, const std::string& key,
                                 bool& ok) {
  ok = true;
  auto it = obj.find(key);
  if (it == obj.end()) {
    ok = false;
    return {};
  }
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  ok = false;
  return {};
}

void parse_jsonl(std::istream& input, const ParseSchema& schema,
                 ParseResult& result) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    while (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++result.rows_total;

    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      result.errors.push_back({line_no, "bad json"});
      continue;
    }

    RawFields raw;
    bool ok = false;
    raw.patient = json_field_as_string(obj, schema.patient_column, ok);
    if (!ok) {
      result.errors.push_back({line_no, "missing field " + schema.patient_column});
      continue;
    }
    raw.code = json_field_as_string(obj, schema.code_column, ok);
    if (!ok) {
      result.errors.push_back({line_no, "missing field " + schema.code_column});
      continue;
    }
    if (schema.derives_age()) {
      raw.birthdate = json_field_as_string(obj, schema.birthdate_column, ok);
      if (!ok) {
        result.errors.push_back({line_no, "missing field " + schema.birthdate_column});
        continue;
      }
    } else {
      raw.age = json_field_as_string(obj, schema.age_column, ok);
      if (!ok) {
        result.errors.push_back({line_no, "missing field " + schema.age_column});
        continue;
      }
    }
    if (auto it = obj.find(schema.visit_date_column);
        it != obj.end() && it->is_string()) {
      raw.visit_date = it->get<std::string>();
      raw.has_visit_date = true;
    } else if (schema.derives_age()) {
      result.errors.push_back({line_no, "missing field " + schema.visit_date_column});
      continue;
    }

    VisitRecord rec{std::string(), 0, Icd10Category("A00"), std::nullopt};
    std::string reason;
    if (make_record(raw, schema, rec, reason)) {
      result.records.push_back(std::move(rec));
    } else {
      result.errors.push_back({line_no, std::move(reason)});
    }
  }
}

}  // namespace

ParseResult parse_records(std::istream& input, const ParseSchema& schema) {
  if (!input.good()) throw IoError("cannot read input stream");
  if (schema.derives_age() && schema.birthdate_column.empty()) {
    throw SchemaError("schema needs an age column or a birthdate column");
  }

  ParseResult result;
  if (schema.format == InputFormat::kDelimited) {
    parse_delimited(input, schema, result);
  } else {
    parse_jsonl(input, schema, result);
  }
  if (input.bad()) throw IoError("stream failed while reading input");
  return result;
}

CohortBuild build_cohorts(std::span<const VisitRecord> records, int min_patients) {
  if (min_patients < 1) throw std::invalid_argument("min_patients must be >= 1");

  // Earliest-visit age == minimum age per (code, patient); min is commutative
  // so chunked merges agree with sequential processing.
  std::map<Icd10Category, std::unordered_map<std::string, int>> acc;
  for (const auto& rec : records) {
    auto& per_patient = acc[rec.code];
    auto [it, inserted] = per_patient.try_emplace(rec.patient_id, rec.age);
    if (!inserted && rec.age < it->second) it->second = rec.age;
  }

  CohortBuild out;
  for (auto& [code, per_patient] : acc) {
    std::vector<CohortMember> members;
    members.reserve(per_patient.size());
    for (auto& [patient, age] : per_patient) members.push_back({patient, age});
    Cohort cohort(code, std::move(members));
    if (cohort.patient_count() < min_patients) {
      out.dropped.push_back({code, cohort.patient_count(), "below_min_patients"});
    } else {
      out.cohorts.emplace(code, std::move(cohort));
    }
  }
  return out;
}

void write_drop_report(std::ostream& out, std::span<const DroppedCohort> dropped) {
  out << "code,patient_count,reason\n";
  for (const auto& d : dropped) {
    out << d.code.str() << ',' << d.patient_count << ',' << d.reason << '\n';
  }
}

}  // namespace agesig
